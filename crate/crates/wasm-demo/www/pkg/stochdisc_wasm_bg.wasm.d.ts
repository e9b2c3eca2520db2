/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const __wbg_curve_free: (a: number, b: number) => void;
export const __wbg_get_phasepoint_belowIdentity: (a: number) => number;
export const __wbg_get_phasepoint_pBelowRInf: (a: number) => number;
export const __wbg_get_phasepoint_pNegative: (a: number) => number;
export const __wbg_get_phasepoint_rInfOverAlpha: (a: number) => number;
export const __wbg_phasepoint_free: (a: number, b: number) => void;
export const __wbg_set_phasepoint_belowIdentity: (a: number, b: number) => void;
export const __wbg_set_phasepoint_pBelowRInf: (a: number, b: number) => void;
export const __wbg_set_phasepoint_pNegative: (a: number, b: number) => void;
export const __wbg_set_phasepoint_rInfOverAlpha: (a: number, b: number) => void;
export const curve_lnD: (a: number) => [number, number];
export const curve_mcLnD: (a: number) => [number, number];
export const curve_mcRelErr: (a: number) => [number, number];
export const curve_rInf: (a: number) => number;
export const curve_regime: (a: number) => [number, number];
export const curve_times: (a: number) => [number, number];
export const discountCurve: (a: number, b: number, c: number, d: number, e: number, f: number, g: number, h: number) => [number, number, number];
export const negprobSurface: (a: number, b: number, c: number) => [number, number, number, number];
export const phasePoint: (a: number, b: number) => [number, number, number];
export const phasepoint_regime: (a: number) => [number, number];
export const __wbindgen_externrefs: WebAssembly.Table;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __externref_table_dealloc: (a: number) => void;
export const __wbindgen_start: () => void;
