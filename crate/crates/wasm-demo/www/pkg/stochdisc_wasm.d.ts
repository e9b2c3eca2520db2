/* tslint:disable */
/* eslint-disable */

export class Curve {
    private constructor();
    free(): void;
    [Symbol.dispose](): void;
    readonly lnD: Float64Array;
    /**
     * Empty unless paths were requested.
     */
    readonly mcLnD: Float64Array;
    readonly mcRelErr: Float64Array;
    readonly rInf: number;
    readonly regime: string;
    readonly times: Float64Array;
}

export class PhasePoint {
    private constructor();
    free(): void;
    [Symbol.dispose](): void;
    belowIdentity: boolean;
    pBelowRInf: number;
    pNegative: number;
    /**
     * `r∞ / α = μ - κ²/2`.
     */
    rInfOverAlpha: number;
    readonly regime: string;
}

/**
 * `ln D(t)` on `points` evenly spaced times in `[0, t_max]`; with
 * `paths >= 2` a Monte Carlo estimate is added.
 */
export function discountCurve(m: number, alpha: number, k: number, r0: number, t_max: number, points: number, paths: number, seed: number): Curve;

export function negprobSurface(kappa_max: number, mu_max: number, steps: number): Float64Array;

export function phasePoint(mu: number, kappa: number): PhasePoint;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly __wbg_curve_free: (a: number, b: number) => void;
    readonly __wbg_get_phasepoint_belowIdentity: (a: number) => number;
    readonly __wbg_get_phasepoint_pBelowRInf: (a: number) => number;
    readonly __wbg_get_phasepoint_pNegative: (a: number) => number;
    readonly __wbg_get_phasepoint_rInfOverAlpha: (a: number) => number;
    readonly __wbg_phasepoint_free: (a: number, b: number) => void;
    readonly __wbg_set_phasepoint_belowIdentity: (a: number, b: number) => void;
    readonly __wbg_set_phasepoint_pBelowRInf: (a: number, b: number) => void;
    readonly __wbg_set_phasepoint_pNegative: (a: number, b: number) => void;
    readonly __wbg_set_phasepoint_rInfOverAlpha: (a: number, b: number) => void;
    readonly curve_lnD: (a: number) => [number, number];
    readonly curve_mcLnD: (a: number) => [number, number];
    readonly curve_mcRelErr: (a: number) => [number, number];
    readonly curve_rInf: (a: number) => number;
    readonly curve_regime: (a: number) => [number, number];
    readonly curve_times: (a: number) => [number, number];
    readonly discountCurve: (a: number, b: number, c: number, d: number, e: number, f: number, g: number, h: number) => [number, number, number];
    readonly negprobSurface: (a: number, b: number, c: number) => [number, number, number, number];
    readonly phasePoint: (a: number, b: number) => [number, number, number];
    readonly phasepoint_regime: (a: number) => [number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __wbindgen_free: (a: number, b: number, c: number) => void;
    readonly __externref_table_dealloc: (a: number) => void;
    readonly __wbindgen_start: () => void;
}

export type SyncInitInput = BufferSource | WebAssembly.Module;

/**
 * Instantiates the given `module`, which can either be bytes or
 * a precompiled `WebAssembly.Module`.
 *
 * @param {{ module: SyncInitInput }} module - Passing `SyncInitInput` directly is deprecated.
 *
 * @returns {InitOutput}
 */
export function initSync(module: { module: SyncInitInput } | SyncInitInput): InitOutput;

/**
 * If `module_or_path` is {RequestInfo} or {URL}, makes a request and
 * for everything else, calls `WebAssembly.instantiate` directly.
 *
 * @param {{ module_or_path: InitInput | Promise<InitInput> }} module_or_path - Passing `InitInput` directly is deprecated.
 *
 * @returns {Promise<InitOutput>}
 */
export default function __wbg_init (module_or_path?: { module_or_path: InitInput | Promise<InitInput> } | InitInput | Promise<InitInput>): Promise<InitOutput>;
