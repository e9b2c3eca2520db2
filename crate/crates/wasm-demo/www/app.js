import init, { discountCurve, phasePoint, negprobSurface } from "./pkg/stochdisc_wasm.js";

// Table 2 (mu, kappa) positions
const COUNTRIES = [
  ["ITA", -0.01, 0.68], ["CHL", -0.17, 0.98], ["CAN", 0.11, 0.18], ["DEU", -0.55, 3.9],
  ["ESP", 0.96, 2.0], ["ARG", 0.06, 0.26], ["NLD", 0.23, 0.34], ["JPN", -0.09, 0.81],
  ["AUS", 0.14, 0.27], ["DNK", 0.14, 0.21], ["ZAF", 0.08, 0.26], ["SWE", 0.09, 0.2],
  ["GBR", 0.18, 0.23], ["USA", 0.14, 0.23],
];

const $ = (id) => document.getElementById(id);
const num = (id) => parseFloat($(id).value);

function fail(out, e) {
  out.classList.add("err");
  out.textContent = String(e.message ?? e);
}

function axes(ctx, w, h, pad, xr, yr, xlabel, ylabel) {
  const sx = (x) => pad + ((x - xr[0]) / (xr[1] - xr[0])) * (w - 2 * pad);
  const sy = (y) => h - pad - ((y - yr[0]) / (yr[1] - yr[0])) * (h - 2 * pad);
  ctx.clearRect(0, 0, w, h);
  ctx.strokeStyle = "#888";
  ctx.strokeRect(pad, pad, w - 2 * pad, h - 2 * pad);
  ctx.fillStyle = "#444";
  ctx.font = "12px sans-serif";
  ctx.fillText(xr[0].toPrecision(3), pad, h - pad + 14);
  ctx.fillText(xr[1].toPrecision(3), w - pad - 30, h - pad + 14);
  ctx.fillText(yr[0].toPrecision(3), 2, h - pad);
  ctx.fillText(yr[1].toPrecision(3), 2, pad + 10);
  ctx.fillText(xlabel, w / 2 - 20, h - 6);
  ctx.fillText(ylabel, pad + 4, pad - 6);
  return [sx, sy];
}

function drawCurve() {
  const out = $("c-out");
  out.classList.remove("err");
  let c;
  try {
    c = discountCurve(num("c-m"), num("c-alpha"), num("c-k"), num("c-r0"), num("c-tmax"), 201, num("c-paths") | 0, 42);
  } catch (e) {
    return fail(out, e);
  }
  const t = c.times, y = c.lnD, mc = c.mcLnD;
  const all = Array.from(y).concat(Array.from(mc)).filter(Number.isFinite);
  let lo = Math.min(...all), hi = Math.max(...all);
  if (hi - lo < 1e-9) { lo -= 1; hi += 1; }
  const canvas = $("c-canvas"), ctx = canvas.getContext("2d");
  const [sx, sy] = axes(ctx, canvas.width, canvas.height, 40, [0, t[t.length - 1]], [lo, hi], "t (years)", "ln D(t)");
  ctx.strokeStyle = "#1f5fbf";
  ctx.lineWidth = 2;
  ctx.beginPath();
  t.forEach((ti, i) => (i ? ctx.lineTo(sx(ti), sy(y[i])) : ctx.moveTo(sx(ti), sy(y[i]))));
  ctx.stroke();
  if (mc.length) {
    ctx.fillStyle = "#d0542c";
    mc.forEach((v, i) => { if (i % 5 === 0) ctx.fillRect(sx(t[i]) - 2, sy(v) - 2, 4, 4); });
  }
  const n = t.length - 1;
  const tail = -(y[n] - y[n - 1]) / (t[n] - t[n - 1]);
  out.textContent =
    `r∞ = ${(100 * c.rInf).toFixed(3)}%/yr   regime: ${c.regime}\n` +
    `ln D(${t[n]}) = ${y[n].toPrecision(6)}   tail rate = ${(100 * tail).toFixed(3)}%/yr` +
    (mc.length ? `\nMonte Carlo (orange): ln D = ${mc[n].toPrecision(6)} ± ${c.mcRelErr[n].toPrecision(2)}` : "");
  c.free();
}

const PHASE = { k: [0, 4], m: [-1, 2.5], pad: 36 };

function drawPhase(probe) {
  const canvas = $("p-canvas"), ctx = canvas.getContext("2d");
  const [sx, sy] = axes(ctx, canvas.width, canvas.height, PHASE.pad, PHASE.k, PHASE.m, "κ", "μ");
  const line = (f, color, dash) => {
    ctx.strokeStyle = color;
    ctx.setLineDash(dash);
    ctx.beginPath();
    for (let i = 0; i <= 200; i++) {
      const k = PHASE.k[1] * i / 200;
      i ? ctx.lineTo(sx(k), sy(f(k))) : ctx.moveTo(sx(k), sy(f(k)));
    }
    ctx.stroke();
    ctx.setLineDash([]);
  };
  ctx.save();
  ctx.beginPath();
  ctx.rect(PHASE.pad, PHASE.pad, canvas.width - 2 * PHASE.pad, canvas.height - 2 * PHASE.pad);
  ctx.clip();
  line((k) => (k * k) / 2, "#1f5fbf", []);
  line((k) => k, "#999", [4, 4]);
  ctx.fillStyle = "#222";
  for (const [name, mu, kappa] of COUNTRIES) {
    ctx.beginPath();
    ctx.arc(sx(kappa), sy(mu), 3, 0, 2 * Math.PI);
    ctx.fill();
    ctx.fillText(name, sx(kappa) + 4, sy(mu) - 3);
  }
  if (probe) {
    ctx.strokeStyle = "#d0542c";
    ctx.beginPath();
    ctx.arc(sx(probe[1]), sy(probe[0]), 6, 0, 2 * Math.PI);
    ctx.stroke();
  }
  ctx.restore();
  ctx.fillStyle = "#1f5fbf";
  ctx.fillText("μ = κ²/2", sx(2.0) + 6, sy(2.0));
}

function probePhase(ev) {
  const canvas = $("p-canvas"), r = canvas.getBoundingClientRect();
  const px = ((ev.clientX - r.left) * canvas.width) / r.width;
  const py = ((ev.clientY - r.top) * canvas.height) / r.height;
  const w = canvas.width - 2 * PHASE.pad, h = canvas.height - 2 * PHASE.pad;
  const kappa = PHASE.k[0] + ((px - PHASE.pad) / w) * (PHASE.k[1] - PHASE.k[0]);
  const mu = PHASE.m[1] - ((py - PHASE.pad) / h) * (PHASE.m[1] - PHASE.m[0]);
  const out = $("p-out");
  out.classList.remove("err");
  try {
    const p = phasePoint(mu, Math.max(kappa, 0));
    drawPhase([mu, Math.max(kappa, 0)]);
    out.textContent =
      `κ = ${kappa.toFixed(3)}  μ = ${mu.toFixed(3)}\n` +
      `regime: ${p.regime}\nr∞/α = ${p.rInfOverAlpha.toFixed(4)}\n` +
      `P(r < 0) = ${p.pNegative.toFixed(4)}   P(r < r∞) = ${p.pBelowRInf.toFixed(4)}\n` +
      `below identity: ${p.belowIdentity}`;
    p.free();
  } catch (e) {
    fail(out, e);
  }
}

function colour(p) {
  // 0 -> pale yellow, 0.5 -> dark red
  const s = Math.min(1, Math.max(0, 2 * p));
  return [255 - 120 * s, 245 - 225 * s, 200 - 180 * s];
}

function drawSurface() {
  const out = $("n-out");
  out.classList.remove("err");
  const kmax = num("n-k"), mmax = num("n-m"), steps = num("n-steps") | 0;
  let z;
  try {
    z = negprobSurface(kmax, mmax, steps);
  } catch (e) {
    return fail(out, e);
  }
  const canvas = $("n-canvas"), ctx = canvas.getContext("2d");
  const n = steps + 1, pad = 30, w = canvas.width - 2 * pad, h = canvas.height - 2 * pad;
  axes(ctx, canvas.width, canvas.height, pad, [0, kmax], [0, mmax], "κ", "μ");
  const img = ctx.createImageData(w, h);
  for (let py = 0; py < h; py++) {
    const i = Math.min(n - 1, Math.round(((h - 1 - py) / (h - 1)) * steps));
    for (let px = 0; px < w; px++) {
      const j = Math.min(n - 1, Math.round((px / (w - 1)) * steps));
      const [r, g, b] = colour(z[i * n + j]);
      const o = 4 * (py * w + px);
      img.data.set([r, g, b, 255], o);
    }
  }
  ctx.putImageData(img, pad, pad);
  ctx.strokeStyle = "#fff";
  ctx.setLineDash([4, 4]);
  ctx.beginPath();
  const d = Math.min(kmax, mmax);
  ctx.moveTo(pad, pad + h);
  ctx.lineTo(pad + (d / kmax) * w, pad + h - (d / mmax) * h);
  ctx.stroke();
  ctx.setLineDash([]);
  const diag = phasePoint(1, 1);
  out.textContent = `${n * n} points; on the dashed diagonal μ = κ, P(r < 0) = ${diag.pNegative.toFixed(4)}`;
  diag.free();
}

await init();
$("c-go").onclick = drawCurve;
$("c-preset").onchange = (ev) => {
  if (!ev.target.value) return;
  const [mu, kappa, corr, r0] = ev.target.value.split(",").map(Number);
  const alpha = 1 / corr;
  $("c-alpha").value = alpha.toPrecision(4);
  $("c-m").value = (mu * alpha).toPrecision(4);
  $("c-k").value = (kappa * alpha ** 1.5).toPrecision(4);
  $("c-r0").value = (r0 ?? mu * alpha).toPrecision(4);
  drawCurve();
};
$("p-canvas").onclick = probePhase;
$("n-go").onclick = drawSurface;
drawCurve();
drawPhase();
drawSurface();
