import init, { meshTrajectories, solve1d, mesh2d } from "./pkg/movmesh_web.js";

const $ = (id) => document.getElementById(id);
const num = (id) => Number($(id).value);

function frame(ctx, xmin, xmax, ymin, ymax) {
  const { width: w, height: h } = ctx.canvas;
  const pad = 20;
  ctx.clearRect(0, 0, w, h);
  return {
    x: (v) => pad + ((v - xmin) / (xmax - xmin)) * (w - 2 * pad),
    y: (v) => h - pad - ((v - ymin) / (ymax - ymin)) * (h - 2 * pad),
  };
}

function extent(values) {
  let lo = Infinity, hi = -Infinity;
  for (const v of values) {
    if (Number.isFinite(v)) { lo = Math.min(lo, v); hi = Math.max(hi, v); }
  }
  if (lo === hi) { lo -= 1; hi += 1; }
  return [lo, hi];
}

function drawTrajectories() {
  const steps = 200;
  const j = num("traj-j");
  const data = meshTrajectories($("traj-example").value, num("traj-omega"), j, 1.0, steps);
  const ctx = $("traj-canvas").getContext("2d");
  const [xl, xr] = extent(data);
  // x horizontal, time vertical
  const f = frame(ctx, xl, xr, 0, 1);
  ctx.strokeStyle = "#1f5fa8";
  for (let node = 0; node <= j; node++) {
    ctx.beginPath();
    for (let n = 0; n <= steps; n++) {
      const px = f.x(data[n * (j + 1) + node]);
      const py = f.y(n / steps);
      n === 0 ? ctx.moveTo(px, py) : ctx.lineTo(px, py);
    }
    ctx.stroke();
  }
}

function drawSolve() {
  const r = solve1d($("solve-example").value, 2 * Math.PI, num("solve-m"), num("solve-j"),
    1.0, num("solve-steps"), $("solve-homog").checked);
  const x = r.x, u = r.u, exact = r.exact, energy = r.energy;
  const ctx = $("solve-canvas").getContext("2d");
  const [ylo, yhi] = extent([...u, ...exact]);
  const f = frame(ctx, x[0], x[x.length - 1], ylo, yhi);
  const line = (ys, color) => {
    ctx.strokeStyle = color;
    ctx.beginPath();
    ys.forEach((v, i) => (i === 0 ? ctx.moveTo(f.x(x[i]), f.y(v)) : ctx.lineTo(f.x(x[i]), f.y(v))));
    ctx.stroke();
  };
  if (Number.isFinite(exact[0])) line(exact, "#999");
  line(u, "#c0392b");
  let monotone = true;
  for (let n = 1; n < energy.length; n++) {
    if (energy[n] > energy[n - 1] * (1 + 1e-12)) monotone = false;
  }
  $("solve-out").textContent =
    `max error at t=1: ${Number.isFinite(r.max_error) ? r.max_error.toExponential(3) : "NA"}\n` +
    `energy ${energy[0].toExponential(4)} -> ${energy[energy.length - 1].toExponential(4)}, ` +
    `non-increasing: ${monotone}`;
  r.free();
}

function drawMesh() {
  const j = num("mesh-j");
  const t = num("mesh-t");
  $("mesh-t-val").textContent = t.toFixed(2);
  const p = mesh2d(2 * Math.PI, j, j, t);
  const ctx = $("mesh-canvas").getContext("2d");
  const f = frame(ctx, 0, Math.PI, 0, Math.PI);
  const at = (a, b) => 2 * (b * (j + 1) + a);
  ctx.strokeStyle = "#2c3e50";
  for (let k = 0; k <= j; k++) {
    ctx.beginPath();
    for (let a = 0; a <= j; a++) {
      const i = at(a, k);
      a === 0 ? ctx.moveTo(f.x(p[i]), f.y(p[i + 1])) : ctx.lineTo(f.x(p[i]), f.y(p[i + 1]));
    }
    ctx.stroke();
    ctx.beginPath();
    for (let b = 0; b <= j; b++) {
      const i = at(k, b);
      b === 0 ? ctx.moveTo(f.x(p[i]), f.y(p[i + 1])) : ctx.lineTo(f.x(p[i]), f.y(p[i + 1]));
    }
    ctx.stroke();
  }
}

function guarded(fn) {
  return () => {
    try {
      fn();
      $("status").textContent = "";
    } catch (e) {
      $("status").textContent = `error: ${e.message ?? e}`;
    }
  };
}

await init();
$("traj-go").addEventListener("click", guarded(drawTrajectories));
$("solve-go").addEventListener("click", guarded(drawSolve));
$("mesh-t").addEventListener("input", guarded(drawMesh));
$("mesh-j").addEventListener("change", guarded(drawMesh));
guarded(drawTrajectories)();
guarded(drawMesh)();
