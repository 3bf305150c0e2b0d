import init, { reliability_curve, potential_curve, bound_curves } from "./pkg/relcut_wasm.js";

const BLUE = "#1f77b4";
const ORANGE = "#ff7f0e";

// Splits a flat array into rows of `width` numbers.
function rows(flat, width) {
  const out = [];
  for (let i = 0; i < flat.length; i += width) out.push(Array.from(flat.slice(i, i + width)));
  return out;
}

function plot(canvas, { xs, series, logX = false, logY = false }) {
  const ctx = canvas.getContext("2d");
  const { width, height } = canvas;
  const pad = 50;
  ctx.clearRect(0, 0, width, height);
  const fx = logX ? Math.log10 : (v) => v;
  const fy = logY ? Math.log10 : (v) => v;
  const ys = series.flatMap((s) => s.ys).filter((v) => Number.isFinite(v) && (!logY || v > 0));
  const [x0, x1] = [Math.min(...xs.map(fx)), Math.max(...xs.map(fx))];
  let [y0, y1] = [Math.min(...ys.map(fy)), Math.max(...ys.map(fy))];
  if (y0 === y1) y1 = y0 + 1;
  const px = (v) => pad + ((fx(v) - x0) / (x1 - x0 || 1)) * (width - 2 * pad);
  const py = (v) => height - pad - ((fy(v) - y0) / (y1 - y0)) * (height - 2 * pad);

  ctx.strokeStyle = "#888";
  ctx.strokeRect(pad, pad, width - 2 * pad, height - 2 * pad);
  ctx.fillStyle = "#333";
  ctx.font = "12px sans-serif";
  const label = (v, log) => (log ? `1e${v.toFixed(1)}` : v.toPrecision(3));
  ctx.fillText(label(x0, logX), pad, height - pad + 16);
  ctx.fillText(label(x1, logX), width - pad - 30, height - pad + 16);
  ctx.fillText(label(y0, logY), 4, height - pad);
  ctx.fillText(label(y1, logY), 4, pad + 4);

  for (const s of series) {
    ctx.strokeStyle = ctx.fillStyle = s.color;
    if (s.line) {
      ctx.beginPath();
      let started = false;
      xs.forEach((x, i) => {
        const y = s.ys[i];
        if (!Number.isFinite(y) || (logY && y <= 0)) return;
        started ? ctx.lineTo(px(x), py(y)) : ctx.moveTo(px(x), py(y));
        started = true;
      });
      ctx.stroke();
    } else {
      xs.forEach((x, i) => {
        const y = s.ys[i];
        if (!Number.isFinite(y) || (logY && y <= 0)) return;
        ctx.fillStyle = s.colors ? s.colors[i] : s.color;
        ctx.beginPath();
        ctx.arc(px(x), py(y), 3.5, 0, 2 * Math.PI);
        ctx.fill();
      });
    }
  }
}

function guarded(fn) {
  return () => {
    const err = document.getElementById("error");
    err.textContent = "";
    try {
      fn();
    } catch (e) {
      err.textContent = String(e.message ?? e);
    }
  };
}

const value = (id) => document.getElementById(id).value;

function runReliability() {
  const data = rows(
    reliability_curve(value("rc-graph"), 0.005, 0.4, 16, Number(value("rc-eps")), BigInt(value("rc-seed"))),
    4,
  );
  const xs = data.map((r) => r[0]);
  plot(document.getElementById("rc-plot"), {
    xs,
    logX: true,
    logY: true,
    series: [
      { ys: data.map((r) => r[2]), color: "#444", line: true },
      { ys: data.map((r) => r[1]), colors: data.map((r) => (r[3] === 1 ? BLUE : ORANGE)) },
    ],
  });
}

function runPotential() {
  const data = rows(potential_curve(value("pc-graph"), Number(value("pc-runs")), 7n), 3);
  plot(document.getElementById("pc-plot"), {
    xs: data.map((r) => r[0]),
    series: [
      { ys: data.map((r) => r[2]), color: ORANGE, line: true },
      { ys: data.map((r) => r[1]), color: BLUE },
    ],
  });
}

function runBounds() {
  const beta = Number(value("bc-beta"));
  const delta = Number(value("bc-delta"));
  document.getElementById("bc-label").textContent = `β = ${beta.toFixed(2)}, δ = ${delta.toFixed(2)}`;
  const data = rows(bound_curves(beta, delta, 101), 3);
  plot(document.getElementById("bc-plot"), {
    xs: data.map((r) => r[0]),
    series: [
      { ys: data.map((r) => r[1]), color: BLUE, line: true },
      { ys: data.map((r) => r[2]), color: ORANGE, line: true },
    ],
  });
}

await init();
document.getElementById("rc-run").addEventListener("click", guarded(runReliability));
document.getElementById("pc-run").addEventListener("click", guarded(runPotential));
document.getElementById("bc-beta").addEventListener("input", guarded(runBounds));
document.getElementById("bc-delta").addEventListener("input", guarded(runBounds));
guarded(runBounds)();
