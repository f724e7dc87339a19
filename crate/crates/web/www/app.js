import init, { local_law, erdos_kac, mean_value_curve, registry } from "./pkg/mvlab_web.js";

const $ = (id) => document.getElementById(id);

// Minimal line/bar plotter. series: [{xs, ys, color, bars?}]
function plot(canvas, series, { logX = false } = {}) {
  const dpr = window.devicePixelRatio || 1;
  const w = canvas.clientWidth, h = canvas.clientHeight;
  canvas.width = w * dpr;
  canvas.height = h * dpr;
  const g = canvas.getContext("2d");
  g.scale(dpr, dpr);
  g.clearRect(0, 0, w, h);
  const tx = (v) => (logX ? Math.log10(v) : v);
  const all = series.flatMap((s) => s.xs.map((x, i) => [tx(x), s.ys[i]])).filter(([x, y]) => isFinite(x) && isFinite(y));
  let [x0, x1] = [Math.min(...all.map((p) => p[0])), Math.max(...all.map((p) => p[0]))];
  let [y0, y1] = [Math.min(0, ...all.map((p) => p[1])), Math.max(...all.map((p) => p[1]))];
  if (x1 === x0) x1 = x0 + 1;
  if (y1 === y0) y1 = y0 + 1;
  const pad = 40;
  const X = (x) => pad + ((tx(x) - x0) / (x1 - x0)) * (w - 2 * pad);
  const Y = (y) => h - pad - ((y - y0) / (y1 - y0)) * (h - 2 * pad);

  g.strokeStyle = "#999";
  g.beginPath();
  g.moveTo(pad, Y(0));
  g.lineTo(w - pad, Y(0));
  g.moveTo(pad, pad);
  g.lineTo(pad, h - pad);
  g.stroke();
  g.fillStyle = "#555";
  g.font = "11px sans-serif";
  g.fillText(y1.toPrecision(3), 2, pad);
  g.fillText(y0.toPrecision(3), 2, h - pad);
  g.fillText((logX ? 10 ** x0 : x0).toPrecision(3), pad, h - pad + 14);
  g.fillText((logX ? 10 ** x1 : x1).toPrecision(3), w - pad - 30, h - pad + 14);

  for (const s of series) {
    g.strokeStyle = g.fillStyle = s.color;
    if (s.bars) {
      const bw = Math.max(2, ((w - 2 * pad) / s.xs.length) * 0.6);
      s.xs.forEach((x, i) => g.fillRect(X(x) - bw / 2, Y(s.ys[i]), bw, Y(0) - Y(s.ys[i])));
    } else {
      g.lineWidth = 1.5;
      g.beginPath();
      s.xs.forEach((x, i) => (i ? g.lineTo(X(x), Y(s.ys[i])) : g.moveTo(X(x), Y(s.ys[i]))));
      g.stroke();
    }
  }
}

function guarded(outId, fn) {
  return () => {
    const out = $(outId);
    out.classList.remove("err");
    out.textContent = "running…";
    // Let the browser paint before the (blocking) computation.
    setTimeout(() => {
      try {
        const t = performance.now();
        const text = fn();
        out.textContent = `${text}\n(${((performance.now() - t) / 1000).toFixed(2)} s)`;
      } catch (e) {
        out.classList.add("err");
        out.textContent = String(e.message || e);
      }
    }, 10);
  };
}

function runLocalLaw() {
  const r = JSON.parse(local_law(+$("ll-x").value, +$("ll-kappa").value));
  const ms = r.counts.map((_, m) => m).slice(0, Math.ceil(3 * r.e_of_x) + 4);
  plot($("ll-plot"), [
    { xs: ms, ys: ms.map((m) => r.counts[m]), color: "#9bb", bars: true },
    { xs: ms, ys: ms.map((m) => r.crude[m]), color: "#c33" },
    { xs: ms, ys: ms.map((m) => r.refined[m]), color: "#33c" },
  ]);
  const rows = r.window.map((m) => `m=${m}  N_m=${r.counts[m]}  crude ${(r.counts[m] / r.crude[m]).toFixed(3)}  refined ${(r.counts[m] / r.refined[m]).toFixed(3)}`);
  return `E(x) = ${r.e_of_x.toFixed(4)}   bars: N_m, red: crude Poisson, blue: refined\nratios N_m / prediction in the window:\n${rows.join("\n")}`;
}

function runErdosKac() {
  const r = JSON.parse(erdos_kac(+$("ek-x").value, $("ek-big").checked));
  plot($("ek-plot"), [
    { xs: r.z, ys: r.empirical, color: "#c33" },
    { xs: r.z, ys: r.normal, color: "#33c" },
  ]);
  return `centre ${r.center.toFixed(4)}, scale ${r.scale.toFixed(4)}   red: empirical, blue: normal\nKolmogorov distance ${r.kolmogorov_distance.toFixed(4)}`;
}

function runCurve() {
  const r = JSON.parse(mean_value_curve($("mv-rule").value.trim(), +$("mv-x").value, 400));
  const series = [{ xs: r.x, ys: r.re, color: "#c33" }];
  if (r.im.some((v) => v !== 0)) series.push({ xs: r.x, ys: r.im, color: "#33c" });
  plot($("mv-plot"), series, { logX: true });
  const n = r.x.length - 1;
  return `${r.rule}: M(x)/x = ${r.re[n].toPrecision(6)}${r.im[n] ? ` ${r.im[n] >= 0 ? "+" : "-"} ${Math.abs(r.im[n]).toPrecision(6)}i` : ""} at x = ${r.x[n]}`;
}

// Example values used to turn registry parameter names into runnable specs.
const EXAMPLE = { rho: "0.5", z: "0.5", c: "-1", r: "0.5", tau: "1", seed: "1", E: "mod4_1" };

await init();
for (const e of JSON.parse(registry())) {
  if (e.kind === "multiplicative") {
    const o = document.createElement("option");
    const args = e.params ? e.params.split(", ").map((k) => `${k}=${EXAMPLE[k] ?? "1"}`) : [];
    o.value = args.length ? `${e.name}{${args.join(", ")}}` : e.name;
    o.label = e.description;
    $("mv-rules").append(o);
  }
}
$("ll-go").onclick = guarded("ll-out", runLocalLaw);
$("ek-go").onclick = guarded("ek-out", runErdosKac);
$("mv-go").onclick = guarded("mv-out", runCurve);
