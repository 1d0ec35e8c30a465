// Vanilla-JS glue: read the controls, call into the wasm module, draw on
// canvases. Build the module first:
//   wasm-pack build crates/demo-web --target web --out-dir www/pkg
import init, { recovery_demo, sweep_demo, rip_demo } from "./pkg/sparse_recover_demo.js";

const $ = (id) => document.getElementById(id);
const num = (id) => Number($(id).value);

function plotAxes(ctx, w, h, pad) {
  ctx.clearRect(0, 0, w, h);
  ctx.strokeStyle = "#d0d7de";
  ctx.beginPath();
  ctx.moveTo(pad, pad / 2);
  ctx.lineTo(pad, h - pad);
  ctx.lineTo(w - pad / 2, h - pad);
  ctx.stroke();
}

// Semi-log line plot: y values drawn on log10 scale, zeros clamped to the floor.
function plotLogSeries(canvas, seriesList, labels) {
  const ctx = canvas.getContext("2d");
  const w = canvas.width, h = canvas.height, pad = 46;
  plotAxes(ctx, w, h, pad);
  const finite = seriesList.flat().filter((v) => v > 0);
  if (finite.length === 0) return;
  const hi = Math.log10(Math.max(...finite));
  const lo = Math.max(Math.log10(Math.min(...finite)), hi - 18);
  const n = Math.max(...seriesList.map((s) => s.length));
  const x = (i) => pad + ((w - 1.5 * pad) * i) / Math.max(n - 1, 1);
  const y = (v) => {
    const lv = v > 0 ? Math.log10(v) : lo;
    return h - pad - ((h - 1.5 * pad) * (Math.max(lv, lo) - lo)) / Math.max(hi - lo, 1e-9);
  };
  const colors = ["#0969da", "#cf222e", "#8250df", "#1a7f37"];
  seriesList.forEach((series, k) => {
    ctx.strokeStyle = colors[k % colors.length];
    ctx.lineWidth = k === 0 ? 2 : 1.2;
    if (k > 0) ctx.setLineDash([6, 4]); else ctx.setLineDash([]);
    ctx.beginPath();
    series.forEach((v, i) => (i === 0 ? ctx.moveTo(x(i), y(v)) : ctx.lineTo(x(i), y(v))));
    ctx.stroke();
    ctx.setLineDash([]);
    ctx.fillStyle = colors[k % colors.length];
    ctx.font = "12px system-ui";
    ctx.fillText(labels[k], pad + 8, pad / 2 + 14 + 14 * k);
  });
  ctx.fillStyle = "#57606a";
  ctx.font = "11px system-ui";
  ctx.fillText("iteration t", w / 2, h - 8);
  for (let e = Math.ceil(lo); e <= Math.floor(hi); e += Math.ceil((hi - lo) / 6) || 1) {
    ctx.fillText("1e" + e, 4, y(Math.pow(10, e)) + 3);
  }
}

// Stem plot of truth vs estimate.
function plotStems(canvas, truth, estimate) {
  const ctx = canvas.getContext("2d");
  const w = canvas.width, h = canvas.height, pad = 30;
  plotAxes(ctx, w, h, pad);
  const top = Math.max(1e-12, ...truth.map(Math.abs), ...estimate.map(Math.abs));
  const mid = h / 2;
  const x = (i) => pad + ((w - 1.5 * pad) * i) / Math.max(truth.length - 1, 1);
  const y = (v) => mid - (v / top) * (h / 2 - pad);
  ctx.strokeStyle = "#d0d7de";
  ctx.beginPath(); ctx.moveTo(pad, mid); ctx.lineTo(w - pad / 2, mid); ctx.stroke();
  truth.forEach((v, i) => {
    if (v === 0) return;
    ctx.strokeStyle = "#1a7f37"; ctx.lineWidth = 3;
    ctx.beginPath(); ctx.moveTo(x(i), mid); ctx.lineTo(x(i), y(v)); ctx.stroke();
  });
  estimate.forEach((v, i) => {
    if (v === 0) return;
    ctx.strokeStyle = "#cf222e"; ctx.lineWidth = 1.2;
    ctx.beginPath(); ctx.moveTo(x(i) + 2, mid); ctx.lineTo(x(i) + 2, y(v)); ctx.stroke();
  });
  ctx.fillStyle = "#1a7f37"; ctx.font = "12px system-ui";
  ctx.fillText("truth (thick)", pad + 8, 16);
  ctx.fillStyle = "#cf222e";
  ctx.fillText("final iterate (thin)", pad + 100, 16);
}

function plotSweep(canvas, ms, fractions) {
  const ctx = canvas.getContext("2d");
  const w = canvas.width, h = canvas.height, pad = 46;
  plotAxes(ctx, w, h, pad);
  const x = (i) => pad + ((w - 1.5 * pad) * i) / Math.max(ms.length - 1, 1);
  const y = (f) => h - pad - (h - 1.5 * pad) * f;
  ctx.strokeStyle = "#0969da"; ctx.lineWidth = 2;
  ctx.beginPath();
  fractions.forEach((f, i) => (i === 0 ? ctx.moveTo(x(i), y(f)) : ctx.lineTo(x(i), y(f))));
  ctx.stroke();
  ctx.fillStyle = "#0969da";
  fractions.forEach((f, i) => { ctx.beginPath(); ctx.arc(x(i), y(f), 3.5, 0, 7); ctx.fill(); });
  ctx.fillStyle = "#57606a"; ctx.font = "11px system-ui";
  ms.forEach((m, i) => { if (ms.length <= 16 || i % 2 === 0) ctx.fillText(String(m), x(i) - 6, h - pad + 16); });
  ctx.fillText("measurements m", w / 2, h - 6);
  [0, 0.5, 1].forEach((f) => ctx.fillText(f.toFixed(1), 12, y(f) + 3));
  ctx.fillText("success fraction", 8, pad / 2 + 10);
}

function setStatus(id, text, ok) {
  const el = $(id);
  el.textContent = text;
  el.className = "status " + (ok === undefined ? "" : ok ? "ok" : "bad");
}

function withBusy(button, fn) {
  button.disabled = true;
  setTimeout(() => { try { fn(); } finally { button.disabled = false; } }, 20);
}

async function main() {
  await init();

  $("rec-run").onclick = () => withBusy($("rec-run"), () => {
    const out = JSON.parse(recovery_demo(
      num("rec-d"), num("rec-s"), num("rec-m"),
      num("rec-gamma"), num("rec-t"), BigInt(num("rec-seed"))));
    if (out.error) return setStatus("rec-status", out.error, false);
    plotLogSeries($("rec-decay"),
      [out.err2, out.bound, out.tau],
      ["||x_t - x*||_2", "guaranteed bound (4g)^((t-1)/2) R", "threshold tau_t"]);
    plotStems($("rec-stem"), out.truth, out.estimate);
    const ok = out.final_rel_err <= 1e-4;
    setStatus("rec-status",
      `final relative error ${out.final_rel_err.toExponential(2)}; ` +
      `support within the 2s envelope at every iterate: ${out.support_ok.every(Boolean)}`, ok);
  });

  $("sw-run").onclick = () => withBusy($("sw-run"), () => {
    const out = JSON.parse(sweep_demo(
      num("sw-d"), num("sw-s"), num("sw-mmin"), num("sw-mmax"), num("sw-mstep"),
      num("sw-trials"), num("sw-gamma"), 80, BigInt(num("sw-seed"))));
    if (out.error) return setStatus("sw-status", out.error, false);
    plotSweep($("sw-curve"), out.m, out.success_fraction);
    setStatus("sw-status",
      `ran ${out.trials} trials per point; success means final error below 1e-4 R`, true);
  });

  $("rip-run").onclick = () => withBusy($("rip-run"), () => {
    const out = JSON.parse(rip_demo(num("rip-d"), num("rip-m"), num("rip-smax"), BigInt(num("rip-seed"))));
    if (out.error) return setStatus("rip-status", out.error, false);
    const rows = out.rows.map((r) =>
      `<tr><td>${r.s}</td><td>${r.delta.toFixed(4)}</td>` +
      `<td>${r.theta === null ? "&mdash;" : r.theta.toFixed(4)}</td>` +
      `<td>${r.subsets_examined}</td></tr>`).join("");
    $("rip-table").innerHTML =
      `<table><tr><th>s</th><th>delta_s</th><th>theta_{s,s}</th><th>subsets examined</th></tr>${rows}</table>`;
    setStatus("rip-status", `exact enumeration on a ${out.m}×${out.d} Gaussian matrix`, true);
  });
}

main();
