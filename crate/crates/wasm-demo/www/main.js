import init, { bound_curves, amplitude_profile, monte_carlo_point } from "./pkg/lens_crlb_browser.js";

const SVG = "http://www.w3.org/2000/svg";
const COLORS = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];
const $ = (id) => document.getElementById(id);
const num = (id) => Number($(id).value);

function el(name, attrs, text) {
  const node = document.createElementNS(SVG, name);
  for (const [k, v] of Object.entries(attrs)) node.setAttribute(k, v);
  if (text !== undefined) node.textContent = text;
  return node;
}

function guarded(errId, fn) {
  return () => {
    $(errId).textContent = "";
    try {
      fn();
    } catch (e) {
      $(errId).textContent = e.message ?? String(e);
    }
  };
}

function drawCurves() {
  const sigmas = $("c-s").value.split(",").map((s) => s.trim()).filter((s) => s.length > 0).map(Number);
  const c = bound_curves(num("c-n"), num("c-d"), new Float64Array(sigmas), num("c-lo"), num("c-hi"), 241, num("c-snr"));
  const phi = c.phi_deg, lens = c.lens, ula = c.ula, n = phi.length;
  const all = [...lens, ...ula].filter((v) => v > 0 && isFinite(v));
  const lo = Math.floor(Math.log10(Math.min(...all)));
  const hi = Math.max(lo + 1, Math.ceil(Math.log10(Math.max(...all))));
  const svg = $("c-plot");
  svg.replaceChildren();
  const W = 900, H = 420, L = 70, R = 170, T = 20, B = 45;
  const x = (p) => L + (p - phi[0]) / (phi[n - 1] - phi[0]) * (W - L - R);
  const y = (v) => H - B - (Math.log10(v) - lo) / (hi - lo) * (H - T - B);
  for (let d = lo; d <= hi; d++) {
    svg.append(el("line", { x1: L, x2: W - R, y1: y(10 ** d), y2: y(10 ** d), stroke: "#e5e5e5" }));
    svg.append(el("text", { x: L - 6, y: y(10 ** d) + 4, "text-anchor": "end", "font-size": 12 }, `1e${d}`));
  }
  for (let k = Math.ceil(phi[0] / 15) * 15; k <= phi[n - 1]; k += 15) {
    svg.append(el("text", { x: x(k), y: H - B + 16, "text-anchor": "middle", "font-size": 12 }, k));
  }
  svg.append(el("text", { x: (L + W - R) / 2, y: H - 8, "text-anchor": "middle", "font-size": 12 }, "DoA (degrees)"));
  svg.append(el("rect", { x: L, y: T, width: W - L - R, height: H - T - B, fill: "none", stroke: "#000" }));
  const line = (vals, color, dash) => {
    const pts = vals.map((v, i) => `${x(phi[i]).toFixed(2)},${y(v).toFixed(2)}`).join(" ");
    svg.append(el("polyline", { points: pts, fill: "none", stroke: color, "stroke-width": 1.6, "stroke-dasharray": dash }));
  };
  const labels = [];
  c.sigma_c.forEach((s, i) => {
    const color = COLORS[i % COLORS.length];
    line(Array.from(lens.slice(i * n, (i + 1) * n)), color, "none");
    labels.push([`σc = ${+s.toFixed(4)}`, color]);
  });
  line(Array.from(ula), "#000", "6 4");
  labels.push(["ULA, no lens", "#000"]);
  labels.forEach(([text, color], i) => {
    svg.append(el("line", { x1: W - R + 12, x2: W - R + 36, y1: T + 12 + 20 * i, y2: T + 12 + 20 * i, stroke: color, "stroke-width": 2 }));
    svg.append(el("text", { x: W - R + 42, y: T + 16 + 20 * i, "font-size": 12 }, text));
  });
}

function drawProfile() {
  const sigma = 10 ** num("a-s");
  const phi = num("a-phi");
  $("a-s-val").textContent = sigma.toFixed(3);
  $("a-phi-val").textContent = `${phi}°`;
  const prof = Array.from(amplitude_profile(num("c-n"), sigma, phi));
  const svg = $("a-plot");
  svg.replaceChildren();
  const W = 900, H = 220, pad = 30;
  const peak = Math.max(...prof);
  const bw = (W - 2 * pad) / prof.length;
  prof.forEach((v, i) => {
    const h = (v / peak) * (H - 2 * pad);
    svg.append(el("rect", { x: pad + i * bw + 2, y: H - pad - h, width: bw - 4, height: h, fill: "#1f77b4" }));
  });
  svg.append(el("text", { x: pad, y: 18, "font-size": 12 }, `peak |A| = ${peak.toPrecision(4)}, element ${prof.indexOf(peak) + 1} of ${prof.length}`));
}

function runMonteCarlo() {
  const args = [num("m-s"), num("m-snr"), num("m-phi"), num("m-t")];
  const [variance, bound, efficiency, bias] = monte_carlo_point(num("c-n"), num("c-d"), ...args, BigInt(num("m-seed")));
  const row = document.createElement("tr");
  for (const v of [...args, variance.toExponential(4), bound.toExponential(4), efficiency.toFixed(3), bias.toExponential(2)]) {
    const td = document.createElement("td");
    td.textContent = v;
    row.append(td);
  }
  $("m-rows").prepend(row);
}

await init();
$("c-run").addEventListener("click", guarded("c-err", drawCurves));
$("a-s").addEventListener("input", guarded("a-err", drawProfile));
$("a-phi").addEventListener("input", guarded("a-err", drawProfile));
$("m-run").addEventListener("click", guarded("m-err", runMonteCarlo));
guarded("c-err", drawCurves)();
guarded("a-err", drawProfile)();
