import init, { analyze, bowen_polygons, box_family } from "./pkg/slowent_wasm.js";

const PRESETS = {
  fib: "[[[2,1],[1,1]]]",
  pair: "[[[2,1],[1,1]],[[5,3],[3,2]]]",
  t4: "[[[2,1,0,0],[1,1,0,0],[0,0,1,0],[0,0,0,1]],[[1,0,0,0],[0,1,0,0],[0,0,3,1],[0,0,2,1]]]",
};

const $ = (id) => document.getElementById(id);
let bowenData = null;

function setError(msg) {
  $("error").textContent = msg || "";
}

function fmt(x, digits = 7) {
  return Number(x).toPrecision(digits);
}

function renderSpectrum(out) {
  const k = out.rank;
  let html = "<table><tr>";
  for (let j = 0; j < k; j++) html += `<th>c${j + 1}</th>`;
  html += "<th>mult</th></tr>";
  for (const f of out.spectrum) {
    html += "<tr>";
    for (const c of f.coeffs) html += `<td>${fmt(c)}</td>`;
    html += `<td>${f.multiplicity}${f.orbit_direction ? " (orbit)" : ""}</td></tr>`;
  }
  html += "</table>";
  $("spectrum").innerHTML = html;
  $("deltas").innerHTML =
    `Δ(ℓ1) = ${fmt(out.delta_l1)} &nbsp; Δ(ℓ2) = ${fmt(out.delta_l2)} ` +
    `&nbsp; Δ(ℓ∞) = ${fmt(out.delta_linf)}<br>` +
    `(Δ/2 under ℓ2: ${fmt(out.delta_l2 / 2)})`;
  $("chamber-svg").innerHTML = out.svg
    ? out.svg
    : "<em>needs a rank-2 action</em>";
  const svg = $("chamber-svg").querySelector("svg");
  if (svg) {
    svg.setAttribute("width", "420");
    svg.setAttribute("height", "420");
  }
}

function axes(ctx, w, h) {
  ctx.strokeStyle = "#ddd";
  ctx.lineWidth = 1;
  ctx.beginPath();
  ctx.moveTo(0, h / 2); ctx.lineTo(w, h / 2);
  ctx.moveTo(w / 2, 0); ctx.lineTo(w / 2, h);
  ctx.stroke();
}

function drawBowenPolygon() {
  const canvas = $("bowen-canvas");
  const ctx = canvas.getContext("2d");
  const { width: w, height: h } = canvas;
  ctx.clearRect(0, 0, w, h);
  axes(ctx, w, h);
  if (!bowenData) {
    $("bowen-stat").textContent = "needs a d = 2 action";
    return;
  }
  const sIdx = Math.min(Number($("bowen-s").value), bowenData.polygons.length - 1);
  $("bowen-s-val").textContent = String(sIdx);
  const poly = bowenData.polygons[sIdx];
  const eps = bowenData.eps;
  const scale = (0.42 * w) / eps;

  // eps-cube for reference.
  ctx.strokeStyle = "#bbb";
  ctx.setLineDash([4, 3]);
  ctx.strokeRect(w / 2 - eps * scale, h / 2 - eps * scale, 2 * eps * scale, 2 * eps * scale);
  ctx.setLineDash([]);

  if (poly.vertices.length >= 3) {
    ctx.beginPath();
    for (let i = 0; i < poly.vertices.length; i++) {
      const [x, y] = poly.vertices[i];
      const px = w / 2 + x * scale;
      const py = h / 2 - y * scale;
      if (i === 0) ctx.moveTo(px, py); else ctx.lineTo(px, py);
    }
    ctx.closePath();
    ctx.fillStyle = "rgba(153, 68, 51, 0.25)";
    ctx.strokeStyle = "#943";
    ctx.lineWidth = 1.5;
    ctx.fill();
    ctx.stroke();
  }
  $("bowen-stat").innerHTML =
    `s = ${poly.s}, ${poly.constraints} window elements, ` +
    `area = ${poly.area.toExponential(4)}` +
    (bowenData.wraparound_at !== null
      ? `<br>linear regime ends at s = ${bowenData.wraparound_at}`
      : "");
}

function drawDecay() {
  const canvas = $("decay-canvas");
  const ctx = canvas.getContext("2d");
  const { width: w, height: h } = canvas;
  ctx.clearRect(0, 0, w, h);
  if (!bowenData) { $("decay-stat").textContent = ""; return; }
  const pts = bowenData.polygons
    .filter((p) => p.area > 0)
    .map((p) => [p.s, -Math.log(p.area)]);
  if (pts.length < 2) return;
  const xmax = Math.max(...pts.map((p) => p[0]));
  const ymax = Math.max(...pts.map((p) => p[1]));
  const ymin = Math.min(...pts.map((p) => p[1]));
  const pad = 36;
  const X = (x) => pad + ((w - 2 * pad) * x) / xmax;
  const Y = (y) => h - pad - ((h - 2 * pad) * (y - ymin)) / (ymax - ymin || 1);

  ctx.strokeStyle = "#ccc";
  ctx.strokeRect(pad, pad, w - 2 * pad, h - 2 * pad);
  ctx.fillStyle = "#555";
  ctx.font = "12px monospace";
  ctx.fillText("-log vol(B_s)  vs  s", pad, pad - 8);

  // Formula-rate reference line through the last point.
  const last = pts[pts.length - 1];
  const rate = bowenData.formula_total;
  ctx.strokeStyle = "#78a";
  ctx.setLineDash([5, 4]);
  ctx.beginPath();
  ctx.moveTo(X(0), Y(last[1] - rate * last[0]));
  ctx.lineTo(X(last[0]), Y(last[1]));
  ctx.stroke();
  ctx.setLineDash([]);

  ctx.strokeStyle = "#943";
  ctx.fillStyle = "#943";
  ctx.beginPath();
  pts.forEach(([x, y], i) => (i === 0 ? ctx.moveTo(X(x), Y(y)) : ctx.lineTo(X(x), Y(y))));
  ctx.stroke();
  for (const [x, y] of pts) {
    ctx.beginPath();
    ctx.arc(X(x), Y(y), 3, 0, 2 * Math.PI);
    ctx.fill();
  }
  const slopeTxt = bowenData.slope === null ? "n/a" : fmt(bowenData.slope, 6);
  $("decay-stat").innerHTML =
    `fitted slope ${slopeTxt} &nbsp;·&nbsp; formula Δ = ${fmt(rate, 6)} ` +
    `<span style="color:#78a">(dashed: slope Δ)</span>`;
}

function recomputeBowen() {
  const epsExp = Number($("bowen-eps").value);
  const eps = Math.pow(10, epsExp);
  $("bowen-eps-val").textContent = eps.toFixed(3);
  try {
    const out = JSON.parse(
      bowen_polygons($("generators").value, $("bowen-norm").value, eps, 10.0)
    );
    bowenData = out;
    $("bowen-s").max = String(out.polygons.length - 1);
    setError("");
  } catch (e) {
    bowenData = null;
    $("bowen-stat").textContent = String(e.message || e);
  }
  drawBowenPolygon();
  drawDecay();
}

function drawFamily() {
  const canvas = $("family-canvas");
  const ctx = canvas.getContext("2d");
  const { width: w, height: h } = canvas;
  ctx.clearRect(0, 0, w, h);
  let out;
  try {
    out = JSON.parse(box_family($("generators").value, 256));
  } catch (e) {
    $("family-stat").textContent = String(e.message || e);
    return;
  }
  const logw = out.w1.map(Math.log10);
  const ymin = Math.min(...out.delta);
  const ymax = Math.max(...out.delta);
  const pad = 36;
  const X = (lw) => pad + ((w - 2 * pad) * (lw - logw[0])) / (logw[logw.length - 1] - logw[0]);
  const Y = (y) => h - pad - ((h - 2 * pad) * (y - ymin)) / (ymax - ymin || 1);

  ctx.strokeStyle = "#ccc";
  ctx.strokeRect(pad, pad, w - 2 * pad, h - 2 * pad);
  ctx.fillStyle = "#555";
  ctx.font = "12px monospace";
  ctx.fillText("Δ(w1, 1/(4 w1))  vs  log10 w1", pad, pad - 8);

  ctx.strokeStyle = "#943";
  ctx.beginPath();
  out.delta.forEach((d, i) =>
    i === 0 ? ctx.moveTo(X(logw[i]), Y(d)) : ctx.lineTo(X(logw[i]), Y(d))
  );
  ctx.stroke();

  ctx.fillStyle = "#367";
  ctx.beginPath();
  ctx.arc(X(Math.log10(out.best_w1)), Y(out.best_value), 4, 0, 2 * Math.PI);
  ctx.fill();

  $("family-stat").innerHTML =
    `minimum Δ = ${fmt(out.best_value)} at w = (${fmt(out.best_w1, 6)}, ${fmt(out.best_w2, 6)})` +
    `<br>ℓ∞ reference (volume 4): Δ = ${fmt(out.linf_value)}`;
}

function runAll() {
  setError("");
  try {
    const out = JSON.parse(analyze($("generators").value));
    renderSpectrum(out);
  } catch (e) {
    setError(String(e.message || e));
    return;
  }
  recomputeBowen();
  drawFamily();
}

async function main() {
  try {
    await init();
  } catch (e) {
    setError(
      "wasm package not found — build it first (see the footer for the two commands), then reload."
    );
    return;
  }
  for (const btn of document.querySelectorAll("button[data-preset]")) {
    btn.addEventListener("click", () => {
      $("generators").value = PRESETS[btn.dataset.preset];
      runAll();
    });
  }
  $("run").addEventListener("click", runAll);
  $("bowen-norm").addEventListener("change", recomputeBowen);
  $("bowen-eps").addEventListener("input", recomputeBowen);
  $("bowen-s").addEventListener("input", () => drawBowenPolygon());
  $("generators").value = PRESETS.fib;
  runAll();
}

main();
