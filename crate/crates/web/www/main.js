import init, { check_zero_case, pencil_singular_values, pole_map } from "./pkg/nullrank_web.js";

const $ = (id) => document.getElementById(id);

function parse(json) {
  const v = JSON.parse(json);
  if (v.error) throw new Error(v.error);
  return v;
}

function renderTable(v) {
  let html = "<table><tr><th>case</th><th>order</th>";
  for (const m of v.rows[0].methods) html += `<th>M${m.method}</th>`;
  html += "</tr>";
  for (const row of v.rows) {
    html += `<tr><td>${row.case}</td><td>${row.order}</td>`;
    for (const m of row.methods) {
      html += `<td class="${m.isnull ? "null" : "nonnull"}" title="${m.evidence}">${m.isnull ? 1 : 0}</td>`;
    }
    html += "</tr>";
  }
  $("table").innerHTML = html + "</table>";
}

function renderSpectrum(v) {
  const c = $("spectrum");
  const g = c.getContext("2d");
  g.clearRect(0, 0, c.width, c.height);
  const floor = -18;
  const logs = v.singular_values.map((s) => Math.max(Math.log10(s), floor));
  const top = Math.max(1, Math.ceil(Math.max(...logs)));
  const y = (l) => ((top - l) / (top - floor)) * (c.height - 20) + 10;
  const w = (c.width - 40) / logs.length;
  logs.forEach((l, i) => {
    g.fillStyle = v.singular_values[i] > v.threshold ? "#4a7" : "#c55";
    g.fillRect(30 + i * w, y(l), Math.max(w - 1, 1), c.height - 10 - y(l));
  });
  if (v.threshold > 0) {
    g.strokeStyle = "#000";
    g.setLineDash([4, 4]);
    const t = y(Math.log10(v.threshold));
    g.beginPath();
    g.moveTo(30, t);
    g.lineTo(c.width - 10, t);
    g.stroke();
    g.setLineDash([]);
  }
  g.fillStyle = "#000";
  for (let l = floor; l <= top; l += 3) g.fillText(`1e${l}`, 0, y(l) + 3);
  $("spectrum-info").textContent =
    `S is ${v.rows}×${v.cols}; ${v.rank} singular values above ${v.threshold.toExponential(2)}, ` +
    `so rank G = ${v.rank} − ${v.order} = ${v.rank_g}.`;
}

function renderPoles(v) {
  const c = $("poles");
  const g = c.getContext("2d");
  g.clearRect(0, 0, c.width, c.height);
  const r = Math.max(1.5, ...v.finite.map(([re, im]) => Math.hypot(re, im))) * 1.1;
  const s = c.width / (2 * r);
  const px = (re, im) => [c.width / 2 + re * s, c.height / 2 - im * s];
  g.strokeStyle = "#aaa";
  g.beginPath();
  g.moveTo(0, c.height / 2);
  g.lineTo(c.width, c.height / 2);
  g.moveTo(c.width / 2, 0);
  g.lineTo(c.width / 2, c.height);
  g.stroke();
  g.strokeStyle = "#36c";
  g.beginPath();
  g.arc(c.width / 2, c.height / 2, s, 0, 2 * Math.PI);
  g.stroke();
  g.strokeStyle = "#c33";
  for (const [re, im] of v.finite) {
    const [x, y] = px(re, im);
    g.beginPath();
    g.moveTo(x - 4, y - 4);
    g.lineTo(x + 4, y + 4);
    g.moveTo(x + 4, y - 4);
    g.lineTo(x - 4, y + 4);
    g.stroke();
  }
  $("poles-info").textContent =
    `${v.finite.length} finite and ${v.infinite} infinite eigenvalues of A − λE (order ${v.order}); circle: |λ| = 1.`;
}

function run() {
  const n = Number($("n").value);
  const seed = BigInt($("seed").value || 0);
  const tol = Number($("tol").value);
  $("error").textContent = "";
  try {
    renderTable(parse(check_zero_case(n, seed, tol)));
    renderSpectrum(parse(pencil_singular_values(n, seed, Number($("re").value), Number($("im").value), tol)));
    renderPoles(parse(pole_map(n, seed)));
  } catch (e) {
    $("error").textContent = e.message;
  }
}

await init();
$("run").addEventListener("click", run);
run();
