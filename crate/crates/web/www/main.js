import init, { project, ray_table, simulate } from "./pkg/bess_web.js";

const SPAN = 1.6;
const RES = 1.0;
const $ = (id) => document.getElementById(id);
const pq = $("pq");
const ctx = pq.getContext("2d");
let request = null;

const toPx = (p, q) => [pq.width / 2 + (p / SPAN) * pq.width / 2, pq.height / 2 - (q / SPAN) * pq.height / 2];
const fromPx = (x, y) => [((x - pq.width / 2) / (pq.width / 2)) * SPAN, ((pq.height / 2 - y) / (pq.height / 2)) * SPAN];
const op = () => [+$("vac").value, +$("vdc").value, +$("soc").value];

function dot(p, q, colour) {
  const [x, y] = toPx(p, q);
  ctx.fillStyle = colour;
  ctx.beginPath();
  ctx.arc(x, y, 4, 0, 2 * Math.PI);
  ctx.fill();
}

function draw() {
  ctx.clearRect(0, 0, pq.width, pq.height);
  ctx.strokeStyle = "#ddd";
  ctx.beginPath();
  ctx.moveTo(0, pq.height / 2); ctx.lineTo(pq.width, pq.height / 2);
  ctx.moveTo(pq.width / 2, 0); ctx.lineTo(pq.width / 2, pq.height);
  ctx.stroke();

  let smax;
  try {
    smax = ray_table(...op(), RES);
  } catch (e) {
    $("out").textContent = String(e);
    return;
  }
  // sector k covers angle (k + 1)·RES
  ctx.fillStyle = "rgba(40, 120, 200, 0.15)";
  ctx.strokeStyle = "#2878c8";
  ctx.beginPath();
  smax.forEach((r, k) => {
    const a = ((k + 1) * RES * Math.PI) / 180;
    const [x, y] = toPx(r * Math.cos(a), r * Math.sin(a));
    k === 0 ? ctx.moveTo(x, y) : ctx.lineTo(x, y);
  });
  ctx.closePath();
  ctx.fill();
  ctx.stroke();

  if (!request) {
    $("out").textContent = "";
    return;
  }
  const [p0, q0] = request;
  dot(p0, q0, "#c33");
  try {
    const [p, q] = project(p0, q0, ...op(), $("method").value);
    dot(p, q, "#183");
    ctx.strokeStyle = "#888";
    ctx.beginPath();
    ctx.moveTo(...toPx(p0, q0));
    ctx.lineTo(...toPx(p, q));
    ctx.stroke();
    $("out").textContent =
      `request  P=${p0.toFixed(4)} Q=${q0.toFixed(4)}\n` +
      `setpoint P=${p.toFixed(4)} Q=${q.toFixed(4)}\n` +
      `moved    ${Math.hypot(p - p0, q - q0).toFixed(4)} pu`;
  } catch (e) {
    $("out").textContent = `request P=${p0.toFixed(4)} Q=${q0.toFixed(4)}\n${e}`;
  }
}

function plot(run) {
  const c = $("ts");
  const g = c.getContext("2d");
  const t = run.t(), p0 = run.p0(), p = run.p(), soc = run.soc();
  g.clearRect(0, 0, c.width, c.height);
  const tMax = t[t.length - 1] || 1;
  const line = (ys, lo, hi, colour) => {
    g.strokeStyle = colour;
    g.beginPath();
    ys.forEach((y, i) => {
      const x = (t[i] / tMax) * c.width;
      const py = c.height - ((y - lo) / (hi - lo)) * c.height;
      i === 0 ? g.moveTo(x, py) : g.lineTo(x, py);
    });
    g.stroke();
  };
  line(p0, -1.2, 1.2, "#c33");
  line(p, -1.2, 1.2, "#183");
  line(soc, 0, 1, "#2878c8");
  const [tde, tce, tse] = run.metrics();
  $("sim-out").textContent =
    "red P0, green P [-1.2, 1.2] pu; blue SoC [0, 1]\n" +
    `discharged ${tde.toFixed(2)} kWh\ncharged    ${tce.toFixed(2)} kWh\nshortfall  ${tse.toFixed(2)} kWh`;
  run.free();
}

await init();
pq.addEventListener("click", (ev) => {
  const r = pq.getBoundingClientRect();
  request = fromPx(ev.clientX - r.left, ev.clientY - r.top);
  draw();
});
for (const id of ["vac", "vdc", "soc", "method"]) $(id).addEventListener("input", draw);
$("run").addEventListener("click", () => {
  try {
    plot(simulate(BigInt($("seed").value), +$("dur").value, +$("alpha").value, $("sim-method").value));
  } catch (e) {
    $("sim-out").textContent = String(e);
  }
});
draw();
