import init, { resample, scene, profile } from "./pkg/trajhub_browser.js";

const $ = (id) => document.getElementById(id);
const num = (id) => Number($(id).value);

function call(fn, ...args) {
  const v = JSON.parse(fn(...args));
  if (v.error) throw new Error(v.error);
  return v;
}

function showError(el, e) {
  el.textContent = "error: " + e.message;
}

// Resampling: canvas pixels are 10 px per meter.
const rsPoints = [];
const RS_SCALE = 10;

function drawResample() {
  const c = $("rs-canvas");
  const g = c.getContext("2d");
  g.clearRect(0, 0, c.width, c.height);
  g.strokeStyle = "#999";
  g.beginPath();
  rsPoints.forEach(([x, y], i) => (i ? g.lineTo(x * RS_SCALE, y * RS_SCALE) : g.moveTo(x * RS_SCALE, y * RS_SCALE)));
  g.stroke();
  if (rsPoints.length < 2) {
    $("rs-out").textContent = "add at least two vertices";
    return;
  }
  try {
    const r = call(resample, JSON.stringify(rsPoints), num("rs-spacing"));
    g.fillStyle = "#d04a4a";
    for (const [x, y] of r.points) g.fillRect(x * RS_SCALE - 2, y * RS_SCALE - 2, 4, 4);
    const last = r.gaps[r.gaps.length - 1];
    $("rs-out").textContent =
      `${r.points.length} points, length ${r.stations[r.stations.length - 1].toFixed(3)} m, last gap ${last.toFixed(3)} m`;
  } catch (e) {
    showError($("rs-out"), e);
  }
}

$("rs-canvas").addEventListener("click", (ev) => {
  const rect = ev.target.getBoundingClientRect();
  rsPoints.push([(ev.clientX - rect.left) / RS_SCALE, (ev.clientY - rect.top) / RS_SCALE]);
  drawResample();
});
$("rs-spacing").addEventListener("change", drawResample);
$("rs-clear").addEventListener("click", () => {
  rsPoints.length = 0;
  drawResample();
});

// Scene explorer: agent frame, +x to the right, 5 px per meter, focal at 1/3 width.
const MAP_COLORS = { lane_center: "#bbb", road_edge: "#555", road_line: "#aaa", crosswalk: "#7a7" };
const MODEL_COLORS = { cv: "#d04a4a", kalman: "#4a7bd0" };

function drawScene(v) {
  const c = $("sc-canvas");
  const g = c.getContext("2d");
  const s = 5;
  const ox = c.width / 3;
  const oy = c.height / 2;
  const P = ([x, y]) => [ox + x * s, oy - y * s];
  const line = (pts, color, width = 1) => {
    if (!pts.length) return;
    g.strokeStyle = color;
    g.lineWidth = width;
    g.beginPath();
    pts.forEach((p, i) => (i ? g.lineTo(...P(p)) : g.moveTo(...P(p))));
    g.stroke();
  };
  g.clearRect(0, 0, c.width, c.height);
  for (const m of v.map) line(m.points, MAP_COLORS[m.type] || "#ccc");
  for (const n of v.neighbors) line(n, "#c90", 2);
  line(v.history, "#000", 2);
  line(v.future, "#2a2", 2);
  for (const [name, p] of Object.entries(v.predictions)) {
    p.trajectories.forEach((t, i) => line(t, MODEL_COLORS[name], i === 0 ? 2 : 1));
  }
}

function showScene() {
  try {
    const v = call(scene, num("sc-seed"), num("sc-index"), num("sc-density"), num("sc-agent"), num("sc-modes"));
    drawScene(v);
    const fmt = (x) => (x == null ? "n/a" : x.toFixed(3));
    const rows = Object.entries(v.predictions).map(
      ([k, p]) => `${k.padEnd(7)} minADE ${fmt(p.min_ade)}  minFDE ${fmt(p.min_fde)}  MR ${p.miss ? 1 : 0}  brier-minFDE ${fmt(p.brier_min_fde)}`,
    );
    $("sc-out").textContent = [
      `${v.scenario} agent ${v.agent} (${v.focal_count} focal agents), generated as ${v.maneuver}`,
      `type ${v.trajectory_type}, Kalman difficulty ${fmt(v.kalman_difficulty)} (${v.difficulty_bin ?? "unscored"})`,
      "black history, green future, red cv, blue kalman",
      ...rows,
    ].join("\n");
  } catch (e) {
    showError($("sc-out"), e);
  }
}
$("sc-go").addEventListener("click", showScene);

function bars(rows) {
  const body = rows
    .map((r) => `<tr><td>${r.label}</td><td>${r.count}</td><td>${r.percent.toFixed(1)}%</td>` +
      `<td style="text-align:left"><span class="bar" style="width:${2 * r.percent}px"></span></td></tr>`)
    .join("");
  return `<table><tr><th></th><th>count</th><th>share</th><th></th></tr>${body}</table>`;
}

function showProfile() {
  const out = $("pf-out");
  out.textContent = "working…";
  setTimeout(() => {
    try {
      const p = call(profile, num("pf-seed"), num("pf-n"), num("pf-straight"), num("pf-left"),
        num("pf-right"), num("pf-uturn"), num("pf-stat"), $("pf-bins").value);
      out.innerHTML = `<p>${p.sample_count} samples, ${p.unscored} without enough history for the filter</p>` +
        `<h3>Trajectory types</h3>${bars(p.trajectory_types)}` +
        `<h3>Kalman difficulty (${p.difficulty_bins})</h3>${bars(p.difficulty_histogram)}`;
    } catch (e) {
      showError(out, e);
    }
  }, 0);
}
$("pf-go").addEventListener("click", showProfile);

await init();
drawResample();
showScene();
