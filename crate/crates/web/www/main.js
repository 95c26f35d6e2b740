import init, { symmetrize, compare, profiles } from "./pkg/gowers_lab_web.js";

const N = 64;
const MARGIN = 2; // cells left empty so autocorrelations do not wrap
const paint = document.getElementById("paint");
const starCanvas = document.getElementById("star");
const plot = document.getElementById("plot");
const errorBox = document.getElementById("error");
const results = document.getElementById("results");
let cells = new Float64Array(N * N);
let fit = null;

// cell (row, col) has centre x = -1 + (col + 0.5) h, y = 1 - (row + 0.5) h;
// the grid is row-major with axis 0 = x, so x indexes the outer loop
const h = 2 / N;
const index = (row, col) => col * N + (N - 1 - row);
const centre = (row, col) => [-1 + (col + 0.5) * h, 1 - (row + 0.5) * h];

function fill(test) {
  cells = new Float64Array(N * N);
  for (let r = MARGIN; r < N - MARGIN; r++) {
    for (let c = MARGIN; c < N - MARGIN; c++) {
      const [x, y] = centre(r, c);
      if (test(x, y)) cells[index(r, c)] = 1;
    }
  }
  fit = null;
}

const presets = {
  ellipse: (x, y) => ((x - 0.1) / 0.7) ** 2 + ((y + 0.05) / 0.35) ** 2 <= 1 - 0.5 * x * y,
  two: (x, y) => (x + 0.45) ** 2 + y ** 2 <= 0.12 || (x - 0.5) ** 2 + (y - 0.3) ** 2 <= 0.06,
  l: (x, y) => (x > -0.6 && x < -0.1 && y > -0.6 && y < 0.6) || (x > -0.6 && x < 0.5 && y > -0.6 && y < -0.1),
  annulus: (x, y) => x * x + y * y <= 0.45 && x * x + y * y >= 0.12,
  clear: () => false,
};

function draw(canvas, values) {
  const ctx = canvas.getContext("2d");
  const s = canvas.width / N;
  ctx.fillStyle = "#fff";
  ctx.fillRect(0, 0, canvas.width, canvas.height);
  ctx.fillStyle = "#234";
  for (let r = 0; r < N; r++) {
    for (let c = 0; c < N; c++) {
      const v = values[index(r, c)];
      if (v > 0) {
        ctx.globalAlpha = v;
        ctx.fillRect(c * s, r * s, s, s);
      }
    }
  }
  ctx.globalAlpha = 1;
}

function drawFit() {
  if (!fit) return;
  // boundary points c + A^{-1/2} u for unit u, via the 2x2 inverse square root
  const [[a, b], [, d]] = fit.matrix;
  const tr = a + d, det = a * d - b * b;
  const s = Math.sqrt(det), t = Math.sqrt(tr + 2 * s);
  const r = [[(d + s) / (t * s), -b / (t * s)], [-b / (t * s), (a + s) / (t * s)]];
  const ctx = paint.getContext("2d");
  const px = (x) => ((x + 1) / 2) * paint.width;
  const py = (y) => ((1 - y) / 2) * paint.height;
  ctx.strokeStyle = "#c22";
  ctx.lineWidth = 2;
  ctx.beginPath();
  for (let i = 0; i <= 96; i++) {
    const th = (2 * Math.PI * i) / 96;
    const u = [Math.cos(th), Math.sin(th)];
    const x = fit.center[0] + r[0][0] * u[0] + r[0][1] * u[1];
    const y = fit.center[1] + r[1][0] * u[0] + r[1][1] * u[1];
    i === 0 ? ctx.moveTo(px(x), py(y)) : ctx.lineTo(px(x), py(y));
  }
  ctx.stroke();
}

function redraw() {
  draw(paint, cells);
  drawFit();
}

function report(rows) {
  results.innerHTML = rows
    .map(([k, v]) => `<tr><td>${k}</td><td>${typeof v === "number" ? v.toPrecision(6) : v}</td></tr>`)
    .join("");
}

function guarded(f) {
  return () => {
    errorBox.textContent = "";
    try {
      f();
    } catch (e) {
      errorBox.textContent = e.message ?? String(e);
    }
  };
}

function drawPlot(p) {
  const ctx = plot.getContext("2d");
  const W = plot.width, H = plot.height, pad = 24;
  ctx.fillStyle = "#fff";
  ctx.fillRect(0, 0, W, H);
  ctx.strokeStyle = "#999";
  ctx.strokeRect(pad, pad, W - 2 * pad, H - 2 * pad);
  const tMax = p.t[p.t.length - 1] || 1;
  const series = (ys, color, step) => {
    const yMax = Math.max(...ys) || 1;
    const X = (t) => pad + (t / tMax) * (W - 2 * pad);
    const Y = (v) => H - pad - (v / yMax) * (H - 2 * pad);
    ctx.strokeStyle = color;
    ctx.lineWidth = 2;
    ctx.beginPath();
    ctx.moveTo(X(p.t[0]), Y(ys[0]));
    for (let i = 1; i < p.t.length; i++) {
      if (step) ctx.lineTo(X(p.t[i]), Y(ys[i - 1]));
      ctx.lineTo(X(p.t[i]), Y(ys[i]));
    }
    ctx.stroke();
  };
  series(p.f_star, "#2364aa", true);
  series(p.cumulative, "#e07a1f", false);
}

paint.addEventListener("pointerdown", (e) => {
  paint.setPointerCapture(e.pointerId);
  brush(e);
});
paint.addEventListener("pointermove", (e) => {
  if (e.buttons) brush(e);
});

function brush(e) {
  const rect = paint.getBoundingClientRect();
  const c0 = Math.floor(((e.clientX - rect.left) / rect.width) * N);
  const r0 = Math.floor(((e.clientY - rect.top) / rect.height) * N);
  const rad = Number(document.getElementById("brush").value);
  const erase = document.getElementById("erase").checked;
  for (let r = r0 - rad; r <= r0 + rad; r++) {
    for (let c = c0 - rad; c <= c0 + rad; c++) {
      const inside = r >= MARGIN && r < N - MARGIN && c >= MARGIN && c < N - MARGIN;
      if (inside && (r - r0) ** 2 + (c - c0) ** 2 <= rad * rad) {
        cells[index(r, c)] = erase ? 0 : 1;
      }
    }
  }
  fit = null;
  redraw();
}

await init();

document.getElementById("preset").addEventListener("change", (e) => {
  fill(presets[e.target.value]);
  redraw();
});

document.getElementById("symmetrize").addEventListener("click", guarded(() => {
  draw(starCanvas, symmetrize(cells, N));
}));

document.getElementById("compare").addEventListener("click", guarded(() => {
  const k = Number(document.getElementById("k").value);
  const r = JSON.parse(compare(cells, N, k));
  fit = r.matrix ? r : null;
  redraw();
  report([
    ["area |E|", r.measure],
    [`||E||^${2 ** k} (U${k})`, r.power],
    [`||E*||^${2 ** k}`, r.power_star],
    ["deficit vs E*", r.deficit],
    ["deficit vs ellipse constant", r.deficit_continuum],
    ["ellipse distance", r.epsilon],
  ]);
}));

document.getElementById("profiles").addEventListener("click", guarded(() => {
  const p = JSON.parse(profiles(cells, N));
  drawPlot(p);
  report([
    ["breakpoints", p.t.length],
    ["f_*(0) = |E|", p.f_star[0]],
    ["F(end) = |E|^2", p.cumulative[p.cumulative.length - 1]],
    ["bathtub gap", p.bathtub_gap],
  ]);
}));

fill(presets.ellipse);
redraw();
