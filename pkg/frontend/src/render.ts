import { scaleLinear, scaleLog } from "d3-scale";
import { ColumnError, num, requireColumns, type Table } from "./csv.js";
import type { FigureKind, FigureSpec } from "./spec.js";

// Everything below is fixed style: no timestamps, no randomness, so the same
// spec + CSVs always produce byte-identical SVG.

const PALETTE = [
  "#1f77b4",
  "#d62728",
  "#2ca02c",
  "#9467bd",
  "#ff7f0e",
  "#8c564b",
  "#17becf",
  "#7f7f7f",
];
const FONT = "Helvetica, Arial, sans-serif";

export interface RenderResult {
  svg: string;
  warnings: string[];
}

interface AxisDefaults {
  x: string;
  y?: string;
  yScale: "linear" | "log";
  xLabel: string;
  yLabel: string;
}

const KIND_AXES: Record<FigureKind, AxisDefaults> = {
  BlerVsSnr: {
    x: "snr_db",
    yScale: "log",
    xLabel: "SNR [dB]",
    yLabel: "block error rate",
  },
  DispersionVsSnr: {
    x: "snr_db",
    y: "dispersion",
    yScale: "linear",
    xLabel: "SNR [dB]",
    yLabel: "dispersion",
  },
  PayloadVsDuration: {
    x: "duration_ms",
    y: "payload_bits",
    yScale: "linear",
    xLabel: "duration [ms]",
    yLabel: "payload bits",
  },
};

// the BLER kind pulls these straight from the sweep CSV layout
const BLER_LINE = "analytic_bler";
const BLER_DOTS = "sim_bler";
const BLER_CI = ["ci_lo", "ci_hi"];
const BLER_BAND = ["is_bound", "dt_bound"];

// ---------------------------------------------------------------- svg bits

function fmt(v: number): string {
  const s = v.toFixed(2);
  return s === "-0.00" ? "0.00" : s;
}

function esc(s: string): string {
  return s
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

function el(
  tag: string,
  attrs: Record<string, string | number>,
  body = "",
): string {
  let out = `<${tag}`;
  for (const [k, v] of Object.entries(attrs)) {
    out += ` ${k}="${typeof v === "number" ? fmt(v) : esc(v)}"`;
  }
  return body === "" ? `${out}/>` : `${out}>${body}</${tag}>`;
}

function text(
  x: number,
  y: number,
  s: string,
  extra: Record<string, string | number> = {},
): string {
  return el(
    "text",
    { x, y, "font-family": FONT, "font-size": 11, fill: "#222", ...extra },
    esc(s),
  );
}

// ------------------------------------------------------------- data model

interface Pt {
  x: number;
  y: number;
}

interface BandPt {
  x: number;
  lo: number;
  hi: number;
}

interface Whisker {
  x: number;
  lo: number;
  hi: number;
}

interface Series {
  label: string; // group key, "" when there is no grouping
  color: string;
  line: Pt[];
  dots: Pt[];
  whiskers: Whisker[];
  band: BandPt[];
}

function groupLabel(row: Record<string, string>, groupBy: string[]): string {
  return groupBy.map((c) => `${c}=${row[c]}`).join(", ");
}

function bySortedX<T extends { x: number }>(pts: T[]): T[] {
  return [...pts].sort((a, b) => a.x - b.x);
}

function buildSeries(spec: FigureSpec, tables: Table[], ax: AxisDefaults): Series[] {
  const xCol = spec.x ?? ax.x;
  const yCol = spec.y ?? ax.y;

  for (const t of tables) {
    requireColumns(t, [xCol, ...spec.groupBy]);
    if (spec.kind === "BlerVsSnr") {
      const any = [BLER_LINE, BLER_DOTS, ...BLER_BAND].some((c) =>
        t.columns.includes(c),
      );
      if (!any) throw new ColumnError(`${BLER_LINE}|${BLER_DOTS}|${BLER_BAND.join("+")}`, t.path);
    } else {
      requireColumns(t, [yCol as string]);
    }
  }

  // carry header presence along so a table without bound columns never
  // contributes fake band points
  interface Tagged {
    row: Record<string, string>;
    hasBand: boolean;
  }
  const grouped = new Map<string, Tagged[]>();
  for (const t of tables) {
    const hasBand = BLER_BAND.every((c) => t.columns.includes(c));
    for (const row of t.rows) {
      const key = groupLabel(row, spec.groupBy);
      const bucket = grouped.get(key);
      const tagged = { row, hasBand };
      if (bucket) bucket.push(tagged);
      else grouped.set(key, [tagged]);
    }
  }

  const labels = [...grouped.keys()].sort();
  return labels.map((label, i) => {
    const s: Series = {
      label,
      color: PALETTE[i % PALETTE.length],
      line: [],
      dots: [],
      whiskers: [],
      band: [],
    };
    for (const { row, hasBand } of grouped.get(label)!) {
      const x = num(row, xCol);
      if (x === null) continue;
      if (spec.kind === "BlerVsSnr") {
        const a = num(row, BLER_LINE);
        if (a !== null) s.line.push({ x, y: a });
        const m = num(row, BLER_DOTS);
        if (m !== null) {
          s.dots.push({ x, y: m });
          const lo = num(row, BLER_CI[0]);
          const hi = num(row, BLER_CI[1]);
          if (lo !== null && hi !== null) s.whiskers.push({ x, lo, hi });
        }
        if (hasBand) {
          const lo = num(row, BLER_BAND[0]);
          const hi = num(row, BLER_BAND[1]);
          if (lo !== null && hi !== null) s.band.push({ x, lo, hi });
        }
      } else {
        const y = num(row, yCol as string);
        if (y !== null) {
          s.line.push({ x, y });
          s.dots.push({ x, y });
        }
      }
    }
    s.line = bySortedX(s.line);
    s.dots = bySortedX(s.dots);
    s.whiskers = bySortedX(s.whiskers);
    s.band = bySortedX(s.band);
    return s;
  });
}

// ------------------------------------------------------------------ scales

interface Scale {
  (v: number): number;
  domain(): number[];
  ticks(n?: number): number[];
}

function padDomain(lo: number, hi: number, log: boolean): [number, number] {
  if (lo < hi) return [lo, hi];
  // single distinct value: open up a window around it so one marker still
  // lands mid-plot instead of collapsing the scale
  return log ? [lo / 2, hi * 2] : [lo - 1, hi + 1];
}

function makeScale(
  values: number[],
  range: [number, number],
  log: boolean,
): Scale | null {
  const usable = log ? values.filter((v) => v > 0) : values;
  if (usable.length === 0) return null;
  const [lo, hi] = padDomain(Math.min(...usable), Math.max(...usable), log);
  const s = log
    ? scaleLog().domain([lo, hi]).range(range).nice()
    : scaleLinear().domain([lo, hi]).range(range).nice();
  return s as unknown as Scale;
}

function clampTo(scale: Scale, v: number): number {
  const [d0, d1] = scale.domain();
  const lo = Math.min(d0, d1);
  const hi = Math.max(d0, d1);
  return scale(Math.min(Math.max(v, lo), hi));
}

function tickLabel(v: number, log: boolean): string {
  if (log) {
    const e = Math.log10(v);
    const r = Math.round(e);
    if (Math.abs(e - r) < 1e-9) return r < -2 || r > 3 ? `1e${r}` : String(v);
    return String(+v.toPrecision(2));
  }
  return String(+v.toPrecision(10));
}

function logTicks(scale: Scale): { v: number; label: string }[] {
  const [d0, d1] = scale.domain();
  const span = Math.log10(d1 / d0);
  return scale.ticks().map((v) => {
    const e = Math.log10(v);
    const isPow = Math.abs(e - Math.round(e)) < 1e-9;
    const label = span > 1.6 && !isPow ? "" : tickLabel(v, true);
    return { v, label };
  });
}

// ---------------------------------------------------------------- figure

/** Render one figure. Pure string assembly — same inputs, same bytes. */
export function renderFigure(spec: FigureSpec, tables: Table[]): RenderResult {
  const ax = KIND_AXES[spec.kind];
  const warnings: string[] = [];
  const series = buildSeries(spec, tables, ax);

  const W = spec.width;
  const H = spec.height;
  const margin = {
    top: spec.title ? 42 : 24,
    right: 24,
    bottom: 52,
    left: 68,
  };
  const logY = (spec.yScale ?? ax.yScale) === "log";

  const xs: number[] = [];
  const ys: number[] = [];
  for (const s of series) {
    for (const p of [...s.line, ...s.dots]) {
      xs.push(p.x);
      ys.push(p.y);
    }
    for (const b of s.band) {
      xs.push(b.x);
      ys.push(b.lo, b.hi);
    }
    for (const w of s.whiskers) ys.push(w.lo, w.hi);
  }

  const xScale = makeScale(xs, [margin.left, W - margin.right], false);
  const yScale = makeScale(ys, [H - margin.bottom, margin.top], logY);

  const parts: string[] = [];
  parts.push(
    `<svg xmlns="http://www.w3.org/2000/svg" width="${W}" height="${H}" viewBox="0 0 ${W} ${H}">`,
  );
  parts.push(el("rect", { x: 0, y: 0, width: W, height: H, fill: "#ffffff" }));

  if (spec.title) {
    parts.push(
      text(W / 2, 22, spec.title, {
        "font-size": 15,
        "font-weight": "bold",
        "text-anchor": "middle",
      }),
    );
  }

  const frame = el("rect", {
    x: margin.left,
    y: margin.top,
    width: W - margin.left - margin.right,
    height: H - margin.top - margin.bottom,
    fill: "none",
    stroke: "#333333",
    "stroke-width": 1,
  });

  if (xScale === null || yScale === null) {
    const why = logY && ys.length > 0 ? "no positive values to plot" : "no data to plot";
    warnings.push(`${spec.kind}: ${why}`);
    parts.push(frame);
    parts.push(
      text((margin.left + W - margin.right) / 2, H / 2, `(${why})`, {
        "font-size": 13,
        "text-anchor": "middle",
        fill: "#888888",
      }),
    );
    parts.push("</svg>");
    return { svg: parts.join("\n") + "\n", warnings };
  }

  // grid + ticks
  const xt = xScale.ticks(6).map((v) => ({ v, label: tickLabel(v, false) }));
  const yt = logY ? logTicks(yScale) : yScale.ticks(6).map((v) => ({ v, label: tickLabel(v, false) }));
  for (const { v } of xt) {
    const px = xScale(v);
    parts.push(
      el("line", {
        x1: px,
        x2: px,
        y1: margin.top,
        y2: H - margin.bottom,
        stroke: "#e4e4e4",
        "stroke-width": 1,
      }),
    );
  }
  for (const { v } of yt) {
    const py = yScale(v);
    parts.push(
      el("line", {
        x1: margin.left,
        x2: W - margin.right,
        y1: py,
        y2: py,
        stroke: "#e4e4e4",
        "stroke-width": 1,
      }),
    );
  }

  // shaded bound bands go under the curves
  for (const s of series) {
    if (s.band.length === 0) continue;
    if (s.band.length === 1) {
      // degenerate band: draw the interval at that abscissa as a bar
      const b = s.band[0];
      parts.push(
        el("line", {
          x1: xScale(b.x),
          x2: xScale(b.x),
          y1: clampTo(yScale, b.lo),
          y2: clampTo(yScale, b.hi),
          stroke: s.color,
          "stroke-width": 6,
          "stroke-opacity": 0.25,
        }),
      );
      continue;
    }
    const upper = s.band
      .map((b, i) => `${i === 0 ? "M" : "L"}${fmt(xScale(b.x))},${fmt(clampTo(yScale, b.hi))}`)
      .join("");
    const lower = [...s.band]
      .reverse()
      .map((b) => `L${fmt(xScale(b.x))},${fmt(clampTo(yScale, b.lo))}`)
      .join("");
    parts.push(
      el("path", {
        d: `${upper}${lower}Z`,
        fill: s.color,
        "fill-opacity": 0.18,
        stroke: "none",
      }),
    );
  }

  const usable = (p: Pt) => (!logY || p.y > 0) && Number.isFinite(p.x) && Number.isFinite(p.y);

  for (const s of series) {
    const pts = s.line.filter(usable);
    if (pts.length > 1) {
      const d = pts
        .map((p, i) => `${i === 0 ? "M" : "L"}${fmt(xScale(p.x))},${fmt(yScale(p.y))}`)
        .join("");
      parts.push(
        el("path", {
          d,
          fill: "none",
          stroke: s.color,
          "stroke-width": 1.8,
        }),
      );
    }
    for (const w of s.whiskers) {
      if (logY && w.hi <= 0) continue;
      const px = xScale(w.x);
      const y1 = clampTo(yScale, logY ? Math.max(w.lo, Number.MIN_VALUE) : w.lo);
      const y2 = clampTo(yScale, w.hi);
      parts.push(
        el("line", { x1: px, x2: px, y1, y2, stroke: s.color, "stroke-width": 1 }),
      );
      for (const yy of [y1, y2]) {
        parts.push(
          el("line", {
            x1: px - 3,
            x2: px + 3,
            y1: yy,
            y2: yy,
            stroke: s.color,
            "stroke-width": 1,
          }),
        );
      }
    }
    for (const p of s.dots.filter(usable)) {
      parts.push(
        el("circle", {
          cx: xScale(p.x),
          cy: yScale(p.y),
          r: 3.2,
          fill: s.color,
          stroke: "#ffffff",
          "stroke-width": 0.8,
        }),
      );
    }
  }

  parts.push(frame);

  // tick marks + labels
  for (const { v, label } of xt) {
    const px = xScale(v);
    parts.push(
      el("line", {
        x1: px,
        x2: px,
        y1: H - margin.bottom,
        y2: H - margin.bottom + 5,
        stroke: "#333333",
        "stroke-width": 1,
      }),
    );
    parts.push(text(px, H - margin.bottom + 18, label, { "text-anchor": "middle" }));
  }
  for (const { v, label } of yt) {
    const py = yScale(v);
    parts.push(
      el("line", {
        x1: margin.left - 5,
        x2: margin.left,
        y1: py,
        y2: py,
        stroke: "#333333",
        "stroke-width": 1,
      }),
    );
    if (label !== "") {
      parts.push(
        text(margin.left - 8, py + 3.5, label, { "text-anchor": "end" }),
      );
    }
  }

  parts.push(
    text((margin.left + W - margin.right) / 2, H - 14, spec.xLabel ?? ax.xLabel, {
      "font-size": 13,
      "text-anchor": "middle",
    }),
  );
  parts.push(
    text(0, 0, spec.yLabel ?? ax.yLabel, {
      "font-size": 13,
      "text-anchor": "middle",
      transform: `translate(16,${fmt((margin.top + H - margin.bottom) / 2)}) rotate(-90)`,
    }),
  );

  // legend: one entry per drawable role per group
  interface LegendEntry {
    color: string;
    kind: "line" | "dot" | "band";
    label: string;
  }
  const entries: LegendEntry[] = [];
  const tag = (group: string, role: string) => (group === "" ? role : `${group} ${role}`);
  for (const s of series) {
    if (spec.kind === "BlerVsSnr") {
      if (s.line.length > 0)
        entries.push({ color: s.color, kind: "line", label: tag(s.label, "normal approx") });
      if (s.dots.length > 0)
        entries.push({ color: s.color, kind: "dot", label: tag(s.label, "simulated") });
      if (s.band.length > 0)
        entries.push({ color: s.color, kind: "band", label: tag(s.label, "IS-DT band") });
    } else if (s.line.length > 0 || s.dots.length > 0) {
      entries.push({
        color: s.color,
        kind: "line",
        label: s.label === "" ? (spec.y ?? ax.y ?? "") : s.label,
      });
    }
  }
  if (entries.length > 0) {
    const lw = 10 + 22 + 6.7 * Math.max(...entries.map((e) => e.label.length)) + 8;
    const lh = 10 + entries.length * 17;
    const lx = W - margin.right - lw - 6;
    const ly = margin.top + 6;
    parts.push(
      el("rect", {
        x: lx,
        y: ly,
        width: lw,
        height: lh,
        fill: "#ffffff",
        "fill-opacity": 0.85,
        stroke: "#cccccc",
        "stroke-width": 1,
      }),
    );
    entries.forEach((e, i) => {
      const ey = ly + 14 + i * 17;
      if (e.kind === "line") {
        parts.push(
          el("line", {
            x1: lx + 8,
            x2: lx + 28,
            y1: ey,
            y2: ey,
            stroke: e.color,
            "stroke-width": 1.8,
          }),
        );
      } else if (e.kind === "dot") {
        parts.push(
          el("circle", { cx: lx + 18, cy: ey, r: 3.2, fill: e.color }),
        );
      } else {
        parts.push(
          el("rect", {
            x: lx + 8,
            y: ey - 5,
            width: 20,
            height: 10,
            fill: e.color,
            "fill-opacity": 0.18,
          }),
        );
      }
      parts.push(text(lx + 34, ey + 3.5, e.label, { "font-size": 12 }));
    });
  }

  parts.push("</svg>");
  return { svg: parts.join("\n") + "\n", warnings };
}
