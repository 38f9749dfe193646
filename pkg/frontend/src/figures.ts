/**
 * Four figure builders over the campaign CSV rows.
 *
 * Line figures plot one series per coordinator probability against the
 * slot count, with 95% confidence whiskers from the matching _ci column.
 * The concurrency figure stacks the two/three/four-or-more transmitter
 * fractions per probability.  Builders are pure string producers; nothing
 * here recomputes metrics.
 */

import { CampaignRow, distinct } from "./csv.js";
import { linearScale } from "./scale.js";
import { el, fmt, svgDocument, text } from "./svg.js";

const PALETTE = ["#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd"];

interface Pt {
  x: number;
  y: number;
  ci: number;
}

interface Series {
  label: string;
  color: string;
  points: Pt[];
}

interface Marker {
  x: number;
  y: number;
  label: string;
  attrs: Record<string, string>;
}

function probLabel(p: number): string {
  return `${(p * 100).toFixed(0)}% coordinators`;
}

function seriesByProbability(
  rows: CampaignRow[],
  yCol: keyof CampaignRow,
  ciCol: keyof CampaignRow,
): Series[] {
  return distinct(rows, "pcp_prob").map((p, i) => ({
    label: probLabel(p),
    color: PALETTE[i % PALETTE.length]!,
    points: rows
      .filter((r) => r.pcp_prob === p)
      .sort((a, b) => a.n_abft - b.n_abft)
      .map((r) => ({ x: r.n_abft, y: r[yCol], ci: r[ciCol] })),
  }));
}

interface PanelBox {
  x: number;
  y: number;
  w: number;
  h: number;
}

interface PanelOpts {
  box: PanelBox;
  title: string;
  xLabel: string;
  yLabel: string;
  series: Series[];
  yFloor?: number;
  yTickFormat?: (v: number) => string;
  marker?: Marker;
  legend?: boolean;
}

const AXIS = "#444444";
const GRID = "#dddddd";

function linePanel(o: PanelOpts): string {
  const m = { left: 52, right: 12, top: 22, bottom: 36 };
  const plot = {
    x: o.box.x + m.left,
    y: o.box.y + m.top,
    w: o.box.w - m.left - m.right,
    h: o.box.h - m.top - m.bottom,
  };
  const xs = [...new Set(o.series.flatMap((s) => s.points.map((p) => p.x)))].sort(
    (a, b) => a - b,
  );
  const ys = o.series.flatMap((s) => s.points.flatMap((p) => [p.y - p.ci, p.y + p.ci]));
  let yLo = Math.min(...ys);
  let yHi = Math.max(...ys);
  if (o.yFloor !== undefined) {
    yLo = Math.min(o.yFloor, yLo);
  }
  if (yHi === yLo) {
    yHi = yLo + 1;
  }
  const pad = 0.06 * (yHi - yLo);
  const sx = linearScale(
    [xs[0] ?? 0, xs[xs.length - 1] ?? 1],
    [plot.x, plot.x + plot.w],
  );
  const sy = linearScale([yLo, yHi + pad], [plot.y + plot.h, plot.y]);
  const out: string[] = [];

  out.push(text(o.box.x + m.left, o.box.y + 14, o.title, { "font-weight": "bold" }));
  for (const t of sy.ticks) {
    const yy = sy.map(t);
    out.push(el("line", { x1: plot.x, y1: yy, x2: plot.x + plot.w, y2: yy, stroke: GRID }));
    const label = o.yTickFormat ? o.yTickFormat(t) : String(t);
    out.push(text(plot.x - 6, yy + 3, label, { "text-anchor": "end" }));
  }
  // slot counts are small integers, so ticks sit on the data positions
  for (const t of xs) {
    const xx = sx.map(t);
    out.push(
      el("line", { x1: xx, y1: plot.y + plot.h, x2: xx, y2: plot.y + plot.h + 4, stroke: AXIS }),
    );
    out.push(text(xx, plot.y + plot.h + 16, String(t), { "text-anchor": "middle" }));
  }
  out.push(
    el("line", {
      x1: plot.x, y1: plot.y + plot.h, x2: plot.x + plot.w, y2: plot.y + plot.h,
      stroke: AXIS,
    }),
  );
  out.push(el("line", { x1: plot.x, y1: plot.y, x2: plot.x, y2: plot.y + plot.h, stroke: AXIS }));
  out.push(
    text(plot.x + plot.w / 2, o.box.y + o.box.h - 6, o.xLabel, { "text-anchor": "middle" }),
  );
  out.push(
    el(
      "g",
      { transform: `translate(${o.box.x + 14},${plot.y + plot.h / 2}) rotate(-90)` },
      [text(0, 0, o.yLabel, { "text-anchor": "middle" })],
    ),
  );

  for (const s of o.series) {
    const pts = s.points.map((p) => ({ px: sx.map(p.x), py: sy.map(p.y), p }));
    if (pts.length > 1) {
      const d = pts
        .map((q, i) => `${i === 0 ? "M" : "L"}${fmt(q.px)} ${fmt(q.py)}`)
        .join(" ");
      out.push(el("path", { d, fill: "none", stroke: s.color, "stroke-width": 1.5 }));
    }
    for (const q of pts) {
      if (q.p.ci > 0) {
        const lo = sy.map(q.p.y - q.p.ci);
        const hi = sy.map(q.p.y + q.p.ci);
        out.push(
          el("line", {
            x1: q.px, y1: lo, x2: q.px, y2: hi,
            stroke: s.color, class: "ci",
          }),
        );
        for (const yy of [lo, hi]) {
          out.push(
            el("line", {
              x1: q.px - 3, y1: yy, x2: q.px + 3, y2: yy,
              stroke: s.color, class: "ci",
            }),
          );
        }
      }
      out.push(el("circle", { cx: q.px, cy: q.py, r: 2.5, fill: s.color }));
    }
  }

  if (o.legend !== false) {
    const lx = plot.x + plot.w - 130;
    o.series.forEach((s, i) => {
      const ly = plot.y + 8 + 14 * i;
      out.push(el("line", { x1: lx, y1: ly, x2: lx + 16, y2: ly, stroke: s.color, "stroke-width": 1.5 }));
      out.push(text(lx + 20, ly + 3, s.label));
    });
  }

  if (o.marker) {
    const mx = sx.map(o.marker.x);
    const my = sy.map(o.marker.y);
    out.push(
      el("circle", {
        cx: mx, cy: my, r: 6,
        fill: "none", stroke: "#000000", "stroke-width": 1.5,
        class: "peak-marker",
        ...o.marker.attrs,
      }),
    );
    out.push(text(mx + 9, my - 8, o.marker.label, { "font-weight": "bold" }));
  }
  return el("g", {}, out);
}

const W = 640;
const PANEL_H = 250;

export function handshakesFigure(rows: CampaignRow[]): string {
  const sections: [string, keyof CampaignRow, keyof CampaignRow][] = [
    ["Beacon responders per coordinator", "beacons_mean", "beacons_ci"],
    ["Feedback responders per coordinator", "fbck_mean", "fbck_ci"],
    ["Granted periods per coordinator", "acks_mean", "acks_ci"],
  ];
  const panels = sections.map(([title, yCol, ciCol], i) =>
    linePanel({
      box: { x: 0, y: i * PANEL_H, w: W, h: PANEL_H },
      title,
      xLabel: "contention slots per interval",
      yLabel: "stations",
      series: seriesByProbability(rows, yCol, ciCol),
      yFloor: 0,
      legend: i === 0,
    }),
  );
  return svgDocument(W, PANEL_H * sections.length, panels);
}

export function delayFigure(rows: CampaignRow[]): string {
  const panel = linePanel({
    box: { x: 0, y: 0, w: W, h: 420 },
    title: "Delay to the first granted service period",
    xLabel: "contention slots per interval",
    yLabel: "delay (ms)",
    series: seriesByProbability(rows, "delay_ms_mean", "delay_ms_ci"),
    yFloor: 0,
  });
  return svgDocument(W, 420, [panel]);
}

/** Row holding the column-wide maximum of npdr_mean (first on ties). */
export function npdrPeak(rows: CampaignRow[]): CampaignRow {
  let best = rows[0];
  if (best === undefined) {
    throw new Error("no rows to take the delivery-ratio peak over");
  }
  for (const r of rows) {
    if (r.npdr_mean > best.npdr_mean) {
      best = r;
    }
  }
  return best;
}

export function npdrFigure(rows: CampaignRow[]): string {
  const peak = npdrPeak(rows);
  const panel = linePanel({
    box: { x: 0, y: 0, w: W, h: 420 },
    title: "Capacity-normalized delivery ratio",
    xLabel: "contention slots per interval",
    yLabel: "delivered fraction of capacity",
    series: seriesByProbability(rows, "npdr_mean", "npdr_ci"),
    yFloor: 0,
    marker: {
      x: peak.n_abft,
      y: peak.npdr_mean,
      label: `peak at ${peak.n_abft} slots`,
      attrs: {
        "data-peak-slot": String(peak.n_abft),
        "data-peak-prob": peak.pcp_prob.toFixed(2),
      },
    },
  });
  return svgDocument(W, 420, [panel]);
}

/** Slot count whose rows feed the concurrency bars: 4 when present. */
export function concurrencySlot(rows: CampaignRow[]): number {
  const slots = distinct(rows, "n_abft");
  return slots.includes(4) ? 4 : slots[0]!;
}

const CONC_SEGMENTS: [keyof CampaignRow, string, string][] = [
  ["conc2", "two transmitters", "#1f77b4"],
  ["conc3", "three transmitters", "#ff7f0e"],
  ["conc4", "four or more", "#d62728"],
];

export function concurrencyFigure(rows: CampaignRow[]): string {
  const slot = concurrencySlot(rows);
  const picked = rows
    .filter((r) => r.n_abft === slot)
    .sort((a, b) => a.pcp_prob - b.pcp_prob);
  const box = { x: 0, y: 0, w: W, h: 420 };
  const m = { left: 64, right: 12, top: 28, bottom: 40 };
  const plot = {
    x: box.x + m.left,
    y: box.y + m.top,
    w: box.w - m.left - m.right,
    h: box.h - m.top - m.bottom,
  };
  const peakTotal = Math.max(
    ...picked.map((r) => r.conc2 + r.conc3 + r.conc4),
    1e-6,
  );
  const sy = linearScale([0, peakTotal * 1.15], [plot.y + plot.h, plot.y]);
  const out: string[] = [];
  out.push(
    text(box.x + m.left, box.y + 16,
      `Share of time with concurrent bursts (${slot}-slot intervals)`,
      { "font-weight": "bold" }),
  );
  for (const t of sy.ticks) {
    const yy = sy.map(t);
    out.push(el("line", { x1: plot.x, y1: yy, x2: plot.x + plot.w, y2: yy, stroke: GRID }));
    out.push(
      text(plot.x - 6, yy + 3, `${(t * 100).toFixed(1)}%`, { "text-anchor": "end" }),
    );
  }
  const band = plot.w / Math.max(1, picked.length);
  const barW = band * 0.5;
  picked.forEach((r, i) => {
    const cx = plot.x + band * (i + 0.5);
    let top = sy.map(0);
    for (const [col, , fill] of CONC_SEGMENTS) {
      const h = sy.map(0) - sy.map(r[col]);
      if (h > 0) {
        top -= h;
        out.push(
          el("rect", {
            x: cx - barW / 2, y: top, width: barW, height: h,
            fill,
            "data-level": col,
            "data-prob": r.pcp_prob.toFixed(2),
          }),
        );
      }
    }
    out.push(
      text(cx, plot.y + plot.h + 16, `${(r.pcp_prob * 100).toFixed(0)}%`, {
        "text-anchor": "middle",
      }),
    );
  });
  out.push(
    el("line", {
      x1: plot.x, y1: plot.y + plot.h, x2: plot.x + plot.w, y2: plot.y + plot.h,
      stroke: AXIS,
    }),
  );
  out.push(el("line", { x1: plot.x, y1: plot.y, x2: plot.x, y2: plot.y + plot.h, stroke: AXIS }));
  out.push(
    text(plot.x + plot.w / 2, box.y + box.h - 8, "coordinator probability", {
      "text-anchor": "middle",
    }),
  );
  out.push(
    el(
      "g",
      { transform: `translate(${box.x + 18},${plot.y + plot.h / 2}) rotate(-90)` },
      [text(0, 0, "share of snapshot time", { "text-anchor": "middle" })],
    ),
  );
  CONC_SEGMENTS.forEach(([, label, fill], i) => {
    const lx = plot.x + plot.w - 150;
    const ly = plot.y + 8 + 15 * i;
    out.push(el("rect", { x: lx, y: ly - 8, width: 10, height: 10, fill }));
    out.push(text(lx + 15, ly, label));
  });
  return svgDocument(W, 420, [el("g", {}, out)]);
}
