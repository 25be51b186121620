// Moisture-over-time chart: reading records become points on a line,
// watering records become vertical markers. Rendered as inline SVG so it
// needs no canvas or charting dependency and stays testable off-browser.

import type { HistoryRecord } from "./types.js";

export interface ChartPoint {
  t: number; // epoch ms
  pct: number;
}

export interface ChartMarker {
  t: number;
  volumeL: number | null;
}

export interface ChartModel {
  points: ChartPoint[];
  markers: ChartMarker[];
  tMin: number;
  tMax: number;
  empty: boolean;
}

export function buildChartModel(records: HistoryRecord[]): ChartModel {
  const points: ChartPoint[] = [];
  const markers: ChartMarker[] = [];
  for (const record of records) {
    if (record.kind === "reading") {
      const pct = record.payload.percent;
      if (typeof pct === "number") {
        points.push({ t: Date.parse(record.ts), pct });
      }
    } else if (record.kind === "watering") {
      const at = record.payload.at;
      const volume = record.payload.volume_l;
      markers.push({
        t: Date.parse(typeof at === "string" ? at : record.ts),
        volumeL: typeof volume === "number" ? volume : null,
      });
    }
  }
  const times = [...points.map((p) => p.t), ...markers.map((m) => m.t)];
  const empty = times.length === 0;
  return {
    points,
    markers,
    tMin: empty ? 0 : Math.min(...times),
    tMax: empty ? 0 : Math.max(...times),
    empty,
  };
}

const WIDTH = 640;
const HEIGHT = 220;
const PAD = { left: 36, right: 10, top: 10, bottom: 22 };

function xScale(model: ChartModel): (t: number) => number {
  const span = Math.max(1, model.tMax - model.tMin);
  const inner = WIDTH - PAD.left - PAD.right;
  return (t) => PAD.left + ((t - model.tMin) / span) * inner;
}

function yScale(pct: number): number {
  const inner = HEIGHT - PAD.top - PAD.bottom;
  return PAD.top + (1 - pct / 100) * inner;
}

function fmtTime(t: number): string {
  const d = new Date(t);
  return `${String(d.getUTCHours()).padStart(2, "0")}:${String(d.getUTCMinutes()).padStart(2, "0")}`;
}

/** Inline SVG for a non-empty model; callers show their own empty state. */
export function renderChartSvg(model: ChartModel, thresholdPct: number | null = null): string {
  const x = xScale(model);
  const parts: string[] = [];
  parts.push(`<svg viewBox="0 0 ${WIDTH} ${HEIGHT}" class="history-chart" role="img" ` +
    `aria-label="Moisture history">`);
  for (const pct of [0, 25, 50, 75, 100]) {
    const y = yScale(pct);
    parts.push(`<line class="grid" x1="${PAD.left}" y1="${y}" x2="${WIDTH - PAD.right}" y2="${y}"/>`);
    parts.push(`<text class="axis" x="4" y="${y + 4}">${pct}</text>`);
  }
  if (thresholdPct !== null) {
    const y = yScale(thresholdPct);
    parts.push(`<line class="threshold" x1="${PAD.left}" y1="${y}" x2="${WIDTH - PAD.right}" y2="${y}"/>`);
  }
  for (const marker of model.markers) {
    const mx = x(marker.t);
    const title = marker.volumeL === null ? "watering" : `watering ${(marker.volumeL * 1000).toFixed(0)} mL`;
    parts.push(`<line class="marker" x1="${mx}" y1="${PAD.top}" x2="${mx}" ` +
      `y2="${HEIGHT - PAD.bottom}"><title>${title}</title></line>`);
  }
  if (model.points.length > 0) {
    const path = model.points
      .map((p, i) => `${i === 0 ? "M" : "L"}${x(p.t).toFixed(1)},${yScale(p.pct).toFixed(1)}`)
      .join(" ");
    parts.push(`<path class="series" d="${path}"/>`);
  }
  for (const point of model.points) {
    parts.push(`<circle class="pt" cx="${x(point.t).toFixed(1)}" cy="${yScale(point.pct).toFixed(1)}" r="3">` +
      `<title>${point.pct.toFixed(1)}% at ${fmtTime(point.t)}</title></circle>`);
  }
  if (!model.empty) {
    parts.push(`<text class="axis" x="${PAD.left}" y="${HEIGHT - 6}">${fmtTime(model.tMin)}</text>`);
    const endLabel = fmtTime(model.tMax);
    parts.push(`<text class="axis axis-end" x="${WIDTH - PAD.right}" y="${HEIGHT - 6}" ` +
      `text-anchor="end">${endLabel}</text>`);
  }
  parts.push("</svg>");
  return parts.join("");
}
