import { expect, test } from "vitest";

import { buildChartModel, renderChartSvg } from "../src/chart.js";
import type { HistoryRecord } from "../src/types.js";
import fixture from "./fixtures/history_six_readings_one_watering.json";

const records = fixture as HistoryRecord[];

test("fixture run charts six points and one watering marker", () => {
  const model = buildChartModel(records);
  expect(model.empty).toBe(false);
  expect(model.points).toHaveLength(6);
  expect(model.markers).toHaveLength(1);
});

test("rendered svg carries one element per point and marker", () => {
  const svg = renderChartSvg(buildChartModel(records), 40);
  expect(svg.match(/class="pt"/g)).toHaveLength(6);
  expect(svg.match(/class="marker"/g)).toHaveLength(1);
  expect(svg).toContain('class="threshold"');
  expect(svg.startsWith("<svg")).toBe(true);
});

test("points are ordered and within the percent scale", () => {
  const model = buildChartModel(records);
  const times = model.points.map((p) => p.t);
  expect(times).toEqual([...times].sort((a, b) => a - b));
  for (const p of model.points) {
    expect(p.pct).toBeGreaterThanOrEqual(0);
    expect(p.pct).toBeLessThanOrEqual(100);
  }
  expect(model.tMin).toBeLessThanOrEqual(model.tMax);
});

test("marker lands inside the charted time range", () => {
  const model = buildChartModel(records);
  const marker = model.markers[0]!;
  expect(marker.t).toBeGreaterThanOrEqual(model.tMin);
  expect(marker.t).toBeLessThanOrEqual(model.tMax);
  expect(marker.volumeL).toBeGreaterThan(0);
});

test("empty history produces an empty model, not a crash", () => {
  const model = buildChartModel([]);
  expect(model.empty).toBe(true);
  expect(model.points).toHaveLength(0);
  expect(model.markers).toHaveLength(0);
});

test("uncalibrated readings (null percent) are skipped, not charted as zero", () => {
  const model = buildChartModel([
    { kind: "reading", ts: "2025-08-21T18:00:00+00:00", payload: { percent: null } },
    { kind: "reading", ts: "2025-08-21T18:30:00+00:00", payload: { percent: 41.5 } },
  ]);
  expect(model.points).toHaveLength(1);
  expect(model.points[0]!.pct).toBe(41.5);
});
