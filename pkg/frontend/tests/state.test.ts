import { expect, test } from "vitest";

import {
  applyCommandError, applyPollFailure, applyPollSuccess, applyWaterSubmitted,
  alarmActive, calibrateDisabled, checkDisabled, countdownSeconds, initialState,
  isStale, StatusPoller, waterDisabled,
} from "../src/state.js";
import type { SystemStatus } from "../src/types.js";

function status(overrides: Partial<SystemStatus> = {}): SystemStatus {
  return {
    state: "idle",
    calibrated: true,
    last_reading: null,
    next_check_at: "2025-08-21T19:13:20+00:00",
    active_session: null,
    alarm_reason: null,
    last_error: null,
    server_time: "2025-08-21T18:43:20+00:00",
    ...overrides,
  };
}

test("before the first poll everything is disabled", () => {
  const s = initialState();
  expect(waterDisabled(s)).toBe(true);
  expect(checkDisabled(s)).toBe(true);
  expect(calibrateDisabled(s)).toBe(true);
});

test("idle calibrated status enables commands", () => {
  const s = applyPollSuccess(initialState(), status());
  expect(waterDisabled(s)).toBe(false);
  expect(checkDisabled(s)).toBe(false);
  expect(calibrateDisabled(s)).toBe(false);
});

test("water button disabled in every non-idle state (the server 409 set)", () => {
  for (const state of ["reading", "watering", "settling", "alarm"] as const) {
    const s = applyPollSuccess(initialState(), status({ state }));
    expect(waterDisabled(s), state).toBe(true);
  }
});

test("check additionally requires calibration", () => {
  const s = applyPollSuccess(initialState(), status({ calibrated: false }));
  expect(waterDisabled(s)).toBe(false);
  expect(checkDisabled(s)).toBe(true);
});

test("optimistic watering disables buttons until the next poll reconciles", () => {
  let s = applyPollSuccess(initialState(), status());
  s = applyWaterSubmitted(s);
  expect(waterDisabled(s)).toBe(true);
  s = applyPollSuccess(s, status({ state: "watering" }));
  expect(s.pendingWater).toBe(false);
  expect(waterDisabled(s)).toBe(true); // now driven by server truth
  s = applyPollSuccess(s, status());
  expect(waterDisabled(s)).toBe(false); // re-enabled after the session
});

test("stale banner appears after three missed polls", () => {
  let s = applyPollSuccess(initialState(), status());
  s = applyPollFailure(s);
  s = applyPollFailure(s);
  expect(isStale(s)).toBe(false);
  s = applyPollFailure(s);
  expect(isStale(s)).toBe(true);
  s = applyPollSuccess(s, status());
  expect(isStale(s)).toBe(false);
});

test("command errors surface and clear the optimistic flag", () => {
  let s = applyWaterSubmitted(applyPollSuccess(initialState(), status()));
  s = applyCommandError(s, "conflict: busy");
  expect(s.pendingWater).toBe(false);
  expect(s.commandError).toContain("conflict");
});

test("alarm status drives the alarm panel", () => {
  const s = applyPollSuccess(initialState(),
    status({ state: "alarm", alarm_reason: "moisture not restored", next_check_at: null }));
  expect(alarmActive(s)).toBe(true);
  expect(waterDisabled(s)).toBe(true);
});

test("countdown uses the server clock pair, not the browser clock", () => {
  // 30 virtual minutes ahead regardless of what Date.now() says
  expect(countdownSeconds(status())).toBe(1800);
  expect(countdownSeconds(status({ next_check_at: null }))).toBeNull();
  expect(countdownSeconds(null)).toBeNull();
  // never negative, even if the poll caught an overdue schedule
  expect(countdownSeconds(status({ next_check_at: "2025-08-21T18:43:00+00:00" }))).toBe(0);
});

test("poller coalesces overlapping requests and reports state changes", async () => {
  let resolveFetch: ((s: SystemStatus) => void) | null = null;
  const seen: boolean[] = [];
  const poller = new StatusPoller(
    () => new Promise((resolve) => { resolveFetch = resolve; }),
    (s) => seen.push(isStale(s)),
    999999,
  );
  const first = poller.pollOnce();
  const second = poller.pollOnce(); // coalesced: must not issue a second fetch
  resolveFetch!(status());
  await first;
  await second;
  expect(seen).toHaveLength(1);
  expect(poller.state.status?.state).toBe("idle");
});
