// Client-side mirror of the server's controller-config invariants, so a bad
// draft is rejected before any request is made. The server re-validates.

import type { ControllerConfig } from "./types.js";

export type DraftErrors = Partial<Record<keyof ControllerConfig, string>>;

export function validateConfigDraft(draft: ControllerConfig): DraftErrors {
  const errors: DraftErrors = {};
  for (const [key, value] of Object.entries(draft)) {
    if (typeof value !== "number" || Number.isNaN(value)) {
      errors[key as keyof ControllerConfig] = "must be a number";
    }
  }
  if (errors.threshold_pct === undefined && !(draft.threshold_pct > 0 && draft.threshold_pct < 100)) {
    errors.threshold_pct = "must be between 0 and 100 (exclusive)";
  }
  if (errors.check_interval_s === undefined && !(draft.check_interval_s > 0)) {
    errors.check_interval_s = "must be greater than 0";
  }
  if (errors.base_duration_s === undefined && !(draft.base_duration_s >= 0)) {
    errors.base_duration_s = "must be at least 0";
  }
  if (errors.gain_s_per_pct === undefined && !(draft.gain_s_per_pct >= 0)) {
    errors.gain_s_per_pct = "must be at least 0";
  }
  if (!errors.base_duration_s && !errors.gain_s_per_pct
      && draft.base_duration_s + draft.gain_s_per_pct <= 0) {
    errors.base_duration_s = "base duration and gain cannot both be 0";
  }
  if (errors.settle_delay_s === undefined && !(draft.settle_delay_s >= 0)) {
    errors.settle_delay_s = "must be at least 0";
  }
  if (errors.max_cycles === undefined
      && !(Number.isInteger(draft.max_cycles) && draft.max_cycles >= 1 && draft.max_cycles <= 20)) {
    errors.max_cycles = "must be a whole number from 1 to 20";
  }
  if (errors.max_pump_on_s === undefined && !(draft.max_pump_on_s > 0)) {
    errors.max_pump_on_s = "must be greater than 0";
  }
  if (errors.target_margin_pct === undefined && !(draft.target_margin_pct >= 0)) {
    errors.target_margin_pct = "must be at least 0";
  }
  if (!errors.threshold_pct && !errors.target_margin_pct
      && draft.threshold_pct + draft.target_margin_pct > 100) {
    errors.target_margin_pct = "threshold plus margin cannot exceed 100";
  }
  return errors;
}

export function validateWaterDuration(durationS: number, maxPumpOnS: number): string | null {
  if (typeof durationS !== "number" || Number.isNaN(durationS)) return "must be a number";
  if (!(durationS > 0)) return "must be greater than 0";
  if (durationS > maxPumpOnS) return `must be at most ${maxPumpOnS} s (pump safety limit)`;
  return null;
}
