// Two-step calibration wizard: capture the dry reference, then the wet one.
// A degenerate pair (wet code not below dry) comes back as a 400; the wizard
// explains it and lets the operator redo the failed step.

import type { CalibrationProfile, CalibrationResult } from "./types.js";

export type WizardStep = "dry" | "wet" | "done";

export interface WizardState {
  step: WizardStep;
  dryCode: number | null;
  wetCode: number | null;
  busy: boolean;
  error: string | null;
  profile: CalibrationProfile | null;
}

export function initialWizard(): WizardState {
  return { step: "dry", dryCode: null, wetCode: null, busy: false, error: null, profile: null };
}

export function beginCapture(state: WizardState): WizardState {
  return { ...state, busy: true, error: null };
}

export function applyCaptureSuccess(state: WizardState, result: CalibrationResult): WizardState {
  const next: WizardState = {
    ...state,
    busy: false,
    error: null,
    dryCode: result.phase === "dry" ? result.raw_code : state.dryCode,
    wetCode: result.phase === "wet" ? result.raw_code : state.wetCode,
  };
  if (result.complete) {
    return { ...next, step: "done", profile: result.profile };
  }
  return { ...next, step: result.phase === "dry" ? "wet" : "dry" };
}

export function applyCaptureFailure(state: WizardState, code: string, message: string): WizardState {
  const explanation = code === "bad_request"
    ? "The wet reading was not below the dry reading, so the two points cannot "
      + "span a 0-100% scale. Check the probe is actually in saturated soil and retry."
    : message;
  // stay on the same step so the operator can retry just this capture
  return { ...state, busy: false, error: explanation };
}
