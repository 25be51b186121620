import { expect, test } from "vitest";

import {
  applyCaptureFailure, applyCaptureSuccess, beginCapture, initialWizard,
} from "../src/wizard.js";

test("dry then wet completes the wizard with a profile", () => {
  let w = initialWizard();
  expect(w.step).toBe("dry");
  w = beginCapture(w);
  expect(w.busy).toBe(true);
  w = applyCaptureSuccess(w, { phase: "dry", raw_code: 22400, complete: false, profile: null });
  expect(w.step).toBe("wet");
  expect(w.dryCode).toBe(22400);
  expect(w.busy).toBe(false);
  w = applyCaptureSuccess(beginCapture(w), {
    phase: "wet", raw_code: 9600, complete: true,
    profile: { raw_dry: 22400, raw_wet: 9600, created_at: "2025-08-21T18:43:20+00:00", label: "" },
  });
  expect(w.step).toBe("done");
  expect(w.wetCode).toBe(9600);
  expect(w.profile?.raw_dry).toBe(22400);
});

test("a degenerate wet capture explains itself and allows retry", () => {
  let w = applyCaptureSuccess(initialWizard(),
    { phase: "dry", raw_code: 22400, complete: false, profile: null });
  w = beginCapture(w);
  w = applyCaptureFailure(w, "bad_request", "raw_dry (9600) must be strictly above raw_wet (22400)");
  expect(w.step).toBe("wet"); // still on the failed step
  expect(w.busy).toBe(false);
  expect(w.error).toMatch(/not below the dry reading/);
  expect(w.dryCode).toBe(22400); // the good reference was kept
  // retry with the probe actually in water
  w = applyCaptureSuccess(beginCapture(w), {
    phase: "wet", raw_code: 9600, complete: true,
    profile: { raw_dry: 22400, raw_wet: 9600, created_at: "2025-08-21T18:50:00+00:00", label: "" },
  });
  expect(w.step).toBe("done");
  expect(w.error).toBeNull();
});

test("non-validation failures surface their message", () => {
  let w = beginCapture(initialWizard());
  w = applyCaptureFailure(w, "conflict", "controller is busy");
  expect(w.error).toBe("controller is busy");
  expect(w.step).toBe("dry");
});
