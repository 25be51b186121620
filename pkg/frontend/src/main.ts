// Browser entry point: binds the API client and pure view logic to the DOM.

import { ApiError, HydradClient } from "./api.js";
import { buildChartModel, renderChartSvg } from "./chart.js";
import {
  alarmActive, applyCommandError, applyWaterSubmitted, calibrateDisabled,
  checkDisabled, countdownSeconds, isStale, StatusPoller, waterDisabled,
  type DashboardState,
} from "./state.js";
import type { ControllerConfig } from "./types.js";
import { validateConfigDraft, validateWaterDuration } from "./validate.js";
import {
  applyCaptureFailure, applyCaptureSuccess, beginCapture, initialWizard,
  type WizardState,
} from "./wizard.js";

const client = new HydradClient("");

const $ = <T extends HTMLElement>(id: string): T => {
  const el = document.getElementById(id);
  if (!el) throw new Error(`missing element #${id}`);
  return el as T;
};

const els = {
  badge: $("state-badge"),
  stale: $("stale-banner"),
  alarm: $("alarm-panel"),
  alarmReason: $("alarm-reason"),
  clearAlarm: $<HTMLButtonElement>("clear-alarm"),
  gaugeFill: $("gauge-fill"),
  gaugeLabel: $("gauge-label"),
  readingMeta: $("reading-meta"),
  countdown: $("countdown"),
  lastError: $("last-error"),
  checkBtn: $<HTMLButtonElement>("check-now"),
  waterForm: $<HTMLFormElement>("water-form"),
  waterSeconds: $<HTMLInputElement>("water-seconds"),
  waterBtn: $<HTMLButtonElement>("water-btn"),
  waterMsg: $("water-msg"),
  chartHost: $("chart-host"),
  windowSelect: $<HTMLSelectElement>("history-window"),
  configForm: $<HTMLFormElement>("config-form"),
  configSave: $<HTMLButtonElement>("config-save"),
  configMsg: $("config-msg"),
  wizardStep: $("wizard-step"),
  wizardBtn: $<HTMLButtonElement>("wizard-capture"),
  wizardMsg: $("wizard-msg"),
  wizardCodes: $("wizard-codes"),
};

const CONFIG_FIELDS: (keyof ControllerConfig)[] = [
  "threshold_pct", "check_interval_s", "base_duration_s", "gain_s_per_pct",
  "settle_delay_s", "max_cycles", "max_pump_on_s", "target_margin_pct",
];

let liveConfig: ControllerConfig | null = null;
let wizard: WizardState = initialWizard();

// ---- status rendering -------------------------------------------------------

function fmtCountdown(seconds: number | null): string {
  if (seconds === null) return "—";
  const m = Math.floor(seconds / 60);
  const s = Math.floor(seconds % 60);
  return `${m}:${String(s).padStart(2, "0")}`;
}

function render(state: DashboardState): void {
  const status = state.status;
  els.stale.hidden = !isStale(state);
  els.badge.textContent = state.pendingWater ? "watering…" : status?.state ?? "connecting";
  els.badge.dataset.state = status?.state ?? "unknown";

  const alarm = alarmActive(state);
  els.alarm.hidden = !alarm;
  if (alarm) els.alarmReason.textContent = status?.alarm_reason ?? "";

  const pct = status?.last_reading?.percent ?? null;
  els.gaugeFill.style.width = pct === null ? "0%" : `${pct}%`;
  els.gaugeLabel.textContent = pct === null ? "–" : `${pct.toFixed(1)}%`;
  if (status?.last_reading) {
    const r = status.last_reading;
    els.readingMeta.textContent =
      `raw ${r.code} · ${r.voltage.toFixed(3)} V · ${new Date(r.at).toLocaleTimeString()}`;
  } else {
    els.readingMeta.textContent = status?.calibrated === false
      ? "not calibrated yet — run the wizard below"
      : "no reading yet";
  }
  els.countdown.textContent = fmtCountdown(countdownSeconds(status));
  els.lastError.textContent = state.commandError ?? status?.last_error ?? "";

  els.checkBtn.disabled = checkDisabled(state);
  els.waterBtn.disabled = waterDisabled(state);
  els.wizardBtn.disabled = calibrateDisabled(state) || wizard.busy || wizard.step === "done";
}

const poller = new StatusPoller(() => client.getStatus(), render);

// ---- commands ----------------------------------------------------------------

els.checkBtn.addEventListener("click", async () => {
  try {
    await client.checkNow();
  } catch (err) {
    poller.update((s) => applyCommandError(s, describe(err)));
  }
  void poller.pollOnce();
  void refreshHistory();
});

els.clearAlarm.addEventListener("click", async () => {
  try {
    await client.clearAlarm();
  } catch (err) {
    poller.update((s) => applyCommandError(s, describe(err)));
  }
  void poller.pollOnce();
});

els.waterForm.addEventListener("submit", async (event) => {
  event.preventDefault();
  const duration = Number(els.waterSeconds.value);
  const problem = validateWaterDuration(duration, liveConfig?.max_pump_on_s ?? Infinity);
  if (problem) {
    els.waterMsg.textContent = `duration ${problem}`;
    return;
  }
  els.waterMsg.textContent = "";
  poller.update(applyWaterSubmitted); // optimistic; reconciled by the next poll
  try {
    const session = await client.water(duration);
    const cycle = session.cycles[0];
    els.waterMsg.textContent =
      cycle ? `dispensed ${(cycle.volume_l * 1000).toFixed(0)} mL` : "done";
  } catch (err) {
    poller.update((s) => applyCommandError(s, describe(err)));
    els.waterMsg.textContent = describe(err);
  }
  void poller.pollOnce();
  void refreshHistory();
});

function describe(err: unknown): string {
  if (err instanceof ApiError) return `${err.code}: ${err.message}`;
  return err instanceof Error ? err.message : String(err);
}

// ---- history chart ------------------------------------------------------------

async function refreshHistory(): Promise<void> {
  const hours = Number(els.windowSelect.value);
  const to = new Date();
  const from = new Date(to.getTime() - hours * 3600_000);
  // With a time-scaled daemon "now" can be far from wall clock; anchor the
  // window on the server's clock when we have it.
  const serverNow = poller.state.status?.server_time;
  const end = serverNow ? new Date(serverNow) : to;
  const start = new Date(end.getTime() - hours * 3600_000);
  try {
    const records = await client.getHistory({
      from: start.toISOString(),
      to: end.toISOString(),
      kinds: "reading,watering",
    });
    const model = buildChartModel(records);
    if (model.empty) {
      els.chartHost.innerHTML = `<p class="empty">No readings in the last ${hours} h yet.</p>`;
    } else {
      els.chartHost.innerHTML = renderChartSvg(model, liveConfig?.threshold_pct ?? null);
    }
  } catch (err) {
    els.chartHost.innerHTML = `<p class="empty">history unavailable: ${describe(err)}</p>`;
  }
}

els.windowSelect.addEventListener("change", () => void refreshHistory());
setInterval(() => void refreshHistory(), 10_000);

// ---- config form ----------------------------------------------------------------

function readDraft(): ControllerConfig {
  const draft = {} as Record<string, number>;
  for (const field of CONFIG_FIELDS) {
    const input = els.configForm.elements.namedItem(field) as HTMLInputElement;
    draft[field] = input.value === "" ? NaN : Number(input.value);
  }
  return draft as unknown as ControllerConfig;
}

function fillConfigForm(config: ControllerConfig): void {
  for (const field of CONFIG_FIELDS) {
    const input = els.configForm.elements.namedItem(field) as HTMLInputElement;
    input.value = String(config[field]);
  }
}

function showDraftErrors(): boolean {
  const errors = validateConfigDraft(readDraft());
  const lines = Object.entries(errors).map(([field, msg]) => `${field}: ${msg}`);
  els.configMsg.textContent = lines.join(" · ");
  els.configSave.disabled = lines.length > 0;
  return lines.length === 0;
}

els.configForm.addEventListener("input", showDraftErrors);

els.configForm.addEventListener("submit", async (event) => {
  event.preventDefault();
  if (!showDraftErrors()) return; // invalid drafts never reach the server
  try {
    liveConfig = await client.putConfig(readDraft());
    fillConfigForm(liveConfig);
    els.configMsg.textContent = "saved";
  } catch (err) {
    els.configMsg.textContent = describe(err);
  }
});

// ---- calibration wizard ----------------------------------------------------------

function renderWizard(): void {
  const labels: Record<WizardState["step"], string> = {
    dry: "Step 1 of 2: probe in completely dry soil, then capture the 0% reference.",
    wet: "Step 2 of 2: probe in fully saturated soil, then capture the 100% reference.",
    done: "Calibration complete.",
  };
  els.wizardStep.textContent = labels[wizard.step];
  els.wizardBtn.textContent = wizard.busy ? "capturing…"
    : wizard.step === "wet" ? "Capture wet reference" : "Capture dry reference";
  els.wizardMsg.textContent = wizard.error ?? "";
  const parts: string[] = [];
  if (wizard.dryCode !== null) parts.push(`dry = ${wizard.dryCode}`);
  if (wizard.wetCode !== null) parts.push(`wet = ${wizard.wetCode}`);
  if (wizard.profile) parts.push(`profile saved ${wizard.profile.created_at}`);
  els.wizardCodes.textContent = parts.join(" · ");
  render(poller.state);
}

els.wizardBtn.addEventListener("click", async () => {
  if (wizard.step === "done") return;
  const phase = wizard.step;
  wizard = beginCapture(wizard);
  renderWizard();
  try {
    wizard = applyCaptureSuccess(wizard, await client.calibrate(phase));
  } catch (err) {
    if (err instanceof ApiError) {
      wizard = applyCaptureFailure(wizard, err.code, err.message);
    } else {
      wizard = applyCaptureFailure(wizard, "network", describe(err));
    }
  }
  renderWizard();
  void poller.pollOnce();
});

// ---- boot --------------------------------------------------------------------------

async function boot(): Promise<void> {
  try {
    liveConfig = await client.getConfig();
    fillConfigForm(liveConfig);
    showDraftErrors();
  } catch {
    els.configMsg.textContent = "config unavailable";
  }
  renderWizard();
  poller.start();
  void refreshHistory();
}

void boot();
