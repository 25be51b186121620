// Dashboard view state and the pure rules derived from it.
//
// Every disabled button corresponds exactly to a server-side 409 condition;
// the client never invents numbers, it only reformats what the API returned.

import type { SystemStatus } from "./types.js";

export const POLL_INTERVAL_MS = 2000;
export const STALE_AFTER_MISSES = 3;

export interface DashboardState {
  status: SystemStatus | null;
  missedPolls: number;
  pendingWater: boolean;
  commandError: string | null;
}

export function initialState(): DashboardState {
  return { status: null, missedPolls: 0, pendingWater: false, commandError: null };
}

export function applyPollSuccess(state: DashboardState, status: SystemStatus): DashboardState {
  // A fresh snapshot is the truth; optimistic flags reconcile against it.
  return { ...state, status, missedPolls: 0, pendingWater: false };
}

export function applyPollFailure(state: DashboardState): DashboardState {
  return { ...state, missedPolls: state.missedPolls + 1 };
}

export function applyWaterSubmitted(state: DashboardState): DashboardState {
  return { ...state, pendingWater: true, commandError: null };
}

export function applyCommandError(state: DashboardState, message: string): DashboardState {
  return { ...state, pendingWater: false, commandError: message };
}

export function isStale(state: DashboardState): boolean {
  return state.missedPolls >= STALE_AFTER_MISSES;
}

/** Manual watering 409s unless the controller is idle. */
export function waterDisabled(state: DashboardState): boolean {
  return state.pendingWater || state.status === null || state.status.state !== "idle";
}

/** A check additionally 409s with not_calibrated when no profile is loaded. */
export function checkDisabled(state: DashboardState): boolean {
  return waterDisabled(state) || !state.status!.calibrated;
}

/** Reference capture holds the same lock as watering. */
export function calibrateDisabled(state: DashboardState): boolean {
  return state.pendingWater || state.status === null || state.status.state !== "idle";
}

export function alarmActive(state: DashboardState): boolean {
  return state.status?.state === "alarm";
}

/** Seconds until the next scheduled check, in the daemon's own timebase
 * (server_time and next_check_at may run faster than wall clock when the
 * simulation is time-scaled). Null when no check is scheduled. */
export function countdownSeconds(status: SystemStatus | null): number | null {
  if (!status || status.next_check_at === null) return null;
  const remaining = (Date.parse(status.next_check_at) - Date.parse(status.server_time)) / 1000;
  return Math.max(0, remaining);
}

export type PollListener = (state: DashboardState) => void;

/** Polls /api/status at a fixed cadence; overlapping requests coalesce. */
export class StatusPoller {
  private timer: ReturnType<typeof setInterval> | null = null;
  private inFlight = false;
  state: DashboardState = initialState();

  constructor(
    private readonly fetchStatus: () => Promise<SystemStatus>,
    private readonly onChange: PollListener,
    private readonly intervalMs: number = POLL_INTERVAL_MS,
  ) {}

  start(): void {
    if (this.timer !== null) return;
    void this.pollOnce();
    this.timer = setInterval(() => void this.pollOnce(), this.intervalMs);
  }

  stop(): void {
    if (this.timer !== null) {
      clearInterval(this.timer);
      this.timer = null;
    }
  }

  update(mutate: (state: DashboardState) => DashboardState): void {
    this.state = mutate(this.state);
    this.onChange(this.state);
  }

  async pollOnce(): Promise<void> {
    if (this.inFlight) return;
    this.inFlight = true;
    try {
      const status = await this.fetchStatus();
      this.update((s) => applyPollSuccess(s, status));
    } catch {
      this.update(applyPollFailure);
    } finally {
      this.inFlight = false;
    }
  }
}
