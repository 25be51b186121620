// API payload shapes, mirroring the JSON schemas in ../schemas/.

export type ControllerState = "idle" | "reading" | "watering" | "settling" | "alarm";
export type Trigger = "automatic" | "manual";

export interface MoistureReading {
  code: number;
  voltage: number;
  percent: number | null;
  at: string;
}

export interface WateringEvent {
  trigger: Trigger;
  cycle: number;
  duration_s: number;
  volume_l: number;
  moisture_before: number | null;
  moisture_after: number | null;
  at: string;
}

export interface WateringSession {
  trigger: Trigger;
  started_at: string;
  cycles: WateringEvent[];
}

export interface SystemStatus {
  state: ControllerState;
  calibrated: boolean;
  last_reading: MoistureReading | null;
  next_check_at: string | null;
  active_session: WateringSession | null;
  alarm_reason: string | null;
  last_error: string | null;
  server_time: string;
}

export interface ControllerConfig {
  threshold_pct: number;
  check_interval_s: number;
  base_duration_s: number;
  gain_s_per_pct: number;
  settle_delay_s: number;
  max_cycles: number;
  max_pump_on_s: number;
  target_margin_pct: number;
}

export type RecordKind = "reading" | "watering" | "transition" | "error";

export interface HistoryRecord {
  kind: RecordKind;
  ts: string;
  payload: Record<string, unknown>;
}

export interface CalibrationProfile {
  raw_dry: number;
  raw_wet: number;
  created_at: string;
  label: string;
}

export interface CalibrationResult {
  phase: "dry" | "wet";
  raw_code: number;
  complete: boolean;
  profile: CalibrationProfile | null;
}
