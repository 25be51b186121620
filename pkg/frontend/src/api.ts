// Thin typed client over the daemon's JSON API.

import type {
  CalibrationResult, ControllerConfig, HistoryRecord, MoistureReading,
  SystemStatus, WateringSession,
} from "./types.js";

export class ApiError extends Error {
  constructor(readonly code: string, message: string, readonly status: number) {
    super(message);
    this.name = "ApiError";
  }
}

async function request<T>(base: string, path: string, init?: RequestInit): Promise<T> {
  const resp = await fetch(base + path, {
    cache: "no-store",
    headers: init?.body ? { "content-type": "application/json" } : undefined,
    ...init,
  });
  const body = await resp.json();
  if (!resp.ok) {
    throw new ApiError(body.code ?? "internal", body.message ?? "request failed", resp.status);
  }
  return body as T;
}

export class HydradClient {
  constructor(readonly base: string = "") {}

  getStatus(): Promise<SystemStatus> {
    return request(this.base, "/api/status");
  }

  checkNow(): Promise<MoistureReading> {
    return request(this.base, "/api/check", { method: "POST" });
  }

  water(durationS: number): Promise<WateringSession> {
    return request(this.base, "/api/water", {
      method: "POST",
      body: JSON.stringify({ duration_s: durationS }),
    });
  }

  getConfig(): Promise<ControllerConfig> {
    return request(this.base, "/api/config");
  }

  putConfig(update: Partial<ControllerConfig>): Promise<ControllerConfig> {
    return request(this.base, "/api/config", {
      method: "PUT",
      body: JSON.stringify(update),
    });
  }

  getHistory(params: { from?: string; to?: string; kinds?: string } = {}): Promise<HistoryRecord[]> {
    const query = new URLSearchParams();
    if (params.from) query.set("from", params.from);
    if (params.to) query.set("to", params.to);
    if (params.kinds) query.set("kinds", params.kinds);
    const suffix = query.toString() ? `?${query.toString()}` : "";
    return request(this.base, `/api/history${suffix}`);
  }

  calibrate(phase: "dry" | "wet", nSamples?: number): Promise<CalibrationResult> {
    const body: Record<string, unknown> = { phase };
    if (nSamples !== undefined) body.n_samples = nSamples;
    return request(this.base, "/api/calibrate", {
      method: "POST",
      body: JSON.stringify(body),
    });
  }

  clearAlarm(): Promise<SystemStatus> {
    return request(this.base, "/api/alarm/clear", { method: "POST" });
  }
}
