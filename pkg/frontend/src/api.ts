/** Thin fetch client; the UI talks only to the service's HTTP API. */

import type {
  HarmonizeRequest,
  HarmonizeResponse,
  HealthResponse,
  PresetsResponse,
} from "./types.js";

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly detail: string,
  ) {
    super(`${status}: ${detail}`);
  }
}

async function parseError(response: Response): Promise<never> {
  let detail = response.statusText;
  try {
    const body = await response.json();
    if (typeof body.detail === "string") detail = body.detail;
    else if (body.detail) detail = JSON.stringify(body.detail);
  } catch {
    // non-JSON error body; keep the status text
  }
  throw new ApiError(response.status, detail);
}

export class ServiceClient {
  constructor(readonly baseUrl: string = "") {}

  async health(): Promise<HealthResponse> {
    const response = await fetch(`${this.baseUrl}/health`);
    if (!response.ok) return parseError(response);
    return response.json();
  }

  async presets(length: number, amplitude?: number): Promise<PresetsResponse> {
    const params = new URLSearchParams({ length: String(length) });
    if (amplitude !== undefined) params.set("amplitude", String(amplitude));
    const response = await fetch(`${this.baseUrl}/presets?${params}`);
    if (!response.ok) return parseError(response);
    return response.json();
  }

  /** POST the exact serialized body; returns both the parsed and raw response. */
  async harmonizeRaw(
    body: string,
  ): Promise<{ parsed: HarmonizeResponse; raw: string }> {
    const response = await fetch(`${this.baseUrl}/harmonize`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body,
    });
    if (!response.ok) return parseError(response);
    const raw = await response.text();
    return { parsed: JSON.parse(raw), raw };
  }

  async harmonize(
    request: HarmonizeRequest,
  ): Promise<{ parsed: HarmonizeResponse; raw: string; body: string }> {
    const body = JSON.stringify(request);
    const result = await this.harmonizeRaw(body);
    return { ...result, body };
  }
}
