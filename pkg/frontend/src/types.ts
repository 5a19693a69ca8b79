/** Wire types for the harmonization service. */

export type PresetKind =
  | "sigmoid"
  | "sigmoid_reversed"
  | "zero"
  | "max"
  | "normal_bump"
  | "normal_bump_reversed";

export const PRESET_KINDS: PresetKind[] = [
  "sigmoid",
  "sigmoid_reversed",
  "zero",
  "max",
  "normal_bump",
  "normal_bump_reversed",
];

export interface HealthResponse {
  version: string;
  model: string | null;
  requests: number;
}

export interface PresetsResponse {
  length: number;
  amplitude: number;
  presets: Record<PresetKind, number[]>;
}

export interface HarmonizeRequest {
  melody_frames: number[][];
  contour: number[];
  samples: number;
  seed: number;
  decode_mode: "argmax" | "sample";
  temperature: number;
}

export interface SampleMetrics {
  che?: number;
  cc?: number;
  ctd?: number;
  ctnctr?: number;
  pcs?: number;
  mctd?: number;
  error?: string;
}

export interface HarmonizeSample {
  chords: number[];
  labels: string[];
  realized_contour: number[];
  metrics: SampleMetrics;
}

export interface Adherence {
  pooled?: { rho: number; p_value: number; n: number };
  per_piece?: ({ rho: number; p_value: number; n: number } | null)[];
  error?: string;
}

export interface HarmonizeResponse {
  given_contour: number[];
  samples: HarmonizeSample[];
  adherence: Adherence;
  model: string;
}
