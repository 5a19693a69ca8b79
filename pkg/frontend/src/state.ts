/** Editor state and the pure logic behind the UI.
 *
 * Everything here is DOM-free so the behavior is unit-testable: the melody
 * grid, the drawable contour (always exactly one value per melody frame),
 * request building, and the append-only harmonization history.
 */

import type {
  HarmonizeRequest,
  HarmonizeResponse,
  PresetKind,
} from "./types.js";

/** Grid rows span two octaves, top row B5 (MIDI 83) down to C4 (60). */
export const TOP_PITCH = 83;
export const BOTTOM_PITCH = 60;
export const N_ROWS = TOP_PITCH - BOTTOM_PITCH + 1;

export interface HistoryEntry {
  /** The exact serialized request body that was sent. */
  requestBody: string;
  response: HarmonizeResponse;
  label: string;
}

export class EditorState {
  private cells: boolean[][]; // [row][frame], row 0 = TOP_PITCH
  private contourValues: number[];
  readonly history: HistoryEntry[] = [];

  amplitude = 6.0; // contour ceiling; refreshed from the service
  selectedPreset: PresetKind | null = null;
  samples = 3;
  seed = 0;
  decodeMode: "argmax" | "sample" = "argmax";
  temperature = 1.0;

  constructor(frames = 16) {
    if (frames < 1) throw new Error(`frame count must be >= 1, got ${frames}`);
    this.cells = emptyGrid(frames);
    this.contourValues = new Array(frames).fill(0);
  }

  get frameCount(): number {
    return this.cells[0].length;
  }

  get contour(): readonly number[] {
    return this.contourValues;
  }

  /** Resize the grid; the contour resizes with it (invariant: same length). */
  setFrameCount(frames: number): void {
    if (frames < 1) throw new Error(`frame count must be >= 1, got ${frames}`);
    const old = this.cells;
    this.cells = emptyGrid(frames);
    for (let r = 0; r < N_ROWS; r++) {
      for (let f = 0; f < Math.min(frames, old[0].length); f++) {
        this.cells[r][f] = old[r][f];
      }
    }
    const contour = new Array(frames).fill(0);
    for (let f = 0; f < Math.min(frames, this.contourValues.length); f++) {
      contour[f] = this.contourValues[f];
    }
    this.contourValues = contour;
  }

  cellAt(row: number, frame: number): boolean {
    return this.cells[row][frame];
  }

  toggleCell(row: number, frame: number): void {
    this.cells[row][frame] = !this.cells[row][frame];
  }

  clearMelody(): void {
    this.cells = emptyGrid(this.frameCount);
  }

  /** 13-bit frame rows: 12 chroma bits plus the rest bit. */
  melodyFrames(): number[][] {
    const frames: number[][] = [];
    for (let f = 0; f < this.frameCount; f++) {
      const row = new Array(13).fill(0);
      for (let r = 0; r < N_ROWS; r++) {
        if (this.cells[r][f]) row[(TOP_PITCH - r) % 12] = 1;
      }
      row[12] = row.slice(0, 12).some((b: number) => b === 1) ? 0 : 1;
      frames.push(row);
    }
    return frames;
  }

  melodyIsEmpty(): boolean {
    return this.cells.every((row) => row.every((cell) => !cell));
  }

  /** Set one contour value, clamped into [0, amplitude]. */
  setContourValue(frame: number, value: number): void {
    if (frame < 0 || frame >= this.frameCount) return;
    this.contourValues[frame] = clamp(value, 0, this.amplitude);
    this.selectedPreset = null; // hand-edited, no longer a pure preset
  }

  /** Replace the editable contour with preset values from the service. */
  applyPreset(kind: PresetKind, values: number[]): void {
    if (values.length !== this.frameCount) {
      throw new Error(
        `preset length ${values.length} does not match frame count ${this.frameCount}`,
      );
    }
    this.contourValues = values.map((v) => clamp(v, 0, this.amplitude));
    this.selectedPreset = kind;
  }

  /** The request body; serializing this is what "copy as request" copies. */
  buildRequest(): HarmonizeRequest {
    return {
      melody_frames: this.melodyFrames(),
      contour: [...this.contourValues],
      samples: this.samples,
      seed: this.seed,
      decode_mode: this.decodeMode,
      temperature: this.temperature,
    };
  }

  pushHistory(requestBody: string, response: HarmonizeResponse): HistoryEntry {
    const entry: HistoryEntry = {
      requestBody,
      response,
      label: `#${this.history.length + 1} seed=${this.seed} ${
        this.selectedPreset ?? "drawn"
      }`,
    };
    this.history.push(entry);
    return entry;
  }
}

/** Frames whose argmax chords differ between two samples (diff view). */
export function chordDiff(a: number[], b: number[]): number[] {
  const frames: number[] = [];
  for (let f = 0; f < Math.min(a.length, b.length); f++) {
    if (a[f] !== b[f]) frames.push(f);
  }
  return frames;
}

function emptyGrid(frames: number): boolean[][] {
  return Array.from({ length: N_ROWS }, () => new Array(frames).fill(false));
}

function clamp(value: number, lo: number, hi: number): number {
  return Math.min(hi, Math.max(lo, value));
}
