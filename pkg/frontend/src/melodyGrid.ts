/** Piano-roll melody grid: two octaves tall, one column per two-beat frame. */

import { BOTTOM_PITCH, EditorState, N_ROWS, TOP_PITCH } from "./state.js";

const CELL_W = 34;
const CELL_H = 14;
const LABEL_W = 36;

const NAMES = ["C", "C#", "D", "Eb", "E", "F", "F#", "G", "Ab", "A", "Bb", "B"];

export function pitchName(midi: number): string {
  return `${NAMES[midi % 12]}${Math.floor(midi / 12) - 1}`;
}

export class MelodyGrid {
  readonly canvas: HTMLCanvasElement;
  private paintValue: boolean | null = null;

  constructor(
    private readonly state: EditorState,
    private readonly onChange: () => void,
  ) {
    this.canvas = document.createElement("canvas");
    this.canvas.className = "melody-grid";
    this.canvas.addEventListener("pointerdown", (e) => this.paint(e, true));
    this.canvas.addEventListener("pointermove", (e) => this.paint(e, false));
    window.addEventListener("pointerup", () => (this.paintValue = null));
    this.render();
  }

  private cellFromEvent(event: PointerEvent): [number, number] | null {
    const rect = this.canvas.getBoundingClientRect();
    const x = event.clientX - rect.left - LABEL_W;
    const y = event.clientY - rect.top;
    if (x < 0) return null;
    const frame = Math.floor(x / CELL_W);
    const row = Math.floor(y / CELL_H);
    if (row < 0 || row >= N_ROWS || frame < 0 || frame >= this.state.frameCount) {
      return null;
    }
    return [row, frame];
  }

  private paint(event: PointerEvent, start: boolean): void {
    if (start) {
      const cell = this.cellFromEvent(event);
      if (!cell) return;
      this.canvas.setPointerCapture(event.pointerId);
      this.paintValue = !this.state.cellAt(cell[0], cell[1]);
      this.applyAt(cell);
    } else {
      if (this.paintValue === null) return;
      const cell = this.cellFromEvent(event);
      if (cell) this.applyAt(cell);
    }
  }

  private applyAt([row, frame]: [number, number]): void {
    if (this.state.cellAt(row, frame) !== this.paintValue) {
      this.state.toggleCell(row, frame);
      this.render();
      this.onChange();
    }
  }

  render(): void {
    const frames = this.state.frameCount;
    this.canvas.width = LABEL_W + frames * CELL_W;
    this.canvas.height = N_ROWS * CELL_H;
    const ctx = this.canvas.getContext("2d");
    if (!ctx) return;

    for (let r = 0; r < N_ROWS; r++) {
      const pitch = TOP_PITCH - r;
      const black = [1, 3, 6, 8, 10].includes(pitch % 12);
      ctx.fillStyle = black ? "#1d2330" : "#252c3d";
      ctx.fillRect(LABEL_W, r * CELL_H, frames * CELL_W, CELL_H);
      if (pitch % 12 === 0) {
        ctx.fillStyle = "#2e3750";
        ctx.fillRect(LABEL_W, r * CELL_H, frames * CELL_W, 1);
      }
      ctx.fillStyle = pitch % 12 === 0 ? "#9fb4d8" : "#5a6478";
      ctx.font = "9px sans-serif";
      ctx.fillText(pitchName(pitch), 2, r * CELL_H + 10);
    }
    for (let f = 0; f <= frames; f++) {
      ctx.fillStyle = f % 2 === 0 ? "#3a4560" : "#2c3550";
      ctx.fillRect(LABEL_W + f * CELL_W, 0, 1, N_ROWS * CELL_H);
    }
    for (let r = 0; r < N_ROWS; r++) {
      for (let f = 0; f < frames; f++) {
        if (this.state.cellAt(r, f)) {
          ctx.fillStyle = "#64d3a2";
          ctx.fillRect(LABEL_W + f * CELL_W + 1, r * CELL_H + 1, CELL_W - 2, CELL_H - 2);
        }
      }
    }
  }
}

export const GRID_GEOMETRY = { CELL_W, CELL_H, LABEL_W };
export { BOTTOM_PITCH };
