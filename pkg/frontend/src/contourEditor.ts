/** Drawable surprise-contour timeline, aligned to the melody grid columns. */

import { GRID_GEOMETRY } from "./melodyGrid.js";
import { EditorState } from "./state.js";

const HEIGHT = 120;
const { CELL_W, LABEL_W } = GRID_GEOMETRY;

export class ContourEditor {
  readonly canvas: HTMLCanvasElement;
  private drawing = false;
  /** Realized contours to overlay (set after a harmonization). */
  overlay: number[][] = [];

  constructor(
    private readonly state: EditorState,
    private readonly onChange: () => void,
  ) {
    this.canvas = document.createElement("canvas");
    this.canvas.className = "contour-editor";
    this.canvas.addEventListener("pointerdown", (e) => {
      this.drawing = true;
      this.canvas.setPointerCapture(e.pointerId);
      this.applyPointer(e);
    });
    this.canvas.addEventListener("pointermove", (e) => {
      if (this.drawing) this.applyPointer(e);
    });
    window.addEventListener("pointerup", () => (this.drawing = false));
    this.render();
  }

  private applyPointer(event: PointerEvent): void {
    const rect = this.canvas.getBoundingClientRect();
    const x = event.clientX - rect.left - LABEL_W;
    const y = event.clientY - rect.top;
    const frame = Math.floor(x / CELL_W);
    const value = ((HEIGHT - y) / HEIGHT) * this.state.amplitude;
    this.state.setContourValue(frame, value); // state clamps into [0, M]
    this.overlay = [];
    this.render();
    this.onChange();
  }

  private valueToY(value: number): number {
    const m = this.state.amplitude || 1;
    return HEIGHT - (Math.min(value, m) / m) * HEIGHT;
  }

  render(): void {
    const frames = this.state.frameCount;
    this.canvas.width = LABEL_W + frames * CELL_W;
    this.canvas.height = HEIGHT;
    const ctx = this.canvas.getContext("2d");
    if (!ctx) return;

    ctx.fillStyle = "#1a2030";
    ctx.fillRect(0, 0, this.canvas.width, HEIGHT);
    for (let f = 0; f <= frames; f++) {
      ctx.fillStyle = "#2c3550";
      ctx.fillRect(LABEL_W + f * CELL_W, 0, 1, HEIGHT);
    }
    ctx.fillStyle = "#5a6478";
    ctx.font = "9px sans-serif";
    ctx.fillText(this.state.amplitude.toFixed(2), 2, 10);
    ctx.fillText("0", 2, HEIGHT - 3);

    this.traceContour(ctx, [...this.state.contour], "#f2b05e", 2);
    const overlayColors = ["#64a9d3", "#b07ee0", "#d36a6a"];
    this.overlay.forEach((values, i) => {
      this.traceContour(ctx, values, overlayColors[i % overlayColors.length], 1);
    });
  }

  private traceContour(
    ctx: CanvasRenderingContext2D,
    values: number[],
    color: string,
    width: number,
  ): void {
    ctx.strokeStyle = color;
    ctx.lineWidth = width;
    ctx.beginPath();
    values.forEach((v, f) => {
      const x = LABEL_W + f * CELL_W + CELL_W / 2;
      const y = this.valueToY(v);
      if (f === 0) ctx.moveTo(x, y);
      else ctx.lineTo(x, y);
    });
    ctx.stroke();
    ctx.fillStyle = color;
    values.forEach((v, f) => {
      const x = LABEL_W + f * CELL_W + CELL_W / 2;
      ctx.fillRect(x - 1.5, this.valueToY(v) - 1.5, 3, 3);
    });
  }
}
