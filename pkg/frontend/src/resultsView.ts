/** Harmonization results: chords on the timeline, metrics, rho/p, history. */

import { GRID_GEOMETRY } from "./melodyGrid.js";
import { chordDiff, EditorState, HistoryEntry } from "./state.js";
import type { HarmonizeSample } from "./types.js";

const { CELL_W, LABEL_W } = GRID_GEOMETRY;

const METRIC_ORDER = ["che", "cc", "ctd", "ctnctr", "pcs", "mctd"] as const;

export class ResultsView {
  readonly root: HTMLElement;
  private readonly chordRow: HTMLElement;
  private readonly statsBox: HTMLElement;
  private readonly historyBox: HTMLElement;
  private readonly diffBox: HTMLElement;
  private selected: number[] = [];

  constructor(
    private readonly state: EditorState,
    private readonly onShowSample: (sample: HarmonizeSample, entry: HistoryEntry) => void,
    private readonly onReplay: (entry: HistoryEntry) => void,
  ) {
    this.root = document.createElement("div");
    this.root.className = "results";
    this.chordRow = div("chord-row");
    this.statsBox = div("stats");
    this.historyBox = div("history");
    this.diffBox = div("diff");
    this.root.append(this.chordRow, this.statsBox, this.historyBox, this.diffBox);
  }

  /** Chord labels under the grid, merged across repeated frames. */
  renderChords(sample: HarmonizeSample): void {
    this.chordRow.replaceChildren();
    this.chordRow.style.paddingLeft = `${LABEL_W}px`;
    let f = 0;
    while (f < sample.labels.length) {
      let span = 1;
      while (
        f + span < sample.labels.length &&
        sample.chords[f + span] === sample.chords[f]
      ) {
        span++;
      }
      const cell = div("chord-cell");
      cell.style.width = `${span * CELL_W - 2}px`;
      cell.textContent = sample.labels[f];
      this.chordRow.append(cell);
      f += span;
    }
  }

  renderEntry(entry: HistoryEntry, sampleIndex = 0): void {
    const sample = entry.response.samples[sampleIndex];
    this.renderChords(sample);
    this.statsBox.replaceChildren();

    const adherence = entry.response.adherence;
    const corr = div("correlation");
    if (adherence.pooled) {
      corr.textContent =
        `Spearman rho = ${adherence.pooled.rho.toFixed(3)}, ` +
        `p = ${adherence.pooled.p_value.toExponential(2)}, ` +
        `n = ${adherence.pooled.n}`;
    } else {
      corr.textContent = `adherence: ${adherence.error ?? "unavailable"}`;
    }
    this.statsBox.append(corr);

    const table = document.createElement("table");
    table.className = "metrics";
    const head = table.insertRow();
    const body = table.insertRow();
    for (const name of METRIC_ORDER) {
      head.insertCell().textContent = name.toUpperCase();
      const value = sample.metrics[name];
      body.insertCell().textContent =
        value === undefined ? "-" : Number(value).toFixed(3);
    }
    if (sample.metrics.error) {
      const note = div("metric-error");
      note.textContent = `metrics: ${sample.metrics.error}`;
      this.statsBox.append(note);
    }
    this.statsBox.append(table);

    const tabs = div("sample-tabs");
    entry.response.samples.forEach((s, i) => {
      const tab = document.createElement("button");
      tab.textContent = `sample ${i}`;
      tab.className = i === sampleIndex ? "active" : "";
      tab.addEventListener("click", () => {
        this.renderEntry(entry, i);
        this.onShowSample(s, entry);
      });
      tabs.append(tab);
    });
    this.statsBox.append(tabs);

    const copy = document.createElement("button");
    copy.textContent = "copy as request";
    copy.title = "exact body that reproduces this response";
    copy.addEventListener("click", () => {
      void navigator.clipboard?.writeText(entry.requestBody);
    });
    const replay = document.createElement("button");
    replay.textContent = "replay";
    replay.addEventListener("click", () => this.onReplay(entry));
    this.statsBox.append(copy, replay);
  }

  renderHistory(): void {
    this.historyBox.replaceChildren();
    const title = div("history-title");
    title.textContent = `history (${this.state.history.length})`;
    this.historyBox.append(title);
    this.state.history.forEach((entry, i) => {
      const row = document.createElement("button");
      row.className = "history-row";
      const rho = entry.response.adherence.pooled?.rho;
      row.textContent = `${entry.label}${rho !== undefined ? ` rho=${rho.toFixed(2)}` : ""}`;
      row.addEventListener("click", (event) => {
        if (event.shiftKey) {
          this.selected = [...this.selected.slice(-1), i];
          this.renderDiff();
        } else {
          this.selected = [i];
          this.renderEntry(entry);
          this.onShowSample(entry.response.samples[0], entry);
        }
      });
      this.historyBox.append(row);
    });
  }

  /** Side-by-side chords for two history entries; differing frames marked. */
  private renderDiff(): void {
    this.diffBox.replaceChildren();
    if (this.selected.length < 2) return;
    const [i, j] = this.selected;
    const a = this.state.history[i].response.samples[0];
    const b = this.state.history[j].response.samples[0];
    const changed = chordDiff(a.chords, b.chords);
    const title = div("diff-title");
    title.textContent = `diff #${i + 1} vs #${j + 1}: ${changed.length} frames differ`;
    this.diffBox.append(title);
    for (const [tag, sample] of [
      [`#${i + 1}`, a],
      [`#${j + 1}`, b],
    ] as const) {
      const row = div("diff-row");
      const label = document.createElement("span");
      label.className = "diff-tag";
      label.textContent = tag;
      row.append(label);
      sample.labels.forEach((text, f) => {
        const cell = document.createElement("span");
        cell.className = changed.includes(f) ? "diff-cell changed" : "diff-cell";
        cell.textContent = text;
        row.append(cell);
      });
      this.diffBox.append(row);
    }
  }
}

function div(className: string): HTMLDivElement {
  const el = document.createElement("div");
  el.className = className;
  return el;
}
