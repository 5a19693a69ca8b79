/** Wires the editor, service client, and results panel together. */

import { ApiError, ServiceClient } from "./api.js";
import { ContourEditor } from "./contourEditor.js";
import { MelodyGrid } from "./melodyGrid.js";
import { ChordPlayer } from "./playback.js";
import { ResultsView } from "./resultsView.js";
import { EditorState, HistoryEntry } from "./state.js";
import { PRESET_KINDS, PresetKind } from "./types.js";

const params = new URLSearchParams(location.search);
const client = new ServiceClient(params.get("service") ?? "http://127.0.0.1:8000");
const state = new EditorState(16);
const player = new ChordPlayer();

const app = document.getElementById("app")!;
const banner = document.createElement("div");
banner.className = "banner hidden";
app.append(banner);

function showError(message: string): void {
  banner.textContent = message;
  banner.classList.remove("hidden");
}

function clearError(): void {
  banner.classList.add("hidden");
}

// --- layout -----------------------------------------------------------------

const toolbar = document.createElement("div");
toolbar.className = "toolbar";
app.append(toolbar);

const grid = new MelodyGrid(state, () => syncContourLength());
const editor = new ContourEditor(state, () => results.renderHistory());
const results = new ResultsView(
  state,
  (sample) => {
    editor.overlay = [sample.realized_contour];
    editor.render();
  },
  (entry) => void replay(entry),
);

const gridTitle = section("Melody (click/drag to toggle notes)");
const contourTitle = section("Surprise contour (drag to draw; orange = given, blue = realized)");
app.append(gridTitle, grid.canvas, contourTitle, editor.canvas, results.root);

function section(text: string): HTMLElement {
  const el = document.createElement("h3");
  el.textContent = text;
  return el;
}

// --- toolbar ----------------------------------------------------------------

function labeledInput(
  label: string,
  value: string,
  width: number,
  onInput: (v: string) => void,
): HTMLElement {
  const wrap = document.createElement("label");
  wrap.className = "field";
  wrap.textContent = label;
  const input = document.createElement("input");
  input.value = value;
  input.style.width = `${width}px`;
  input.addEventListener("change", () => onInput(input.value));
  wrap.append(input);
  return wrap;
}

toolbar.append(
  labeledInput("frames", String(state.frameCount), 44, (v) => {
    const frames = Math.max(1, Math.min(64, Number(v) || 16));
    state.setFrameCount(frames);
    grid.render();
    editor.overlay = [];
    editor.render();
  }),
  labeledInput("samples", String(state.samples), 36, (v) => {
    state.samples = Math.max(1, Math.min(16, Number(v) || 1));
  }),
  labeledInput("seed", String(state.seed), 56, (v) => {
    state.seed = Number(v) || 0;
  }),
);

const modeSelect = document.createElement("select");
for (const mode of ["argmax", "sample"]) {
  const option = document.createElement("option");
  option.value = mode;
  option.textContent = mode;
  modeSelect.append(option);
}
modeSelect.addEventListener("change", () => {
  state.decodeMode = modeSelect.value as "argmax" | "sample";
});
toolbar.append(modeSelect);

const presetBar = document.createElement("div");
presetBar.className = "presets";
for (const kind of PRESET_KINDS) {
  const button = document.createElement("button");
  button.textContent = kind.replace(/_/g, " ");
  button.addEventListener("click", () => void applyPreset(kind));
  presetBar.append(button);
}
toolbar.append(presetBar);

const harmonizeButton = document.createElement("button");
harmonizeButton.className = "harmonize";
harmonizeButton.textContent = "harmonize";
harmonizeButton.addEventListener("click", () => void submit());
toolbar.append(harmonizeButton);

const playButton = document.createElement("button");
playButton.textContent = "play last";
playButton.addEventListener("click", () => {
  const last = state.history[state.history.length - 1];
  if (last) player.play(last.response.samples[0].labels);
});
toolbar.append(playButton);

// --- behavior ----------------------------------------------------------------

async function applyPreset(kind: PresetKind): Promise<void> {
  try {
    clearError();
    // presets come from the service so given contours match its amplitudes
    const response = await client.presets(state.frameCount);
    state.amplitude = response.amplitude;
    state.applyPreset(kind, response.presets[kind]);
    editor.overlay = [];
    editor.render();
  } catch (error) {
    showError(describe(error));
  }
}

function syncContourLength(): void {
  // contour length is maintained by EditorState; nothing to do beyond redraw
  editor.render();
}

let inFlight = false;
let queued: string | null = null;

async function submit(): Promise<void> {
  const body = JSON.stringify(state.buildRequest());
  if (inFlight) {
    queued = body; // latest request wins once the current one finishes
    return;
  }
  await send(body);
}

async function send(body: string): Promise<void> {
  inFlight = true;
  harmonizeButton.disabled = true;
  try {
    clearError();
    const { parsed, raw } = await client.harmonizeRaw(body);
    void raw;
    const entry = state.pushHistory(body, parsed);
    results.renderHistory();
    results.renderEntry(entry);
    editor.overlay = [parsed.samples[0].realized_contour];
    editor.render();
  } catch (error) {
    showError(describe(error));
  } finally {
    inFlight = false;
    harmonizeButton.disabled = false;
    if (queued !== null) {
      const next = queued;
      queued = null;
      void send(next);
    }
  }
}

async function replay(entry: HistoryEntry): Promise<void> {
  try {
    clearError();
    const { parsed } = await client.harmonizeRaw(entry.requestBody);
    const again = state.pushHistory(entry.requestBody, parsed);
    results.renderHistory();
    results.renderEntry(again);
  } catch (error) {
    showError(describe(error));
  }
}

function describe(error: unknown): string {
  if (error instanceof ApiError) {
    if (error.status === 409) return "No model loaded on the service. POST /load first.";
    if (error.status === 422) return `Request rejected: ${error.detail}`;
    return `Service error (${error.status}): ${error.detail}`;
  }
  return `Service unreachable: ${String(error)}`;
}

async function boot(): Promise<void> {
  try {
    const health = await client.health();
    if (!health.model) {
      showError("Service is up but no model is loaded; harmonize will fail until /load.");
    }
    const presets = await client.presets(state.frameCount).catch(() => null);
    if (presets) state.amplitude = presets.amplitude;
    editor.render();
  } catch (error) {
    showError(describe(error));
  }
}

void boot();
