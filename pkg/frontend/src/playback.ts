/** Optional in-browser chord playback; decorative, not load-bearing. */

const ROOTS: Record<string, number> = {
  C: 0, "C#": 1, D: 2, Eb: 3, E: 4, F: 5,
  "F#": 6, G: 7, Ab: 8, A: 9, Bb: 10, B: 11,
};

const INTERVALS: Record<string, number[]> = {
  maj: [0, 4, 7], min: [0, 3, 7], aug: [0, 4, 8], dim: [0, 3, 6],
  sus: [0, 5, 7], maj7: [0, 4, 7, 11], min7: [0, 3, 7, 10], dom7: [0, 4, 7, 10],
  sus2: [0, 2, 7], sus4: [0, 5, 7], dim7: [0, 3, 6, 9], hdim7: [0, 3, 6, 10],
  maj6: [0, 4, 7, 9], min6: [0, 3, 7, 9], add9: [0, 4, 7, 14],
  minmaj7: [0, 3, 7, 11], aug7: [0, 4, 8, 10], "7sus4": [0, 5, 7, 10],
  dom9: [0, 4, 7, 10, 14], maj9: [0, 4, 7, 11, 14], min9: [0, 3, 7, 10, 14],
  dom11: [0, 4, 7, 10, 14, 17], dom13: [0, 4, 7, 10, 14, 21], power: [0, 7],
};

/** "Eb:min7/Bb" -> MIDI pitches around octave 4, or null for N.C. */
export function labelToPitches(label: string): number[] | null {
  if (label === "N.C.") return null;
  const [rootPart, qualityPart] = label.split(":");
  const quality = qualityPart?.split("/")[0];
  const root = ROOTS[rootPart];
  const intervals = quality ? INTERVALS[quality] : undefined;
  if (root === undefined || !intervals) return null;
  return intervals.map((i) => 48 + root + i);
}

export class ChordPlayer {
  private context: AudioContext | null = null;

  get available(): boolean {
    return typeof AudioContext !== "undefined";
  }

  /** Play a chord sequence at 2 beats per chord, 110 bpm. */
  play(labels: string[]): void {
    if (!this.available) return;
    this.context ??= new AudioContext();
    const ctx = this.context;
    const beat = 60 / 110;
    const start = ctx.currentTime + 0.05;
    labels.forEach((label, f) => {
      const pitches = labelToPitches(label);
      if (!pitches) return;
      const t0 = start + f * 2 * beat;
      const t1 = t0 + 2 * beat * 0.95;
      for (const midi of pitches) {
        const osc = ctx.createOscillator();
        const gain = ctx.createGain();
        osc.type = "triangle";
        osc.frequency.value = 440 * Math.pow(2, (midi - 69) / 12);
        gain.gain.setValueAtTime(0, t0);
        gain.gain.linearRampToValueAtTime(0.06 / pitches.length, t0 + 0.02);
        gain.gain.setValueAtTime(0.06 / pitches.length, t1 - 0.1);
        gain.gain.linearRampToValueAtTime(0, t1);
        osc.connect(gain).connect(ctx.destination);
        osc.start(t0);
        osc.stop(t1);
      }
    });
  }
}
