"""Deterministic synthetic mini-corpus of lead sheets.

Generation rules (all draws from one seeded generator, so a (seed, n_pieces,
n_measures) triple always reproduces the same corpus byte for byte):

* Every piece is ``n_measures`` measures of 4/4, i.e. two-beat frames.
* Harmony lives on the frame grid and is drawn from a functional chord
  lexicon in C major / A minor space (tonic, subdominant, dominant families
  plus two rare color chords), then the whole piece is transposed to a random
  key; the declared key field matches, so key normalization recovers the
  original material.
* Each piece gets an activity profile: the per-frame probability that the
  chord changes (flat low/mid/high, ramps, a bump, or a dip). On a change
  the next chord is sampled from functional move weights; otherwise the chord
  holds. Profiles give the corpus a wide spread of surprise shapes.
* Melody is a random walk over scale tones, favoring chord tones of the
  sounding chord (75%), quantized to quarter/half rhythms, around C5; a few
  frames rest entirely.

The corpus is small enough to train the desk-scale model in minutes yet
structured enough that surprise contours carry real signal: held chords are
common transitions, functional moves are midrange, color moves are rare.
"""

from __future__ import annotations

import argparse
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .leadsheet import (
    ChordEvent,
    Key,
    LeadSheet,
    Note,
    QUALITY_REGISTRY,
    TICKS_PER_BEAT,
    serialize_leadsheet,
)

FRAME_TICKS = 2 * TICKS_PER_BEAT

#: (root_pc, quality_name, function) in normalized C-major space.
LEXICON: tuple[tuple[int, str, str], ...] = (
    (0, "maj", "tonic"),
    (0, "maj7", "tonic"),
    (9, "min", "tonic"),
    (9, "min7", "tonic"),
    (5, "maj", "subdominant"),
    (5, "maj7", "subdominant"),
    (2, "min", "subdominant"),
    (2, "min7", "subdominant"),
    (7, "maj", "dominant"),
    (7, "dom7", "dominant"),
    (7, "sus", "dominant"),
    (4, "min", "dominant"),
    (10, "maj", "color"),
    (3, "maj", "color"),
    (5, "min", "color"),
)

_FUNCTION_MOVES: dict[str, dict[str, float]] = {
    "tonic": {"tonic": 1.0, "subdominant": 3.0, "dominant": 2.5, "color": 0.12},
    "subdominant": {"tonic": 1.5, "subdominant": 0.8, "dominant": 3.0, "color": 0.12},
    "dominant": {"tonic": 3.5, "subdominant": 0.6, "dominant": 0.8, "color": 0.12},
    "color": {"tonic": 1.5, "subdominant": 1.0, "dominant": 1.0, "color": 0.05},
}

SCALE_PCS = (0, 2, 4, 5, 7, 9, 11)

#: Activity profiles and their draw weights; held-chord pieces are
#: oversampled so near-zero contours are well represented in training.
PROFILES: tuple[tuple[str, float], ...] = (
    ("frozen", 2.0),
    ("flat_low", 1.5),
    ("flat_mid", 1.0),
    ("flat_high", 1.5),
    ("ramp_up", 1.0),
    ("ramp_down", 1.0),
    ("bump", 1.0),
    ("dip", 1.0),
)


@dataclass(frozen=True)
class CorpusSpec:
    n_pieces: int = 200
    n_measures: int = 8
    seed: int = 11


def _move_matrix() -> np.ndarray:
    """Unnormalized move weights between lexicon entries (diagonal zero)."""
    n = len(LEXICON)
    weights = np.zeros((n, n))
    for i, (_, _, func_i) in enumerate(LEXICON):
        for j, (_, _, func_j) in enumerate(LEXICON):
            if i == j:
                continue
            members = sum(1 for _, _, f in LEXICON if f == func_j) - (func_i == func_j)
            weights[i, j] = _FUNCTION_MOVES[func_i][func_j] / max(members, 1)
    return weights


_MOVES = _move_matrix()


def _activity(profile: str, n_frames: int) -> np.ndarray:
    t = np.arange(n_frames, dtype=np.float64)
    center = n_frames / 2.0
    sigma = n_frames / 6.0
    bump = np.exp(-((t - center) ** 2) / (2.0 * sigma * sigma))
    if profile == "frozen":
        return np.full(n_frames, 0.015)
    if profile == "flat_low":
        return np.full(n_frames, 0.08)
    if profile == "flat_mid":
        return np.full(n_frames, 0.35)
    if profile == "flat_high":
        return np.full(n_frames, 0.75)
    if profile == "ramp_up":
        return np.linspace(0.05, 0.8, n_frames)
    if profile == "ramp_down":
        return np.linspace(0.8, 0.05, n_frames)
    if profile == "bump":
        return 0.08 + 0.7 * bump
    if profile == "dip":
        return 0.78 - 0.7 * bump
    raise ValueError(f"unknown profile {profile!r}")


_PROFILE_NAMES = tuple(name for name, _ in PROFILES)
_PROFILE_WEIGHTS = np.array([w for _, w in PROFILES])
_PROFILE_WEIGHTS = _PROFILE_WEIGHTS / _PROFILE_WEIGHTS.sum()


def _progression(rng: np.random.Generator, n_frames: int, minor: bool) -> list[int]:
    profile = _PROFILE_NAMES[int(rng.choice(len(_PROFILE_NAMES), p=_PROFILE_WEIGHTS))]
    change_p = _activity(profile, n_frames)
    tonic_pool = [2, 3] if minor else [0, 1]
    state = int(rng.choice(tonic_pool))
    states = [state]
    for t in range(1, n_frames):
        if rng.random() < change_p[t]:
            weights = _MOVES[state]
            state = int(rng.choice(len(LEXICON), p=weights / weights.sum()))
        states.append(state)
    return states


def _chord_tone_pcs(state: int) -> tuple[int, ...]:
    root, quality_name, _ = LEXICON[state]
    quality = QUALITY_REGISTRY[quality_name]
    return tuple(sorted((root + i) % 12 for i in quality.intervals))


def _melody(
    rng: np.random.Generator, states: list[int], n_frames: int
) -> list[Note]:
    notes: list[Note] = []
    pitch = 72  # C5
    for f in range(n_frames):
        if rng.random() < 0.05:
            continue  # rest frame
        pattern = ((2.0,), (1.0, 1.0), (1.0, 1.0))[int(rng.integers(3))]
        beat = 0.0
        for dur in pattern:
            if rng.random() < 0.75:
                pool = _chord_tone_pcs(states[f])
            else:
                pool = SCALE_PCS
            pc = int(pool[int(rng.integers(len(pool)))])
            # nearest realization of pc within a fifth of the walk position
            candidates = [pc + 12 * octave for octave in range(3, 8)]
            pitch = min(candidates, key=lambda p: (abs(p - pitch), p))
            pitch = int(np.clip(pitch, 48, 95))
            start = f * FRAME_TICKS + int(beat * TICKS_PER_BEAT)
            notes.append(Note(start, int(dur * TICKS_PER_BEAT), pitch))
            beat += dur
    return notes


def _events(states: list[int], shift: int) -> list[ChordEvent]:
    events: list[ChordEvent] = []
    run_start = 0
    for f in range(1, len(states) + 1):
        if f < len(states) and states[f] == states[run_start]:
            continue
        root, quality_name, _ = LEXICON[states[run_start]]
        events.append(
            ChordEvent(
                start_ticks=run_start * FRAME_TICKS,
                duration_ticks=(f - run_start) * FRAME_TICKS,
                root_pc=(root + shift) % 12,
                quality=QUALITY_REGISTRY[quality_name],
            )
        )
        run_start = f
    return events


def generate_piece(rng: np.random.Generator, index: int, n_measures: int) -> LeadSheet:
    n_frames = n_measures * 2
    minor = rng.random() < 0.25
    tonic = int(rng.integers(12))
    normalized_tonic = 9 if minor else 0
    shift = (tonic - normalized_tonic) % 12
    if shift > 6:
        shift -= 12

    states = _progression(rng, n_frames, minor)
    melody = [
        Note(n.start_ticks, n.duration_ticks, n.midi_pitch + shift)
        for n in _melody(rng, states, n_frames)
    ]
    chords = _events(states, shift)
    return LeadSheet(
        title=f"mini-{index:03d}",
        key=Key(tonic, "minor" if minor else "major"),
        beats_per_measure=4,
        melody=tuple(melody),
        chords=tuple(chords),
    )


def generate_minicorpus(spec: CorpusSpec = CorpusSpec()) -> list[LeadSheet]:
    rng = np.random.default_rng(spec.seed)
    return [generate_piece(rng, i, spec.n_measures) for i in range(spec.n_pieces)]


def write_minicorpus(out_dir: Path | str, spec: CorpusSpec = CorpusSpec()) -> list[Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = []
    for sheet in generate_minicorpus(spec):
        path = out / f"{sheet.title}.json"
        path.write_text(serialize_leadsheet(sheet), encoding="utf-8")
        paths.append(path)
    return paths


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(description="Generate the synthetic mini-corpus.")
    parser.add_argument("--out-dir", required=True)
    parser.add_argument("--pieces", type=int, default=200)
    parser.add_argument("--measures", type=int, default=8)
    parser.add_argument("--seed", type=int, default=11)
    args = parser.parse_args(argv)
    paths = write_minicorpus(
        args.out_dir, CorpusSpec(args.pieces, args.measures, args.seed)
    )
    print(f"wrote {len(paths)} lead sheets to {args.out_dir}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
