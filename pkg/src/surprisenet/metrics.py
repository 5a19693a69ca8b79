"""Objective harmonization metrics.

Three chord-progression metrics (histogram entropy, chord coverage, tonal
distance between consecutive chords) and three melody/chord harmonicity
metrics (chord-tone ratio, pitch consonance score, melody-chord tonal
distance), all over the two-beat frame grid.

Chroma vectors are embedded on the circle of fifths and both third circles
(radii 1, 1, 0.5); Euclidean distance in that 6-D space approximates
perceived harmonic distance. Entropies are in nats. NO_CHORD frames carry no
chord to compare against and are excluded throughout.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, asdict
from typing import Literal, Sequence

import numpy as np

from .leadsheet import NO_CHORD_INDEX, ChordVocabulary, FrameSequence


class MetricError(ValueError):
    """Metric undefined for the given input (e.g. nothing to compare)."""


# Radii of the fifth / minor-third / major-third circles.
R_FIFTH = 1.0
R_MINOR_THIRD = 1.0
R_MAJOR_THIRD = 0.5


def _centroid_basis() -> np.ndarray:
    l = np.arange(12, dtype=np.float64)
    return np.stack(
        [
            R_FIFTH * np.sin(l * 7.0 * np.pi / 6.0),
            R_FIFTH * np.cos(l * 7.0 * np.pi / 6.0),
            R_MINOR_THIRD * np.sin(l * 3.0 * np.pi / 2.0),
            R_MINOR_THIRD * np.cos(l * 3.0 * np.pi / 2.0),
            R_MAJOR_THIRD * np.sin(l * 2.0 * np.pi / 3.0),
            R_MAJOR_THIRD * np.cos(l * 2.0 * np.pi / 3.0),
        ],
        axis=1,
    )


_BASIS = _centroid_basis()
_BASIS.setflags(write=False)


def tonal_centroid(chroma: Sequence[float] | np.ndarray) -> np.ndarray:
    """6-D tonal centroid of a chroma vector (L1-normalized weights)."""
    weights = np.asarray(chroma, dtype=np.float64)
    if weights.shape != (12,):
        raise MetricError(f"chroma must have 12 entries, got shape {weights.shape}")
    if (weights < 0).any():
        raise MetricError("chroma weights must be nonnegative")
    total = weights.sum()
    if total == 0.0:
        raise MetricError("cannot take the tonal centroid of an all-zero chroma")
    return (weights / total) @ _BASIS


def chord_chroma(vocab: ChordVocabulary, index: int) -> np.ndarray:
    """0/1 chroma of a vocabulary symbol (all zeros for NO_CHORD)."""
    chroma = np.zeros(12, dtype=np.float64)
    for pc in vocab.pitch_classes(index):
        chroma[pc] = 1.0
    return chroma


def _pc_centroid(pc: int) -> np.ndarray:
    return _BASIS[pc]


def _durations(n: int, durations: Sequence[float] | None) -> np.ndarray:
    if durations is None:
        return np.full(n, 2.0)
    arr = np.asarray(durations, dtype=np.float64)
    if arr.shape != (n,):
        raise MetricError(f"expected {n} durations, got shape {arr.shape}")
    if (arr <= 0).any():
        raise MetricError("durations must be positive")
    return arr


# ---------------------------------------------------------------------------
# Chord-progression metrics
# ---------------------------------------------------------------------------


def che(chords: Sequence[int], durations: Sequence[float] | None = None) -> float:
    """Entropy of the duration-weighted chord histogram (NO_CHORD excluded)."""
    indices = np.asarray(chords, dtype=np.int64)
    if indices.size == 0:
        raise MetricError("chord sequence is empty")
    weights = _durations(indices.size, durations)
    histogram: dict[int, float] = {}
    for idx, w in zip(indices, weights):
        if idx == NO_CHORD_INDEX:
            continue
        histogram[int(idx)] = histogram.get(int(idx), 0.0) + float(w)
    total = sum(histogram.values())
    if total == 0.0:
        return 0.0
    entropy = 0.0
    for w in histogram.values():
        p = w / total
        entropy -= p * math.log(p)
    return max(0.0, entropy)


def cc(chords: Sequence[int]) -> int:
    """Number of distinct chord symbols used (NO_CHORD excluded)."""
    indices = np.asarray(chords, dtype=np.int64)
    if indices.size == 0:
        raise MetricError("chord sequence is empty")
    return len(set(int(i) for i in indices) - {NO_CHORD_INDEX})


def ctd(
    chords: Sequence[int],
    vocab: ChordVocabulary,
    pairing: Literal["frames", "changes"] = "frames",
) -> float:
    """Mean tonal distance between consecutive chords.

    ``frames`` pairs consecutive frames after dropping NO_CHORD (held chords
    contribute 0); ``changes`` first collapses runs of the same symbol.
    """
    indices = [int(i) for i in chords if int(i) != NO_CHORD_INDEX]
    if pairing == "changes":
        collapsed = [indices[0]] if indices else []
        for idx in indices[1:]:
            if idx != collapsed[-1]:
                collapsed.append(idx)
        indices = collapsed
    if len(indices) < 2:
        raise MetricError("tonal distance needs at least two usable chords")
    centroids = {idx: tonal_centroid(chord_chroma(vocab, idx)) for idx in set(indices)}
    distances = [
        float(np.linalg.norm(centroids[a] - centroids[b]))
        for a, b in zip(indices[:-1], indices[1:])
    ]
    return float(np.mean(distances))


# ---------------------------------------------------------------------------
# Melody/chord harmonicity metrics
# ---------------------------------------------------------------------------


def _check_aligned(melody_frames: np.ndarray, chord_frames: np.ndarray) -> tuple:
    melody = np.asarray(melody_frames)
    chords = np.asarray(chord_frames, dtype=np.int64)
    if melody.ndim != 2 or melody.shape[1] != 13:
        raise MetricError("melody_frames must be (T, 13)")
    if chords.shape != (melody.shape[0],):
        raise MetricError(
            f"melody has {melody.shape[0]} frames but chords has {chords.shape[0]}"
        )
    return melody, chords


def _frame_pcs(melody: np.ndarray, t: int) -> list[int]:
    return [pc for pc in range(12) if melody[t, pc]]


def _circular_distance(a: int, b: int) -> int:
    d = abs(a - b) % 12
    return min(d, 12 - d)


def ctnctr(
    melody_frames: np.ndarray, chord_frames: np.ndarray, vocab: ChordVocabulary
) -> float:
    """Chord-tone (plus proper non-chord-tone) ratio.

    A non-chord tone is proper when the next melody pitch class is at most two
    semitones away; the final sounding frame can never be proper.
    """
    melody, chords = _check_aligned(melody_frames, chord_frames)
    n_chord = 0
    n_nonchord = 0
    n_proper = 0
    for t in range(melody.shape[0]):
        if chords[t] == NO_CHORD_INDEX:
            continue
        chord_pcs = vocab.pitch_classes(int(chords[t]))
        pcs = _frame_pcs(melody, t)
        if not pcs:
            continue
        next_pcs: list[int] = []
        for t_next in range(t + 1, melody.shape[0]):
            next_pcs = _frame_pcs(melody, t_next)
            if next_pcs:
                break
        for pc in pcs:
            if pc in chord_pcs:
                n_chord += 1
            else:
                n_nonchord += 1
                if next_pcs and min(_circular_distance(pc, q) for q in next_pcs) <= 2:
                    n_proper += 1
    if n_chord + n_nonchord == 0:
        return 1.0
    return (n_chord + n_proper) / (n_chord + n_nonchord)


#: Melody-above-chord interval (mod 12) -> consonance score.
CONSONANT_INTERVALS = frozenset({0, 3, 4, 7, 8, 9})
NEUTRAL_INTERVALS = frozenset({5})


def consonance_score(melody_pc: int, chord_pc: int) -> int:
    interval = (melody_pc - chord_pc) % 12
    if interval in CONSONANT_INTERVALS:
        return 1
    if interval in NEUTRAL_INTERVALS:
        return 0
    return -1


def pcs(
    melody_frames: np.ndarray,
    chord_frames: np.ndarray,
    vocab: ChordVocabulary,
    durations: Sequence[float] | None = None,
) -> float:
    """Duration-weighted mean consonance over (melody note, chord tone) pairs."""
    melody, chords = _check_aligned(melody_frames, chord_frames)
    weights = _durations(melody.shape[0], durations)
    score_sum = 0.0
    weight_sum = 0.0
    for t in range(melody.shape[0]):
        if chords[t] == NO_CHORD_INDEX:
            continue
        chord_pcs = sorted(vocab.pitch_classes(int(chords[t])))
        melody_pcs = _frame_pcs(melody, t)
        for m in melody_pcs:
            for c in chord_pcs:
                score_sum += weights[t] * consonance_score(m, c)
                weight_sum += weights[t]
    if weight_sum == 0.0:
        raise MetricError("no melody/chord pairs to score")
    return float(score_sum / weight_sum)


def mctd(
    melody_frames: np.ndarray,
    chord_frames: np.ndarray,
    vocab: ChordVocabulary,
    durations: Sequence[float] | None = None,
) -> float:
    """Duration-weighted mean tonal distance between melody notes and chords."""
    melody, chords = _check_aligned(melody_frames, chord_frames)
    weights = _durations(melody.shape[0], durations)
    dist_sum = 0.0
    weight_sum = 0.0
    for t in range(melody.shape[0]):
        if chords[t] == NO_CHORD_INDEX:
            continue
        chroma = chord_chroma(vocab, int(chords[t]))
        if chroma.sum() == 0.0:
            continue
        chord_centroid = tonal_centroid(chroma)
        for pc in _frame_pcs(melody, t):
            dist_sum += weights[t] * float(
                np.linalg.norm(_pc_centroid(pc) - chord_centroid)
            )
            weight_sum += weights[t]
    if weight_sum == 0.0:
        raise MetricError("no frames with both melody and chord")
    return float(dist_sum / weight_sum)


# ---------------------------------------------------------------------------
# Reports
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class MetricsReport:
    che: float
    cc: int
    ctd: float
    ctnctr: float
    pcs: float
    mctd: float

    def to_dict(self) -> dict:
        return asdict(self)


def report(sequence: FrameSequence, vocab: ChordVocabulary) -> MetricsReport:
    """All six metrics for one frame sequence on the same framing."""
    chords = sequence.chord_frames
    melody = sequence.melody_frames
    return MetricsReport(
        che=che(chords),
        cc=cc(chords),
        ctd=ctd(chords, vocab),
        ctnctr=ctnctr(melody, chords, vocab),
        pcs=pcs(melody, chords, vocab),
        mctd=mctd(melody, chords, vocab),
    )


def corpus_report(reports: Sequence[MetricsReport]) -> dict:
    """Unweighted per-metric mean and standard deviation over pieces."""
    if not reports:
        raise MetricError("no piece reports to aggregate")
    out: dict = {"n_pieces": len(reports)}
    for name in ("che", "cc", "ctd", "ctnctr", "pcs", "mctd"):
        values = np.array([getattr(r, name) for r in reports], dtype=np.float64)
        out[name] = {"mean": float(values.mean()), "std": float(values.std())}
    return out
