"""Chord surprisingness from a first-order Markov chain.

Surprisingness of a chord is the information content of its transition:
``-ln p(chord_t | chord_{t-1})`` under a transition matrix fitted on
frame-level chord index sequences. The first frame uses a smoothed
initial-state distribution so contours cover every frame.

All logarithms are natural (values in nats).
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np


class SurpriseError(ValueError):
    """Ill-posed transition fit or an unobservable transition at alpha = 0."""


@dataclass(frozen=True)
class SurpriseContour:
    """Per-frame nonnegative surprisingness values (nats)."""

    values: tuple[float, ...]

    def __post_init__(self) -> None:
        if any(v < 0 for v in self.values):
            raise SurpriseError("surprisingness values must be nonnegative")

    def __len__(self) -> int:
        return len(self.values)

    def as_array(self) -> np.ndarray:
        return np.asarray(self.values, dtype=np.float64)


def contour_to_text(contour: SurpriseContour) -> str:
    return "\n".join(f"{v:.9g}" for v in contour.values) + "\n"


def contour_from_text(text: str) -> SurpriseContour:
    """Parse a contour file: one value per line, or one comma-separated line."""
    stripped = text.strip()
    if not stripped:
        raise SurpriseError("empty contour file")
    if "," in stripped:
        parts = stripped.replace("\n", ",").split(",")
    else:
        parts = stripped.split()
    try:
        values = tuple(float(p) for p in parts if p.strip())
    except ValueError as exc:
        raise SurpriseError(f"bad contour value: {exc}") from exc
    return SurpriseContour(values)


@dataclass(frozen=True)
class TransitionModel:
    """Chord-to-chord transition matrix with additive smoothing.

    ``probs[i, j] = (counts[i, j] + alpha) / (counts[i].sum() + alpha * N)``;
    ``initial_probs`` is smoothed the same way from first-frame counts.
    """

    vocab_size: int
    counts: np.ndarray
    initial_counts: np.ndarray
    smoothing_alpha: float
    probs: np.ndarray
    initial_probs: np.ndarray

    def __post_init__(self) -> None:
        for name in ("counts", "initial_counts", "probs", "initial_probs"):
            arr = getattr(self, name)
            arr.setflags(write=False)

    def surprise(self, prev: int, cur: int) -> float:
        """Surprisingness of moving from ``prev`` to ``cur`` (nats)."""
        p = self.probs[prev, cur]
        if p <= 0.0:
            raise SurpriseError(
                f"transition ({prev} -> {cur}) has zero probability; "
                "fit with smoothing_alpha > 0 to cover unseen transitions"
            )
        return -float(np.log(p))

    def initial_surprise(self, first: int) -> float:
        p = self.initial_probs[first]
        if p <= 0.0:
            raise SurpriseError(
                f"initial chord {first} has zero probability; "
                "fit with smoothing_alpha > 0 to cover unseen chords"
            )
        return -float(np.log(p))

    def to_json(self) -> str:
        obj = {
            "vocab_size": self.vocab_size,
            "alpha": self.smoothing_alpha,
            "counts": self.counts.astype(int).tolist(),
            "initial_counts": self.initial_counts.astype(int).tolist(),
        }
        return json.dumps(obj)

    @classmethod
    def from_json(cls, text: str) -> "TransitionModel":
        obj = json.loads(text)
        return _build(
            np.asarray(obj["counts"], dtype=np.int64),
            np.asarray(obj["initial_counts"], dtype=np.int64),
            int(obj["vocab_size"]),
            float(obj["alpha"]),
        )


def _smooth(counts: np.ndarray, alpha: float) -> np.ndarray:
    """Row-normalize counts with additive smoothing; rows are kept stochastic."""
    counts = counts.astype(np.float64)
    if counts.ndim == 1:
        total = counts.sum() + alpha * counts.shape[0]
        if total == 0.0:
            raise SurpriseError("cannot normalize an all-zero distribution with alpha = 0")
        return (counts + alpha) / total
    totals = counts.sum(axis=1, keepdims=True) + alpha * counts.shape[1]
    # States never left at alpha = 0 get a uniform (maximum-entropy) row so
    # every row stays stochastic; in-row zeros still error at lookup time.
    empty = totals[:, 0] == 0.0
    probs = np.divide(
        counts + alpha, totals, out=np.zeros_like(counts, dtype=np.float64), where=totals > 0
    )
    probs[empty] = 1.0 / counts.shape[1]
    return probs


def _build(
    counts: np.ndarray, initial_counts: np.ndarray, vocab_size: int, alpha: float
) -> TransitionModel:
    return TransitionModel(
        vocab_size=vocab_size,
        counts=counts,
        initial_counts=initial_counts,
        smoothing_alpha=alpha,
        probs=_smooth(counts, alpha),
        initial_probs=_smooth(initial_counts, alpha),
    )


def fit_transitions(
    sequences: Iterable[Sequence[int]], vocab_size: int, alpha: float = 0.01
) -> TransitionModel:
    """Fit the transition matrix from frame-level chord index sequences.

    Counts every adjacent pair across sequences (held chords contribute
    self-transitions); first frames feed the initial-state distribution.
    """
    if alpha < 0:
        raise SurpriseError(f"smoothing alpha must be >= 0, got {alpha}")
    counts = np.zeros((vocab_size, vocab_size), dtype=np.int64)
    initial = np.zeros(vocab_size, dtype=np.int64)
    n_sequences = 0
    for seq in sequences:
        arr = np.asarray(seq, dtype=np.int64)
        if arr.size == 0:
            continue
        if arr.min() < 0 or arr.max() >= vocab_size:
            raise SurpriseError(
                f"chord index out of range for vocab size {vocab_size} in sequence"
            )
        n_sequences += 1
        initial[arr[0]] += 1
        np.add.at(counts, (arr[:-1], arr[1:]), 1)
    if n_sequences == 0 and alpha == 0.0:
        raise SurpriseError("no sequences and alpha = 0 leaves every row undefined")
    return _build(counts, initial, vocab_size, alpha)


def surprise_contour(model: TransitionModel, chords: Sequence[int]) -> SurpriseContour:
    """Per-frame surprisingness of a chord index sequence under the model."""
    arr = np.asarray(chords, dtype=np.int64)
    if arr.size == 0:
        raise SurpriseError("cannot compute a contour for an empty sequence")
    if arr.min() < 0 or arr.max() >= model.vocab_size:
        raise SurpriseError(f"chord index out of range for vocab size {model.vocab_size}")
    values = [model.initial_surprise(int(arr[0]))]
    for prev, cur in zip(arr[:-1], arr[1:]):
        values.append(model.surprise(int(prev), int(cur)))
    return SurpriseContour(tuple(values))


def max_training_surprise(
    model: TransitionModel, training: Iterable[Sequence[int]]
) -> float:
    """Largest surprisingness any training frame attains under the model."""
    best: float | None = None
    for seq in training:
        contour = surprise_contour(model, seq)
        peak = max(contour.values)
        if best is None or peak > best:
            best = peak
    if best is None:
        raise SurpriseError("training corpus is empty")
    return best
