"""Contour-adherence evaluation via Spearman rank correlation.

Rank correlation (with average ranks for ties) measures monotone agreement
between given and realized surprise contours; exact agreement is not the goal
since the melody also constrains the harmonization. The headline number pools
all frame pairs across pieces; per-piece correlations are reported alongside.

p-values come from the t approximation, with an exact permutation option for
small samples and a seeded Monte-Carlo permutation helper for calibration.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy import stats

from .surprise import SurpriseContour


class CorrelationError(ValueError):
    """Correlation undefined (constant input or too few points)."""


@dataclass(frozen=True)
class CorrelationResult:
    rho: float
    p_value: float
    n: int

    def __post_init__(self) -> None:
        if not -1.0 - 1e-12 <= self.rho <= 1.0 + 1e-12:
            raise CorrelationError(f"rho out of range: {self.rho}")
        if not 0.0 <= self.p_value <= 1.0:
            raise CorrelationError(f"p-value out of range: {self.p_value}")

    def to_dict(self) -> dict:
        return {"rho": self.rho, "p_value": self.p_value, "n": self.n}


def average_ranks(values: np.ndarray) -> np.ndarray:
    """1-based ranks with tied values sharing their average rank."""
    values = np.asarray(values, dtype=np.float64)
    order = np.argsort(values, kind="stable")
    ranks = np.empty(values.shape[0], dtype=np.float64)
    i = 0
    while i < values.shape[0]:
        j = i
        while j + 1 < values.shape[0] and values[order[j + 1]] == values[order[i]]:
            j += 1
        ranks[order[i : j + 1]] = (i + j) / 2.0 + 1.0
        i = j + 1
    return ranks


def _rank_correlation(rank_x: np.ndarray, rank_y: np.ndarray) -> float:
    cx = rank_x - rank_x.mean()
    cy = rank_y - rank_y.mean()
    denom = math.sqrt(float(cx @ cx) * float(cy @ cy))
    if denom == 0.0:
        raise CorrelationError("constant sequence has no rank variance")
    return float(cx @ cy) / denom


def spearman(
    x: Sequence[float] | np.ndarray,
    y: Sequence[float] | np.ndarray,
    method: str = "t",
) -> CorrelationResult:
    """Spearman's rho with a two-sided p-value.

    ``method='t'`` uses the t approximation with n - 2 degrees of freedom;
    ``method='exact'`` enumerates all permutations (n <= 10 only). rho = +-1
    returns p = 0 exactly.
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape or x.ndim != 1:
        raise CorrelationError(f"inputs must be equal-length 1-D, got {x.shape} and {y.shape}")
    n = x.shape[0]
    if n < 3:
        raise CorrelationError(f"need at least 3 points, got {n}")
    rank_x = average_ranks(x)
    rank_y = average_ranks(y)
    rho = _rank_correlation(rank_x, rank_y)
    rho = max(-1.0, min(1.0, rho))

    if method == "exact":
        return CorrelationResult(rho, exact_permutation_p(x, y), n)
    if method != "t":
        raise CorrelationError(f"unknown method {method!r}")
    if abs(rho) >= 1.0 - 1e-12:
        return CorrelationResult(rho, 0.0, n)
    t = rho * math.sqrt((n - 2) / (1.0 - rho * rho))
    p = 2.0 * float(stats.t.sf(abs(t), n - 2))
    return CorrelationResult(rho, min(1.0, p), n)


def exact_permutation_p(
    x: Sequence[float] | np.ndarray, y: Sequence[float] | np.ndarray
) -> float:
    """Two-sided p-value over every permutation of y (n <= 10)."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    n = x.shape[0]
    if n > 10:
        raise CorrelationError(f"exact permutation p-value limited to n <= 10, got {n}")
    rank_x = average_ranks(x)
    rank_y = average_ranks(y)
    observed = abs(_rank_correlation(rank_x, rank_y))
    cx = rank_x - rank_x.mean()
    cy_norm = math.sqrt(float(((rank_y - rank_y.mean()) ** 2).sum()))
    cx_norm = math.sqrt(float((cx**2).sum()))
    if cx_norm == 0.0 or cy_norm == 0.0:
        raise CorrelationError("constant sequence has no rank variance")

    hits = 0
    total = 0
    chunk: list[np.ndarray] = []
    y_centered = rank_y - rank_y.mean()
    for perm in itertools.permutations(range(n)):
        chunk.append(y_centered[list(perm)])
        if len(chunk) == 100_000:
            rhos = np.abs(np.stack(chunk) @ cx) / (cx_norm * cy_norm)
            hits += int((rhos >= observed - 1e-12).sum())
            total += len(chunk)
            chunk = []
    if chunk:
        rhos = np.abs(np.stack(chunk) @ cx) / (cx_norm * cy_norm)
        hits += int((rhos >= observed - 1e-12).sum())
        total += len(chunk)
    return hits / total


def permutation_p(
    x: Sequence[float] | np.ndarray,
    y: Sequence[float] | np.ndarray,
    n_permutations: int,
    rng: np.random.Generator,
) -> float:
    """Seeded Monte-Carlo two-sided permutation p-value."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    rank_x = average_ranks(x)
    rank_y = average_ranks(y)
    observed = abs(_rank_correlation(rank_x, rank_y))
    cx = rank_x - rank_x.mean()
    cy = rank_y - rank_y.mean()
    cx_norm = math.sqrt(float((cx**2).sum()))
    cy_norm = math.sqrt(float((cy**2).sum()))
    if cx_norm == 0.0 or cy_norm == 0.0:
        raise CorrelationError("constant sequence has no rank variance")
    hits = 0
    for _ in range(n_permutations):
        shuffled = rng.permutation(cy)
        rho = abs(float(shuffled @ cx) / (cx_norm * cy_norm))
        if rho >= observed - 1e-12:
            hits += 1
    return hits / n_permutations


@dataclass(frozen=True)
class AdherenceReport:
    """Pooled frame-level correlation plus the per-piece breakdown."""

    pooled: CorrelationResult
    per_piece: tuple[CorrelationResult | None, ...]

    def to_dict(self) -> dict:
        return {
            "pooled": self.pooled.to_dict(),
            "per_piece": [None if r is None else r.to_dict() for r in self.per_piece],
        }


def contour_adherence(
    given: Sequence[SurpriseContour],
    realized: Sequence[SurpriseContour],
) -> AdherenceReport:
    """Correlate given and realized contours.

    Pools every (given, realized) frame pair across pieces for the headline
    result; pieces whose given contour is constant (zero rank variance) get
    ``None`` in the per-piece table.
    """
    if len(given) != len(realized):
        raise CorrelationError(
            f"{len(given)} given contours vs {len(realized)} realized"
        )
    if not given:
        raise CorrelationError("no contours to correlate")
    pooled_x: list[float] = []
    pooled_y: list[float] = []
    per_piece: list[CorrelationResult | None] = []
    for g, r in zip(given, realized):
        if len(g) != len(r):
            raise CorrelationError(
                f"contour length mismatch: given {len(g)} vs realized {len(r)}"
            )
        pooled_x.extend(g.values)
        pooled_y.extend(r.values)
        try:
            per_piece.append(spearman(g.as_array(), r.as_array()))
        except CorrelationError:
            per_piece.append(None)
    pooled = spearman(np.asarray(pooled_x), np.asarray(pooled_y))
    return AdherenceReport(pooled=pooled, per_piece=tuple(per_piece))
