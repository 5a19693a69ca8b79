"""Spearman correlation and contour-adherence pooling."""

from __future__ import annotations

import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from surprisenet.evaluation import (
    CorrelationError,
    average_ranks,
    contour_adherence,
    exact_permutation_p,
    permutation_p,
    spearman,
)
from surprisenet.surprise import SurpriseContour


class TestRanks:
    def test_simple(self):
        assert average_ranks(np.array([30.0, 10.0, 20.0])).tolist() == [3.0, 1.0, 2.0]

    def test_ties_share_average(self):
        assert average_ranks(np.array([1.0, 2.0, 2.0, 4.0])).tolist() == [1.0, 2.5, 2.5, 4.0]

    def test_all_tied(self):
        assert average_ranks(np.array([5.0, 5.0, 5.0])).tolist() == [2.0, 2.0, 2.0]


class TestSpearman:
    def test_identical_sequences(self):
        result = spearman([1, 2, 3, 4], [1, 2, 3, 4])
        assert result.rho == 1.0
        assert result.p_value == 0.0
        assert result.n == 4

    def test_reversed_sequences(self):
        result = spearman([1, 2, 3, 4, 5], [5, 4, 3, 2, 1])
        assert result.rho == -1.0
        assert result.p_value == 0.0

    def test_tied_fixture_matches_hand_ranks(self):
        x = [1.0, 2.0, 2.0, 4.0]
        y = [1.0, 3.0, 2.0, 4.0]
        # hand ranks: x -> [1, 2.5, 2.5, 4]; y -> [1, 3, 2, 4]
        rx = np.array([1.0, 2.5, 2.5, 4.0])
        ry = np.array([1.0, 3.0, 2.0, 4.0])
        cx, cy = rx - rx.mean(), ry - ry.mean()
        expected = float(cx @ cy) / math.sqrt(float(cx @ cx) * float(cy @ cy))
        assert spearman(x, y).rho == pytest.approx(expected, abs=1e-12)

    def test_constant_input_rejected(self):
        with pytest.raises(CorrelationError, match="constant"):
            spearman([1, 1, 1, 1], [1, 2, 3, 4])

    def test_too_short(self):
        with pytest.raises(CorrelationError, match="at least 3"):
            spearman([1, 2], [2, 1])

    def test_symmetry(self):
        rng = np.random.default_rng(0)
        x = rng.standard_normal(15)
        y = rng.standard_normal(15)
        a = spearman(x, y)
        b = spearman(y, x)
        assert a.rho == pytest.approx(b.rho)
        assert a.p_value == pytest.approx(b.p_value)

    @settings(deadline=None, max_examples=40)
    @given(
        st.lists(st.integers(-100, 100), min_size=5, max_size=20, unique=True),
        st.integers(0, 3),
    )
    def test_monotone_transform_invariance(self, values, which):
        # integer inputs keep the transforms strictly monotone in floats too
        rng = np.random.default_rng(7)
        x = np.array(values, dtype=np.float64)
        y = rng.standard_normal(len(values))
        transforms = [
            lambda v: 3.0 * v + 2.0,
            lambda v: np.exp(v / 100.0),
            lambda v: v**3,
            lambda v: np.arctan(v),
        ]
        base = spearman(x, y)
        moved = spearman(transforms[which](x), y)
        assert moved.rho == pytest.approx(base.rho, abs=1e-12)
        assert moved.p_value == pytest.approx(base.p_value, abs=1e-12)

    def test_t_approximation_value(self):
        # n = 5, rho = 0.9 -> t = 0.9 * sqrt(3 / 0.19)
        x = [1, 2, 3, 4, 5]
        y = [1, 2, 3, 5, 4]
        result = spearman(x, y)
        assert result.rho == pytest.approx(0.9)
        from scipy import stats

        t = 0.9 * math.sqrt((5 - 2) / (1 - 0.81))
        assert result.p_value == pytest.approx(2 * stats.t.sf(t, 3))


class TestExactPermutation:
    def test_enumerates_all_orderings(self):
        x = [1.0, 2.0, 3.0, 4.0]
        y = [1.0, 2.0, 4.0, 3.0]
        p = exact_permutation_p(x, y)
        # brute force over 4! orderings using an independent rho
        def rho_of(perm):
            ranks_x = np.argsort(np.argsort(x)) + 1.0
            ranks_y = (np.argsort(np.argsort(y)) + 1.0)[list(perm)]
            cx = ranks_x - ranks_x.mean()
            cy = ranks_y - ranks_y.mean()
            return float(cx @ cy) / math.sqrt(float(cx @ cx) * float(cy @ cy))

        observed = abs(rho_of(range(4)))
        hits = sum(
            1
            for perm in itertools.permutations(range(4))
            if abs(rho_of(perm)) >= observed - 1e-12
        )
        assert p == pytest.approx(hits / 24)

    def test_spearman_exact_method(self):
        result = spearman([1, 2, 3, 4, 5], [2, 1, 3, 5, 4], method="exact")
        assert 0.0 < result.p_value <= 1.0

    def test_limit(self):
        with pytest.raises(CorrelationError, match="n <= 10"):
            exact_permutation_p(list(range(11)), list(range(11)))


class TestMonteCarloPermutation:
    def test_agrees_with_t_approximation_n20(self):
        rng = np.random.default_rng(42)
        x = rng.standard_normal(20)
        y = 0.5 * x + rng.standard_normal(20)
        result = spearman(x, y)
        empirical = permutation_p(x, y, 10_000, np.random.default_rng(1))
        assert abs(result.p_value - empirical) < 0.02


class TestAdherence:
    def test_perfect_agreement(self):
        contours = [SurpriseContour((0.0, 1.0, 2.0, 3.0)) for _ in range(3)]
        report = contour_adherence(contours, contours)
        assert report.pooled.rho == 1.0
        assert report.pooled.p_value == 0.0
        assert all(r is not None and r.rho == 1.0 for r in report.per_piece)

    def test_permuted_realization_uncorrelated(self):
        rng = np.random.default_rng(3)
        given = []
        realized = []
        for _ in range(30):
            values = rng.random(16) * 4
            given.append(SurpriseContour(tuple(values)))
            realized.append(SurpriseContour(tuple(rng.permutation(values))))
        report = contour_adherence(given, realized)
        assert abs(report.pooled.rho) < 0.15
        assert report.pooled.p_value > 0.05

    def test_pools_frames_across_pieces(self):
        given = [SurpriseContour((0.0, 1.0)), SurpriseContour((2.0, 3.0))]
        realized = [SurpriseContour((0.1, 0.9)), SurpriseContour((2.2, 2.9))]
        report = contour_adherence(given, realized)
        assert report.pooled.n == 4
        # two-frame pieces are below the per-piece minimum of 3 points
        assert report.per_piece == (None, None)

    def test_constant_given_contour_reported_none(self):
        given = [
            SurpriseContour((1.0, 1.0, 1.0, 1.0)),
            SurpriseContour((0.0, 1.0, 2.0, 3.0)),
        ]
        realized = [
            SurpriseContour((0.5, 1.5, 0.25, 2.0)),
            SurpriseContour((0.1, 0.8, 2.5, 2.9)),
        ]
        report = contour_adherence(given, realized)
        assert report.per_piece[0] is None
        assert report.per_piece[1] is not None

    def test_empty_rejected(self):
        with pytest.raises(CorrelationError):
            contour_adherence([], [])

    def test_length_mismatch(self):
        with pytest.raises(CorrelationError):
            contour_adherence(
                [SurpriseContour((1.0, 2.0, 3.0))], [SurpriseContour((1.0, 2.0))]
            )
