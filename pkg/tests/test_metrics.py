"""Objective metrics against independent brute-force oracles."""

from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import surprisenet as sn
from surprisenet.leadsheet import QUALITY_REGISTRY, ChordSymbol, ChordVocabulary, VocabMode
from surprisenet.metrics import (
    MetricError,
    cc,
    che,
    chord_chroma,
    corpus_report,
    ctd,
    ctnctr,
    mctd,
    pcs,
    report,
    tonal_centroid,
)

from . import oracles


@pytest.fixture(scope="module")
def vocab96():
    return sn.build_vocabulary([], VocabMode.VOCAB_96)


def chroma_map(vocab: ChordVocabulary) -> dict[int, set[int]]:
    return {i: set(vocab.pitch_classes(i)) for i in range(vocab.size)}


def random_piece(rng: np.random.Generator, vocab: ChordVocabulary, t: int = 8):
    melody = np.zeros((t, 13), dtype=np.uint8)
    for i in range(t):
        n_notes = int(rng.integers(0, 3))
        for pc in rng.choice(12, size=n_notes, replace=False):
            melody[i, int(pc)] = 1
        melody[i, 12] = 1 if melody[i, :12].sum() == 0 else 0
    chords = rng.integers(0, vocab.size, size=t).astype(np.int64)
    durations = rng.choice([1.0, 2.0, 4.0], size=t)
    return melody, chords, durations


class TestTonalCentroid:
    def test_single_pitch_class_zero(self):
        chroma = np.zeros(12)
        chroma[0] = 1.0
        assert tonal_centroid(chroma) == pytest.approx([0.0, 1.0, 0.0, 1.0, 0.0, 0.5])

    def test_octave_periodicity(self):
        # pitch class 0 from midi 60 and midi 72 give the same chroma bit
        chroma = np.zeros(12)
        chroma[60 % 12] = 1.0
        other = np.zeros(12)
        other[72 % 12] = 1.0
        assert tonal_centroid(chroma) == pytest.approx(tonal_centroid(other))

    def test_c_major_triad_matches_hand_sum(self):
        chroma = np.zeros(12)
        chroma[[0, 4, 7]] = 1.0
        assert tonal_centroid(chroma) == pytest.approx(
            oracles.centroid_of_pcs({0, 4, 7}), abs=1e-12
        )

    def test_all_zero_rejected(self):
        with pytest.raises(MetricError):
            tonal_centroid(np.zeros(12))

    def test_weighting_normalizes(self):
        chroma = np.zeros(12)
        chroma[3] = 5.0
        assert tonal_centroid(chroma) == pytest.approx(oracles.phi(3))


class TestChe:
    def test_constant_progression(self):
        assert che([4, 4, 4, 4]) == 0.0

    def test_uniform_four_chords(self):
        assert che([1, 2, 3, 4]) == pytest.approx(math.log(4))

    def test_mixed_durations_match_oracle(self):
        chords = [1, 2, 1, 3, 3, 0]
        durations = [2.0, 1.0, 1.0, 4.0, 2.0, 2.0]
        assert che(chords, durations) == pytest.approx(
            oracles.brute_che(chords, durations), abs=1e-12
        )

    def test_bounded_by_log_coverage(self, vocab96):
        rng = np.random.default_rng(0)
        for _ in range(50):
            chords = rng.integers(0, 20, size=10)
            if cc(chords) == 0:
                continue
            assert che(chords) <= math.log(cc(chords)) + 1e-12


class TestCc:
    def test_constant(self):
        assert cc([5, 5, 5]) == 1

    def test_distinct_count(self):
        assert cc([1, 2, 1, 3]) == 3

    def test_no_chord_excluded(self):
        assert cc([0, 1, 0, 2]) == 2


class TestCtd:
    def test_identical_chords_zero(self, vocab96):
        assert ctd([1, 1, 1], vocab96) == 0.0

    def test_c_to_g_matches_hand_value(self, vocab96):
        c_idx = 1  # first symbol after NO_CHORD is C:maj
        sym = vocab96.symbol_at(c_idx)
        assert (sym.root_pc, sym.quality.name) == (0, "maj")
        g_idx = vocab96.index_of(sn.ChordEvent(0, 48, 7, QUALITY_REGISTRY["maj"]))
        expected = oracles.euclid(
            oracles.centroid_of_pcs({0, 4, 7}), oracles.centroid_of_pcs({7, 11, 2})
        )
        assert ctd([c_idx, g_idx], vocab96) == pytest.approx(expected, abs=1e-12)

    def test_nonnegative(self, vocab96):
        rng = np.random.default_rng(1)
        for _ in range(20):
            chords = rng.integers(1, vocab96.size, size=6)
            assert ctd(chords, vocab96) >= 0.0

    def test_requires_two_usable(self, vocab96):
        with pytest.raises(MetricError):
            ctd([0, 0, 3], vocab96)

    def test_changes_pairing_collapses_runs(self, vocab96):
        frames_value = ctd([1, 1, 9, 9], vocab96, pairing="frames")
        changes_value = ctd([1, 1, 9, 9], vocab96, pairing="changes")
        # held chords contribute zero distance: one change among three pairs
        assert frames_value == pytest.approx(changes_value / 3)


class TestCtnctr:
    def test_all_chord_tones(self, vocab96):
        melody = np.zeros((2, 13), dtype=np.uint8)
        melody[0, 0] = 1
        melody[1, 4] = 1
        chords = np.array([1, 1])  # C:maj
        assert ctnctr(melody, chords, vocab96) == 1.0

    def test_no_chord_tones_no_proper(self, vocab96):
        melody = np.zeros((1, 13), dtype=np.uint8)
        melody[0, 1] = 1  # C# against C:maj, no next note
        chords = np.array([1])
        assert ctnctr(melody, chords, vocab96) == 0.0

    def test_passing_tone_fixture(self, vocab96):
        # C (chord tone), D (non-chord, resolves to E by step), E (chord tone)
        melody = np.zeros((3, 13), dtype=np.uint8)
        melody[0, 0] = 1
        melody[1, 2] = 1
        melody[2, 4] = 1
        chords = np.array([1, 1, 1])
        # n_c = 2, n_n = 1, n_p = 1 -> (2 + 1) / (2 + 1)
        assert ctnctr(melody, chords, vocab96) == pytest.approx(1.0)

    def test_unresolved_nonchord_tone(self, vocab96):
        # C# leaps to G#: not proper
        melody = np.zeros((2, 13), dtype=np.uint8)
        melody[0, 1] = 1
        melody[1, 8] = 1
        chords = np.array([1, 1])
        # frame 2: G# also non-chord, final note never proper
        assert ctnctr(melody, chords, vocab96) == pytest.approx(0.0)

    def test_misaligned_lengths(self, vocab96):
        with pytest.raises(MetricError):
            ctnctr(np.zeros((2, 13), dtype=np.uint8), np.array([1]), vocab96)


class TestPcs:
    def test_unison_single_pair(self, vocab96):
        melody = np.zeros((1, 13), dtype=np.uint8)
        melody[0, 0] = 1
        vocab = ChordVocabulary(
            (None, ChordSymbol(0, sn.ChordQuality("root", frozenset({0})))),
            VocabMode.VOCAB_CORPUS,
        )
        assert pcs(melody, np.array([1]), vocab) == 1.0

    def test_tritone_everywhere(self):
        melody = np.zeros((1, 13), dtype=np.uint8)
        melody[0, 6] = 1
        vocab = ChordVocabulary(
            (None, ChordSymbol(0, sn.ChordQuality("root", frozenset({0})))),
            VocabMode.VOCAB_CORPUS,
        )
        assert pcs(melody, np.array([1]), vocab) == -1.0

    def test_mixed_fixture_matches_oracle(self, vocab96):
        rng = np.random.default_rng(5)
        melody, chords, durations = random_piece(rng, vocab96)
        expected = oracles.brute_pcs(
            melody.tolist(), chords.tolist(), chroma_map(vocab96), durations.tolist()
        )
        assert pcs(melody, chords, vocab96, durations) == pytest.approx(expected, abs=1e-12)

    def test_no_pairs(self, vocab96):
        melody = np.zeros((1, 13), dtype=np.uint8)
        melody[0, 12] = 1
        with pytest.raises(MetricError):
            pcs(melody, np.array([1]), vocab96)


class TestMctd:
    def test_melody_equals_single_note_chord(self):
        melody = np.zeros((1, 13), dtype=np.uint8)
        melody[0, 5] = 1
        vocab = ChordVocabulary(
            (None, ChordSymbol(5, sn.ChordQuality("root", frozenset({0})))),
            VocabMode.VOCAB_CORPUS,
        )
        assert mctd(melody, np.array([1]), vocab) == 0.0

    def test_nonnegative(self, vocab96):
        rng = np.random.default_rng(2)
        melody, chords, durations = random_piece(rng, vocab96)
        if (melody[:, 12] == 1).all() or (chords == 0).all():
            pytest.skip("no usable frames in draw")
        assert mctd(melody, chords, vocab96, durations) >= 0.0

    def test_fixture_matches_oracle(self, vocab96):
        rng = np.random.default_rng(8)
        melody, chords, durations = random_piece(rng, vocab96)
        expected = oracles.brute_mctd(
            melody.tolist(), chords.tolist(), chroma_map(vocab96), durations.tolist()
        )
        assert mctd(melody, chords, vocab96, durations) == pytest.approx(expected, abs=1e-12)


class TestReport:
    def test_constant_chord_all_chord_tones(self, vocab96):
        melody = np.zeros((4, 13), dtype=np.uint8)
        melody[:, 0] = 1
        seq = sn.FrameSequence(melody, np.array([1, 1, 1, 1]), 2, "fixture")
        rep = report(seq, vocab96)
        assert rep.che == 0.0
        assert rep.cc == 1
        assert rep.ctnctr == 1.0

    def test_fields_equal_individual_metrics(self, small_frames, small_vocab):
        seq = small_frames[0]
        rep = report(seq, small_vocab)
        assert rep.che == che(seq.chord_frames)
        assert rep.cc == cc(seq.chord_frames)
        assert rep.ctd == ctd(seq.chord_frames, small_vocab)
        assert rep.ctnctr == ctnctr(seq.melody_frames, seq.chord_frames, small_vocab)
        assert rep.pcs == pcs(seq.melody_frames, seq.chord_frames, small_vocab)
        assert rep.mctd == mctd(seq.melody_frames, seq.chord_frames, small_vocab)

    def test_corpus_aggregation(self, small_frames, small_vocab):
        reports = [report(f, small_vocab) for f in small_frames[:10]]
        agg = corpus_report(reports)
        assert agg["n_pieces"] == 10
        assert agg["cc"]["mean"] == pytest.approx(
            np.mean([r.cc for r in reports])
        )


class TestInvariants:
    def _transpose_vocab_index(self, vocab, index, semitones):
        sym = vocab.symbol_at(index)
        if sym is None:
            return 0
        event = sn.ChordEvent(
            0,
            48,
            (sym.root_pc + semitones) % 12,
            sym.quality,
            None if sym.bass_pc is None else (sym.bass_pc + semitones) % 12,
        )
        return vocab.index_of(event)

    @settings(deadline=None, max_examples=30)
    @given(st.integers(1, 11), st.integers(0, 2**32 - 1))
    def test_transposition_invariance(self, semitones, seed):
        vocab = sn.build_vocabulary([], VocabMode.VOCAB_96)
        rng = np.random.default_rng(seed)
        melody, chords, durations = random_piece(rng, vocab)
        melody_t = np.zeros_like(melody)
        melody_t[:, :12] = np.roll(melody[:, :12], semitones, axis=1)
        melody_t[:, 12] = melody[:, 12]
        chords_t = np.array(
            [self._transpose_vocab_index(vocab, int(c), semitones) for c in chords]
        )
        for fn, needs_melody in (
            (che, False),
            (cc, False),
        ):
            assert fn(chords) == pytest.approx(fn(chords_t))
        try:
            assert ctd(chords, vocab) == pytest.approx(ctd(chords_t, vocab), abs=1e-9)
        except MetricError:
            pass
        try:
            assert ctnctr(melody, chords, vocab) == pytest.approx(
                ctnctr(melody_t, chords_t, vocab), abs=1e-9
            )
            assert pcs(melody, chords, vocab, durations) == pytest.approx(
                pcs(melody_t, chords_t, vocab, durations), abs=1e-9
            )
            assert mctd(melody, chords, vocab, durations) == pytest.approx(
                mctd(melody_t, chords_t, vocab, durations), abs=1e-9
            )
        except MetricError:
            pass

    def test_pcs_bounded(self, vocab96):
        rng = np.random.default_rng(3)
        for _ in range(50):
            melody, chords, durations = random_piece(rng, vocab96)
            try:
                value = pcs(melody, chords, vocab96, durations)
            except MetricError:
                continue
            assert -1.0 <= value <= 1.0

    def test_ctd_zero_iff_identical_chroma(self, vocab96):
        # same pitch-class content in the vocabulary: only identical symbols here
        assert ctd([3, 3], vocab96) == 0.0
        assert ctd([3, 5], vocab96) > 0.0


def test_brute_force_equivalence_sample(vocab96):
    """Smaller copy of the acceptance sweep for quick feedback."""
    rng = np.random.default_rng(99)
    chroma = chroma_map(vocab96)
    for _ in range(100):
        melody, chords, durations = random_piece(rng, vocab96)
        assert che(chords, durations) == pytest.approx(
            oracles.brute_che(chords.tolist(), durations.tolist()), abs=1e-9
        )
        assert cc(chords) == oracles.brute_cc(chords.tolist())
        try:
            mine = ctd(chords, vocab96)
        except MetricError:
            mine = None
        if mine is not None:
            assert mine == pytest.approx(
                oracles.brute_ctd(chords.tolist(), chroma), abs=1e-9
            )
        assert ctnctr(melody, chords, vocab96) == pytest.approx(
            oracles.brute_ctnctr(melody.tolist(), chords.tolist(), chroma), abs=1e-9
        )
        try:
            mine_pcs = pcs(melody, chords, vocab96, durations)
        except MetricError:
            mine_pcs = None
        if mine_pcs is not None:
            assert mine_pcs == pytest.approx(
                oracles.brute_pcs(
                    melody.tolist(), chords.tolist(), chroma, durations.tolist()
                ),
                abs=1e-9,
            )
        try:
            mine_mctd = mctd(melody, chords, vocab96, durations)
        except MetricError:
            mine_mctd = None
        if mine_mctd is not None:
            assert mine_mctd == pytest.approx(
                oracles.brute_mctd(
                    melody.tolist(), chords.tolist(), chroma, durations.tolist()
                ),
                abs=1e-9,
            )
