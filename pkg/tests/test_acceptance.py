"""Acceptance criteria, one test per criterion, at the stated tolerances.

Run with ``pytest tests/test_acceptance.py -v``; a per-criterion PASS/FAIL
summary prints at the end of the session (see conftest).
"""

from __future__ import annotations

import json
import math
import time
from contextlib import contextmanager
from dataclasses import dataclass

import numpy as np
import pytest

import surprisenet as sn
from surprisenet.cli import main as cli_main
from surprisenet.cvae import (
    CvaeConfig,
    CvaeModel,
    batch_loss_graph,
    create_model,
    elbo_terms_graph,
    load_checkpoint,
    loss,
    reconstruction_accuracy,
    save_checkpoint,
    split_validation,
    train,
)
from surprisenet.evaluation import contour_adherence, permutation_p, spearman
from surprisenet.harmonize import (
    ContourPreset,
    HarmonizationRequest,
    PresetKind,
    harmonize,
    preset_contour,
)
from surprisenet.kernel import Tensor, grad_check
from surprisenet.leadsheet import VocabMode, serialize_leadsheet
from surprisenet.metrics import MetricError, cc, che, ctd, ctnctr, mctd, pcs
from surprisenet.minicorpus import CorpusSpec, generate_minicorpus
from surprisenet.pipeline import training_examples
from surprisenet.surprise import fit_transitions, surprise_contour

from . import oracles
from .conftest import record_criterion


@contextmanager
def criterion(name: str):
    ok = False
    try:
        yield
        ok = True
    finally:
        record_criterion(name, ok)


@dataclass
class TrainedPipeline:
    model: CvaeModel
    vocab: sn.ChordVocabulary
    transitions: sn.TransitionModel
    max_surprise: float
    test_frames: list
    train_seconds: float


@pytest.fixture(scope="session")
def pipeline() -> TrainedPipeline:
    """Mini-corpus training used by the adherence and extreme-contour gates."""
    started = time.monotonic()
    sheets = generate_minicorpus(CorpusSpec(n_pieces=200, seed=11))
    normalized = [s.transposed(s.key.normalization_shift) for s in sheets]
    vocab = sn.build_vocabulary(normalized, VocabMode.VOCAB_CORPUS)
    frames = [sn.align_frames(s, vocab) for s in sheets]
    train_frames, test_frames = frames[:180], frames[180:]
    transitions = fit_transitions(
        [f.chord_frames for f in train_frames], vocab.size, alpha=0.01
    )
    max_surprise = sn.max_training_surprise(
        transitions, [f.chord_frames for f in train_frames]
    )
    examples = training_examples(train_frames, transitions)
    config = CvaeConfig(
        vocab_size=vocab.size,
        prenet_hidden=16,
        enc_hidden=64,
        latent_dim=8,
        batch_size=32,
        max_epochs=160,
        kl_anneal_epochs=20,
        early_stop_patience=15,
        seed=3,
    )
    model = create_model(config, vocab.fingerprint())
    train_set, val_set = split_validation(examples, config.val_fraction, config.seed)
    train(model, train_set, val_set)
    return TrainedPipeline(
        model=model,
        vocab=vocab,
        transitions=transitions,
        max_surprise=max_surprise,
        test_frames=test_frames,
        train_seconds=time.monotonic() - started,
    )


def test_metric_oracle_equivalence():
    """Six metrics match brute force on 1000 random 8-frame pieces (1e-9)."""
    with criterion("metric oracle equivalence (1000 pieces, tol 1e-9, < 10 s)"):
        started = time.monotonic()
        vocab = sn.build_vocabulary([], VocabMode.VOCAB_96)
        chroma = {i: set(vocab.pitch_classes(i)) for i in range(vocab.size)}
        rng = np.random.default_rng(2024)
        checked = np.zeros(6, dtype=int)
        for _ in range(1000):
            melody = np.zeros((8, 13), dtype=np.uint8)
            for t in range(8):
                for pc in rng.choice(12, size=int(rng.integers(0, 3)), replace=False):
                    melody[t, int(pc)] = 1
                melody[t, 12] = 1 if melody[t, :12].sum() == 0 else 0
            chords = rng.integers(0, vocab.size, size=8).astype(np.int64)
            durations = rng.choice([1.0, 2.0, 4.0], size=8)

            assert che(chords, durations) == pytest.approx(
                oracles.brute_che(chords.tolist(), durations.tolist()), abs=1e-9
            )
            checked[0] += 1
            assert cc(chords) == oracles.brute_cc(chords.tolist())
            checked[1] += 1
            try:
                mine = ctd(chords, vocab)
            except MetricError:
                mine = None
            if mine is not None:
                assert mine == pytest.approx(
                    oracles.brute_ctd(chords.tolist(), chroma), abs=1e-9
                )
                checked[2] += 1
            assert ctnctr(melody, chords, vocab) == pytest.approx(
                oracles.brute_ctnctr(melody.tolist(), chords.tolist(), chroma),
                abs=1e-9,
            )
            checked[3] += 1
            try:
                mine = pcs(melody, chords, vocab, durations)
            except MetricError:
                mine = None
            if mine is not None:
                assert mine == pytest.approx(
                    oracles.brute_pcs(
                        melody.tolist(), chords.tolist(), chroma, durations.tolist()
                    ),
                    abs=1e-9,
                )
                checked[4] += 1
            try:
                mine = mctd(melody, chords, vocab, durations)
            except MetricError:
                mine = None
            if mine is not None:
                assert mine == pytest.approx(
                    oracles.brute_mctd(
                        melody.tolist(), chords.tolist(), chroma, durations.tolist()
                    ),
                    abs=1e-9,
                )
                checked[5] += 1
        elapsed = time.monotonic() - started
        assert (checked > 900).all(), checked  # each metric exercised broadly
        assert elapsed < 10.0, f"took {elapsed:.1f}s"


def test_surprisingness_oracle():
    """Eq.-style contours match hand counting; edge chains are exact."""
    with criterion("surprisingness oracle (hand counts; deterministic/uniform exact)"):
        # fixture vs independent counting
        rng = np.random.default_rng(17)
        sequences = [list(map(int, rng.integers(0, 6, size=20))) for _ in range(8)]
        target = list(map(int, rng.integers(0, 6, size=20)))
        model = fit_transitions(sequences, 6, alpha=0.01)
        contour = surprise_contour(model, target)
        expected = oracles.brute_surprise(sequences, 6, 0.01, target)
        assert np.allclose(contour.values, expected, atol=1e-12)

        # deterministic chain: all transition terms exactly zero
        det = fit_transitions([[0, 1, 2, 0, 1, 2, 0]], 3, alpha=0.0)
        det_contour = surprise_contour(det, [0, 1, 2, 0, 1, 2])
        assert all(v == 0.0 for v in det_contour.values[1:])

        # uniform chain: every transition exactly ln N
        uniform = fit_transitions(
            [[a, b] for a in range(4) for b in range(4)], 4, alpha=0.0
        )
        uni_contour = surprise_contour(uniform, [0, 3, 1, 2])
        for v in uni_contour.values[1:]:
            assert v == pytest.approx(math.log(4), abs=1e-12)


def test_end_to_end_gradient_check():
    """Tiny-config model gradients vs central differences, < 1e-4 at 1e-3."""
    with criterion("gradient check (tiny CVAE, rel err < 1e-4 at eps 1e-3, < 60 s)"):
        started = time.monotonic()
        config = CvaeConfig(
            vocab_size=5,
            prenet_hidden=4,
            enc_hidden=8,
            latent_dim=3,
            dropout_rate=0.0,
            seed=42,
        )
        model = CvaeModel(config, dtype=np.float64)
        t_frames, batch = 4, 2
        rng = np.random.default_rng(0)
        melody = (rng.random((t_frames, batch, 13)) < 0.3).astype(np.float64)
        chords = rng.integers(0, 5, size=(t_frames, batch))
        contour = rng.random((t_frames, batch)) * 3.0
        frozen_eps = rng.standard_normal((t_frames, batch, 3))

        class FrozenNoise:
            def __init__(self):
                self.i = 0

            def standard_normal(self, shape):
                out = frozen_eps[self.i % t_frames]
                self.i += 1
                return out

        def closure():
            total, _ = batch_loss_graph(
                model, melody, chords, contour, beta=0.7,
                rng=FrozenNoise(), training=False,
            )
            return total

        error = grad_check(closure, model.parameters(), epsilon=1e-3)
        elapsed = time.monotonic() - started
        assert error < 1e-4, f"max relative error {error}"
        assert elapsed < 60.0, f"took {elapsed:.1f}s"


def test_memorization():
    """10-piece overfit reaches >= 90% teacher-forced accuracy, < 10 min."""
    with criterion("memorization (10 pieces, >= 90% in <= 300 epochs, < 10 min)"):
        started = time.monotonic()
        sheets = generate_minicorpus(CorpusSpec(n_pieces=10, seed=23))
        normalized = [s.transposed(s.key.normalization_shift) for s in sheets]
        vocab = sn.build_vocabulary(normalized, VocabMode.VOCAB_CORPUS)
        frames = [sn.align_frames(s, vocab) for s in sheets]
        transitions = fit_transitions(
            [f.chord_frames for f in frames], vocab.size, alpha=0.01
        )
        examples = training_examples(frames, transitions)
        config = CvaeConfig(
            vocab_size=vocab.size,
            prenet_hidden=16,
            enc_hidden=64,
            latent_dim=16,
            batch_size=10,
            max_epochs=300,
            kl_anneal_epochs=20,
            early_stop_patience=300,
            seed=7,
        )
        model = create_model(config, vocab.fingerprint())
        history = train(model, examples, [])
        accuracy = reconstruction_accuracy(model, examples)
        elapsed = time.monotonic() - started
        assert len(history) <= 300
        assert accuracy >= 0.9, f"teacher-forced accuracy {accuracy:.3f}"
        assert elapsed < 600.0, f"took {elapsed:.1f}s"


def test_kl_sanity():
    """KL never below -1e-6; standard-normal posterior gives exactly zero."""
    with criterion("KL sanity (kl >= -1e-6 always; mu=0, log_var=0 -> kl = 0)"):
        mus = [Tensor(np.zeros((3, 4)))]
        lvs = [Tensor(np.zeros((3, 4)))]
        logits = [Tensor(np.zeros((3, 5)))]
        _, breakdown = elbo_terms_graph(
            logits, np.zeros((1, 3), dtype=int), mus, lvs, 1.0
        )
        assert breakdown.kl == 0.0

        config = CvaeConfig(
            vocab_size=6, prenet_hidden=4, enc_hidden=8, latent_dim=3,
            dropout_rate=0.0, seed=1,
        )
        model = create_model(config)
        rng = np.random.default_rng(5)
        for seed in range(20):
            t_frames = int(rng.integers(2, 10))
            melody = (rng.random((t_frames, 13)) < 0.3).astype(np.float32)
            melody[:, 12] = (melody[:, :12].sum(axis=1) == 0).astype(np.float32)
            chords = rng.integers(0, 6, size=t_frames)
            contour = rng.random(t_frames) * 5
            breakdown = loss(model, melody, chords, contour, rng=rng)
            assert breakdown.kl >= -1e-6


def test_contour_adherence(pipeline: TrainedPipeline):
    """Pooled Spearman rho >= 0.3 (p < 0.05) over >= 100 harmonizations."""
    with criterion(
        "contour adherence (pooled rho >= 0.3, p < 0.05, >= 100 pieces, < 15 min)"
    ):
        started = time.monotonic()
        rng = np.random.default_rng(5)
        kinds = list(PresetKind)
        given = []
        realized = []
        count = 0
        for i, frames in enumerate(pipeline.test_frames):
            for j in range(6):
                kind = kinds[int(rng.integers(len(kinds)))]
                contour = preset_contour(
                    ContourPreset(kind, pipeline.max_surprise), len(frames)
                )
                samples = harmonize(
                    pipeline.model,
                    pipeline.transitions,
                    HarmonizationRequest(
                        frames.melody_frames, contour, num_samples=1,
                        seed=1000 + i * 10 + j,
                    ),
                )
                given.append(contour)
                realized.append(samples[0].realized)
                count += 1
        report = contour_adherence(given, realized)
        elapsed = time.monotonic() - started + pipeline.train_seconds
        assert count >= 100
        assert report.pooled.rho >= 0.3, f"pooled rho {report.pooled.rho:.3f}"
        assert report.pooled.p_value < 0.05
        assert elapsed < 900.0, f"took {elapsed:.1f}s including training"


def test_extreme_contours(pipeline: TrainedPipeline):
    """Zero contour holds one chord >= 60%; max contour changes >= 2x more."""
    with criterion(
        "extreme contours (zero: CC=1 >= 60%; max: change rate >= 2x zero)"
    ):
        constant = 0
        zero_changes = []
        max_changes = []
        total = 0
        for i, frames in enumerate(pipeline.test_frames):
            t_frames = len(frames)
            zero = preset_contour(ContourPreset(PresetKind.ZERO, 0.0), t_frames)
            high = preset_contour(
                ContourPreset(PresetKind.MAX, pipeline.max_surprise), t_frames
            )
            zero_samples = harmonize(
                pipeline.model,
                pipeline.transitions,
                HarmonizationRequest(
                    frames.melody_frames, zero, num_samples=5, seed=100 + i
                ),
            )
            max_samples = harmonize(
                pipeline.model,
                pipeline.transitions,
                HarmonizationRequest(
                    frames.melody_frames, high, num_samples=5, seed=200 + i
                ),
            )
            for sample in zero_samples:
                total += 1
                if len(set(sample.chords.tolist())) == 1:
                    constant += 1
                zero_changes.append(
                    int((sample.chords[1:] != sample.chords[:-1]).sum())
                )
            for sample in max_samples:
                max_changes.append(
                    int((sample.chords[1:] != sample.chords[:-1]).sum())
                )
        assert total >= 100
        fraction = constant / total
        zero_rate = float(np.mean(zero_changes))
        max_rate = float(np.mean(max_changes))
        assert fraction >= 0.6, f"CC=1 fraction {fraction:.2f}"
        assert max_rate >= 2.0 * zero_rate, f"{max_rate:.2f} vs {zero_rate:.2f}"


def test_determinism(tmp_path):
    """Seeded prepare/train/harmonize are bit-identical; checkpoints round trip."""
    with criterion("determinism (prepare/train/harmonize bit-identical; checkpoint)"):
        corpus = tmp_path / "corpus"
        corpus.mkdir()
        for sheet in generate_minicorpus(CorpusSpec(n_pieces=24, seed=5)):
            (corpus / f"{sheet.title}.json").write_text(serialize_leadsheet(sheet))

        outputs = {}
        for tag in ("a", "b"):
            prepared = tmp_path / f"prepared_{tag}"
            model_dir = tmp_path / f"model_{tag}"
            harm = tmp_path / f"harm_{tag}"
            assert cli_main(
                ["prepare", "--corpus-dir", str(corpus), "--out-dir", str(prepared), "--seed", "0"]
            ) == 0
            assert cli_main(
                [
                    "train",
                    "--prepared-dir", str(prepared),
                    "--out-dir", str(model_dir),
                    "--prenet-hidden", "4",
                    "--enc-hidden", "16",
                    "--latent-dim", "4",
                    "--batch-size", "8",
                    "--max-epochs", "5",
                    "--seed", "3",
                ]
            ) == 0
            melody = sorted(corpus.glob("*.json"))[0]
            assert cli_main(
                [
                    "harmonize",
                    "--checkpoint", str(model_dir / "checkpoint.snck"),
                    "--melody", str(melody),
                    "--preset", "normal_bump",
                    "--samples", "3",
                    "--seed", "11",
                    "--out-dir", str(harm),
                ]
            ) == 0
            outputs[tag] = {
                "splits": (prepared / "train.txt").read_bytes()
                + (prepared / "test.txt").read_bytes(),
                "frames": sorted(
                    p.read_bytes() for p in (prepared / "frames").glob("*.csv")
                ),
                "checkpoint": (model_dir / "checkpoint.snck").read_bytes(),
                "history": (model_dir / "history.csv").read_bytes(),
                "report": (harm / "report.json").read_bytes(),
                "sheets": sorted(p.read_bytes() for p in harm.glob("sample_*.json")),
            }
        for key in outputs["a"]:
            assert outputs["a"][key] == outputs["b"][key], f"{key} differs across runs"

        # checkpoint round trip: save(load(save(m))) is bit-identical
        ckpt = tmp_path / "model_a" / "checkpoint.snck"
        reloaded = load_checkpoint(ckpt)
        resaved = tmp_path / "resaved.snck"
        save_checkpoint(reloaded, resaved)
        assert ckpt.read_bytes() == resaved.read_bytes()


def test_spearman_correctness():
    """t-approximation within 0.02 of permutation p at n=20; rho=+-1 exact."""
    with criterion("spearman (permutation agreement at n=20 within 0.02; edges exact)"):
        rng = np.random.default_rng(42)
        for trial in range(5):
            x = rng.standard_normal(20)
            y = 0.4 * x + rng.standard_normal(20)
            result = spearman(x, y)
            empirical = permutation_p(x, y, 10_000, np.random.default_rng(trial))
            assert abs(result.p_value - empirical) < 0.02, (
                f"trial {trial}: t-approx {result.p_value:.4f} vs {empirical:.4f}"
            )
        exact_up = spearman([1, 2, 3, 4, 5], [10, 20, 30, 40, 50])
        assert exact_up.rho == 1.0 and exact_up.p_value == 0.0
        exact_down = spearman([1, 2, 3, 4, 5], [5, 4, 3, 2, 1])
        assert exact_down.rho == -1.0 and exact_down.p_value == 0.0
