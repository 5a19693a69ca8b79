"""Shared fixtures: a small corpus, its artifacts, and a trained toy model."""

from __future__ import annotations

import numpy as np
import pytest

import surprisenet as sn
from surprisenet.cvae import CvaeConfig, create_model, split_validation, train
from surprisenet.minicorpus import CorpusSpec, generate_minicorpus
from surprisenet.pipeline import training_examples

ACCEPTANCE_RESULTS: list[tuple[str, bool]] = []


def record_criterion(name: str, passed: bool) -> None:
    ACCEPTANCE_RESULTS.append((name, passed))


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for name, passed in ACCEPTANCE_RESULTS:
        terminalreporter.write_line(f"{'PASS' if passed else 'FAIL'}  {name}")


@pytest.fixture(scope="session")
def small_corpus():
    return generate_minicorpus(CorpusSpec(n_pieces=60, seed=11))


@pytest.fixture(scope="session")
def small_vocab(small_corpus):
    normalized = [s.transposed(s.key.normalization_shift) for s in small_corpus]
    return sn.build_vocabulary(normalized, sn.VocabMode.VOCAB_CORPUS)


@pytest.fixture(scope="session")
def small_frames(small_corpus, small_vocab):
    return [sn.align_frames(s, small_vocab) for s in small_corpus]


@pytest.fixture(scope="session")
def small_transitions(small_frames, small_vocab):
    return sn.fit_transitions(
        [f.chord_frames for f in small_frames], small_vocab.size, alpha=0.01
    )


@pytest.fixture(scope="session")
def toy_model(small_frames, small_vocab, small_transitions):
    """A quickly trained model with real conditioning signal (~10 s)."""
    examples = training_examples(small_frames, small_transitions)
    config = CvaeConfig(
        vocab_size=small_vocab.size,
        prenet_hidden=8,
        enc_hidden=32,
        latent_dim=8,
        batch_size=32,
        max_epochs=40,
        kl_anneal_epochs=10,
        early_stop_patience=40,
        seed=3,
    )
    model = create_model(config, small_vocab.fingerprint())
    train_set, val_set = split_validation(examples, config.val_fraction, config.seed)
    train(model, train_set, val_set)
    return model
