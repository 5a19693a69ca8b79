"""Shared artifact plumbing between the CLI and the HTTP service.

A *prepared* directory holds everything derived from a corpus: frame exports,
the chord vocabulary, the transition model fitted on the training split, the
split lists, and a metadata file with the framing options and the maximum
training surprise (used to scale preset contours).

A *trained* directory adds the model checkpoint and training history, plus
copies of the prepared artifacts so one directory is self-contained for
serving.
"""

from __future__ import annotations

import hashlib
import json
import re
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .cvae import (
    CvaeConfig,
    CvaeModel,
    TrainingExample,
    load_checkpoint,
)
from .leadsheet import (
    ChordVocabulary,
    FrameSequence,
    LeadSheet,
    VocabMode,
    align_frames,
    build_vocabulary,
    frames_from_text,
    frames_to_text,
    parse_leadsheet,
)
from .surprise import (
    SurpriseContour,
    TransitionModel,
    fit_transitions,
    max_training_surprise,
    surprise_contour,
)

META_FILE = "meta.json"
VOCAB_FILE = "vocab.json"
TRANSITIONS_FILE = "transitions.json"
CHECKPOINT_FILE = "checkpoint.snck"
HISTORY_FILE = "history.csv"


class PipelineError(RuntimeError):
    """Corpus or artifact-directory problems (missing/invalid files)."""


def sha256_file(path: Path) -> str:
    h = hashlib.sha256()
    h.update(Path(path).read_bytes())
    return h.hexdigest()


def write_manifest(
    out_dir: Path,
    command: str,
    config: dict,
    seed: int | None,
    input_hashes: dict[str, str],
    outputs: list[str],
    started: float,
) -> Path:
    manifest = {
        "command": command,
        "config": config,
        "seed": seed,
        "input_hashes": input_hashes,
        "outputs": sorted(outputs),
        "wall_time_s": round(time.monotonic() - started, 3),
    }
    path = Path(out_dir) / "manifest.json"
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True), encoding="utf-8")
    return path


def _safe_name(title: str) -> str:
    return re.sub(r"[^A-Za-z0-9._-]+", "_", title) or "untitled"


def load_corpus_dir(corpus_dir: Path) -> tuple[list[tuple[Path, LeadSheet]], list[tuple[Path, str]]]:
    """Parse every ``*.json`` lead sheet; returns (parsed, per-file errors)."""
    corpus_dir = Path(corpus_dir)
    if not corpus_dir.is_dir():
        raise PipelineError(f"corpus directory not found: {corpus_dir}")
    parsed: list[tuple[Path, LeadSheet]] = []
    errors: list[tuple[Path, str]] = []
    for path in sorted(corpus_dir.glob("*.json")):
        try:
            parsed.append((path, parse_leadsheet(path.read_text(encoding="utf-8"))))
        except Exception as exc:  # noqa: BLE001 - per-file error listing
            errors.append((path, str(exc)))
    if not parsed and not errors:
        raise PipelineError(f"no .json lead sheets in {corpus_dir}")
    return parsed, errors


@dataclass
class PreparedCorpus:
    vocab: ChordVocabulary
    transitions: TransitionModel
    train_frames: list[FrameSequence]
    test_frames: list[FrameSequence]
    key_normalize: bool
    max_surprise: float


def prepare_corpus(
    corpus_dir: Path,
    out_dir: Path,
    vocab_mode: VocabMode = VocabMode.VOCAB_CORPUS,
    key_normalize: bool = True,
    alpha: float = 0.01,
    test_fraction: float = 0.1,
    seed: int = 0,
) -> PreparedCorpus:
    """Parse, frame, split, fit transitions, and write all prepare artifacts."""
    started = time.monotonic()
    parsed, errors = load_corpus_dir(corpus_dir)
    if errors:
        listing = "; ".join(f"{p.name}: {msg}" for p, msg in errors)
        raise PipelineError(f"unparseable lead sheets: {listing}")

    sheets = [sheet for _, sheet in parsed]
    # The vocabulary must cover the chords as framed, so enumerate symbols in
    # normalized key space when normalization is on.
    if key_normalize:
        vocab_sheets = [s.transposed(s.key.normalization_shift) for s in sheets]
    else:
        vocab_sheets = sheets
    vocab = build_vocabulary(vocab_sheets, vocab_mode)
    frames = [align_frames(sheet, vocab, key_normalize=key_normalize) for sheet in sheets]

    rng = np.random.default_rng([seed, 0])
    order = rng.permutation(len(frames))
    n_test = int(round(len(frames) * test_fraction))
    test_ids = set(int(i) for i in order[:n_test])
    train_frames = [f for i, f in enumerate(frames) if i not in test_ids]
    test_frames = [f for i, f in enumerate(frames) if i in test_ids]

    train_chords = [f.chord_frames for f in train_frames]
    transitions = fit_transitions(train_chords, vocab.size, alpha=alpha)
    max_surprise = max_training_surprise(transitions, train_chords)

    out = Path(out_dir)
    (out / "frames").mkdir(parents=True, exist_ok=True)
    outputs: list[str] = []
    for f in frames:
        path = out / "frames" / f"{_safe_name(f.source_id)}.csv"
        path.write_text(frames_to_text(f), encoding="utf-8")
        outputs.append(str(path))
    (out / VOCAB_FILE).write_text(vocab.to_json(), encoding="utf-8")
    (out / TRANSITIONS_FILE).write_text(transitions.to_json(), encoding="utf-8")
    (out / "train.txt").write_text(
        "".join(f.source_id + "\n" for f in train_frames), encoding="utf-8"
    )
    (out / "test.txt").write_text(
        "".join(f.source_id + "\n" for f in test_frames), encoding="utf-8"
    )
    meta = {
        "vocab_mode": vocab_mode.value,
        "key_normalize": key_normalize,
        "alpha": alpha,
        "test_fraction": test_fraction,
        "max_training_surprise": max_surprise,
        "frames_per_measure": frames[0].frames_per_measure if frames else 2,
    }
    (out / META_FILE).write_text(json.dumps(meta, indent=2, sort_keys=True), encoding="utf-8")
    outputs += [
        str(out / VOCAB_FILE),
        str(out / TRANSITIONS_FILE),
        str(out / "train.txt"),
        str(out / "test.txt"),
        str(out / META_FILE),
    ]
    write_manifest(
        out,
        "prepare",
        {
            "corpus_dir": str(corpus_dir),
            "vocab_mode": vocab_mode.value,
            "key_normalize": key_normalize,
            "alpha": alpha,
            "test_fraction": test_fraction,
        },
        seed,
        {str(p): sha256_file(p) for p, _ in parsed},
        outputs,
        started,
    )
    return PreparedCorpus(
        vocab, transitions, train_frames, test_frames, key_normalize, max_surprise
    )


def load_prepared(prepared_dir: Path) -> PreparedCorpus:
    """Reload the artifacts written by :func:`prepare_corpus`."""
    prepared = Path(prepared_dir)
    for required in (VOCAB_FILE, TRANSITIONS_FILE, META_FILE, "train.txt", "test.txt"):
        if not (prepared / required).exists():
            raise PipelineError(f"prepared directory missing {required}: {prepared}")
    vocab = ChordVocabulary.from_json((prepared / VOCAB_FILE).read_text(encoding="utf-8"))
    transitions = TransitionModel.from_json(
        (prepared / TRANSITIONS_FILE).read_text(encoding="utf-8")
    )
    meta = json.loads((prepared / META_FILE).read_text(encoding="utf-8"))

    def read_split(name: str) -> list[FrameSequence]:
        ids = [
            line
            for line in (prepared / name).read_text(encoding="utf-8").splitlines()
            if line.strip()
        ]
        frames = []
        for source_id in ids:
            path = prepared / "frames" / f"{_safe_name(source_id)}.csv"
            if not path.exists():
                raise PipelineError(f"missing frame export {path}")
            frames.append(
                frames_from_text(
                    path.read_text(encoding="utf-8"),
                    frames_per_measure=meta.get("frames_per_measure", 2),
                    source_id=source_id,
                )
            )
        return frames

    return PreparedCorpus(
        vocab=vocab,
        transitions=transitions,
        train_frames=read_split("train.txt"),
        test_frames=read_split("test.txt"),
        key_normalize=bool(meta.get("key_normalize", True)),
        max_surprise=float(meta["max_training_surprise"]),
    )


def training_examples(
    frames: list[FrameSequence], transitions: TransitionModel
) -> list[TrainingExample]:
    """Pair each frame sequence with its surprise contour as model input."""
    examples = []
    for f in frames:
        contour = surprise_contour(transitions, f.chord_frames)
        examples.append(
            TrainingExample(
                melody=np.asarray(f.melody_frames, dtype=np.float32),
                chords=np.asarray(f.chord_frames, dtype=np.int64),
                contour=contour.as_array(),
                source_id=f.source_id,
            )
        )
    return examples


@dataclass
class LoadedModel:
    """Everything the inference paths need, resolved from one directory."""

    model: CvaeModel
    vocab: ChordVocabulary
    transitions: TransitionModel
    max_surprise: float
    key_normalize: bool
    checkpoint_id: str
    checkpoint_path: Path


def load_model_dir(
    checkpoint: Path,
    vocab_path: Path | None = None,
    transitions_path: Path | None = None,
    meta_path: Path | None = None,
) -> LoadedModel:
    """Load a checkpoint plus its sibling vocabulary/transition artifacts.

    Paths default to files named like the prepare artifacts in the
    checkpoint's directory, so a train output directory loads with one path.
    """
    checkpoint = Path(checkpoint)
    if not checkpoint.exists():
        raise PipelineError(f"checkpoint not found: {checkpoint}")
    base = checkpoint.parent
    vocab_path = Path(vocab_path) if vocab_path else base / VOCAB_FILE
    transitions_path = Path(transitions_path) if transitions_path else base / TRANSITIONS_FILE
    meta_path = Path(meta_path) if meta_path else base / META_FILE
    for path, what in ((vocab_path, "vocabulary"), (transitions_path, "transition model")):
        if not path.exists():
            raise PipelineError(f"{what} file not found: {path}")
    vocab = ChordVocabulary.from_json(vocab_path.read_text(encoding="utf-8"))
    transitions = TransitionModel.from_json(transitions_path.read_text(encoding="utf-8"))
    model = load_checkpoint(checkpoint, expected_fingerprint=vocab.fingerprint())
    max_surprise = 0.0
    key_normalize = True
    if meta_path.exists():
        meta = json.loads(meta_path.read_text(encoding="utf-8"))
        max_surprise = float(meta.get("max_training_surprise", 0.0))
        key_normalize = bool(meta.get("key_normalize", True))
    return LoadedModel(
        model=model,
        vocab=vocab,
        transitions=transitions,
        max_surprise=max_surprise,
        key_normalize=key_normalize,
        checkpoint_id=sha256_file(checkpoint),
        checkpoint_path=checkpoint,
    )


def default_config_for(vocab: ChordVocabulary, overrides: dict) -> CvaeConfig:
    """Config with the vocabulary size filled in and overrides applied."""
    fields = {"vocab_size": vocab.size}
    fields.update({k: v for k, v in overrides.items() if v is not None})
    return CvaeConfig(**fields)


def run_harmonization(
    loaded: LoadedModel,
    melody_frames: np.ndarray,
    contour: SurpriseContour,
    num_samples: int,
    seed: int,
    decode_mode: str = "argmax",
    temperature: float = 1.0,
) -> dict:
    """Harmonize and assemble the full report dict (chords, metrics, adherence)."""
    from . import metrics as metrics_mod
    from .evaluation import CorrelationError, contour_adherence
    from .harmonize import HarmonizationRequest, harmonize

    request = HarmonizationRequest(
        melody_frames=melody_frames,
        contour=contour,
        num_samples=num_samples,
        decode_mode=decode_mode,
        temperature=temperature,
        seed=seed,
    )
    results = harmonize(loaded.model, loaded.transitions, request)

    sample_dicts = []
    for sample in results:
        piece = FrameSequence(
            melody_frames, sample.chords, frames_per_measure=2, source_id="generated"
        )
        try:
            piece_metrics = metrics_mod.report(piece, loaded.vocab).to_dict()
        except metrics_mod.MetricError as exc:
            piece_metrics = {"error": str(exc)}
        sample_dicts.append(
            {
                "chords": [int(c) for c in sample.chords],
                "labels": [loaded.vocab.label(int(c)) for c in sample.chords],
                "realized_contour": [float(v) for v in sample.realized.values],
                "metrics": piece_metrics,
            }
        )
    try:
        adherence = contour_adherence(
            [contour] * len(results), [s.realized for s in results]
        ).to_dict()
    except CorrelationError as exc:
        # constant given contours (zero/max presets) have no rank variance
        adherence = {"error": str(exc)}
    return {
        "given_contour": [float(v) for v in contour.values],
        "samples": sample_dicts,
        "adherence": adherence,
        "model": loaded.checkpoint_id,
    }
