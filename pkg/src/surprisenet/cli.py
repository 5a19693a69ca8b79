"""Command-line front end: prepare, train, harmonize, evaluate, serve.

Every run writes a manifest (command, config snapshot, seed, input hashes,
output paths, wall time) into its output directory. Exit codes: 0 success,
2 usage or input error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import __version__, pipeline
from .cvae import (
    CvaeError,
    EpochRecord,
    TrainingDiverged,
    create_model,
    history_to_csv,
    load_checkpoint,
    save_checkpoint,
    train,
)
from .evaluation import CorrelationError, contour_adherence
from .harmonize import (
    ContourPreset,
    PresetKind,
    melody_frame_count,
    preset_contour,
    strip_chords,
    to_leadsheet,
)
from .leadsheet import (
    FrameSequence,
    ParseError,
    ValidationError,
    VocabMode,
    align_frames,
    parse_leadsheet,
    serialize_leadsheet,
)
from .metrics import MetricError, MetricsReport, corpus_report, report
from .pipeline import PipelineError
from .surprise import SurpriseContour, SurpriseError, contour_from_text

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_NUMERIC = 3

_CONFIG_KEYS = (
    "prenet_hidden",
    "enc_hidden",
    "latent_dim",
    "dropout_rate",
    "batch_size",
    "learning_rate",
    "max_epochs",
    "early_stop_patience",
    "kl_anneal_epochs",
    "class_weighting",
    "val_fraction",
)


class CliError(RuntimeError):
    def __init__(self, message: str, code: int = EXIT_USAGE) -> None:
        super().__init__(message)
        self.code = code


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="surprisenet",
        description="Surprise-contour-controlled melody harmonization.",
    )
    parser.add_argument("--version", action="version", version=f"surprisenet {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--config", type=Path, help="JSON config file; flags win")
    common.add_argument("--out-dir", type=Path)

    p = sub.add_parser("prepare", parents=[common], help="parse corpus, build artifacts")
    p.add_argument("--corpus-dir", type=Path, required=True)
    p.add_argument("--vocab-mode", choices=["96", "corpus"], default="corpus")
    p.add_argument("--no-key-normalize", action="store_true")
    p.add_argument("--alpha", type=float, default=0.01)
    p.add_argument("--test-fraction", type=float, default=0.1)

    t = sub.add_parser("train", parents=[common], help="train the model")
    t.add_argument("--prepared-dir", type=Path, required=True)
    t.add_argument("--resume", type=Path, help="checkpoint to continue from")
    t.add_argument("--prenet-hidden", type=int)
    t.add_argument("--enc-hidden", type=int)
    t.add_argument("--latent-dim", type=int)
    t.add_argument("--dropout-rate", type=float)
    t.add_argument("--batch-size", type=int)
    t.add_argument("--learning-rate", type=float)
    t.add_argument("--max-epochs", type=int)
    t.add_argument("--early-stop-patience", type=int)
    t.add_argument("--kl-anneal-epochs", type=int)
    t.add_argument("--class-weighting", action="store_true", default=None)
    t.add_argument("--val-fraction", type=float)

    h = sub.add_parser("harmonize", parents=[common], help="harmonize a melody")
    h.add_argument("--checkpoint", type=Path, required=True)
    h.add_argument("--melody", type=Path, required=True, help="lead-sheet JSON file")
    h.add_argument("--contour", type=Path, help="contour file (one value per line)")
    h.add_argument("--preset", choices=[k.value for k in PresetKind])
    h.add_argument("--amplitude", type=float, help="preset amplitude (default: training max)")
    h.add_argument("--samples", type=int, default=1)
    h.add_argument("--decode-mode", choices=["argmax", "sample"], default="argmax")
    h.add_argument("--temperature", type=float, default=1.0)

    e = sub.add_parser("evaluate", parents=[common], help="corpus-level reports")
    e.add_argument("--checkpoint", type=Path, required=True)
    e.add_argument("--prepared-dir", type=Path, required=True)
    e.add_argument(
        "--presets",
        default=",".join(k.value for k in PresetKind),
        help="comma-separated preset kinds cycled over test pieces",
    )
    e.add_argument("--samples-per-piece", type=int, default=1)

    s = sub.add_parser("serve", parents=[common], help="run the HTTP service")
    s.add_argument("--checkpoint", type=Path, default=None)
    s.add_argument("--addr", default=None, help="host:port (default 127.0.0.1:8000)")

    return parser


def _apply_config_file(args: argparse.Namespace) -> None:
    if not getattr(args, "config", None):
        return
    path = Path(args.config)
    if not path.exists():
        raise CliError(f"config file not found: {path}")
    try:
        values = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise CliError(f"bad config file {path}: {exc}") from exc
    for key, value in values.items():
        attr = key.replace("-", "_")
        if hasattr(args, attr) and getattr(args, attr) is None:
            setattr(args, attr, value)


def _require_out_dir(args: argparse.Namespace) -> Path:
    if args.out_dir is None:
        raise CliError("--out-dir is required for this command")
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _cmd_prepare(args: argparse.Namespace) -> int:
    out = _require_out_dir(args)
    try:
        pipeline.prepare_corpus(
            args.corpus_dir,
            out,
            vocab_mode=VocabMode(args.vocab_mode),
            key_normalize=not args.no_key_normalize,
            alpha=args.alpha,
            test_fraction=args.test_fraction,
            seed=args.seed,
        )
    except PipelineError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    print(f"prepared corpus written to {out}")
    return EXIT_OK


def _read_history(path: Path) -> list[EpochRecord]:
    rows = []
    for line in path.read_text(encoding="utf-8").splitlines()[1:]:
        parts = line.split(",")
        rows.append(
            EpochRecord(
                int(parts[0]), float(parts[1]), float(parts[2]),
                float(parts[3]), float(parts[4]), float(parts[5]),
            )
        )
    return rows


def _cmd_train(args: argparse.Namespace) -> int:
    out = _require_out_dir(args)
    started = time.monotonic()
    prepared = pipeline.load_prepared(args.prepared_dir)
    examples = pipeline.training_examples(prepared.train_frames, prepared.transitions)

    overrides = {key: getattr(args, key, None) for key in _CONFIG_KEYS}
    overrides["seed"] = args.seed
    config = pipeline.default_config_for(prepared.vocab, overrides)

    start_epoch = 0
    history: list[EpochRecord] = []
    if args.resume:
        model = load_checkpoint(args.resume, expected_fingerprint=prepared.vocab.fingerprint())
        # architecture comes from the checkpoint; training-schedule flags still apply
        schedule = {
            key: getattr(args, key, None)
            for key in (
                "batch_size",
                "learning_rate",
                "max_epochs",
                "early_stop_patience",
                "kl_anneal_epochs",
                "val_fraction",
            )
        }
        overrides = {k: v for k, v in schedule.items() if v is not None}
        model.config = replace(model.config, **overrides)
        config = model.config
        old_history = out / pipeline.HISTORY_FILE
        if old_history.exists():
            history = _read_history(old_history)
            start_epoch = history[-1].epoch + 1 if history else 0
    else:
        model = create_model(config, vocab_fingerprint=prepared.vocab.fingerprint())

    train_set, val_set = _split_train(examples, config)
    history += train(model, train_set, val_set, start_epoch=start_epoch)

    ckpt_path = out / pipeline.CHECKPOINT_FILE
    save_checkpoint(model, ckpt_path)
    (out / pipeline.HISTORY_FILE).write_text(history_to_csv(history), encoding="utf-8")
    # self-contained model directory: copy prepare artifacts next to the checkpoint
    for name in (pipeline.VOCAB_FILE, pipeline.TRANSITIONS_FILE, pipeline.META_FILE):
        src = Path(args.prepared_dir) / name
        if src.exists() and src.resolve() != (out / name).resolve():
            (out / name).write_bytes(src.read_bytes())

    pipeline.write_manifest(
        out,
        "train",
        {"prepared_dir": str(args.prepared_dir), **config.to_dict()},
        args.seed,
        {
            str(Path(args.prepared_dir) / name): pipeline.sha256_file(
                Path(args.prepared_dir) / name
            )
            for name in (pipeline.VOCAB_FILE, pipeline.TRANSITIONS_FILE)
        },
        [str(ckpt_path), str(out / pipeline.HISTORY_FILE)],
        started,
    )
    final = history[-1] if history else None
    if final:
        print(
            f"trained {final.epoch + 1} epochs; "
            f"val_recon={final.val_recon:.4f} val_kl={final.val_kl:.4f}"
        )
    return EXIT_OK


def _split_train(examples, config):
    from .cvae import split_validation

    return split_validation(examples, config.val_fraction, config.seed)


def _cmd_harmonize(args: argparse.Namespace) -> int:
    out = _require_out_dir(args)
    started = time.monotonic()
    loaded = pipeline.load_model_dir(args.checkpoint)
    if not args.melody.exists():
        raise CliError(f"melody file not found: {args.melody}")
    sheet = parse_leadsheet(args.melody.read_text(encoding="utf-8"))
    melody_only = strip_chords(sheet)
    frames = align_frames(melody_only, loaded.vocab, key_normalize=loaded.key_normalize)
    n_frames = len(frames)

    if (args.contour is None) == (args.preset is None):
        raise CliError("exactly one of --contour or --preset is required")
    if args.contour is not None:
        contour = contour_from_text(args.contour.read_text(encoding="utf-8"))
        if len(contour) != n_frames:
            raise CliError(
                f"contour length {len(contour)} does not match melody frame count {n_frames}"
            )
    else:
        amplitude = args.amplitude if args.amplitude is not None else loaded.max_surprise
        contour = preset_contour(
            ContourPreset(PresetKind(args.preset), amplitude), n_frames
        )

    result = pipeline.run_harmonization(
        loaded,
        frames.melody_frames,
        contour,
        num_samples=args.samples,
        seed=args.seed,
        decode_mode=args.decode_mode,
        temperature=args.temperature,
    )

    outputs = []
    for i, sample in enumerate(result["samples"]):
        chords = np.asarray(sample["chords"], dtype=np.int64)
        harmonized = to_leadsheet(
            melody_only,
            chords,
            loaded.vocab,
            key_normalized=loaded.key_normalize,
            title=f"{sheet.title} (sample {i})",
        )
        path = out / f"sample_{i:02d}.json"
        path.write_text(serialize_leadsheet(harmonized), encoding="utf-8")
        outputs.append(str(path))
    report_path = out / "report.json"
    report_path.write_text(json.dumps(result, indent=2), encoding="utf-8")
    outputs.append(str(report_path))

    pipeline.write_manifest(
        out,
        "harmonize",
        {
            "checkpoint": str(args.checkpoint),
            "melody": str(args.melody),
            "preset": args.preset,
            "samples": args.samples,
            "decode_mode": args.decode_mode,
        },
        args.seed,
        {str(args.melody): pipeline.sha256_file(args.melody)},
        outputs,
        started,
    )
    print(f"wrote {len(result['samples'])} harmonizations to {out}")
    return EXIT_OK


def _cmd_evaluate(args: argparse.Namespace) -> int:
    out = _require_out_dir(args)
    started = time.monotonic()
    loaded = pipeline.load_model_dir(args.checkpoint)
    prepared = pipeline.load_prepared(args.prepared_dir)
    if not prepared.test_frames:
        raise CliError("test split is empty; re-prepare with a positive --test-fraction")

    preset_kinds = [PresetKind(p.strip()) for p in args.presets.split(",") if p.strip()]
    if not preset_kinds:
        raise CliError("no presets given")

    rng = np.random.default_rng([args.seed, 7])
    human_reports = []
    generated_reports = []
    given_contours = []
    realized_contours = []
    piece_presets = []
    skipped: list[str] = []
    for piece in prepared.test_frames:
        try:
            human_reports.append(report(piece, loaded.vocab))
        except MetricError:
            pass
        kind = preset_kinds[int(rng.integers(len(preset_kinds)))]
        contour = preset_contour(
            ContourPreset(kind, loaded.max_surprise), len(piece)
        )
        result = pipeline.run_harmonization(
            loaded,
            piece.melody_frames,
            contour,
            num_samples=args.samples_per_piece,
            seed=args.seed,
        )
        for sample in result["samples"]:
            given_contours.append(contour)
            realized_contours.append(SurpriseContour(tuple(sample["realized_contour"])))
            piece_presets.append(kind.value)
            if "error" in sample["metrics"]:
                skipped.append(f"{piece.source_id}: {sample['metrics']['error']}")
            else:
                generated_reports.append(MetricsReport(**sample["metrics"]))

    table1 = {
        "humans": corpus_report(human_reports) if human_reports else None,
        "generated": corpus_report(generated_reports) if generated_reports else None,
        "skipped": skipped,
    }
    try:
        adherence = contour_adherence(given_contours, realized_contours).to_dict()
    except CorrelationError as exc:
        adherence = {"error": str(exc)}
    table2 = {"adherence": adherence, "presets": piece_presets}

    (out / "table1.json").write_text(json.dumps(table1, indent=2), encoding="utf-8")
    (out / "table2.json").write_text(json.dumps(table2, indent=2), encoding="utf-8")
    pipeline.write_manifest(
        out,
        "evaluate",
        {
            "checkpoint": str(args.checkpoint),
            "prepared_dir": str(args.prepared_dir),
            "presets": [k.value for k in preset_kinds],
            "samples_per_piece": args.samples_per_piece,
        },
        args.seed,
        {str(args.checkpoint): loaded.checkpoint_id},
        [str(out / "table1.json"), str(out / "table2.json")],
        started,
    )
    pooled = adherence.get("pooled", {})
    print(
        f"evaluated {len(prepared.test_frames)} pieces; "
        f"pooled rho={pooled.get('rho', float('nan')):.3f} "
        f"p={pooled.get('p_value', float('nan')):.3g} n={pooled.get('n', 0)}"
    )
    return EXIT_OK


def _cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from .service import create_app

    checkpoint = args.checkpoint or os.environ.get("SURPRISENET_CKPT")
    addr = args.addr or os.environ.get("SURPRISENET_ADDR") or "127.0.0.1:8000"
    host, _, port = addr.partition(":")
    app = create_app(Path(checkpoint) if checkpoint else None)
    uvicorn.run(app, host=host or "127.0.0.1", port=int(port or 8000), log_level="warning")
    return EXIT_OK


_COMMANDS = {
    "prepare": _cmd_prepare,
    "train": _cmd_train,
    "harmonize": _cmd_harmonize,
    "evaluate": _cmd_evaluate,
    "serve": _cmd_serve,
}


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        _apply_config_file(args)
        return _COMMANDS[args.command](args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except (ParseError, ValidationError, SurpriseError, MetricError, PipelineError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except TrainingDiverged as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except CvaeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
