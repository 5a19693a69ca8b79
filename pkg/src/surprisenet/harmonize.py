"""Inference: decode chord progressions from melody + surprise contour.

Latents are drawn from the standard-normal prior per frame; the decoder sees
the melody chroma and the Pre-net embedding of the requested contour. Each
harmonization also gets its realized contour, computed with the same
transition model that produced the training contours so given and realized
values share a scale.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from . import cvae
from .cvae import CvaeError, CvaeModel
from .kernel import softmax_rows
from .leadsheet import (
    FRAME_TICKS,
    MELODY_DIM,
    NO_CHORD_INDEX,
    ChordEvent,
    ChordVocabulary,
    LeadSheet,
    align_frames,
)
from .surprise import SurpriseContour, TransitionModel, surprise_contour


class PresetKind(str, Enum):
    SIGMOID = "sigmoid"
    SIGMOID_REVERSED = "sigmoid_reversed"
    ZERO = "zero"
    MAX = "max"
    NORMAL_BUMP = "normal_bump"
    NORMAL_BUMP_REVERSED = "normal_bump_reversed"


@dataclass(frozen=True)
class ContourPreset:
    kind: PresetKind
    amplitude: float

    def __post_init__(self) -> None:
        if self.amplitude < 0:
            raise ValueError(f"preset amplitude must be >= 0, got {self.amplitude}")


def preset_contour(preset: ContourPreset, length: int) -> SurpriseContour:
    """Evaluate a named contour shape at ``length`` frames.

    The logistic is centered at T/2 with steepness 10/T; the bump is a
    Gaussian of width T/6. Reversals mirror the logistic in time and the bump
    in value.
    """
    if length < 1:
        raise ValueError(f"contour length must be >= 1, got {length}")
    m = preset.amplitude
    t = np.arange(length, dtype=np.float64)
    center = length / 2.0
    k = 10.0 / length
    kind = preset.kind
    if kind is PresetKind.ZERO:
        values = np.zeros(length)
    elif kind is PresetKind.MAX:
        values = np.full(length, m)
    elif kind is PresetKind.SIGMOID:
        values = m / (1.0 + np.exp(-k * (t - center)))
    elif kind is PresetKind.SIGMOID_REVERSED:
        values = m / (1.0 + np.exp(k * (t - center)))
    elif kind is PresetKind.NORMAL_BUMP:
        sigma = length / 6.0
        values = m * np.exp(-((t - center) ** 2) / (2.0 * sigma * sigma))
    elif kind is PresetKind.NORMAL_BUMP_REVERSED:
        sigma = length / 6.0
        values = m - m * np.exp(-((t - center) ** 2) / (2.0 * sigma * sigma))
    else:  # pragma: no cover - exhaustive enum
        raise ValueError(f"unknown preset kind {kind!r}")
    return SurpriseContour(tuple(float(v) for v in values))


@dataclass(frozen=True)
class HarmonizationRequest:
    melody_frames: np.ndarray  # (T, 13)
    contour: SurpriseContour  # length T
    num_samples: int = 1
    decode_mode: str = "argmax"  # "argmax" | "sample"
    temperature: float = 1.0
    seed: int = 0

    def __post_init__(self) -> None:
        melody = np.asarray(self.melody_frames)
        if melody.ndim != 2 or melody.shape[1] != MELODY_DIM:
            raise CvaeError(f"melody_frames must be (T, {MELODY_DIM}), got {melody.shape}")
        if len(self.contour) != melody.shape[0]:
            raise CvaeError(
                f"contour length {len(self.contour)} does not match "
                f"melody frame count {melody.shape[0]}"
            )
        if self.num_samples < 1:
            raise CvaeError(f"num_samples must be >= 1, got {self.num_samples}")
        if self.decode_mode not in ("argmax", "sample"):
            raise CvaeError(f"decode_mode must be 'argmax' or 'sample', got {self.decode_mode!r}")
        if self.decode_mode == "sample" and self.temperature <= 0:
            raise CvaeError(f"sampling temperature must be > 0, got {self.temperature}")


@dataclass(frozen=True)
class HarmonizationSample:
    chords: np.ndarray  # (T,) vocabulary indices
    realized: SurpriseContour


def harmonize(
    model: CvaeModel,
    transitions: TransitionModel,
    request: HarmonizationRequest,
) -> list[HarmonizationSample]:
    """Draw ``num_samples`` progressions for one melody/contour pair.

    Sample i depends only on (seed, i), never on how many samples were asked
    for; identical requests reproduce identical outputs.
    """
    melody = np.asarray(request.melody_frames, dtype=np.float32)
    n_frames = melody.shape[0]
    contour_emb = cvae.prenet_forward(model, request.contour)

    samples: list[HarmonizationSample] = []
    for i in range(request.num_samples):
        rng = np.random.default_rng([request.seed, i])
        z = rng.standard_normal((n_frames, model.config.latent_dim))
        logits = cvae.decode(model, z, melody, contour_emb)
        if request.decode_mode == "argmax":
            chords = logits.argmax(axis=1).astype(np.int64)
        else:
            probs = softmax_rows(logits.astype(np.float64) / request.temperature)
            chords = np.array(
                [rng.choice(probs.shape[1], p=probs[t]) for t in range(n_frames)],
                dtype=np.int64,
            )
        realized = surprise_contour(transitions, chords)
        samples.append(HarmonizationSample(chords=chords, realized=realized))
    return samples


def to_leadsheet(
    source: LeadSheet,
    chords: np.ndarray,
    vocab: ChordVocabulary,
    key_normalized: bool = True,
    title: str | None = None,
) -> LeadSheet:
    """Attach a generated chord index sequence to the source melody.

    Consecutive frames sharing a symbol merge into one event; NO_CHORD frames
    leave a gap. When the frames were produced in normalized key space the
    chord roots are transposed back to the source key.
    """
    chords = np.asarray(chords, dtype=np.int64)
    expected = max(1, math.ceil(source.total_ticks / FRAME_TICKS))
    if chords.shape != (expected,):
        raise CvaeError(
            f"chord count {chords.shape} does not match the melody's "
            f"{expected} frames"
        )
    shift_back = -source.key.normalization_shift if key_normalized else 0

    events: list[ChordEvent] = []
    run_start = 0
    for f in range(1, len(chords) + 1):
        if f < len(chords) and chords[f] == chords[run_start]:
            continue
        index = int(chords[run_start])
        if index != NO_CHORD_INDEX:
            symbol = vocab.symbol_at(index)
            events.append(
                ChordEvent(
                    start_ticks=run_start * FRAME_TICKS,
                    duration_ticks=(f - run_start) * FRAME_TICKS,
                    root_pc=(symbol.root_pc + shift_back) % 12,
                    quality=symbol.quality,
                    bass_pc=None
                    if symbol.bass_pc is None
                    else (symbol.bass_pc + shift_back) % 12,
                )
            )
        run_start = f

    return LeadSheet(
        title=title if title is not None else source.title,
        key=source.key,
        beats_per_measure=source.beats_per_measure,
        melody=source.melody,
        chords=tuple(events),
    )


def strip_chords(sheet: LeadSheet) -> LeadSheet:
    """Melody-only copy; harmonization framing is based on the melody alone."""
    return LeadSheet(
        title=sheet.title,
        key=sheet.key,
        beats_per_measure=sheet.beats_per_measure,
        melody=sheet.melody,
        chords=(),
    )


def melody_frame_count(sheet: LeadSheet) -> int:
    return max(1, math.ceil(sheet.total_ticks / FRAME_TICKS))


def melody_frames_for(
    sheet: LeadSheet, vocab: ChordVocabulary, key_normalize: bool = True
) -> np.ndarray:
    """Melody chroma frames of a sheet (existing chords ignored)."""
    return align_frames(strip_chords(sheet), vocab, key_normalize=key_normalize).melody_frames
