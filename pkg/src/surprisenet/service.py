"""HTTP facade over the harmonizer for the companion UI.

One model per process, loaded at startup or via POST /load; harmonization
handlers run against that immutable state, and seeds travel in request
bodies so any response can be replayed exactly.
"""

from __future__ import annotations

import threading
import uuid
from pathlib import Path
from typing import Literal

import numpy as np
from fastapi import FastAPI, HTTPException, Query
from pydantic import BaseModel, Field

from . import __version__, pipeline
from .cvae import CvaeError
from .evaluation import CorrelationError
from .harmonize import ContourPreset, PresetKind, preset_contour, strip_chords
from .leadsheet import (
    MELODY_DIM,
    ParseError,
    ValidationError,
    align_frames,
    parse_leadsheet,
)
from .pipeline import LoadedModel, PipelineError
from .surprise import SurpriseContour, SurpriseError


class SessionState:
    """Loaded model plus counters; swapped atomically under a lock."""

    def __init__(self) -> None:
        self._lock = threading.Lock()
        self.loaded: LoadedModel | None = None
        self.request_count = 0

    def swap(self, loaded: LoadedModel) -> None:
        with self._lock:
            self.loaded = loaded

    def bump(self) -> None:
        with self._lock:
            self.request_count += 1


class LoadRequest(BaseModel):
    checkpoint: str
    vocabulary: str | None = None
    transitions: str | None = None
    meta: str | None = None


class HarmonizeRequest(BaseModel):
    melody_frames: list[list[int]] | None = None
    leadsheet: dict | None = None
    contour: list[float] | None = None
    preset: str | None = None
    amplitude: float | None = None
    samples: int = Field(default=1, ge=1, le=64)
    seed: int = 0
    decode_mode: Literal["argmax", "sample"] = "argmax"
    temperature: float = 1.0


def create_app(checkpoint: Path | None = None) -> FastAPI:
    app = FastAPI(title="surprisenet", version=__version__)
    # the companion UI is served from its own origin (local tool, no auth)
    from fastapi.middleware.cors import CORSMiddleware

    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["*"], allow_headers=["*"]
    )
    state = SessionState()
    if checkpoint is not None:
        state.swap(pipeline.load_model_dir(checkpoint))

    def _require_model() -> LoadedModel:
        loaded = state.loaded
        if loaded is None:
            raise HTTPException(status_code=409, detail="no model loaded; POST /load first")
        return loaded

    @app.get("/health")
    def health() -> dict:
        loaded = state.loaded
        return {
            "version": __version__,
            "model": loaded.checkpoint_id if loaded else None,
            "requests": state.request_count,
        }

    @app.post("/load")
    def load(body: LoadRequest) -> dict:
        try:
            loaded = pipeline.load_model_dir(
                Path(body.checkpoint),
                Path(body.vocabulary) if body.vocabulary else None,
                Path(body.transitions) if body.transitions else None,
                Path(body.meta) if body.meta else None,
            )
        except (PipelineError, CvaeError) as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from exc
        state.swap(loaded)
        return {"model": loaded.checkpoint_id, "vocab_size": loaded.vocab.size}

    @app.get("/presets")
    def presets(
        length: int = Query(..., description="contour length in frames"),
        amplitude: float | None = Query(None),
    ) -> dict:
        if length < 1:
            raise HTTPException(status_code=422, detail=f"length must be >= 1, got {length}")
        if amplitude is None:
            loaded = _require_model()
            amplitude = loaded.max_surprise
        if amplitude < 0:
            raise HTTPException(status_code=422, detail="amplitude must be >= 0")
        contours = {
            kind.value: list(preset_contour(ContourPreset(kind, amplitude), length).values)
            for kind in PresetKind
        }
        return {"length": length, "amplitude": amplitude, "presets": contours}

    @app.post("/harmonize")
    def harmonize_endpoint(body: HarmonizeRequest) -> dict:
        loaded = _require_model()
        state.bump()
        try:
            melody = _resolve_melody(body, loaded)
            contour = _resolve_contour(body, loaded, melody.shape[0])
            result = pipeline.run_harmonization(
                loaded,
                melody,
                contour,
                num_samples=body.samples,
                seed=body.seed,
                decode_mode=body.decode_mode,
                temperature=body.temperature,
            )
        except (ParseError, ValidationError, SurpriseError, CvaeError, CorrelationError, ValueError) as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from exc
        except HTTPException:
            raise
        except Exception as exc:  # noqa: BLE001 - opaque id, details stay server-side
            error_id = uuid.uuid4().hex[:12]
            raise HTTPException(
                status_code=500, detail=f"internal error {error_id}"
            ) from exc
        return result

    return app


def _resolve_melody(body: HarmonizeRequest, loaded: LoadedModel) -> np.ndarray:
    if (body.melody_frames is None) == (body.leadsheet is None):
        raise HTTPException(
            status_code=422, detail="provide exactly one of melody_frames or leadsheet"
        )
    if body.melody_frames is not None:
        melody = np.asarray(body.melody_frames, dtype=np.int64)
        if melody.ndim != 2 or melody.shape[1] != MELODY_DIM:
            raise HTTPException(
                status_code=422,
                detail=f"melody_frames must be rows of {MELODY_DIM} bits, got {list(melody.shape)}",
            )
        if not np.isin(melody, (0, 1)).all():
            raise HTTPException(status_code=422, detail="melody_frames must be 0/1")
        expected_rest = (melody[:, :12].sum(axis=1) == 0).astype(np.int64)
        if not np.array_equal(melody[:, 12], expected_rest):
            raise HTTPException(
                status_code=422,
                detail="rest bit must be 1 exactly when all chroma bits are 0",
            )
        return melody.astype(np.uint8)
    sheet = parse_leadsheet(body.leadsheet)
    frames = align_frames(
        strip_chords(sheet), loaded.vocab, key_normalize=loaded.key_normalize
    )
    return frames.melody_frames


def _resolve_contour(
    body: HarmonizeRequest, loaded: LoadedModel, n_frames: int
) -> SurpriseContour:
    if (body.contour is None) == (body.preset is None):
        raise HTTPException(
            status_code=422, detail="provide exactly one of contour or preset"
        )
    if body.contour is not None:
        if len(body.contour) != n_frames:
            raise HTTPException(
                status_code=422,
                detail=(
                    f"contour length {len(body.contour)} does not match "
                    f"melody frame count {n_frames}"
                ),
            )
        return SurpriseContour(tuple(float(v) for v in body.contour))
    try:
        kind = PresetKind(body.preset)
    except ValueError as exc:
        raise HTTPException(
            status_code=422, detail=f"unknown preset {body.preset!r}"
        ) from exc
    amplitude = body.amplitude if body.amplitude is not None else loaded.max_surprise
    return preset_contour(ContourPreset(kind, amplitude), n_frames)
