"""Surprise-contour-controlled melody harmonization toolkit."""

__version__ = "0.1.0"

from .leadsheet import (
    ChordEvent,
    ChordQuality,
    ChordSymbol,
    ChordVocabulary,
    FrameSequence,
    Key,
    LeadSheet,
    Note,
    VocabMode,
    align_frames,
    build_vocabulary,
    one_hot,
    parse_leadsheet,
    serialize_leadsheet,
)
from .surprise import (
    SurpriseContour,
    TransitionModel,
    fit_transitions,
    max_training_surprise,
    surprise_contour,
)
from .metrics import MetricsReport, report, tonal_centroid
from .cvae import (
    CvaeConfig,
    CvaeModel,
    LatentSample,
    LossBreakdown,
    TrainingExample,
    create_model,
    load_checkpoint,
    save_checkpoint,
    train,
)
from .harmonize import (
    ContourPreset,
    HarmonizationRequest,
    PresetKind,
    harmonize,
    preset_contour,
    to_leadsheet,
)
from .evaluation import CorrelationResult, contour_adherence, spearman

__all__ = [
    "__version__",
    "ChordEvent",
    "ChordQuality",
    "ChordSymbol",
    "ChordVocabulary",
    "FrameSequence",
    "Key",
    "LeadSheet",
    "Note",
    "VocabMode",
    "align_frames",
    "build_vocabulary",
    "one_hot",
    "parse_leadsheet",
    "serialize_leadsheet",
    "SurpriseContour",
    "TransitionModel",
    "fit_transitions",
    "max_training_surprise",
    "surprise_contour",
    "MetricsReport",
    "report",
    "tonal_centroid",
    "CvaeConfig",
    "CvaeModel",
    "LatentSample",
    "LossBreakdown",
    "TrainingExample",
    "create_model",
    "load_checkpoint",
    "save_checkpoint",
    "train",
    "ContourPreset",
    "HarmonizationRequest",
    "PresetKind",
    "harmonize",
    "preset_contour",
    "to_leadsheet",
    "CorrelationResult",
    "contour_adherence",
    "spearman",
]
