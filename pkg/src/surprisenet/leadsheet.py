"""Lead-sheet ingestion: parsing, chord vocabularies, and frame alignment.

A lead sheet is a melody line plus chord symbols. This module parses the
event-based JSON format, validates it, builds chord vocabularies (the fixed
96-type set or a corpus-derived enumeration), and renders melody/chord pairs
onto the fixed two-beat frame grid the model consumes.

Time is stored as integer ticks at 24 ticks per beat so frame boundaries are
exact; one frame spans 48 ticks.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Iterable, Sequence

import numpy as np

TICKS_PER_BEAT = 24
FRAME_BEATS = 2
FRAME_TICKS = FRAME_BEATS * TICKS_PER_BEAT

MELODY_DIM = 13  # 12 chroma bits + 1 rest bit


class ParseError(ValueError):
    """Malformed lead-sheet document; message carries the offending field path."""


class ValidationError(ValueError):
    """Structurally valid document that violates a lead-sheet invariant."""


class MappingError(ValueError):
    """A chord symbol that the requested vocabulary cannot represent."""


# ---------------------------------------------------------------------------
# Chord qualities
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ChordQuality:
    """A named chord quality: semitone offsets from the root (0 always present)."""

    name: str
    intervals: frozenset[int]

    def __post_init__(self) -> None:
        if not self.intervals:
            raise ValidationError(f"quality {self.name!r} has no intervals")
        if 0 not in self.intervals:
            raise ValidationError(f"quality {self.name!r} must contain the root (0)")
        bad = [i for i in self.intervals if not 0 <= i <= 23]
        if bad:
            raise ValidationError(f"quality {self.name!r} has offsets outside 0-23: {bad}")

    def pitch_classes(self, root_pc: int) -> frozenset[int]:
        return frozenset((root_pc + i) % 12 for i in self.intervals)


def _q(name: str, *intervals: int) -> ChordQuality:
    return ChordQuality(name, frozenset(intervals))


#: The eight qualities of the fixed 96-type vocabulary.
CANONICAL_QUALITIES: tuple[ChordQuality, ...] = (
    _q("maj", 0, 4, 7),
    _q("min", 0, 3, 7),
    _q("aug", 0, 4, 8),
    _q("dim", 0, 3, 6),
    _q("sus", 0, 5, 7),
    _q("maj7", 0, 4, 7, 11),
    _q("min7", 0, 3, 7, 10),
    _q("dom7", 0, 4, 7, 10),
)

#: Extended qualities accepted by the parser (beyond the canonical eight).
EXTENDED_QUALITIES: tuple[ChordQuality, ...] = (
    _q("sus2", 0, 2, 7),
    _q("sus4", 0, 5, 7),
    _q("dim7", 0, 3, 6, 9),
    _q("hdim7", 0, 3, 6, 10),
    _q("maj6", 0, 4, 7, 9),
    _q("min6", 0, 3, 7, 9),
    _q("add9", 0, 4, 7, 14),
    _q("minmaj7", 0, 3, 7, 11),
    _q("aug7", 0, 4, 8, 10),
    _q("7sus4", 0, 5, 7, 10),
    _q("dom9", 0, 4, 7, 10, 14),
    _q("maj9", 0, 4, 7, 11, 14),
    _q("min9", 0, 3, 7, 10, 14),
    _q("dom11", 0, 4, 7, 10, 14, 17),
    _q("dom13", 0, 4, 7, 10, 14, 21),
    _q("power", 0, 7),
)

QUALITY_REGISTRY: dict[str, ChordQuality] = {
    q.name: q for q in CANONICAL_QUALITIES + EXTENDED_QUALITIES
}

# Qualities whose canonical reduction is not recoverable by interval containment.
_REDUCTION_ALIASES = {"sus2": "sus", "power": "maj"}

# Tie-break preference when several canonical qualities fit equally well.
_CANONICAL_ORDER = ("maj", "min", "dom7", "min7", "maj7", "dim", "aug", "sus")


def reduce_quality(quality: ChordQuality) -> ChordQuality:
    """Map an arbitrary quality onto the nearest of the eight canonical ones.

    Interval sets are folded mod 12; the largest canonical set contained in the
    folded set wins. If none is contained, the best overlap wins (fewest
    asserted-but-absent tones breaks ties, then a fixed preference order).
    """
    if any(quality.name == q.name for q in CANONICAL_QUALITIES):
        return quality
    alias = _REDUCTION_ALIASES.get(quality.name)
    if alias is not None:
        return QUALITY_REGISTRY[alias]
    folded = {i % 12 for i in quality.intervals}
    contained = [q for q in CANONICAL_QUALITIES if set(q.intervals) <= folded]
    if contained:
        contained.sort(
            key=lambda q: (-len(q.intervals), _CANONICAL_ORDER.index(q.name))
        )
        return contained[0]
    scored = sorted(
        CANONICAL_QUALITIES,
        key=lambda q: (
            -len(set(q.intervals) & folded),
            len(set(q.intervals) - folded),
            _CANONICAL_ORDER.index(q.name),
        ),
    )
    return scored[0]


# ---------------------------------------------------------------------------
# Events and sheets
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Note:
    """A melody note; times in ticks (24 per beat)."""

    start_ticks: int
    duration_ticks: int
    midi_pitch: int

    def __post_init__(self) -> None:
        if self.start_ticks < 0:
            raise ValidationError(f"note start must be >= 0, got {self.start_ticks}")
        if self.duration_ticks <= 0:
            raise ValidationError(f"note duration must be > 0, got {self.duration_ticks}")
        if not 0 <= self.midi_pitch <= 127:
            raise ValidationError(f"midi_pitch must be in 0-127, got {self.midi_pitch}")

    @property
    def end_ticks(self) -> int:
        return self.start_ticks + self.duration_ticks

    @property
    def start_beat(self) -> float:
        return self.start_ticks / TICKS_PER_BEAT

    @property
    def duration_beats(self) -> float:
        return self.duration_ticks / TICKS_PER_BEAT

    @property
    def pitch_class(self) -> int:
        return self.midi_pitch % 12


@dataclass(frozen=True)
class ChordEvent:
    """A chord symbol sounding over a span; times in ticks."""

    start_ticks: int
    duration_ticks: int
    root_pc: int
    quality: ChordQuality
    bass_pc: int | None = None

    def __post_init__(self) -> None:
        if self.start_ticks < 0:
            raise ValidationError(f"chord start must be >= 0, got {self.start_ticks}")
        if self.duration_ticks <= 0:
            raise ValidationError(f"chord duration must be > 0, got {self.duration_ticks}")
        if not 0 <= self.root_pc <= 11:
            raise ValidationError(f"root_pc must be in 0-11, got {self.root_pc}")
        if self.bass_pc is not None and not 0 <= self.bass_pc <= 11:
            raise ValidationError(f"bass_pc must be in 0-11, got {self.bass_pc}")

    @property
    def end_ticks(self) -> int:
        return self.start_ticks + self.duration_ticks

    def pitch_classes(self) -> frozenset[int]:
        pcs = self.quality.pitch_classes(self.root_pc)
        if self.bass_pc is not None:
            pcs = pcs | {self.bass_pc}
        return pcs

    def transposed(self, semitones: int) -> "ChordEvent":
        return ChordEvent(
            self.start_ticks,
            self.duration_ticks,
            (self.root_pc + semitones) % 12,
            self.quality,
            None if self.bass_pc is None else (self.bass_pc + semitones) % 12,
        )


@dataclass(frozen=True)
class Key:
    tonic: int
    mode: str

    def __post_init__(self) -> None:
        if not 0 <= self.tonic <= 11:
            raise ValidationError(f"key tonic must be in 0-11, got {self.tonic}")
        if self.mode not in ("major", "minor"):
            raise ValidationError(f"key mode must be 'major' or 'minor', got {self.mode!r}")

    @property
    def normalization_shift(self) -> int:
        """Signed semitone shift that moves this key to C major / A minor."""
        target = 0 if self.mode == "major" else 9
        shift = (target - self.tonic) % 12
        return shift if shift <= 6 else shift - 12


def _check_no_overlap(events: Sequence, what: str) -> None:
    for prev, cur in zip(events, events[1:]):
        if cur.start_ticks < prev.end_ticks:
            raise ValidationError(
                f"overlapping {what}: [{prev.start_ticks},{prev.end_ticks}) and "
                f"[{cur.start_ticks},{cur.end_ticks})"
            )


@dataclass(frozen=True)
class LeadSheet:
    """A melody with chord annotations; events are kept sorted by start."""

    title: str
    key: Key
    beats_per_measure: int
    melody: tuple[Note, ...]
    chords: tuple[ChordEvent, ...]

    def __post_init__(self) -> None:
        if self.beats_per_measure <= 0:
            raise ValidationError(
                f"beats_per_measure must be positive, got {self.beats_per_measure}"
            )
        object.__setattr__(
            self, "melody", tuple(sorted(self.melody, key=lambda n: (n.start_ticks, n.midi_pitch)))
        )
        object.__setattr__(
            self, "chords", tuple(sorted(self.chords, key=lambda c: c.start_ticks))
        )
        _check_no_overlap(self.melody, "melody notes")
        _check_no_overlap(self.chords, "chord events")

    @property
    def total_ticks(self) -> int:
        ends = [n.end_ticks for n in self.melody] + [c.end_ticks for c in self.chords]
        return max(ends, default=0)

    def transposed(self, semitones: int) -> "LeadSheet":
        melody = tuple(
            Note(n.start_ticks, n.duration_ticks, n.midi_pitch + semitones)
            for n in self.melody
        )
        chords = tuple(c.transposed(semitones) for c in self.chords)
        key = Key((self.key.tonic + semitones) % 12, self.key.mode)
        return LeadSheet(self.title, key, self.beats_per_measure, melody, chords)


# ---------------------------------------------------------------------------
# Parsing and serialization
# ---------------------------------------------------------------------------


def _beats_to_ticks(value: Any, path: str) -> int:
    if not isinstance(value, (int, float)) or isinstance(value, bool):
        raise ParseError(f"{path}: expected a number, got {value!r}")
    ticks = value * TICKS_PER_BEAT
    rounded = round(ticks)
    if abs(ticks - rounded) > 0.01:
        raise ParseError(
            f"{path}: {value} beats does not align to the 24-ticks-per-beat grid"
        )
    return int(rounded)


def _require(obj: dict, key: str, path: str) -> Any:
    if key not in obj:
        raise ParseError(f"{path}: missing field {key!r}")
    return obj[key]


def _int_field(obj: dict, key: str, path: str) -> int:
    value = _require(obj, key, path)
    if not isinstance(value, int) or isinstance(value, bool):
        raise ParseError(f"{path}.{key}: expected an integer, got {value!r}")
    return value


def parse_leadsheet(document: str | dict) -> LeadSheet:
    """Parse an event-based lead-sheet document (JSON text or parsed object)."""
    if isinstance(document, str):
        try:
            obj = json.loads(document)
        except json.JSONDecodeError as exc:
            raise ParseError(f"line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    else:
        obj = document
    if not isinstance(obj, dict):
        raise ParseError("document root must be an object")

    title = _require(obj, "title", "$")
    if not isinstance(title, str):
        raise ParseError(f"$.title: expected a string, got {title!r}")

    key_obj = _require(obj, "key", "$")
    if not isinstance(key_obj, dict):
        raise ParseError("$.key: expected an object")
    key = Key(_int_field(key_obj, "tonic", "$.key"), _require(key_obj, "mode", "$.key"))

    beats_per_measure = _int_field(obj, "beats_per_measure", "$")

    melody: list[Note] = []
    raw_melody = _require(obj, "melody", "$")
    if not isinstance(raw_melody, list):
        raise ParseError("$.melody: expected a list")
    for i, item in enumerate(raw_melody):
        path = f"$.melody[{i}]"
        if not isinstance(item, dict):
            raise ParseError(f"{path}: expected an object")
        melody.append(
            Note(
                _beats_to_ticks(_require(item, "start_beat", path), f"{path}.start_beat"),
                _beats_to_ticks(
                    _require(item, "duration_beats", path), f"{path}.duration_beats"
                ),
                _int_field(item, "midi_pitch", path),
            )
        )

    chords: list[ChordEvent] = []
    raw_chords = _require(obj, "chords", "$")
    if not isinstance(raw_chords, list):
        raise ParseError("$.chords: expected a list")
    for i, item in enumerate(raw_chords):
        path = f"$.chords[{i}]"
        if not isinstance(item, dict):
            raise ParseError(f"{path}: expected an object")
        quality_name = _require(item, "quality", path)
        quality = QUALITY_REGISTRY.get(quality_name)
        if quality is None:
            raise ParseError(f"{path}.quality: unknown quality {quality_name!r}")
        bass = item.get("bass_pc")
        if bass is not None and (not isinstance(bass, int) or isinstance(bass, bool)):
            raise ParseError(f"{path}.bass_pc: expected an integer or null, got {bass!r}")
        chords.append(
            ChordEvent(
                _beats_to_ticks(_require(item, "start_beat", path), f"{path}.start_beat"),
                _beats_to_ticks(
                    _require(item, "duration_beats", path), f"{path}.duration_beats"
                ),
                _int_field(item, "root_pc", path),
                quality,
                bass,
            )
        )

    return LeadSheet(title, key, beats_per_measure, tuple(melody), tuple(chords))


def _ticks_to_beats(ticks: int) -> float | int:
    beats = ticks / TICKS_PER_BEAT
    return int(beats) if beats == int(beats) else beats


def serialize_leadsheet(sheet: LeadSheet) -> str:
    """Render a LeadSheet back to its JSON document form."""
    obj = {
        "title": sheet.title,
        "key": {"tonic": sheet.key.tonic, "mode": sheet.key.mode},
        "beats_per_measure": sheet.beats_per_measure,
        "melody": [
            {
                "start_beat": _ticks_to_beats(n.start_ticks),
                "duration_beats": _ticks_to_beats(n.duration_ticks),
                "midi_pitch": n.midi_pitch,
            }
            for n in sheet.melody
        ],
        "chords": [
            {
                "start_beat": _ticks_to_beats(c.start_ticks),
                "duration_beats": _ticks_to_beats(c.duration_ticks),
                "root_pc": c.root_pc,
                "quality": c.quality.name,
                "bass_pc": c.bass_pc,
            }
            for c in sheet.chords
        ],
    }
    return json.dumps(obj, indent=2)


# ---------------------------------------------------------------------------
# Vocabulary
# ---------------------------------------------------------------------------


class VocabMode(str, Enum):
    VOCAB_96 = "96"
    VOCAB_CORPUS = "corpus"


@dataclass(frozen=True)
class ChordSymbol:
    root_pc: int
    quality: ChordQuality
    bass_pc: int | None = None

    def label(self) -> str:
        names = ("C", "C#", "D", "Eb", "E", "F", "F#", "G", "Ab", "A", "Bb", "B")
        text = f"{names[self.root_pc]}:{self.quality.name}"
        if self.bass_pc is not None:
            text += f"/{names[self.bass_pc]}"
        return text

    def pitch_classes(self) -> frozenset[int]:
        pcs = self.quality.pitch_classes(self.root_pc)
        if self.bass_pc is not None:
            pcs = pcs | {self.bass_pc}
        return pcs


NO_CHORD_INDEX = 0

_SymbolKey = tuple[int, str, int | None]


def _symbol_key(root_pc: int, quality: ChordQuality, bass_pc: int | None) -> _SymbolKey:
    return (root_pc, quality.name, bass_pc)


@dataclass(frozen=True)
class ChordVocabulary:
    """Bijective index <-> chord-symbol mapping with NO_CHORD at index 0."""

    symbols: tuple[ChordSymbol | None, ...]
    mode: VocabMode
    _index: dict[_SymbolKey, int] = field(repr=False, compare=False, default_factory=dict)

    def __post_init__(self) -> None:
        if not self.symbols or self.symbols[0] is not None:
            raise ValidationError("vocabulary must start with NO_CHORD at index 0")
        index: dict[_SymbolKey, int] = {}
        for i, sym in enumerate(self.symbols[1:], start=1):
            if sym is None:
                raise ValidationError("NO_CHORD may only appear at index 0")
            key = _symbol_key(sym.root_pc, sym.quality, sym.bass_pc)
            if key in index:
                raise ValidationError(f"duplicate vocabulary symbol {sym.label()}")
            index[key] = i
        object.__setattr__(self, "_index", index)

    def __len__(self) -> int:
        return len(self.symbols)

    @property
    def size(self) -> int:
        return len(self.symbols)

    def symbol_at(self, index: int) -> ChordSymbol | None:
        return self.symbols[index]

    def label(self, index: int) -> str:
        sym = self.symbols[index]
        return "N.C." if sym is None else sym.label()

    def pitch_classes(self, index: int) -> frozenset[int]:
        sym = self.symbols[index]
        return frozenset() if sym is None else sym.pitch_classes()

    def index_of(self, event: ChordEvent, strict: bool = False) -> int:
        """Index for a chord event; VOCAB_96 reduces out-of-vocabulary symbols.

        With ``strict`` a symbol outside the fixed 96 raises instead of reducing.
        """
        exact = self._index.get(_symbol_key(event.root_pc, event.quality, event.bass_pc))
        if exact is not None:
            return exact
        if self.mode is VocabMode.VOCAB_96:
            if strict:
                raise MappingError(
                    f"chord {event.root_pc}:{event.quality.name} not in the 96-type "
                    "vocabulary (strict mapping)"
                )
            reduced = reduce_quality(event.quality)
            idx = self._index.get(_symbol_key(event.root_pc, reduced, None))
            if idx is None:
                raise MappingError(
                    f"cannot reduce chord quality {event.quality.name!r} to the "
                    "96-type vocabulary"
                )
            return idx
        raise MappingError(
            f"chord {event.root_pc}:{event.quality.name}"
            f"{'' if event.bass_pc is None else '/' + str(event.bass_pc)} "
            "not in the corpus vocabulary"
        )

    def fingerprint(self) -> int:
        """Stable 64-bit hash of the symbol list (checkpoint compatibility check)."""
        import hashlib

        h = hashlib.blake2b(digest_size=8)
        h.update(self.mode.value.encode())
        for sym in self.symbols[1:]:
            h.update(sym.label().encode())
            h.update(b"|")
            h.update(",".join(map(str, sorted(sym.quality.intervals))).encode())
            h.update(b";")
        return int.from_bytes(h.digest(), "little")

    def to_json(self) -> str:
        obj = {
            "mode": self.mode.value,
            "symbols": [
                None
                if sym is None
                else {
                    "root_pc": sym.root_pc,
                    "quality": sym.quality.name,
                    "intervals": sorted(sym.quality.intervals),
                    "bass_pc": sym.bass_pc,
                }
                for sym in self.symbols
            ],
        }
        return json.dumps(obj, indent=2)

    @classmethod
    def from_json(cls, text: str) -> "ChordVocabulary":
        obj = json.loads(text)
        symbols: list[ChordSymbol | None] = []
        for item in obj["symbols"]:
            if item is None:
                symbols.append(None)
                continue
            quality = ChordQuality(item["quality"], frozenset(item["intervals"]))
            symbols.append(ChordSymbol(item["root_pc"], quality, item["bass_pc"]))
        return cls(tuple(symbols), VocabMode(obj["mode"]))


def build_vocabulary(
    sheets: Iterable[LeadSheet], mode: VocabMode = VocabMode.VOCAB_CORPUS
) -> ChordVocabulary:
    """Build a chord vocabulary.

    VOCAB_96 ignores the input and returns the fixed 12-root x 8-quality set;
    VOCAB_CORPUS enumerates every distinct (root, quality, bass) triple seen,
    sorted by root, then quality name, then bass.
    """
    if mode is VocabMode.VOCAB_96:
        symbols: list[ChordSymbol | None] = [None]
        for root in range(12):
            for quality in CANONICAL_QUALITIES:
                symbols.append(ChordSymbol(root, quality, None))
        return ChordVocabulary(tuple(symbols), mode)

    seen: dict[_SymbolKey, ChordSymbol] = {}
    count = 0
    for sheet in sheets:
        count += 1
        for event in sheet.chords:
            key = _symbol_key(event.root_pc, event.quality, event.bass_pc)
            seen.setdefault(key, ChordSymbol(event.root_pc, event.quality, event.bass_pc))
    if count == 0:
        raise ValidationError("VOCAB_CORPUS requires at least one lead sheet")
    ordered = sorted(
        seen.values(),
        key=lambda s: (s.root_pc, s.quality.name, -1 if s.bass_pc is None else s.bass_pc),
    )
    return ChordVocabulary((None, *ordered), VocabMode.VOCAB_CORPUS)


# ---------------------------------------------------------------------------
# Frame alignment
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class FrameSequence:
    """Melody/chord pair aligned at two-beat frames.

    ``melody_frames`` is a (T, 13) 0/1 matrix (12 chroma bits + rest bit);
    ``chord_frames`` is a length-T vector of vocabulary indices.
    """

    melody_frames: np.ndarray
    chord_frames: np.ndarray
    frames_per_measure: int
    source_id: str

    def __post_init__(self) -> None:
        melody = np.ascontiguousarray(self.melody_frames, dtype=np.uint8)
        chords = np.ascontiguousarray(self.chord_frames, dtype=np.int64)
        if melody.ndim != 2 or melody.shape[1] != MELODY_DIM:
            raise ValidationError(f"melody_frames must be (T, {MELODY_DIM})")
        if chords.ndim != 1 or chords.shape[0] != melody.shape[0]:
            raise ValidationError("chord_frames length must match melody_frames")
        if melody.shape[0] < 1:
            raise ValidationError("a frame sequence needs at least one frame")
        rest_expected = (melody[:, :12].sum(axis=1) == 0).astype(np.uint8)
        if not np.array_equal(melody[:, 12], rest_expected):
            raise ValidationError("rest bit must be 1 exactly when all chroma bits are 0")
        if (chords < 0).any():
            raise ValidationError("chord indices must be nonnegative")
        melody.setflags(write=False)
        chords.setflags(write=False)
        object.__setattr__(self, "melody_frames", melody)
        object.__setattr__(self, "chord_frames", chords)

    def __len__(self) -> int:
        return self.melody_frames.shape[0]


def align_frames(
    sheet: LeadSheet,
    vocab: ChordVocabulary,
    key_normalize: bool = True,
    strict: bool = False,
) -> FrameSequence:
    """Render a lead sheet onto the two-beat frame grid.

    A frame's chroma bit is set when a note of that pitch class sounds anywhere
    in the frame; its chord is the event covering the frame's start beat
    (NO_CHORD when silent). With ``key_normalize`` everything is transposed to
    C major / A minor first.
    """
    if sheet.beats_per_measure % FRAME_BEATS != 0:
        raise ValidationError(
            f"two-beat framing requires an even beat count per measure, "
            f"got {sheet.beats_per_measure}"
        )
    shift = sheet.key.normalization_shift if key_normalize else 0

    total = sheet.total_ticks
    n_frames = max(1, math.ceil(total / FRAME_TICKS))

    melody = np.zeros((n_frames, MELODY_DIM), dtype=np.uint8)
    for note in sheet.melody:
        pitch = note.midi_pitch + shift
        if not 0 <= pitch <= 127:
            raise ValidationError(
                f"key normalization moves pitch {note.midi_pitch} out of MIDI range"
            )
        first = note.start_ticks // FRAME_TICKS
        last = (note.end_ticks - 1) // FRAME_TICKS
        melody[first : last + 1, pitch % 12] = 1
    melody[:, 12] = (melody[:, :12].sum(axis=1) == 0).astype(np.uint8)

    chords = np.zeros(n_frames, dtype=np.int64)
    events = [c.transposed(shift) if shift else c for c in sheet.chords]
    ev = 0
    for f in range(n_frames):
        start = f * FRAME_TICKS
        while ev < len(events) and events[ev].end_ticks <= start:
            ev += 1
        if ev < len(events) and events[ev].start_ticks <= start:
            chords[f] = vocab.index_of(events[ev], strict=strict)
        else:
            chords[f] = NO_CHORD_INDEX

    return FrameSequence(melody, chords, sheet.beats_per_measure // FRAME_BEATS, sheet.title)


def one_hot(chord_frames: Sequence[int] | np.ndarray, vocab_size: int) -> np.ndarray:
    """One-hot encode a chord index sequence as a (T, vocab_size) float matrix."""
    indices = np.asarray(chord_frames, dtype=np.int64)
    if indices.ndim != 1:
        raise ValidationError("chord_frames must be one-dimensional")
    if indices.size and (indices.min() < 0 or indices.max() >= vocab_size):
        bad = indices[(indices < 0) | (indices >= vocab_size)][0]
        raise ValidationError(f"chord index {bad} out of range for vocab size {vocab_size}")
    out = np.zeros((indices.shape[0], vocab_size), dtype=np.float32)
    out[np.arange(indices.shape[0]), indices] = 1.0
    return out


def frames_to_text(seq: FrameSequence) -> str:
    """Tabular export: one frame per line of comma-separated integers."""
    lines = []
    for i in range(len(seq)):
        bits = ",".join(str(int(b)) for b in seq.melody_frames[i, :12])
        rest = int(seq.melody_frames[i, 12])
        lines.append(f"{i},{bits},{rest},{int(seq.chord_frames[i])}")
    return "\n".join(lines) + "\n"


def frames_from_text(
    text: str, frames_per_measure: int = 2, source_id: str = ""
) -> FrameSequence:
    """Parse the tabular frame export produced by :func:`frames_to_text`."""
    melody_rows = []
    chord_rows = []
    for lineno, line in enumerate(text.strip().splitlines(), start=1):
        parts = [p.strip() for p in line.split(",")]
        if len(parts) != 15:
            raise ParseError(f"line {lineno}: expected 15 fields, got {len(parts)}")
        try:
            values = [int(p) for p in parts]
        except ValueError as exc:
            raise ParseError(f"line {lineno}: {exc}") from exc
        melody_rows.append(values[1:14])
        chord_rows.append(values[14])
    if not melody_rows:
        raise ParseError("empty frame export")
    return FrameSequence(
        np.array(melody_rows, dtype=np.uint8),
        np.array(chord_rows, dtype=np.int64),
        frames_per_measure,
        source_id,
    )
