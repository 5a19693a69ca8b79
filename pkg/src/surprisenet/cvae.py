"""Conditional sequence VAE for chord progressions.

Architecture: a Pre-net (bidirectional recurrent layer) lifts the scalar
surprise contour to a per-frame embedding; the encoder consumes chord one-hots
concatenated with melody chroma and the contour embedding and emits per-frame
Gaussian posterior parameters through two linear heads; the decoder consumes
the sampled latents concatenated with the same conditions and emits per-frame
chord logits, with no autoregressive feedback.

Training minimizes reconstruction cross-entropy plus a KL term against the
standard-normal prior, with the KL weight annealed linearly from 0 over the
first epochs to avoid posterior collapse. Optional class weighting boosts
rare chords.
"""

from __future__ import annotations

import json
import struct
from dataclasses import asdict, dataclass
from typing import Sequence

import numpy as np

from . import kernel
from .kernel import AdamOptimizer, Dropout, LinearLayer, RecurrentLayer, Tensor
from .leadsheet import MELODY_DIM
from .surprise import SurpriseContour

CHECKPOINT_MAGIC = b"SNCK"
CHECKPOINT_VERSION = 1


class CvaeError(RuntimeError):
    """Model misuse: shape mismatches, bad checkpoints, divergence."""


class TrainingDiverged(CvaeError):
    """Loss became non-finite during training."""


# ---------------------------------------------------------------------------
# Configuration and containers
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CvaeConfig:
    vocab_size: int
    melody_dim: int = MELODY_DIM
    prenet_hidden: int = 128  # per direction; contour embedding is twice this
    enc_hidden: int = 256
    latent_dim: int = 16
    dropout_rate: float = 0.2
    batch_size: int = 64
    learning_rate: float = 1e-3
    max_epochs: int = 200
    early_stop_patience: int = 10
    kl_anneal_epochs: int = 20
    beta_max: float = 1.0
    class_weighting: bool = False
    val_fraction: float = 0.05
    seed: int = 0

    def __post_init__(self) -> None:
        for name in ("vocab_size", "melody_dim", "prenet_hidden", "enc_hidden", "latent_dim"):
            if getattr(self, name) <= 0:
                raise CvaeError(f"{name} must be positive, got {getattr(self, name)}")
        if not 0.0 <= self.dropout_rate < 1.0:
            raise CvaeError(f"dropout_rate must be in [0, 1), got {self.dropout_rate}")

    @property
    def contour_dim(self) -> int:
        return 2 * self.prenet_hidden

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, obj: dict) -> "CvaeConfig":
        return cls(**obj)


@dataclass(frozen=True)
class TrainingExample:
    """One frame-aligned piece: melody chroma, chord indices, surprise values."""

    melody: np.ndarray  # (T, 13)
    chords: np.ndarray  # (T,)
    contour: np.ndarray  # (T,)
    source_id: str = ""

    def __post_init__(self) -> None:
        t = self.chords.shape[0]
        if self.melody.shape != (t, MELODY_DIM) or self.contour.shape != (t,):
            raise CvaeError(
                f"misaligned example {self.source_id!r}: melody {self.melody.shape}, "
                f"chords {self.chords.shape}, contour {self.contour.shape}"
            )

    def __len__(self) -> int:
        return self.chords.shape[0]


@dataclass(frozen=True)
class LatentSample:
    """Reparameterized draw: z = mu + exp(log_var / 2) * epsilon."""

    mu: np.ndarray
    log_var: np.ndarray
    epsilon: np.ndarray
    z: np.ndarray

    def __post_init__(self) -> None:
        if not (self.mu.shape == self.log_var.shape == self.epsilon.shape == self.z.shape):
            raise CvaeError("latent sample fields must share one shape")


@dataclass(frozen=True)
class LossBreakdown:
    reconstruction: float
    kl: float
    beta: float

    @property
    def total(self) -> float:
        return self.reconstruction + self.beta * self.kl


# ---------------------------------------------------------------------------
# Model
# ---------------------------------------------------------------------------


class CvaeModel:
    """Pre-net + encoder + decoder parameter set bound to one vocabulary."""

    def __init__(
        self,
        config: CvaeConfig,
        vocab_fingerprint: int = 0,
        dtype=kernel.DEFAULT_DTYPE,
    ) -> None:
        self.config = config
        self.vocab_fingerprint = vocab_fingerprint
        self.dtype = np.dtype(dtype)
        rng = np.random.default_rng(config.seed)
        self.prenet = RecurrentLayer(1, config.prenet_hidden, rng, "prenet", dtype)
        enc_input = config.vocab_size + config.melody_dim + config.contour_dim
        self.encoder = RecurrentLayer(enc_input, config.enc_hidden, rng, "encoder", dtype)
        self.mu_head = LinearLayer(2 * config.enc_hidden, config.latent_dim, rng, "mu_head", dtype)
        self.log_var_head = LinearLayer(
            2 * config.enc_hidden, config.latent_dim, rng, "log_var_head", dtype
        )
        dec_input = config.latent_dim + config.melody_dim + config.contour_dim
        self.decoder = RecurrentLayer(dec_input, config.enc_hidden, rng, "decoder", dtype)
        self.out_head = LinearLayer(2 * config.enc_hidden, config.vocab_size, rng, "out_head", dtype)
        self.dropout = Dropout(config.dropout_rate)

    def parameters(self) -> list[Tensor]:
        params: list[Tensor] = []
        for module in (
            self.prenet,
            self.encoder,
            self.mu_head,
            self.log_var_head,
            self.decoder,
            self.out_head,
        ):
            params.extend(module.parameters())
        return params

    def named_parameters(self) -> list[tuple[str, Tensor]]:
        return [(p.name, p) for p in self.parameters()]

    # -- batched graph building (lists of (B, *) tensors per frame) ----------

    def _prenet_frames(
        self, contour: np.ndarray, rng: np.random.Generator | None, training: bool
    ) -> list[Tensor]:
        frames = [Tensor(contour[t][:, None].astype(self.dtype)) for t in range(contour.shape[0])]
        outputs = self.prenet.forward(frames)
        return [self.dropout.forward(o, rng, training) for o in outputs]

    def _encoder_frames(
        self,
        chords_onehot: np.ndarray,
        melody: np.ndarray,
        contour_emb: Sequence[Tensor],
        rng: np.random.Generator | None,
        training: bool,
    ) -> tuple[list[Tensor], list[Tensor]]:
        inputs = [
            kernel.concat(
                [
                    Tensor(chords_onehot[t].astype(self.dtype)),
                    Tensor(melody[t].astype(self.dtype)),
                    contour_emb[t],
                ],
                axis=1,
            )
            for t in range(melody.shape[0])
        ]
        hidden = self.encoder.forward(inputs)
        hidden = [self.dropout.forward(h, rng, training) for h in hidden]
        mus = [self.mu_head.forward(h) for h in hidden]
        log_vars = [self.log_var_head.forward(h) for h in hidden]
        return mus, log_vars

    def _decoder_frames(
        self,
        z_frames: Sequence[Tensor],
        melody: np.ndarray,
        contour_emb: Sequence[Tensor],
        rng: np.random.Generator | None,
        training: bool,
    ) -> list[Tensor]:
        inputs = [
            kernel.concat(
                [z_frames[t], Tensor(melody[t].astype(self.dtype)), contour_emb[t]],
                axis=1,
            )
            for t in range(melody.shape[0])
        ]
        hidden = self.decoder.forward(inputs)
        hidden = [self.dropout.forward(h, rng, training) for h in hidden]
        return [self.out_head.forward(h) for h in hidden]


def create_model(config: CvaeConfig, vocab_fingerprint: int = 0, dtype=None) -> CvaeModel:
    return CvaeModel(config, vocab_fingerprint, dtype or kernel.DEFAULT_DTYPE)


# ---------------------------------------------------------------------------
# Public single-sequence operations
# ---------------------------------------------------------------------------


def _contour_array(contour: SurpriseContour | np.ndarray | Sequence[float]) -> np.ndarray:
    if isinstance(contour, SurpriseContour):
        return contour.as_array()
    return np.asarray(contour, dtype=np.float64)


def prenet_forward(model: CvaeModel, contour) -> np.ndarray:
    """Embed a scalar surprise contour as a (T, contour_dim) matrix."""
    values = _contour_array(contour)
    if values.ndim != 1 or values.shape[0] < 1:
        raise CvaeError("contour must be a nonempty 1-D sequence")
    with kernel.no_grad():
        frames = model._prenet_frames(values[:, None], rng=None, training=False)
    return np.stack([f.data[0] for f in frames])


def encode(
    model: CvaeModel,
    chords_onehot: np.ndarray,
    melody: np.ndarray,
    contour_emb: np.ndarray,
) -> tuple[np.ndarray, np.ndarray]:
    """Per-frame posterior parameters (mu, log_var), each (T, latent_dim)."""
    chords_onehot = np.asarray(chords_onehot)
    melody = np.asarray(melody)
    contour_emb = np.asarray(contour_emb)
    t = melody.shape[0]
    if chords_onehot.shape != (t, model.config.vocab_size):
        raise CvaeError(
            f"chords must be (T, {model.config.vocab_size}), got {chords_onehot.shape}"
        )
    if melody.shape != (t, model.config.melody_dim):
        raise CvaeError(f"melody must be (T, {model.config.melody_dim}), got {melody.shape}")
    if contour_emb.shape != (t, model.config.contour_dim):
        raise CvaeError(
            f"contour embedding must be (T, {model.config.contour_dim}), got {contour_emb.shape}"
        )
    with kernel.no_grad():
        emb = [Tensor(contour_emb[i][None, :].astype(model.dtype)) for i in range(t)]
        mus, lvs = model._encoder_frames(
            chords_onehot[:, None, :], melody[:, None, :], emb, rng=None, training=False
        )
    return (
        np.stack([m.data[0] for m in mus]),
        np.stack([v.data[0] for v in lvs]),
    )


def reparameterize(
    mu: np.ndarray, log_var: np.ndarray, rng: np.random.Generator
) -> LatentSample:
    """Draw z = mu + exp(log_var / 2) * epsilon with epsilon ~ N(0, I)."""
    mu = np.asarray(mu, dtype=np.float64)
    log_var = np.asarray(log_var, dtype=np.float64)
    if mu.shape != log_var.shape:
        raise CvaeError(f"mu {mu.shape} and log_var {log_var.shape} differ")
    epsilon = rng.standard_normal(mu.shape)
    z = mu + np.exp(0.5 * log_var) * epsilon
    return LatentSample(mu=mu, log_var=log_var, epsilon=epsilon, z=z)


def decode(
    model: CvaeModel, z: np.ndarray, melody: np.ndarray, contour_emb: np.ndarray
) -> np.ndarray:
    """Per-frame chord logits (T, vocab_size) for latents and conditions."""
    z = np.asarray(z)
    melody = np.asarray(melody)
    contour_emb = np.asarray(contour_emb)
    t = melody.shape[0]
    if z.shape != (t, model.config.latent_dim):
        raise CvaeError(f"z must be (T, {model.config.latent_dim}), got {z.shape}")
    if melody.shape != (t, model.config.melody_dim):
        raise CvaeError(f"melody must be (T, {model.config.melody_dim}), got {melody.shape}")
    if contour_emb.shape != (t, model.config.contour_dim):
        raise CvaeError(
            f"contour embedding must be (T, {model.config.contour_dim}), got {contour_emb.shape}"
        )
    with kernel.no_grad():
        emb = [Tensor(contour_emb[i][None, :].astype(model.dtype)) for i in range(t)]
        zs = [Tensor(z[i][None, :].astype(model.dtype)) for i in range(t)]
        logits = model._decoder_frames(zs, melody[:, None, :], emb, rng=None, training=False)
    return np.stack([l.data[0] for l in logits])


# ---------------------------------------------------------------------------
# Loss
# ---------------------------------------------------------------------------


def elbo_terms_graph(
    logits_frames: Sequence[Tensor],
    targets: np.ndarray,
    mu_frames: Sequence[Tensor],
    log_var_frames: Sequence[Tensor],
    beta: float,
    class_weights: np.ndarray | None = None,
) -> tuple[Tensor, LossBreakdown]:
    """Assemble the training objective from per-frame graph outputs.

    Reconstruction is the mean over frames of the per-frame (optionally
    class-weighted) cross-entropy; the KL term is the mean over frames and
    batch of 0.5 * sum(exp(log_var) + mu^2 - 1 - log_var) over latent dims.
    """
    n_frames = len(logits_frames)
    if n_frames == 0:
        raise CvaeError("empty batch")

    recon: Tensor | None = None
    for t, logits in enumerate(logits_frames):
        ce = kernel.softmax_cross_entropy(logits, targets[t], class_weights)
        recon = ce if recon is None else recon + ce
    recon = recon * float(1.0 / n_frames)

    batch = mu_frames[0].data.shape[0]
    kl: Tensor | None = None
    for mu, log_var in zip(mu_frames, log_var_frames):
        elem = kernel.exp(log_var) + mu * mu - 1.0 - log_var
        total = kernel.tsum(elem)
        kl = total if kl is None else kl + total
    kl = kl * float(0.5 / (batch * n_frames))

    total_loss = recon + kl * float(beta)
    breakdown = LossBreakdown(
        reconstruction=float(recon.data), kl=float(kl.data), beta=float(beta)
    )
    return total_loss, breakdown


def batch_loss_graph(
    model: CvaeModel,
    melody: np.ndarray,  # (T, B, 13)
    chords: np.ndarray,  # (T, B) integer indices
    contour: np.ndarray,  # (T, B)
    beta: float,
    class_weights: np.ndarray | None = None,
    rng: np.random.Generator | None = None,
    training: bool = False,
) -> tuple[Tensor, LossBreakdown]:
    """Full forward pass to the objective for one frame-aligned batch."""
    t, b = chords.shape
    onehot = np.zeros((t, b, model.config.vocab_size), dtype=model.dtype)
    grid = np.arange(b)
    for i in range(t):
        onehot[i, grid, chords[i]] = 1.0

    drop_rng = rng if training else None
    emb = model._prenet_frames(contour, drop_rng, training)
    mus, log_vars = model._encoder_frames(onehot, melody, emb, drop_rng, training)

    z_frames: list[Tensor] = []
    for mu, log_var in zip(mus, log_vars):
        if rng is not None:
            eps = rng.standard_normal(mu.data.shape).astype(model.dtype)
        else:
            eps = np.zeros(mu.data.shape, dtype=model.dtype)
        sigma = kernel.exp(log_var * 0.5)
        z_frames.append(mu + sigma * Tensor(eps))

    logits = model._decoder_frames(z_frames, melody, emb, drop_rng, training)
    return elbo_terms_graph(logits, chords, mus, log_vars, beta, class_weights)


def loss(
    model: CvaeModel,
    melody: np.ndarray,  # (T, 13) or (T, B, 13)
    chords: np.ndarray,
    contour: np.ndarray,
    beta: float = 1.0,
    class_weights: np.ndarray | None = None,
    rng: np.random.Generator | None = None,
) -> LossBreakdown:
    """Objective value for one sequence or batch (no parameter updates)."""
    melody = np.asarray(melody)
    chords = np.asarray(chords, dtype=np.int64)
    contour = np.asarray(contour, dtype=np.float64)
    if melody.ndim == 2:
        melody = melody[:, None, :]
        chords = chords[:, None]
        contour = contour[:, None]
    _, breakdown = batch_loss_graph(
        model, melody, chords, contour, beta, class_weights, rng=rng, training=False
    )
    return breakdown


def class_weights(chord_counts: np.ndarray, vocab_size: int) -> np.ndarray:
    """Inverse-sqrt-frequency weights, normalized to mean 1 over seen classes."""
    counts = np.zeros(vocab_size, dtype=np.float64)
    chord_counts = np.asarray(chord_counts, dtype=np.float64)
    counts[: chord_counts.shape[0]] = chord_counts
    raw = 1.0 / np.sqrt(counts + 1.0)
    observed = counts > 0
    if observed.any():
        raw = raw / raw[observed].mean()
    return raw


# ---------------------------------------------------------------------------
# Training
# ---------------------------------------------------------------------------


def split_validation(
    examples: Sequence[TrainingExample], fraction: float, seed: int
) -> tuple[list[TrainingExample], list[TrainingExample]]:
    """Seeded shuffle split; at least one validation piece when possible."""
    items = list(examples)
    if len(items) < 2 or fraction <= 0.0:
        return items, []
    rng = np.random.default_rng([seed, 2])
    order = rng.permutation(len(items))
    n_val = max(1, int(round(len(items) * fraction)))
    val_ids = set(int(i) for i in order[:n_val])
    train = [ex for i, ex in enumerate(items) if i not in val_ids]
    val = [ex for i, ex in enumerate(items) if i in val_ids]
    return train, val


def _batches(
    examples: Sequence[TrainingExample], batch_size: int, rng: np.random.Generator
) -> list[list[TrainingExample]]:
    """Shuffle, then bucket by length so each batch stacks cleanly."""
    order = rng.permutation(len(examples))
    buckets: dict[int, list[TrainingExample]] = {}
    for i in order:
        ex = examples[int(i)]
        buckets.setdefault(len(ex), []).append(ex)
    batches = []
    for length in sorted(buckets):
        bucket = buckets[length]
        for start in range(0, len(bucket), batch_size):
            batches.append(bucket[start : start + batch_size])
    return batches


def _stack(batch: Sequence[TrainingExample]) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    melody = np.stack([ex.melody for ex in batch], axis=1).astype(np.float32)
    chords = np.stack([ex.chords for ex in batch], axis=1).astype(np.int64)
    contour = np.stack([ex.contour for ex in batch], axis=1).astype(np.float64)
    return melody, chords, contour


def _epoch_beta(epoch: int, anneal_epochs: int, beta_max: float = 1.0) -> float:
    if anneal_epochs <= 0:
        return beta_max
    return beta_max * min(1.0, epoch / anneal_epochs)


def _dataset_loss(
    model: CvaeModel,
    examples: Sequence[TrainingExample],
    class_w: np.ndarray | None,
) -> tuple[float, float]:
    """Deterministic evaluation loss (dropout off, z at the posterior mean)."""
    recon_total = 0.0
    kl_total = 0.0
    frames = 0
    with_batches = _batches(examples, 256, np.random.default_rng(0))
    for batch in with_batches:
        melody, chords, contour = _stack(batch)
        _, breakdown = batch_loss_graph(
            model, melody, chords, contour, beta=1.0, class_weights=class_w,
            rng=None, training=False,
        )
        weight = chords.shape[0] * chords.shape[1]
        recon_total += breakdown.reconstruction * weight
        kl_total += breakdown.kl * weight
        frames += weight
    return recon_total / frames, kl_total / frames


@dataclass
class EpochRecord:
    epoch: int
    train_recon: float
    train_kl: float
    val_recon: float
    val_kl: float
    beta: float


def history_to_csv(history: Sequence[EpochRecord]) -> str:
    lines = ["epoch,train_recon,train_kl,val_recon,val_kl,beta"]
    for row in history:
        lines.append(
            f"{row.epoch},{row.train_recon:.6f},{row.train_kl:.6f},"
            f"{row.val_recon:.6f},{row.val_kl:.6f},{row.beta:.4f}"
        )
    return "\n".join(lines) + "\n"


def train(
    model: CvaeModel,
    train_set: Sequence[TrainingExample],
    val_set: Sequence[TrainingExample] | None = None,
    corpus_counts: np.ndarray | None = None,
    start_epoch: int = 0,
) -> list[EpochRecord]:
    """Train in place; returns per-epoch history.

    Early-stops when the validation total (reconstruction + full-weight KL)
    fails to improve for ``early_stop_patience`` epochs and restores the best
    parameters. With no validation set the training loss drives stopping.
    """
    config = model.config
    if not train_set:
        raise CvaeError("training set is empty")

    class_w: np.ndarray | None = None
    if config.class_weighting:
        if corpus_counts is None:
            counts = np.zeros(config.vocab_size, dtype=np.float64)
            for ex in train_set:
                np.add.at(counts, ex.chords, 1.0)
            corpus_counts = counts
        class_w = class_weights(corpus_counts, config.vocab_size)

    rng = np.random.default_rng([config.seed, 1])
    optimizer = AdamOptimizer(model.parameters(), learning_rate=config.learning_rate)
    history: list[EpochRecord] = []
    best_total = np.inf
    best_params: list[np.ndarray] | None = None
    patience_left = config.early_stop_patience

    for epoch in range(start_epoch, config.max_epochs):
        beta = _epoch_beta(epoch, config.kl_anneal_epochs, config.beta_max)
        train_recon = 0.0
        train_kl = 0.0
        frames = 0
        for batch in _batches(train_set, config.batch_size, rng):
            melody, chords, contour = _stack(batch)
            optimizer.zero_grad()
            total, breakdown = batch_loss_graph(
                model, melody, chords, contour, beta, class_w, rng=rng, training=True
            )
            if not np.isfinite(total.data):
                raise TrainingDiverged(
                    f"non-finite loss at epoch {epoch}: recon={breakdown.reconstruction}, "
                    f"kl={breakdown.kl}"
                )
            total.backward()
            optimizer.step()
            weight = chords.shape[0] * chords.shape[1]
            train_recon += breakdown.reconstruction * weight
            train_kl += breakdown.kl * weight
            frames += weight
        train_recon /= frames
        train_kl /= frames

        if val_set:
            val_recon, val_kl = _dataset_loss(model, val_set, class_w)
        else:
            val_recon, val_kl = train_recon, train_kl
        if not (np.isfinite(val_recon) and np.isfinite(val_kl)):
            raise TrainingDiverged(f"non-finite validation loss at epoch {epoch}")

        history.append(EpochRecord(epoch, train_recon, train_kl, val_recon, val_kl, beta))

        val_total = val_recon + config.beta_max * val_kl
        if val_total < best_total - 1e-9:
            best_total = val_total
            best_params = [p.data.copy() for p in model.parameters()]
            patience_left = config.early_stop_patience
        else:
            patience_left -= 1
            if patience_left <= 0:
                break

    if best_params is not None:
        for p, data in zip(model.parameters(), best_params):
            p.data = data
    return history


def reconstruction_accuracy(
    model: CvaeModel, examples: Sequence[TrainingExample]
) -> float:
    """Teacher-forced frame accuracy with z at the posterior mean."""
    correct = 0
    total = 0
    for ex in examples:
        onehot = np.zeros((len(ex), model.config.vocab_size), dtype=np.float32)
        onehot[np.arange(len(ex)), ex.chords] = 1.0
        emb = prenet_forward(model, ex.contour)
        mu, _ = encode(model, onehot, ex.melody, emb)
        logits = decode(model, mu, ex.melody, emb)
        predicted = logits.argmax(axis=1)
        correct += int((predicted == ex.chords).sum())
        total += len(ex)
    return correct / total if total else 0.0


# ---------------------------------------------------------------------------
# Checkpoint I/O
# ---------------------------------------------------------------------------


def save_checkpoint(model: CvaeModel, path) -> None:
    """Write magic, version, JSON header, then raw little-endian f32 tensors."""
    tensors = []
    blobs = []
    offset = 0
    for name, p in model.named_parameters():
        raw = np.ascontiguousarray(p.data.astype("<f4"))
        blob = raw.tobytes()
        tensors.append(
            {"name": name, "shape": list(p.data.shape), "offset": offset, "size": len(blob)}
        )
        blobs.append(blob)
        offset += len(blob)
    header = {
        "config": model.config.to_dict(),
        "cell_type": kernel.CELL_TYPE,
        "vocab_fingerprint": model.vocab_fingerprint,
        "tensors": tensors,
    }
    header_bytes = json.dumps(header, sort_keys=True).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(CHECKPOINT_MAGIC)
        fh.write(struct.pack("<H", CHECKPOINT_VERSION))
        fh.write(struct.pack("<I", len(header_bytes)))
        fh.write(header_bytes)
        for blob in blobs:
            fh.write(blob)


def load_checkpoint(path, expected_fingerprint: int | None = None) -> CvaeModel:
    """Read a checkpoint; never returns a partially loaded model."""
    with open(path, "rb") as fh:
        raw = fh.read()
    if len(raw) < 10 or raw[:4] != CHECKPOINT_MAGIC:
        raise CvaeError(f"{path}: not a model checkpoint (bad magic)")
    (version,) = struct.unpack("<H", raw[4:6])
    if version != CHECKPOINT_VERSION:
        raise CvaeError(f"{path}: unsupported checkpoint version {version}")
    (header_len,) = struct.unpack("<I", raw[6:10])
    if len(raw) < 10 + header_len:
        raise CvaeError(f"{path}: truncated checkpoint header")
    try:
        header = json.loads(raw[10 : 10 + header_len].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise CvaeError(f"{path}: corrupt checkpoint header: {exc}") from exc
    if header.get("cell_type") != kernel.CELL_TYPE:
        raise CvaeError(
            f"{path}: checkpoint uses cell type {header.get('cell_type')!r}, "
            f"this build implements {kernel.CELL_TYPE!r}"
        )
    fingerprint = int(header["vocab_fingerprint"])
    if expected_fingerprint is not None and fingerprint != expected_fingerprint:
        raise CvaeError(
            f"{path}: vocabulary fingerprint mismatch "
            f"(checkpoint {fingerprint}, supplied {expected_fingerprint})"
        )
    config = CvaeConfig.from_dict(header["config"])
    data_start = 10 + header_len
    data = raw[data_start:]
    loaded: dict[str, np.ndarray] = {}
    for entry in header["tensors"]:
        start, size = entry["offset"], entry["size"]
        if start + size > len(data):
            raise CvaeError(f"{path}: truncated checkpoint data for {entry['name']!r}")
        arr = np.frombuffer(data[start : start + size], dtype="<f4").reshape(entry["shape"])
        loaded[entry["name"]] = arr.astype(np.float32)

    model = CvaeModel(config, vocab_fingerprint=fingerprint)
    names = [name for name, _ in model.named_parameters()]
    if set(names) != set(loaded):
        missing = sorted(set(names) - set(loaded))
        extra = sorted(set(loaded) - set(names))
        raise CvaeError(f"{path}: tensor table mismatch (missing {missing}, extra {extra})")
    for name, p in model.named_parameters():
        arr = loaded[name]
        if tuple(arr.shape) != tuple(p.data.shape):
            raise CvaeError(
                f"{path}: tensor {name!r} has shape {arr.shape}, expected {p.data.shape}"
            )
        p.data = np.ascontiguousarray(arr)
    return model
