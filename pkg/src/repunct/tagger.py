"""Token-tagging backends.

Two interchangeable backends produce one 4-vector of logits per encoded
position:

* ``ContextWindowModel`` -- a trainable linear classifier over hashed
  (offset, piece) context features, the desk-scale stand-in for a fine-tuned
  transformer encoder. Trained with plain SGD on mean cross-entropy where
  positions labeled -100 are excluded.
* ``ReplayBackend`` -- serves per-token logits recorded by any external model
  from a JSON Lines file, so outside predictions can flow through the same
  scoring pipeline.

Logits are indexed by label id internally (EMPTY=0, PERIOD=1, COMMA=2,
QUESTION=3); logit files use the declared header order instead.
"""

from __future__ import annotations

import json
import logging
import random
import zlib
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Protocol, Sequence

import numpy as np

from .corpus import ConfigError, IngestError, PunctClass
from .tokenizer import CLS, MASK_LABEL, PAD, SEP, EncodedSequence

log = logging.getLogger(__name__)

N_CLASSES = 4
SPECIAL_PIECES = frozenset({CLS, SEP, PAD})

# Column order used by logit files (header-declared; this is the default).
LOGIT_FILE_ORDER = ("PERIOD", "EMPTY", "COMMA", "QUESTION")

MODEL_FORMAT = "repunct-context-window-tagger"
MODEL_VERSION = 1


class BackendProtocolError(RuntimeError):
    """A backend broke the logits-per-position contract."""


class AlignmentError(RuntimeError):
    """Replayed logit stream does not match the encoded token stream."""

    def __init__(self, position: int, expected: str, got: str):
        super().__init__(
            f"logit stream misaligned at position {position}: encoded token "
            f"{expected!r} but logit record for {got!r}"
        )
        self.position = position
        self.expected = expected
        self.got = got


class TrainingDivergedError(RuntimeError):
    """Loss became non-finite; the learning rate is probably too high."""


class TaggerBackend(Protocol):
    def logits(self, seq: EncodedSequence) -> np.ndarray:
        """Return an array of shape (len(seq), 4) in label-id order."""
        ...


def _stable_hash(key: str, dim: int) -> int:
    # crc32 is stable across processes, unlike hash().
    return zlib.crc32(key.encode("utf-8")) & (dim - 1)


def featurize(tokens: Sequence[str], position: int, radius: int, dim: int) -> list[int]:
    """Hashed feature ids for the window around one position.

    One feature per offset in [-radius, +radius] (out-of-range offsets hash a
    boundary key instead of a piece) plus one constant feature, so the result
    always has 2*radius + 2 entries. Ids may repeat after hashing; repeats
    count multiply in the dot product.
    """
    if radius < 1:
        raise ConfigError(f"window radius must be >= 1, got {radius}")
    if not 0 <= position < len(tokens):
        raise ValueError(f"position {position} out of range for {len(tokens)} tokens")
    features = []
    for offset in range(-radius, radius + 1):
        j = position + offset
        if 0 <= j < len(tokens):
            key = f"ctx:{offset}:{tokens[j]}"
        else:
            key = f"edge:{offset}"
        features.append(_stable_hash(key, dim))
    features.append(_stable_hash("bias", dim))
    return features


@dataclass
class ContextWindowModel:
    """Linear tagger: logits[c] = bias[c] + sum of weights[c][f] over features."""

    weights: np.ndarray  # (4, dim) float64
    bias: np.ndarray  # (4,) float64
    radius: int
    dim: int
    seed: int = 0

    def __post_init__(self) -> None:
        if self.radius < 1:
            raise ConfigError(f"window radius must be >= 1, got {self.radius}")
        if self.dim < 2 or self.dim & (self.dim - 1):
            raise ConfigError(f"feature dimension must be a power of two >= 2, got {self.dim}")
        self.weights = np.asarray(self.weights, dtype=np.float64)
        self.bias = np.asarray(self.bias, dtype=np.float64)
        if self.weights.shape != (N_CLASSES, self.dim) or self.bias.shape != (N_CLASSES,):
            raise ConfigError("weights must be (4, dim) and bias (4,)")
        if not (np.isfinite(self.weights).all() and np.isfinite(self.bias).all()):
            raise ConfigError("model parameters must be finite")

    @classmethod
    def create(cls, radius: int = 2, dim: int = 1 << 14, seed: int = 0) -> "ContextWindowModel":
        """Zero-initialized model (all-zero logits predict EMPTY everywhere)."""
        return cls(
            weights=np.zeros((N_CLASSES, dim)), bias=np.zeros(N_CLASSES), radius=radius, dim=dim, seed=seed
        )

    def copy(self) -> "ContextWindowModel":
        return ContextWindowModel(
            weights=self.weights.copy(), bias=self.bias.copy(), radius=self.radius, dim=self.dim, seed=self.seed
        )

    def logits(self, seq: EncodedSequence) -> np.ndarray:
        feats = np.array(
            [featurize(seq.pieces, pos, self.radius, self.dim) for pos in range(len(seq))], dtype=np.intp
        )
        return self.bias[None, :] + self.weights[:, feats].sum(axis=2).T

    def save(self, path: str | Path) -> None:
        payload = {
            "format": MODEL_FORMAT,
            "version": MODEL_VERSION,
            "radius": self.radius,
            "dim": self.dim,
            "seed": self.seed,
            "bias": self.bias.tolist(),
            "weights": self.weights.tolist(),
        }
        Path(path).write_text(json.dumps(payload) + "\n", encoding="utf-8", newline="\n")

    @classmethod
    def load(cls, path: str | Path) -> "ContextWindowModel":
        payload = json.loads(Path(path).read_text(encoding="utf-8"))
        if payload.get("format") != MODEL_FORMAT:
            raise IngestError(f"{path}: not a {MODEL_FORMAT} file")
        if payload.get("version") != MODEL_VERSION:
            raise IngestError(f"{path}: unsupported model version {payload.get('version')}")
        return cls(
            weights=np.array(payload["weights"], dtype=np.float64),
            bias=np.array(payload["bias"], dtype=np.float64),
            radius=int(payload["radius"]),
            dim=int(payload["dim"]),
            seed=int(payload["seed"]),
        )


def forward(model: ContextWindowModel, features: Sequence[int]) -> np.ndarray:
    """Logits for one feature set; repeated ids contribute repeatedly."""
    idx = np.asarray(features, dtype=np.intp)
    return model.bias + model.weights[:, idx].sum(axis=1)


def softmax(logits: np.ndarray) -> np.ndarray:
    """Row-wise softmax with max subtraction for stability."""
    z = np.asarray(logits, dtype=np.float64)
    z = z - z.max(axis=-1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=-1, keepdims=True)


@dataclass(frozen=True)
class TrainingConfig:
    """SGD hyperparameters for the desk-scale tagger.

    The reference transformer fine-tune ran 4 epochs of Adam at learning rate
    1e-5 with batch size 4 (and 0 warm-up steps, which has no analogue here);
    epochs and batch size keep those reference defaults, but this linear model
    needs a much larger step size, so learning_rate defaults differently.
    class_weights can counter class imbalance; the reference setup used plain
    unweighted cross-entropy, so it is off by default.
    """

    learning_rate: float = 0.5
    epochs: int = 4
    batch_size: int = 4
    seed: int = 0
    momentum: float = 0.0
    class_weights: tuple[float, float, float, float] | None = None

    def __post_init__(self) -> None:
        if self.learning_rate <= 0:
            raise ConfigError(f"learning_rate must be positive, got {self.learning_rate}")
        if self.epochs < 0:
            raise ConfigError(f"epochs must be >= 0, got {self.epochs}")
        if self.batch_size < 1:
            raise ConfigError(f"batch_size must be >= 1, got {self.batch_size}")
        if not 0.0 <= self.momentum < 1.0:
            raise ConfigError(f"momentum must be in [0, 1), got {self.momentum}")
        if self.class_weights is not None and (
            len(self.class_weights) != N_CLASSES or any(w <= 0 for w in self.class_weights)
        ):
            raise ConfigError("class_weights must be 4 positive reals")


@dataclass
class Gradient:
    weights: np.ndarray
    bias: np.ndarray


def _labeled_rows(seq: EncodedSequence, radius: int, dim: int) -> tuple[np.ndarray, np.ndarray]:
    """(features, labels) arrays for the positions included in the loss."""
    positions = [pos for pos, label in enumerate(seq.labels) if label != MASK_LABEL]
    feats = np.array(
        [featurize(seq.pieces, pos, radius, dim) for pos in positions], dtype=np.intp
    ).reshape(len(positions), 2 * radius + 2)
    labels = np.array([seq.labels[pos] for pos in positions], dtype=np.intp)
    return feats, labels


def _loss_and_grad_rows(
    model: ContextWindowModel,
    feats: np.ndarray,
    labels: np.ndarray,
    class_weights: np.ndarray | None = None,
) -> tuple[float, Gradient]:
    n = len(labels)
    if n == 0:
        log.warning("batch has no unmasked positions; loss defined as 0")
        return 0.0, Gradient(np.zeros_like(model.weights), np.zeros_like(model.bias))
    z = model.bias[None, :] + model.weights[:, feats].sum(axis=2).T
    p = softmax(z)
    row_idx = np.arange(n)
    with np.errstate(divide="ignore"):
        # p can underflow to exactly 0 for a diverged model; the resulting
        # inf loss is what the training loop's abort check looks for.
        log_likelihood = np.log(p[row_idx, labels])
    if class_weights is None:
        loss = float(-log_likelihood.mean())
        dz = p.copy()
        dz[row_idx, labels] -= 1.0
        dz /= n
    else:
        w = class_weights[labels]
        w_sum = w.sum()
        loss = float(-(w * log_likelihood).sum() / w_sum)
        dz = p * w[:, None]
        dz[row_idx, labels] -= w
        dz /= w_sum
    d_weights = np.zeros_like(model.weights)
    np.add.at(d_weights.T, feats.ravel(), np.repeat(dz, feats.shape[1], axis=0))
    return loss, Gradient(weights=d_weights, bias=dz.sum(axis=0))


def loss_and_grad(
    model: ContextWindowModel,
    batch: Sequence[EncodedSequence],
    class_weights: Sequence[float] | None = None,
) -> tuple[float, Gradient]:
    """Mean cross-entropy over the batch's unmasked positions, with gradient."""
    if not batch:
        raise ValueError("batch must be non-empty")
    parts = [_labeled_rows(seq, model.radius, model.dim) for seq in batch]
    feats = np.concatenate([f for f, _ in parts], axis=0)
    labels = np.concatenate([l for _, l in parts], axis=0)
    cw = None if class_weights is None else np.asarray(class_weights, dtype=np.float64)
    return _loss_and_grad_rows(model, feats, labels, cw)


def train(
    model: ContextWindowModel,
    sequences: Sequence[EncodedSequence],
    cfg: TrainingConfig,
) -> tuple[ContextWindowModel, list[float]]:
    """SGD over shuffled minibatches; returns (trained copy, per-epoch mean loss).

    Deterministic for a fixed config seed: shuffling uses
    ``random.Random(cfg.seed)`` and all arithmetic is straight float64.
    """
    if not sequences:
        raise ValueError("training set must be non-empty")
    work = model.copy()
    if cfg.epochs == 0:
        return work, []
    rows = [_labeled_rows(seq, work.radius, work.dim) for seq in sequences]
    cw = None if cfg.class_weights is None else np.asarray(cfg.class_weights, dtype=np.float64)
    rng = random.Random(cfg.seed)
    velocity = Gradient(np.zeros_like(work.weights), np.zeros_like(work.bias))
    losses: list[float] = []
    for epoch in range(cfg.epochs):
        order = list(range(len(sequences)))
        rng.shuffle(order)
        epoch_loss = 0.0
        epoch_n = 0
        for lo in range(0, len(order), cfg.batch_size):
            chosen = order[lo : lo + cfg.batch_size]
            feats = np.concatenate([rows[i][0] for i in chosen], axis=0)
            labels = np.concatenate([rows[i][1] for i in chosen], axis=0)
            loss, grad = _loss_and_grad_rows(work, feats, labels, cw)
            if not np.isfinite(loss):
                raise TrainingDivergedError(
                    f"non-finite loss at epoch {epoch}, batch starting {lo}; "
                    f"learning rate {cfg.learning_rate} is probably too high"
                )
            velocity.weights = cfg.momentum * velocity.weights - cfg.learning_rate * grad.weights
            velocity.bias = cfg.momentum * velocity.bias - cfg.learning_rate * grad.bias
            work.weights += velocity.weights
            work.bias += velocity.bias
            epoch_loss += loss * len(labels)
            epoch_n += len(labels)
        losses.append(epoch_loss / epoch_n if epoch_n else 0.0)
    return work, losses


def predict_from_logits(logits: np.ndarray, seq: EncodedSequence) -> list[PunctClass]:
    """Argmax over the 4 logits at each word's root token.

    Ties break toward the lowest label id, so all-zero logits yield EMPTY.
    """
    logits = np.asarray(logits, dtype=np.float64)
    if logits.shape != (len(seq), N_CLASSES):
        raise BackendProtocolError(
            f"backend returned shape {logits.shape}, expected ({len(seq)}, {N_CLASSES})"
        )
    roots = logits[seq.word_starts]
    if not np.isfinite(roots).all():
        raise BackendProtocolError("backend returned non-finite logits at a root token")
    return [PunctClass(int(np.argmax(row))) for row in roots]


def predict(backend: TaggerBackend, seq: EncodedSequence) -> list[PunctClass]:
    """One label per word: argmax at root tokens, masked positions ignored."""
    return predict_from_logits(backend.logits(seq), seq)


def token_accuracy(backend: TaggerBackend, sequences: Sequence[EncodedSequence]) -> float:
    """Fraction of words whose predicted label matches the encoded label."""
    correct = 0
    total = 0
    for seq in sequences:
        predictions = predict(backend, seq)
        gold = [seq.labels[pos] for pos in seq.word_starts]
        correct += sum(int(p) == g for p, g in zip(predictions, gold))
        total += len(gold)
    return correct / total if total else 0.0


@dataclass(frozen=True)
class LogitRecord:
    """One token's logits in LOGIT_FILE_ORDER columns."""

    token: str
    logits: tuple[float, float, float, float]

    def to_label_order(self) -> np.ndarray:
        out = np.empty(N_CLASSES, dtype=np.float64)
        for name, value in zip(LOGIT_FILE_ORDER, self.logits):
            out[PunctClass[name]] = value
        return out


class ReplayBackend:
    """Serves recorded logits in stream order, verifying token alignment.

    Special positions ([CLS]/[SEP]/padding) get zero logits and consume no
    record. The record stream is consumed once across successive sequences.
    """

    def __init__(self, records: Sequence[LogitRecord]):
        self._records = list(records)
        self._cursor = 0

    def remaining(self) -> int:
        return len(self._records) - self._cursor

    def logits(self, seq: EncodedSequence) -> np.ndarray:
        out = np.zeros((len(seq), N_CLASSES), dtype=np.float64)
        for pos, piece in enumerate(seq.pieces):
            if piece in SPECIAL_PIECES:
                continue
            if self._cursor >= len(self._records):
                raise AlignmentError(pos, piece, "<end of logit stream>")
            record = self._records[self._cursor]
            if record.token != piece:
                raise AlignmentError(pos, piece, record.token)
            out[pos] = record.to_label_order()
            self._cursor += 1
        return out


def read_logit_file(path: str | Path) -> list[LogitRecord]:
    """Parse a JSON Lines logit file; the header line declares column order."""
    file = Path(path)
    lines = [line for line in file.read_text(encoding="utf-8").splitlines() if line.strip()]
    if not lines:
        return []
    try:
        header = json.loads(lines[0])
        order = tuple(header["order"])
    except (json.JSONDecodeError, KeyError, TypeError) as exc:
        raise IngestError(f"{file.name}: first line must be a JSON header with 'order'") from exc
    if sorted(order) != sorted(LOGIT_FILE_ORDER):
        raise IngestError(f"{file.name}: header order {order} is not a permutation of {LOGIT_FILE_ORDER}")
    to_file_order = [order.index(name) for name in LOGIT_FILE_ORDER]
    records = []
    for lineno, line in enumerate(lines[1:], start=2):
        try:
            obj = json.loads(line)
            token = obj["t"]
            values = [float(v) for v in obj["l"]]
        except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
            raise IngestError(f"{file.name}:{lineno}: bad logit record") from exc
        if len(values) != N_CLASSES or not all(np.isfinite(values)):
            raise IngestError(f"{file.name}:{lineno}: logit record needs 4 finite values")
        records.append(LogitRecord(token=token, logits=tuple(values[i] for i in to_file_order)))
    return records


def replay_logits(path: str | Path) -> ReplayBackend:
    """Backend that replays a logit file verbatim."""
    return ReplayBackend(read_logit_file(path))


def write_logit_dump(
    items: Iterable[tuple[EncodedSequence, np.ndarray]], path: str | Path
) -> int:
    """Dump precomputed per-sequence logits for every non-special token."""
    lines = [json.dumps({"order": list(LOGIT_FILE_ORDER)})]
    count = 0
    for seq, logits in items:
        logits = np.asarray(logits, dtype=np.float64)
        if logits.shape != (len(seq), N_CLASSES):
            raise BackendProtocolError(
                f"backend returned shape {logits.shape}, expected ({len(seq)}, {N_CLASSES})"
            )
        for pos, piece in enumerate(seq.pieces):
            if piece in SPECIAL_PIECES:
                continue
            row = logits[pos]
            values = [float(row[PunctClass[name]]) for name in LOGIT_FILE_ORDER]
            lines.append(json.dumps({"t": piece, "l": values}, ensure_ascii=False))
            count += 1
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")
    return count


def export_logits(backend: TaggerBackend, sequences: Iterable[EncodedSequence], path: str | Path) -> int:
    """Dump a backend's logits; the file replays to identical predictions."""
    return write_logit_dump(((seq, backend.logits(seq)) for seq in sequences), path)
