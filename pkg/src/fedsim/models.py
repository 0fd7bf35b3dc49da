"""Small differentiable classifiers with exact analytic gradients.

Two architectures are supported: multinomial logistic regression and a
one-hidden-layer tanh MLP. Parameters live in flat float64 vectors so they
can be averaged, differenced and clustered without knowing the layer
structure. All operations are pure: inputs are never modified.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass
from enum import Enum
from typing import NamedTuple

import numpy as np

from .errors import DimensionError, EmptyDataError


class ModelKind(str, Enum):
    LOGISTIC_REGRESSION = "logistic_regression"
    MLP1 = "mlp1"


@dataclass(frozen=True)
class ModelSpec:
    """Architecture descriptor defining the parameter layout.

    Layout is weights-then-bias per layer, row-major:
      logistic_regression: W (C, d), b (C,)
      mlp1:                W1 (h, d), b1 (h,), W2 (C, h), b2 (C,)
    """

    kind: ModelKind
    input_dim: int
    num_classes: int
    hidden_dim: int | None = None

    def __post_init__(self) -> None:
        if self.input_dim < 1:
            raise ValueError(f"input_dim must be positive, got {self.input_dim}")
        if self.num_classes < 2:
            raise ValueError(f"num_classes must be >= 2, got {self.num_classes}")
        if self.kind is ModelKind.MLP1:
            if self.hidden_dim is None or self.hidden_dim < 1:
                raise ValueError("mlp1 requires a positive hidden_dim")
        elif self.hidden_dim is not None:
            raise ValueError("hidden_dim is only valid for mlp1")

    def layer_dims(self) -> list[tuple[int, int]]:
        """(fan_in, fan_out) per layer, in parameter-vector order."""
        if self.kind is ModelKind.LOGISTIC_REGRESSION:
            return [(self.input_dim, self.num_classes)]
        assert self.hidden_dim is not None
        return [(self.input_dim, self.hidden_dim), (self.hidden_dim, self.num_classes)]

    def parameter_count(self) -> int:
        return sum((fi + 1) * fo for fi, fo in self.layer_dims())

    def fingerprint(self) -> str:
        tag = f"{self.kind.value}:{self.input_dim}:{self.num_classes}:{self.hidden_dim}"
        return hashlib.sha256(tag.encode("ascii")).hexdigest()[:12]


@dataclass
class ParamVector:
    """Flat float64 parameter vector bound to a ModelSpec."""

    spec: ModelSpec
    values: np.ndarray

    def __post_init__(self) -> None:
        self.values = np.asarray(self.values, dtype=np.float64)
        expected = self.spec.parameter_count()
        if self.values.ndim != 1 or self.values.shape[0] != expected:
            raise DimensionError(
                f"expected {expected} parameters for {self.spec.kind.value}, "
                f"got shape {self.values.shape}"
            )
        if not np.all(np.isfinite(self.values)):
            raise ValueError("parameter vector contains non-finite entries")

    @property
    def spec_fingerprint(self) -> str:
        return self.spec.fingerprint()

    def copy(self) -> "ParamVector":
        return ParamVector(self.spec, self.values.copy())

    def __len__(self) -> int:
        return int(self.values.shape[0])


@dataclass
class Batch:
    """A mini-batch of labeled feature vectors."""

    features: np.ndarray
    labels: np.ndarray

    def __post_init__(self) -> None:
        self.features = np.asarray(self.features, dtype=np.float64)
        self.labels = np.asarray(self.labels, dtype=np.int64)
        if self.features.ndim != 2:
            raise DimensionError(f"features must be 2-D, got shape {self.features.shape}")
        if self.labels.ndim != 1 or self.labels.shape[0] != self.features.shape[0]:
            raise DimensionError("labels must be 1-D and aligned with feature rows")
        if self.features.shape[0] == 0:
            raise EmptyDataError("batch is empty")
        if not np.all(np.isfinite(self.features)):
            raise ValueError("batch features contain non-finite entries")


class EvalResult(NamedTuple):
    accuracy: float
    loss: float


def params_hash(params: ParamVector) -> str:
    """Short stable hash of the raw parameter bytes."""
    return hashlib.sha256(params.values.tobytes()).hexdigest()[:16]


def _as_xy(data) -> tuple[np.ndarray, np.ndarray]:
    # Accepts Batch, LabeledDataset, or anything exposing features/labels.
    x = np.asarray(data.features, dtype=np.float64)
    y = np.asarray(data.labels, dtype=np.int64)
    return x, y


def _check_xy(spec: ModelSpec, x: np.ndarray, y: np.ndarray) -> None:
    if x.ndim != 2 or x.shape[1] != spec.input_dim:
        raise DimensionError(
            f"features have shape {x.shape}, expected (*, {spec.input_dim})"
        )
    if y.shape != (x.shape[0],):
        raise DimensionError("labels are not aligned with feature rows")
    if y.size and (y.min() < 0 or y.max() >= spec.num_classes):
        raise DimensionError(
            f"labels must lie in [0, {spec.num_classes}), got range "
            f"[{y.min()}, {y.max()}]"
        )


def _unpack(spec: ModelSpec, v: np.ndarray) -> list[tuple[np.ndarray, np.ndarray]]:
    layers = []
    off = 0
    for fan_in, fan_out in spec.layer_dims():
        w = v[off : off + fan_in * fan_out].reshape(fan_out, fan_in)
        off += fan_in * fan_out
        b = v[off : off + fan_out]
        off += fan_out
        layers.append((w, b))
    return layers


def _forward(spec: ModelSpec, v: np.ndarray, x: np.ndarray):
    """Returns (logits, hidden activations or None)."""
    layers = _unpack(spec, v)
    if spec.kind is ModelKind.LOGISTIC_REGRESSION:
        (w, b), = layers
        return x @ w.T + b, None
    (w1, b1), (w2, b2) = layers
    h = np.tanh(x @ w1.T + b1)
    return h @ w2.T + b2, h


def _log_softmax(z: np.ndarray) -> np.ndarray:
    shifted = z - z.max(axis=1, keepdims=True)
    return shifted - np.log(np.exp(shifted).sum(axis=1, keepdims=True))


def _softmax(z: np.ndarray) -> np.ndarray:
    e = np.exp(z - z.max(axis=1, keepdims=True))
    return e / e.sum(axis=1, keepdims=True)


def _loss_values(spec: ModelSpec, v: np.ndarray, x: np.ndarray, y: np.ndarray) -> float:
    logits, _ = _forward(spec, v, x)
    logp = _log_softmax(logits)
    return float(-logp[np.arange(y.shape[0]), y].mean())


def _grad_values(spec: ModelSpec, v: np.ndarray, x: np.ndarray, y: np.ndarray) -> np.ndarray:
    n = y.shape[0]
    logits, h = _forward(spec, v, x)
    g_logits = _softmax(logits)
    g_logits[np.arange(n), y] -= 1.0
    g_logits /= n
    if spec.kind is ModelKind.LOGISTIC_REGRESSION:
        return np.concatenate([(g_logits.T @ x).ravel(), g_logits.sum(axis=0)])
    (w1, _), (w2, _) = _unpack(spec, v)
    g_w2 = g_logits.T @ h
    g_b2 = g_logits.sum(axis=0)
    g_h = g_logits @ w2
    g_z1 = g_h * (1.0 - h * h)
    g_w1 = g_z1.T @ x
    g_b1 = g_z1.sum(axis=0)
    return np.concatenate([g_w1.ravel(), g_b1, g_w2.ravel(), g_b2])


def init_model(spec: ModelSpec, seed: int) -> ParamVector:
    """Glorot-uniform weights, zero biases; deterministic per (spec, seed)."""
    from .rng import derive_rng

    gen = derive_rng(seed)
    parts = []
    for fan_in, fan_out in spec.layer_dims():
        bound = math.sqrt(6.0 / (fan_in + fan_out))
        parts.append(gen.uniform(-bound, bound, size=(fan_out, fan_in)).ravel())
        parts.append(np.zeros(fan_out))
    return ParamVector(spec, np.concatenate(parts))


def loss(params: ParamVector, batch) -> float:
    """Mean softmax cross-entropy of the batch under the model."""
    x, y = _as_xy(batch)
    _check_xy(params.spec, x, y)
    if y.shape[0] == 0:
        raise EmptyDataError("cannot compute loss on an empty batch")
    return _loss_values(params.spec, params.values, x, y)


def gradient(params: ParamVector, batch) -> ParamVector:
    """Exact analytic gradient of loss(), same layout as params."""
    x, y = _as_xy(batch)
    _check_xy(params.spec, x, y)
    if y.shape[0] == 0:
        raise EmptyDataError("cannot compute gradient on an empty batch")
    return ParamVector(params.spec, _grad_values(params.spec, params.values, x, y))


def sgd_epoch(
    params: ParamVector,
    data,
    lr: float,
    batch_size: int,
    gen: np.random.Generator,
) -> ParamVector:
    """One full pass over data in shuffled mini-batches.

    The last batch may be short. Returns an updated copy; the input is not
    modified. Deterministic for a given generator state.
    """
    if lr < 0:
        raise ValueError(f"learning rate must be non-negative, got {lr}")
    if batch_size < 1:
        raise ValueError(f"batch_size must be positive, got {batch_size}")
    x, y = _as_xy(data)
    _check_xy(params.spec, x, y)
    n = y.shape[0]
    if n == 0:
        raise EmptyDataError("cannot train on an empty dataset")
    order = gen.permutation(n)
    spec = params.spec
    v = params.values.copy()
    for start in range(0, n, batch_size):
        idx = order[start : start + batch_size]
        v = v - lr * _grad_values(spec, v, x[idx], y[idx])
    return ParamVector(spec, v)


def evaluate(params: ParamVector, data) -> EvalResult:
    """Accuracy (argmax, ties to the lowest class index) and mean loss."""
    x, y = _as_xy(data)
    _check_xy(params.spec, x, y)
    n = y.shape[0]
    if n == 0:
        raise EmptyDataError("cannot evaluate on an empty dataset")
    logits, _ = _forward(params.spec, params.values, x)
    pred = logits.argmax(axis=1)
    logp = _log_softmax(logits)
    mean_loss = float(-logp[np.arange(n), y].mean())
    return EvalResult(accuracy=float((pred == y).mean()), loss=mean_loss)
