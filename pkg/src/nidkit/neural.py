"""Minimal dense neural-network engine built on numpy.

Supports exactly what the two networks in this toolkit need: ReLU /
SeLU / softmax / identity activations, MSE and cross-entropy losses,
additive Gaussian input noise and inverted dropout (training mode
only), bias-corrected Adam, shuffled mini-batches, and early stopping
on a validation split. Everything is float64 and deterministic given a
seed: all randomness flows through an explicit ``numpy.random.Generator``
and the draw order is fixed by the layer configuration.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import VersionSkewError

MODEL_FORMAT_VERSION = 1

# Standard self-normalizing constants.
SELU_LAMBDA = 1.0507009873554805
SELU_ALPHA = 1.6732632423543772

ACTIVATIONS = ("relu", "selu", "softmax", "identity")
LOSSES = ("mse", "cross_entropy")


@dataclass(frozen=True)
class LayerSpec:
    """One dense layer. Noise and dropout act on the layer *input* and
    only in training mode; inference is deterministic."""

    in_dim: int
    out_dim: int
    activation: str = "identity"
    dropout_rate: float = 0.0
    noise_sigma: float = 0.0

    def __post_init__(self) -> None:
        if self.in_dim < 1 or self.out_dim < 1:
            raise ValueError(f"layer dims must be >= 1, got {self.in_dim}x{self.out_dim}")
        if self.activation not in ACTIVATIONS:
            raise ValueError(f"unknown activation {self.activation!r}")
        if not 0.0 <= self.dropout_rate < 1.0:
            raise ValueError(f"dropout_rate must be in [0, 1), got {self.dropout_rate}")
        if self.noise_sigma < 0.0:
            raise ValueError(f"noise_sigma must be >= 0, got {self.noise_sigma}")


class MlpModel:
    """Dense MLP: ordered layers with (out x in) weight matrices.

    ``mode`` is "train" or "infer"; trained models returned by
    :func:`train` are frozen in inference mode with read-only arrays.
    """

    def __init__(
        self,
        layers: list[LayerSpec],
        weights: list[np.ndarray],
        biases: list[np.ndarray],
        mode: str = "infer",
    ) -> None:
        if mode not in ("train", "infer"):
            raise ValueError(f"bad mode {mode!r}")
        if not layers:
            raise ValueError("model needs at least one layer")
        if len(weights) != len(layers) or len(biases) != len(layers):
            raise ValueError("weights/biases count must match layer count")
        for i, (spec, w, b) in enumerate(zip(layers, weights, biases)):
            if w.shape != (spec.out_dim, spec.in_dim):
                raise ValueError(f"layer {i}: weight shape {w.shape} != {(spec.out_dim, spec.in_dim)}")
            if b.shape != (spec.out_dim,):
                raise ValueError(f"layer {i}: bias shape {b.shape} != {(spec.out_dim,)}")
            if i > 0 and spec.in_dim != layers[i - 1].out_dim:
                raise ValueError(f"layer {i} in_dim {spec.in_dim} != previous out_dim")
        self.layers = list(layers)
        self.weights = weights
        self.biases = biases
        self.mode = mode

    @property
    def in_dim(self) -> int:
        return self.layers[0].in_dim

    @property
    def out_dim(self) -> int:
        return self.layers[-1].out_dim

    def n_params(self) -> int:
        return sum(w.size + b.size for w, b in zip(self.weights, self.biases))

    def copy(self, mode: str | None = None) -> "MlpModel":
        return MlpModel(
            layers=list(self.layers),
            weights=[w.copy() for w in self.weights],
            biases=[b.copy() for b in self.biases],
            mode=mode or self.mode,
        )

    def freeze(self) -> "MlpModel":
        for arr in (*self.weights, *self.biases):
            arr.flags.writeable = False
        self.mode = "infer"
        return self

    def to_json(self) -> str:
        doc = {
            "format_version": MODEL_FORMAT_VERSION,
            "kind": "mlp",
            "layers": [
                {
                    "in_dim": s.in_dim,
                    "out_dim": s.out_dim,
                    "activation": s.activation,
                    "dropout_rate": s.dropout_rate,
                    "noise_sigma": s.noise_sigma,
                }
                for s in self.layers
            ],
            # row-major flat lists, one per layer
            "weights": [w.ravel().tolist() for w in self.weights],
            "biases": [b.tolist() for b in self.biases],
        }
        return json.dumps(doc, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "MlpModel":
        doc = json.loads(text)
        version = doc.get("format_version")
        if version != MODEL_FORMAT_VERSION:
            raise VersionSkewError(
                f"model format version {version!r} unsupported (expected {MODEL_FORMAT_VERSION})"
            )
        layers = [LayerSpec(**spec) for spec in doc["layers"]]
        weights = [
            np.array(flat, dtype=np.float64).reshape(s.out_dim, s.in_dim)
            for flat, s in zip(doc["weights"], layers)
        ]
        biases = [np.array(b, dtype=np.float64) for b in doc["biases"]]
        return cls(layers=layers, weights=weights, biases=biases, mode="infer").freeze()


def init_model(layers: list[LayerSpec], rng: np.random.Generator) -> MlpModel:
    """He-uniform for relu, LeCun-normal for selu, Glorot-uniform otherwise."""
    weights, biases = [], []
    for spec in layers:
        fan_in, fan_out = spec.in_dim, spec.out_dim
        if spec.activation == "relu":
            bound = math.sqrt(6.0 / fan_in)
            w = rng.uniform(-bound, bound, size=(fan_out, fan_in))
        elif spec.activation == "selu":
            w = rng.normal(0.0, math.sqrt(1.0 / fan_in), size=(fan_out, fan_in))
        else:
            bound = math.sqrt(6.0 / (fan_in + fan_out))
            w = rng.uniform(-bound, bound, size=(fan_out, fan_in))
        weights.append(w)
        biases.append(np.zeros(fan_out))
    return MlpModel(layers=layers, weights=weights, biases=biases, mode="train")


# --- activations --------------------------------------------------------

def _apply_activation(kind: str, z: np.ndarray) -> np.ndarray:
    if kind == "relu":
        return np.maximum(z, 0.0)
    if kind == "selu":
        return np.where(z > 0, SELU_LAMBDA * z, SELU_LAMBDA * SELU_ALPHA * np.expm1(np.minimum(z, 0.0)))
    if kind == "softmax":
        shifted = z - z.max(axis=-1, keepdims=True)
        e = np.exp(shifted)
        return e / e.sum(axis=-1, keepdims=True)
    if kind == "identity":
        return z
    raise ValueError(f"unknown activation {kind!r}")


def activation(kind: str, x: np.ndarray) -> np.ndarray:
    """Apply an activation to a vector or batch; rejects non-finite input."""
    x = np.asarray(x, dtype=np.float64)
    if not np.isfinite(x).all():
        raise ValueError("non-finite activation input")
    if kind == "softmax" and x.shape[-1] < 1:
        raise ValueError("softmax needs length >= 1")
    return _apply_activation(kind, x)


def _activation_backward(kind: str, z: np.ndarray, a: np.ndarray, upstream: np.ndarray) -> np.ndarray:
    """dL/dz given dL/da, the pre-activations z, and the outputs a."""
    if kind == "relu":
        return upstream * (z > 0)
    if kind == "selu":
        deriv = np.where(z > 0, SELU_LAMBDA, SELU_LAMBDA * SELU_ALPHA * np.exp(np.minimum(z, 0.0)))
        return upstream * deriv
    if kind == "softmax":
        # dz_i = a_i * (up_i - sum_j up_j a_j), row-wise
        dot = (upstream * a).sum(axis=-1, keepdims=True)
        return a * (upstream - dot)
    if kind == "identity":
        return upstream
    raise ValueError(f"unknown activation {kind!r}")


# --- losses -------------------------------------------------------------

def loss(kind: str, prediction: np.ndarray, target: np.ndarray) -> tuple[float, np.ndarray]:
    """Return (scalar loss, gradient w.r.t. prediction)."""
    prediction = np.asarray(prediction, dtype=np.float64)
    target = np.asarray(target, dtype=np.float64)
    if prediction.shape != target.shape:
        raise ValueError(f"shape mismatch: {prediction.shape} vs {target.shape}")
    if kind == "mse":
        diff = prediction - target
        return float((diff * diff).mean()), 2.0 * diff / diff.size
    if kind == "cross_entropy":
        rows = prediction.shape[0] if prediction.ndim == 2 else 1
        clamped = np.maximum(prediction, 1e-12)
        value = float(-(target * np.log(clamped)).sum() / rows)
        return value, -(target / clamped) / rows
    raise ValueError(f"unknown loss {kind!r}")


def softmax_ce_grad(probs: np.ndarray, target: np.ndarray) -> tuple[float, np.ndarray]:
    """Fused softmax + cross-entropy: loss value and gradient at the preactivations."""
    rows = probs.shape[0] if probs.ndim == 2 else 1
    value = float(-(target * np.log(np.maximum(probs, 1e-12))).sum() / rows)
    return value, (probs - target) / rows


# --- forward / backward -------------------------------------------------

@dataclass
class ForwardCache:
    model: MlpModel
    inputs: list[np.ndarray]   # per layer: input after noise/dropout
    preacts: list[np.ndarray]  # per layer: z = x W^T + b
    outputs: list[np.ndarray]  # per layer: activation(z)
    masks: list[np.ndarray | None]
    n_rows: int


def forward(
    model: MlpModel, batch: np.ndarray, rng: np.random.Generator | None = None
) -> tuple[np.ndarray, ForwardCache]:
    """Run the network; in train mode applies noise then dropout per layer."""
    batch = np.asarray(batch, dtype=np.float64)
    if batch.ndim != 2 or batch.shape[1] != model.in_dim:
        raise ValueError(f"batch width {batch.shape} does not match input dim {model.in_dim}")
    training = model.mode == "train"
    stochastic = any(s.noise_sigma > 0 or s.dropout_rate > 0 for s in model.layers)
    if training and stochastic and rng is None:
        raise ValueError("training-mode forward with noise/dropout needs an rng")

    x = batch
    inputs, preacts, outputs, masks = [], [], [], []
    for spec, w, b in zip(model.layers, model.weights, model.biases):
        mask = None
        if training:
            if spec.noise_sigma > 0:
                x = x + rng.normal(0.0, spec.noise_sigma, size=x.shape)
            if spec.dropout_rate > 0:
                mask = rng.random(x.shape) >= spec.dropout_rate
                x = x * mask / (1.0 - spec.dropout_rate)
        inputs.append(x)
        z = x @ w.T + b
        a = _apply_activation(spec.activation, z)
        preacts.append(z)
        outputs.append(a)
        masks.append(mask)
        x = a
    cache = ForwardCache(
        model=model, inputs=inputs, preacts=preacts, outputs=outputs, masks=masks,
        n_rows=batch.shape[0],
    )
    return x, cache


def backward(
    model: MlpModel,
    cache: ForwardCache,
    loss_grad: np.ndarray,
    fused_softmax_ce: bool = False,
) -> list[tuple[np.ndarray, np.ndarray]]:
    """Backpropagate: returns per-layer (dW, db), reusing the forward masks.

    With ``fused_softmax_ce`` the incoming gradient is taken w.r.t. the
    last layer's preactivations (the numerically stable softmax +
    cross-entropy form) instead of its outputs.
    """
    if cache.model is not model:
        raise ValueError("stale cache: forward pass came from a different model")
    grads: list[tuple[np.ndarray, np.ndarray]] = [None] * len(model.layers)  # type: ignore[list-item]
    upstream = np.asarray(loss_grad, dtype=np.float64)
    for i in range(len(model.layers) - 1, -1, -1):
        spec = model.layers[i]
        if i == len(model.layers) - 1 and fused_softmax_ce:
            dz = upstream
        else:
            dz = _activation_backward(spec.activation, cache.preacts[i], cache.outputs[i], upstream)
        grads[i] = (dz.T @ cache.inputs[i], dz.sum(axis=0))
        if i > 0:
            dx = dz @ model.weights[i]
            if cache.masks[i] is not None:
                dx = dx * cache.masks[i] / (1.0 - spec.dropout_rate)
            upstream = dx
    return grads


# --- Adam ---------------------------------------------------------------

class AdamState:
    """First/second-moment accumulators for one parameter list."""

    def __init__(
        self,
        params: list[np.ndarray],
        lr: float = 0.001,
        beta1: float = 0.9,
        beta2: float = 0.999,
        eps: float = 1e-8,
    ) -> None:
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.t = 0
        self.m = [np.zeros_like(p) for p in params]
        self.v = [np.zeros_like(p) for p in params]


def adam_step(
    state: AdamState, params: list[np.ndarray], grads: list[np.ndarray]
) -> list[np.ndarray]:
    """One bias-corrected Adam update; returns new parameter arrays."""
    if len(params) != len(state.m) or len(grads) != len(params):
        raise ValueError("parameter/gradient count mismatch")
    for p, g, m in zip(params, grads, state.m):
        if p.shape != g.shape or p.shape != m.shape:
            raise ValueError(f"shape mismatch: param {p.shape}, grad {g.shape}")
    state.t += 1
    bc1 = 1.0 - state.beta1 ** state.t
    bc2 = 1.0 - state.beta2 ** state.t
    out = []
    for i, (p, g) in enumerate(zip(params, grads)):
        state.m[i] = state.beta1 * state.m[i] + (1.0 - state.beta1) * g
        state.v[i] = state.beta2 * state.v[i] + (1.0 - state.beta2) * (g * g)
        m_hat = state.m[i] / bc1
        v_hat = state.v[i] / bc2
        out.append(p - state.lr * m_hat / (np.sqrt(v_hat) + state.eps))
    return out


# --- training loop ------------------------------------------------------

class EarlyStopper:
    """Stop when validation loss fails to improve for `patience` epochs."""

    def __init__(self, patience: int) -> None:
        if patience < 1:
            raise ValueError("patience must be >= 1")
        self.patience = patience
        self.best: float | None = None
        self.counter = 0

    def update(self, val_loss: float) -> bool:
        if self.best is None or val_loss < self.best:
            self.best = val_loss
            self.counter = 0
        else:
            self.counter += 1
        return self.counter >= self.patience


@dataclass(frozen=True)
class TrainConfig:
    batch_size: int = 32
    val_fraction: float = 0.15
    patience: int = 6
    max_epochs: int = 200
    seed: int = 0
    loss: str = "mse"
    learning_rate: float = 0.001

    def __post_init__(self) -> None:
        if not 0.0 < self.val_fraction < 1.0:
            raise ValueError("val_fraction must be in (0, 1)")
        if self.patience < 1:
            raise ValueError("patience must be >= 1")
        if self.batch_size < 1 or self.max_epochs < 1:
            raise ValueError("batch_size and max_epochs must be >= 1")
        if self.loss not in LOSSES:
            raise ValueError(f"unknown loss {self.loss!r}")


@dataclass
class TrainHistory:
    train_loss: list[float] = field(default_factory=list)
    val_loss: list[float] = field(default_factory=list)
    best_epoch: int = -1
    n_epochs: int = 0


def _dataset_loss(model: MlpModel, kind: str, data: np.ndarray, targets: np.ndarray) -> float:
    out, _ = forward(model, data)
    value, _ = loss(kind, out, targets)
    return value


def train(
    model: MlpModel,
    data: np.ndarray,
    targets: np.ndarray,
    cfg: TrainConfig,
    rng: np.random.Generator | None = None,
    validation: tuple[np.ndarray, np.ndarray] | None = None,
) -> tuple[MlpModel, TrainHistory]:
    """Mini-batch Adam with early stopping; returns the best-validation model.

    Without an explicit ``validation`` pair, ``cfg.val_fraction`` of the
    rows is split off (shuffled, seeded). The input model is left
    untouched; the returned model is frozen in inference mode with the
    parameters of the best validation epoch.
    """
    data = np.asarray(data, dtype=np.float64)
    targets = np.asarray(targets, dtype=np.float64)
    if data.shape[0] == 0:
        raise ValueError("empty training data")
    if data.shape[0] != targets.shape[0]:
        raise ValueError("data/target row mismatch")
    if rng is None:
        rng = np.random.default_rng(cfg.seed)

    if validation is not None:
        train_x, train_t = data, targets
        val_x, val_t = validation
    elif data.shape[0] == 1:
        train_x, train_t = data, targets
        val_x, val_t = data, targets
    else:
        n = data.shape[0]
        n_val = min(max(1, int(round(n * cfg.val_fraction))), n - 1)
        perm = rng.permutation(n)
        val_idx, train_idx = perm[:n_val], perm[n_val:]
        train_x, train_t = data[train_idx], targets[train_idx]
        val_x, val_t = data[val_idx], targets[val_idx]

    work = model.copy(mode="train")
    params = [arr for pair in zip(work.weights, work.biases) for arr in pair]
    adam = AdamState(params, lr=cfg.learning_rate)
    stopper = EarlyStopper(cfg.patience)
    history = TrainHistory()
    fused = cfg.loss == "cross_entropy" and work.layers[-1].activation == "softmax"

    best_val = math.inf
    best_params: list[np.ndarray] | None = None
    n_train = train_x.shape[0]
    for epoch in range(cfg.max_epochs):
        order = rng.permutation(n_train)
        batch_losses = []
        for start in range(0, n_train, cfg.batch_size):
            idx = order[start : start + cfg.batch_size]
            xb, tb = train_x[idx], train_t[idx]
            out, cache = forward(work, xb, rng)
            if fused:
                value, grad = softmax_ce_grad(out, tb)
            else:
                value, grad = loss(cfg.loss, out, tb)
            layer_grads = backward(work, cache, grad, fused_softmax_ce=fused)
            flat_grads = [arr for pair in layer_grads for arr in pair]
            params = adam_step(adam, params, flat_grads)
            for i in range(len(work.layers)):
                work.weights[i] = params[2 * i]
                work.biases[i] = params[2 * i + 1]
            batch_losses.append(value)
        work.mode = "infer"
        val_value = _dataset_loss(work, cfg.loss, val_x, val_t)
        work.mode = "train"
        history.train_loss.append(float(np.mean(batch_losses)))
        history.val_loss.append(val_value)
        if val_value < best_val:
            best_val = val_value
            best_params = [p.copy() for p in params]
            history.best_epoch = epoch
        if stopper.update(val_value):
            break
    history.n_epochs = len(history.val_loss)

    assert best_params is not None
    trained = MlpModel(
        layers=list(work.layers),
        weights=[best_params[2 * i] for i in range(len(work.layers))],
        biases=[best_params[2 * i + 1] for i in range(len(work.layers))],
        mode="infer",
    ).freeze()
    return trained, history
