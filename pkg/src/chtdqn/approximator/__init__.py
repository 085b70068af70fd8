"""Small fully-connected Q-network: forward pass, masked Bellman MSE loss,
exact analytic gradients, and a plain SGD update.

Two interchangeable kernel backends exist: a Cython extension calling BLAS
directly (`_ckernels`) and a pure-numpy fallback (`_kernels_np`).  The
compiled one is picked at import when present; set CHTDQN_KERNELS=numpy (or
=compiled) to force a backend.  `benchmarks/bench_mlp.py` compares the two.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np

_requested = os.environ.get("CHTDQN_KERNELS", "auto")
if _requested not in ("auto", "compiled", "numpy"):
    raise ValueError(f"CHTDQN_KERNELS must be auto|compiled|numpy, got {_requested!r}")

if _requested == "numpy":
    from . import _kernels_np as _K

    backend_name = "numpy"
else:
    try:
        from . import _ckernels as _K  # type: ignore[no-redef]

        backend_name = "compiled"
    except ImportError:
        if _requested == "compiled":
            raise
        from . import _kernels_np as _K  # type: ignore[no-redef]

        backend_name = "numpy"

HIDDEN_SIZES = (64, 128, 256)


@dataclass
class MlpParams:
    """Weights/biases per layer; ReLU hiddens, identity output."""

    weights: list  # list of (fan_in, fan_out) float64 arrays
    biases: list  # list of (fan_out,) float64 arrays

    @property
    def input_dim(self) -> int:
        return self.weights[0].shape[0]

    @property
    def output_dim(self) -> int:
        return self.weights[-1].shape[1]

    def copy(self) -> "MlpParams":
        return MlpParams([w.copy() for w in self.weights],
                         [b.copy() for b in self.biases])


def init(input_dim: int, output_dim: int, seed: int,
         hidden=HIDDEN_SIZES) -> MlpParams:
    """Seeded init: weights uniform in [-1/sqrt(fan_in), 1/sqrt(fan_in)], biases zero."""
    if input_dim < 1 or output_dim < 1:
        raise ValueError("layer dimensions must be >= 1")
    rng = np.random.default_rng(seed)
    sizes = [input_dim, *hidden, output_dim]
    weights, biases = [], []
    for fan_in, fan_out in zip(sizes[:-1], sizes[1:]):
        scale = 1.0 / np.sqrt(fan_in)
        weights.append(rng.uniform(-scale, scale, size=(fan_in, fan_out)))
        biases.append(np.zeros(fan_out))
    return MlpParams(weights, biases)


def _as_batch(state) -> tuple[np.ndarray, bool]:
    x = np.ascontiguousarray(state, dtype=np.float64)
    if x.ndim == 1:
        return x[None, :], True
    if x.ndim == 2:
        return x, False
    raise ValueError("state must be a vector or a batch of vectors")


def forward(params: MlpParams, state) -> np.ndarray:
    """Q-values for one state vector or a (batch, input_dim) array."""
    x, squeeze = _as_batch(state)
    if x.shape[1] != params.input_dim:
        raise ValueError(
            f"state length {x.shape[1]} != input dim {params.input_dim}")
    q = _K.forward(params.weights, params.biases, x)
    return q[0] if squeeze else q


def _check_batch(params, states, actions, targets):
    states = np.ascontiguousarray(states, dtype=np.float64)
    if states.ndim != 2 or states.shape[0] == 0:
        raise ValueError("batch must be a nonempty (batch, input_dim) array")
    if states.shape[1] != params.input_dim:
        raise ValueError("state length does not match network input dim")
    actions = np.asarray(actions, dtype=np.int64)
    targets = np.asarray(targets, dtype=np.float64)
    if actions.shape != (states.shape[0],) or targets.shape != (states.shape[0],):
        raise ValueError("actions/targets must be 1-D and match the batch size")
    if actions.min() < 0 or actions.max() >= params.output_dim:
        raise ValueError("action index out of range")
    return states, actions, targets


def loss(params: MlpParams, states, actions, targets) -> float:
    """Mean squared residual on the taken action's Q-value only."""
    states, actions, targets = _check_batch(params, states, actions, targets)
    q = _K.forward(params.weights, params.biases, states)
    resid = q[np.arange(len(actions)), actions] - targets
    return float(np.mean(resid * resid))


def gradients(params: MlpParams, states, actions, targets):
    """Exact backpropagated gradient of `loss`; returns (loss, MlpParams-shaped grads)."""
    states, actions, targets = _check_batch(params, states, actions, targets)
    value, grad_w, grad_b = _K.backward(params.weights, params.biases,
                                        states, actions, targets)
    return value, MlpParams(grad_w, grad_b)


def global_grad_norm(grads: MlpParams) -> float:
    total = 0.0
    for g in grads.weights + grads.biases:
        total += float(np.sum(g * g))
    return float(np.sqrt(total))


def sgd_step(params: MlpParams, grads: MlpParams, learning_rate: float,
             clip_norm: float | None = None) -> MlpParams:
    """params - lr * grads, optionally rescaling grads to a max global norm."""
    if len(grads.weights) != len(params.weights):
        raise ValueError("gradient/parameter shape mismatch")
    scale = 1.0
    if clip_norm is not None:
        norm = global_grad_norm(grads)
        if norm > clip_norm:
            scale = clip_norm / norm
    weights, biases = [], []
    for w, gw in zip(params.weights, grads.weights):
        if w.shape != gw.shape:
            raise ValueError("gradient/parameter shape mismatch")
        weights.append(w - learning_rate * scale * gw)
    for b, gb in zip(params.biases, grads.biases):
        if b.shape != gb.shape:
            raise ValueError("gradient/parameter shape mismatch")
        biases.append(b - learning_rate * scale * gb)
    return MlpParams(weights, biases)


def save(params: MlpParams, path) -> None:
    arrays = {}
    for i, (w, b) in enumerate(zip(params.weights, params.biases)):
        arrays[f"w{i}"] = w
        arrays[f"b{i}"] = b
    np.savez(path, n_layers=len(params.weights), **arrays)


def load(path) -> MlpParams:
    with np.load(path) as data:
        n_layers = int(data["n_layers"])
        weights = [np.ascontiguousarray(data[f"w{i}"]) for i in range(n_layers)]
        biases = [np.ascontiguousarray(data[f"b{i}"]) for i in range(n_layers)]
    return MlpParams(weights, biases)
