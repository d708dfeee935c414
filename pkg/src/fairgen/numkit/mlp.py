"""Dense tanh MLP with hand-coded backprop.

Tensors are plain float64 numpy arrays (row-major). Hidden layers use tanh,
the output layer is linear. All public entry points validate shapes and
finiteness so downstream modules can assume clean numerics.
"""

from dataclasses import dataclass, field

import numpy as np

from ..errors import DimensionError, NumericError
from . import backend


def _as_f64(x):
    return np.ascontiguousarray(np.asarray(x, dtype=np.float64))


def _require_finite(arr, what):
    if not np.all(np.isfinite(arr)):
        raise NumericError(f"non-finite values in {what}")


@dataclass
class MlpNetwork:
    """Fully connected network: layer_dims = [input, hidden..., output].

    weights[i] has shape (layer_dims[i], layer_dims[i+1]); biases[i] has
    shape (layer_dims[i+1],).
    """

    layer_dims: list
    weights: list = field(default_factory=list)
    biases: list = field(default_factory=list)

    def __post_init__(self):
        dims = [int(d) for d in self.layer_dims]
        if len(dims) < 2 or any(d <= 0 for d in dims):
            raise DimensionError(f"bad layer_dims {dims}")
        self.layer_dims = dims
        if not self.weights:
            self.weights = [np.zeros((a, b)) for a, b in zip(dims, dims[1:])]
            self.biases = [np.zeros(b) for b in dims[1:]]
        self.weights = [_as_f64(w) for w in self.weights]
        self.biases = [_as_f64(b) for b in self.biases]
        for i, (w, b) in enumerate(zip(self.weights, self.biases)):
            if w.shape != (dims[i], dims[i + 1]) or b.shape != (dims[i + 1],):
                raise DimensionError(
                    f"layer {i}: weight {w.shape} / bias {b.shape} "
                    f"inconsistent with dims {dims}"
                )

    @classmethod
    def random(cls, layer_dims, rng, scale=None):
        """Gaussian init with 1/sqrt(fan_in) scaling unless overridden."""
        dims = [int(d) for d in layer_dims]
        weights, biases = [], []
        for a, b in zip(dims, dims[1:]):
            s = scale if scale is not None else 1.0 / np.sqrt(a)
            weights.append(rng.standard_normal((a, b)) * s)
            biases.append(np.zeros(b))
        return cls(dims, weights, biases)

    @property
    def input_dim(self):
        return self.layer_dims[0]

    @property
    def output_dim(self):
        return self.layer_dims[-1]

    def parameter_count(self):
        return sum(a * b + b for a, b in zip(self.layer_dims, self.layer_dims[1:]))

    def parameters(self):
        """Flat list of parameter arrays: W0, b0, W1, b1, ..."""
        out = []
        for w, b in zip(self.weights, self.biases):
            out.append(w)
            out.append(b)
        return out

    def to_flat(self):
        return np.concatenate([p.ravel() for p in self.parameters()])

    def from_flat(self, flat):
        flat = _as_f64(flat)
        if flat.shape != (self.parameter_count(),):
            raise DimensionError(
                f"flat vector length {flat.size} != {self.parameter_count()}"
            )
        i = 0
        for p in self.parameters():
            p[...] = flat[i : i + p.size].reshape(p.shape)
            i += p.size
        return self

    def copy(self):
        return MlpNetwork(
            list(self.layer_dims),
            [w.copy() for w in self.weights],
            [b.copy() for b in self.biases],
        )


def _check_input(net, x):
    x = _as_f64(x)
    if x.ndim == 1:
        if x.shape[0] != net.input_dim:
            raise DimensionError(
                f"input dim {x.shape[0]} != network input dim {net.input_dim}"
            )
    elif x.ndim == 2:
        if x.shape[1] != net.input_dim:
            raise DimensionError(
                f"input dim {x.shape[1]} != network input dim {net.input_dim}"
            )
    else:
        raise DimensionError(f"input must be 1-D or 2-D, got shape {x.shape}")
    return x


def mlp_forward(net, x):
    """Forward pass; accepts a single vector or a (batch, dim) matrix."""
    x = _check_input(net, x)
    squeeze = x.ndim == 1
    h = x.reshape(1, -1) if squeeze else x
    out = backend.forward_batch(net.weights, net.biases, h)
    _require_finite(out, "mlp_forward output")
    return out[0] if squeeze else out


def _forward_cached(net, x):
    """Forward keeping per-layer activations (numpy path; used by backward)."""
    acts = [x]
    h = x
    last = len(net.weights) - 1
    for i, (w, b) in enumerate(zip(net.weights, net.biases)):
        h = h @ w + b
        if i != last:
            h = np.tanh(h)
        acts.append(h)
    return h, acts


def _backward_from_acts(net, acts, g):
    """Backward pass reusing cached activations from _forward_cached."""
    grads = [None] * (2 * len(net.weights))
    for i in range(len(net.weights) - 1, -1, -1):
        grads[2 * i] = acts[i].T @ g
        grads[2 * i + 1] = g.sum(axis=0)
        g = g @ net.weights[i].T
        if i > 0:
            g = g * (1.0 - acts[i] ** 2)
    return grads, g


def mlp_backward(net, x, output_gradient):
    """Backprop through the network.

    Returns (param_gradients, input_gradient) where param_gradients is a
    flat list aligned with net.parameters(): dW0, db0, dW1, db1, ...
    """
    x = _check_input(net, x)
    squeeze = x.ndim == 1
    h = x.reshape(1, -1) if squeeze else x
    g = _as_f64(output_gradient)
    g = g.reshape(1, -1) if g.ndim == 1 else g
    if g.shape != (h.shape[0], net.output_dim):
        raise DimensionError(
            f"output_gradient shape {g.shape} != ({h.shape[0]}, {net.output_dim})"
        )
    _, acts = _forward_cached(net, h)
    # tanh'(z) = 1 - tanh(z)^2, and acts[i] already stores tanh(z)
    grads, g = _backward_from_acts(net, acts, g)
    input_gradient = g[0] if squeeze else g
    return grads, input_gradient


class SquaredLoss:
    """0.5 * ||y - target||^2, with its gradient. Sums over a batch."""

    def __init__(self, target):
        self.target = _as_f64(target)

    def value(self, y):
        return 0.5 * float(np.sum((y - self.target) ** 2))

    def grad(self, y):
        return y - self.target


def gradient_check(net, x, loss, h=1e-5):
    """Max relative error between backprop and central finite differences.

    `loss` must expose value(output) -> float and grad(output) -> array.
    """
    x = _check_input(net, x)
    out = mlp_forward(net, x)
    base = loss.value(out)
    if not np.isfinite(base):
        raise NumericError("loss is non-finite at the evaluation point")
    analytic_parts, _ = mlp_backward(net, x, loss.grad(out))
    analytic = np.concatenate([g.ravel() for g in analytic_parts])

    flat = net.to_flat()
    numeric = np.empty_like(flat)
    probe = net.copy()
    for k in range(flat.size):
        bumped = flat.copy()
        bumped[k] = flat[k] + h
        lo_hi = []
        for v in (flat[k] + h, flat[k] - h):
            bumped[k] = v
            probe.from_flat(bumped)
            lo_hi.append(loss.value(mlp_forward(probe, x)))
        numeric[k] = (lo_hi[0] - lo_hi[1]) / (2.0 * h)
    denom = np.maximum(np.maximum(np.abs(analytic), np.abs(numeric)), 1e-12)
    return float(np.max(np.abs(analytic - numeric) / denom))
