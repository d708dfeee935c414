"""Conditional velocity model and the flow-matching pieces around it.

Time convention: t = 1 is pure noise, t = 0 is data. The straight-line
interpolant is x_t = (1 - t) * x0 + t * x1 and the regression target is
the constant velocity x1 - x0.
"""

from dataclasses import dataclass

import numpy as np

from ..errors import DimensionError, FairgenError, NumericError
from ..numkit.mlp import MlpNetwork, mlp_forward
from .embedding import embed_condition, embedding_dim, null_embedding


@dataclass
class VelocityModel:
    network: MlpNetwork
    vocab: object
    sample_dim: int

    def __post_init__(self):
        expected_in = self.sample_dim + 1 + embedding_dim(self.vocab)
        if self.network.input_dim != expected_in:
            raise DimensionError(
                f"network input dim {self.network.input_dim} != "
                f"sample_dim + 1 + embedding_dim = {expected_in}"
            )
        if self.network.output_dim != self.sample_dim:
            raise DimensionError(
                f"network output dim {self.network.output_dim} != "
                f"sample_dim {self.sample_dim}"
            )

    @classmethod
    def create(cls, vocab, sample_dim, hidden_dims, rng):
        dims = [sample_dim + 1 + embedding_dim(vocab), *hidden_dims, sample_dim]
        return cls(MlpNetwork.random(dims, rng), vocab, sample_dim)

    def features(self, x, t, cond_vec):
        """Stack [x, t, cond] into the network input, batched."""
        x = np.atleast_2d(np.asarray(x, dtype=np.float64))
        n = x.shape[0]
        t_col = np.broadcast_to(np.asarray(t, dtype=np.float64).reshape(-1, 1), (n, 1))
        cond = np.atleast_2d(np.asarray(cond_vec, dtype=np.float64))
        if cond.shape[0] == 1 and n > 1:
            cond = np.broadcast_to(cond, (n, cond.shape[1]))
        return np.concatenate([x, t_col, cond], axis=1)

    def velocity(self, x, t, cond_vec):
        """Predicted velocity; shape matches x (vector or batch)."""
        arr = np.asarray(x, dtype=np.float64)
        out = mlp_forward(self.network, self.features(arr, t, cond_vec))
        return out[0] if arr.ndim == 1 else out


def noising(x0, x1, t):
    """Straight-line interpolant (1 - t) * x0 + t * x1."""
    x0 = np.asarray(x0, dtype=np.float64)
    x1 = np.asarray(x1, dtype=np.float64)
    if x0.shape != x1.shape:
        raise DimensionError(f"x0 {x0.shape} vs x1 {x1.shape}")
    t_arr = np.asarray(t, dtype=np.float64)
    if t_arr.ndim == 1 and x0.ndim == 2:
        t_arr = t_arr.reshape(-1, 1)
    return (1.0 - t_arr) * x0 + t_arr * x1


def flow_loss(model, x0, x1, t, cond_vecs):
    """Mean squared velocity-matching error over batch and dimension."""
    x0 = np.atleast_2d(np.asarray(x0, dtype=np.float64))
    x1 = np.atleast_2d(np.asarray(x1, dtype=np.float64))
    xt = noising(x0, x1, t)
    pred = model.velocity(xt, t, cond_vecs)
    target = x1 - x0
    loss = float(np.mean((pred - target) ** 2))
    if not np.isfinite(loss):
        raise NumericError("flow loss is non-finite")
    return loss


def cfg_velocity(model, x, t, cond, w):
    """Classifier-free guided velocity v_u + w * (v_c - v_u).

    `cond` is an AttributeProfile or a pre-built embedding vector/batch.
    w = 1 and w = 0 return the conditional/unconditional velocity bitwise.
    """
    if cond is None:
        raise FairgenError("cfg_velocity requires a non-null condition")
    cond_vec = (
        cond if isinstance(cond, np.ndarray) else embed_condition(cond, model.vocab)
    )
    if w == 1.0:
        return model.velocity(x, t, cond_vec)
    null_vec = null_embedding(model.vocab)
    if isinstance(cond_vec, np.ndarray) and cond_vec.ndim == 2:
        null_vec = np.broadcast_to(null_vec, cond_vec.shape)
    v_u = model.velocity(x, t, null_vec)
    if w == 0.0:
        return v_u
    v_c = model.velocity(x, t, cond_vec)
    return v_u + w * (v_c - v_u)
