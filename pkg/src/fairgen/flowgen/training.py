"""Seeded flow-matching training loop.

Each step draws a data batch, fresh noise, uniform times, and a condition
dropout mask from one Generator, so the whole run is a pure function of
(initial parameters, dataset, config). With probability
condition_dropout_probability a row's condition is replaced by the null
embedding, which is what makes classifier-free guidance possible later.
"""

from dataclasses import dataclass

import numpy as np

from ..errors import ConfigError, InputError, TrainingError
from ..numkit.adamw import AdamW
from ..numkit.mlp import _backward_from_acts, _forward_cached
from .embedding import embed_condition, null_embedding
from .model import noising


@dataclass(frozen=True)
class TrainConfig:
    train_steps: int = 20_000
    batch_size: int = 128
    learning_rate: float = 0.0002
    condition_dropout_probability: float = 0.1
    weight_decay: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if not 0.0 <= self.condition_dropout_probability < 1.0:
            raise ConfigError("condition_dropout_probability must be in [0, 1)")
        if self.train_steps < 0 or self.batch_size < 1:
            raise ConfigError("train_steps must be >= 0 and batch_size >= 1")


def train(model, dataset, config):
    """Train in place; returns (model, loss trace, one float per step)."""
    if not dataset:
        raise InputError("empty training dataset")
    x0_all = np.stack([np.asarray(x0, dtype=np.float64) for x0, _ in dataset])
    if x0_all.shape[1] != model.sample_dim:
        raise ConfigError(
            f"dataset dim {x0_all.shape[1]} != model sample_dim {model.sample_dim}"
        )
    cond_all = np.stack(
        [embed_condition(profile, model.vocab) for _, profile in dataset]
    )
    null_vec = null_embedding(model.vocab)

    net = model.network
    params = net.parameters()
    opt = AdamW(learning_rate=config.learning_rate, weight_decay=config.weight_decay)
    rng = np.random.Generator(np.random.PCG64(config.seed))
    n, d = x0_all.shape
    trace = []
    for step in range(config.train_steps):
        idx = rng.integers(0, n, size=config.batch_size)
        x0 = x0_all[idx]
        x1 = rng.standard_normal((config.batch_size, d))
        t = rng.uniform(0.0, 1.0, size=config.batch_size)
        cond = cond_all[idx].copy()
        if config.condition_dropout_probability > 0.0:
            drop = rng.uniform(size=config.batch_size) < (
                config.condition_dropout_probability
            )
            cond[drop] = null_vec
        xt = noising(x0, x1, t)
        feats = np.concatenate([xt, t.reshape(-1, 1), cond], axis=1)
        pred, acts = _forward_cached(net, feats)
        residual = pred - (x1 - x0)
        loss = float(np.mean(residual**2))
        if not np.isfinite(loss):
            raise TrainingError(f"training diverged at step {step}", step=step)
        grads, _ = _backward_from_acts(net, acts, 2.0 * residual / residual.size)
        opt.step(params, grads)
        trace.append(loss)
    return model, trace
