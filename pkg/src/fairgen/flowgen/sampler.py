"""Euler ODE sampler with classifier-free guidance.

Integration runs t: 1 -> 0 with fixed step -1/steps, starting from
standard normal noise drawn from the per-sample seed. The trajectory is
a pure ODE: the initial draw is the only randomness.
"""

from dataclasses import dataclass

import numpy as np

from ..errors import ConfigError, SamplingError
from .embedding import embed_condition, null_embedding


@dataclass(frozen=True)
class SamplerConfig:
    steps: int = 250
    guidance_scale: float = 10.0
    seed: int = 0

    def __post_init__(self):
        if self.steps < 1:
            raise ConfigError("steps must be >= 1")
        if self.guidance_scale < 0:
            raise ConfigError("guidance_scale must be >= 0")


def _guided(model, x, t, cond_vec, null_vec, w):
    if cond_vec is None:
        return model.velocity(x, t, null_vec)
    if w == 1.0:
        return model.velocity(x, t, cond_vec)
    v_u = model.velocity(x, t, null_vec)
    if w == 0.0:
        return v_u
    v_c = model.velocity(x, t, cond_vec)
    return v_u + w * (v_c - v_u)


def _integrate(model, x, cond_vec, null_vec, steps, w):
    dt = 1.0 / steps
    for k in range(steps):
        t = 1.0 - k * dt
        x = x - dt * _guided(model, x, t, cond_vec, null_vec, w)
        if not np.all(np.isfinite(x)):
            raise SamplingError(f"non-finite state at Euler step {k}", step=k)
    return x


def sample(model, cond, config):
    """One sample for one condition (AttributeProfile or None)."""
    rng = np.random.Generator(np.random.PCG64(config.seed))
    x = rng.standard_normal(model.sample_dim)
    null_vec = null_embedding(model.vocab)
    cond_vec = None if cond is None else embed_condition(cond, model.vocab)
    return _integrate(model, x, cond_vec, null_vec, config.steps, config.guidance_scale)


def sample_batch(model, profiles, seeds, steps, guidance_scale):
    """Batched sampling: one row per (profile, seed) pair.

    Row arithmetic is independent of batch composition only within a
    fixed chunking, so callers that care about bit-stability must keep
    chunk boundaries fixed (the CLI uses fixed 256-row chunks).
    """
    if len(profiles) != len(seeds):
        raise ConfigError("profiles and seeds must align")
    n = len(profiles)
    x = np.empty((n, model.sample_dim))
    for i, seed in enumerate(seeds):
        rng = np.random.Generator(np.random.PCG64(seed))
        x[i] = rng.standard_normal(model.sample_dim)
    cond = np.stack([embed_condition(p, model.vocab) for p in profiles])
    null_vec = np.broadcast_to(null_embedding(model.vocab), cond.shape)
    t_col = np.empty(n)
    dt = 1.0 / steps
    for k in range(steps):
        t_col[:] = 1.0 - k * dt
        v = _guided_batch(model, x, t_col, cond, null_vec, guidance_scale)
        x = x - dt * v
        if not np.all(np.isfinite(x)):
            raise SamplingError(f"non-finite state at Euler step {k}", step=k)
    return x


def _guided_batch(model, x, t, cond, null_vec, w):
    if w == 1.0:
        return model.velocity(x, t, cond)
    v_u = model.velocity(x, t, null_vec)
    if w == 0.0:
        return v_u
    v_c = model.velocity(x, t, cond)
    return v_u + w * (v_c - v_u)
