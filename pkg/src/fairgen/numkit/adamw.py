"""AdamW with decoupled weight decay.

Update per parameter tensor, at step t (1-based):

    m <- beta1 * m + (1 - beta1) * g
    v <- beta2 * v + (1 - beta2) * g^2
    m_hat = m / (1 - beta1^t);  v_hat = v / (1 - beta2^t)
    theta <- theta - lr * m_hat / (sqrt(v_hat) + eps) - lr * weight_decay * theta

The decay term multiplies the raw parameter, not the gradient.
"""

from dataclasses import dataclass, field

import numpy as np

from ..errors import DimensionError


@dataclass
class AdamW:
    learning_rate: float = 0.0002
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8
    weight_decay: float = 0.0
    step_count: int = 0
    first_moment: list = field(default_factory=list)
    second_moment: list = field(default_factory=list)

    def _init_state(self, params):
        self.first_moment = [np.zeros_like(p) for p in params]
        self.second_moment = [np.zeros_like(p) for p in params]

    def step(self, params, grads):
        """Apply one update in place; returns params for convenience."""
        if not self.first_moment:
            self._init_state(params)
        if len(params) != len(grads) or len(params) != len(self.first_moment):
            raise DimensionError(
                f"got {len(params)} params, {len(grads)} grads, "
                f"{len(self.first_moment)} moment tensors"
            )
        self.step_count += 1
        t = self.step_count
        bc1 = 1.0 - self.beta1 ** t
        bc2 = 1.0 - self.beta2 ** t
        lr = self.learning_rate
        for p, g, m, v in zip(params, grads, self.first_moment, self.second_moment):
            if p.shape != g.shape or p.shape != m.shape:
                raise DimensionError(
                    f"param {p.shape} / grad {g.shape} / moment {m.shape} mismatch"
                )
            m *= self.beta1
            m += (1.0 - self.beta1) * g
            v *= self.beta2
            v += (1.0 - self.beta2) * (g * g)
            update = lr * (m / bc1) / (np.sqrt(v / bc2) + self.epsilon)
            if self.weight_decay != 0.0:
                # decay acts on the pre-update parameter, decoupled from the moments
                update = update + (lr * self.weight_decay) * p
            p -= update
        return params


def adamw_step(state, params, grads):
    """Functional spelling of AdamW.step."""
    return state.step(params, grads)
