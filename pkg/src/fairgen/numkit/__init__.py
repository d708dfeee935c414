from .adamw import AdamW, adamw_step
from .backend import BACKEND_NAME, forward_batch
from .mlp import MlpNetwork, SquaredLoss, gradient_check, mlp_backward, mlp_forward

__all__ = [
    "AdamW",
    "adamw_step",
    "BACKEND_NAME",
    "forward_batch",
    "MlpNetwork",
    "SquaredLoss",
    "gradient_check",
    "mlp_backward",
    "mlp_forward",
]
