from .checkpoint import load_checkpoint, save_checkpoint
from .embedding import embed_condition, embedding_dim, null_embedding
from .model import VelocityModel, cfg_velocity, flow_loss, noising
from .sampler import SamplerConfig, sample, sample_batch
from .training import TrainConfig, train

__all__ = [
    "VelocityModel",
    "SamplerConfig",
    "TrainConfig",
    "cfg_velocity",
    "embed_condition",
    "embedding_dim",
    "flow_loss",
    "load_checkpoint",
    "noising",
    "null_embedding",
    "sample",
    "sample_batch",
    "save_checkpoint",
    "train",
]
