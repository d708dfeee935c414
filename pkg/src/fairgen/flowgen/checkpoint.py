"""Versioned binary model checkpoints.

Layout: one magic line, one UTF-8 header line
(layer_dims=..;sample_dim=..;vocab_hash=..), then the parameters as a
little-endian float64 block in net.parameters() order (W0, b0, W1, ...).
Loading validates the vocab hash against the active vocabulary.
"""

import numpy as np

from ..errors import CompatibilityError, ConfigError
from ..numkit.mlp import MlpNetwork
from .model import VelocityModel

CKPT_MAGIC = b"FAIRGEN-CKPT 1\n"


def save_checkpoint(model, path):
    net = model.network
    header = (
        f"layer_dims={','.join(map(str, net.layer_dims))};"
        f"sample_dim={model.sample_dim};"
        f"vocab_hash={model.vocab.vocab_hash()}\n"
    )
    with open(path, "wb") as fh:
        fh.write(CKPT_MAGIC)
        fh.write(header.encode("utf-8"))
        fh.write(net.to_flat().astype("<f8").tobytes())


def load_checkpoint(path, vocab):
    with open(path, "rb") as fh:
        magic = fh.read(len(CKPT_MAGIC))
        if magic != CKPT_MAGIC:
            raise ConfigError(f"{path}: bad checkpoint magic")
        header = fh.readline().decode("utf-8").strip()
        body = fh.read()
    fields = dict(part.split("=", 1) for part in header.split(";"))
    if fields["vocab_hash"] != vocab.vocab_hash():
        raise CompatibilityError(
            f"{path}: checkpoint vocab hash {fields['vocab_hash']} does not "
            f"match active vocabulary {vocab.vocab_hash()}"
        )
    layer_dims = [int(d) for d in fields["layer_dims"].split(",")]
    sample_dim = int(fields["sample_dim"])
    net = MlpNetwork(layer_dims)
    flat = np.frombuffer(body, dtype="<f8")
    net.from_flat(flat)
    return VelocityModel(net, vocab, sample_dim)
