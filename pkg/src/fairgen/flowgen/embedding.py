"""Deterministic one-hot condition embeddings.

The embedding concatenates one-hot blocks in grid-attribute order
(sex, age, skin_type, size, diagnosis) followed by a single null flag.
The null condition zeroes every block and sets the flag to 1; it is what
the generator sees during condition dropout and unconditional sampling.
"""

import numpy as np


def embedding_dim(vocab):
    return sum(vocab.cardinalities()) + 1


def null_embedding(vocab):
    vec = np.zeros(embedding_dim(vocab))
    vec[-1] = 1.0
    return vec


def embed_condition(profile, vocab):
    """One-hot blocks for a profile, or the null embedding for None."""
    if profile is None:
        return null_embedding(vocab)
    profile.validate(vocab)
    vec = np.zeros(embedding_dim(vocab))
    offset = 0
    for idx, card in zip(profile.indices(), vocab.cardinalities()):
        vec[offset + idx] = 1.0
        offset += card
    return vec


def block_offsets(vocab):
    """Starting offset of each one-hot block, in grid-attribute order."""
    offsets = {}
    offset = 0
    for name, values in vocab.fields().items():
        offsets[name] = offset
        offset += len(values)
    offsets["null_flag"] = offset
    return offsets
