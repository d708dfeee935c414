"""Forward-kernel backend selection.

The batched MLP forward is the hot kernel (the Euler sampler calls it
2 * steps times per cohort chunk). A Cython extension provides a fused
version; the numpy fallback is selected when the extension is not built
or when FAIRGEN_FORCE_PYTHON=1 is set. Both compute the same tanh MLP;
bitwise equality across backends is not guaranteed (summation order),
only within a backend.
"""

import os

import numpy as np


def _forward_batch_numpy(weights, biases, x):
    h = x
    last = len(weights) - 1
    for i, (w, b) in enumerate(zip(weights, biases)):
        h = h @ w + b
        if i != last:
            h = np.tanh(h)
    return h


if os.environ.get("FAIRGEN_FORCE_PYTHON") == "1":
    _fast = None
else:
    try:
        from . import _fastmlp as _fast
    except ImportError:
        _fast = None

if _fast is not None:
    BACKEND_NAME = "cython"

    def forward_batch(weights, biases, x):
        return _fast.forward_batch(list(weights), list(biases), x)

else:
    BACKEND_NAME = "numpy"
    forward_batch = _forward_batch_numpy

forward_batch_numpy = _forward_batch_numpy
