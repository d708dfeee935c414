"""fairgen: seeded fairness-audit harness.

Balanced synthetic cohorts, a conditional rectified-flow generator with
classifier-free guidance, pluggable classifiers (planted-bias oracles and
an external-process protocol), and demographic-parity reports.
"""

__version__ = "0.1.0"
