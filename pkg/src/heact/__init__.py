"""heact: HE-compatible polynomial ReLU activations.

Kernel-smoothed polynomial fitting, literature baselines, a minimal
leveled CKKS-style evaluator, a tiny MLP with pluggable activations, and a
benchmark harness that regenerates the comparison tables.
"""

__version__ = "0.1.0"
