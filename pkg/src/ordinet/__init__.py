"""Ordinal classification toolkit.

Unimodal soft-label generators, ordinal output heads and losses with
analytic gradients, correlation-aware dropout, ordinal metrics, a small
trainable dense-network core, and a benchmark harness.
"""

from . import backend, data, dropout, kernels, losses, metrics, nn_core, output_layers, registry, soft_labels

__version__ = "0.1.0"

__all__ = [
    "backend",
    "data",
    "dropout",
    "kernels",
    "losses",
    "metrics",
    "nn_core",
    "output_layers",
    "registry",
    "soft_labels",
    "__version__",
]
