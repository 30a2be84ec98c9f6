"""Hybrid ordinal dropout.

Standard dropout removes neurons uniformly at random. The hybrid variant
estimates, per batch, how strongly each neuron's activation correlates
with the ordinal target, then drops weakly correlated neurons more often
while preserving the configured mean drop rate. A mix coefficient slides
between the uniform and the correlation-driven regimes.

Masks are per neuron and shared by every sample in the batch, so the
correlation estimate and the mask always refer to the same batch. Kept
activations are rescaled by 1/(1 - q_u) (inverted dropout), keeping the
expected activation unchanged.
"""

from dataclasses import dataclass

import numpy as np

MAX_DROP = 0.95


@dataclass(frozen=True)
class HybridDropoutConfig:
    base_rate: float
    mix: float = 1.0
    min_batch: int = 8

    def __post_init__(self):
        if not 0.0 <= self.base_rate < 1.0:
            raise ValueError(f"base_rate must be in [0, 1), got {self.base_rate}")
        if not 0.0 <= self.mix <= 1.0:
            raise ValueError(f"mix must be in [0, 1], got {self.mix}")
        if self.min_batch < 2:
            raise ValueError(f"min_batch must be >= 2, got {self.min_batch}")


def neuron_target_correlation(activations, labels) -> np.ndarray:
    """Pearson correlation of each activation column with the label indices.

    Constant columns (or constant labels) have no ordering signal and map
    to correlation 0.
    """
    activations = np.asarray(activations, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.float64)
    n = activations.shape[0]
    if n < 2:
        raise ValueError(f"need at least 2 samples, got {n}")
    a = activations - activations.mean(axis=0)
    y = labels - labels.mean()
    cov = a.T @ y
    denom = np.sqrt((a * a).sum(axis=0) * (y @ y))
    out = np.zeros(activations.shape[1])
    ok = denom > 0.0
    out[ok] = cov[ok] / denom[ok]
    return np.clip(out, -1.0, 1.0)


def hybrid_drop_probabilities(correlations, config: HybridDropoutConfig) -> np.ndarray:
    """Per-neuron drop probabilities from target correlations.

    The pre-clamp probabilities average exactly to the configured base
    rate; clamping at MAX_DROP bounds the inverted-dropout rescale.
    """
    r = np.asarray(correlations, dtype=np.float64)
    h = r.shape[0]
    p = config.base_rate
    weight = 1.0 - np.abs(r)
    total = weight.sum()
    if total > 0.0:
        q_ord = p * h * weight / total
    else:
        q_ord = np.full(h, p)
    q = config.mix * q_ord + (1.0 - config.mix) * p
    return np.clip(q, 0.0, MAX_DROP)


def dropout_scale_vector(
    drop_probabilities, rng: np.random.Generator
) -> tuple[np.ndarray, np.ndarray]:
    """Draw a keep mask and the inverted-dropout column scales."""
    q = np.asarray(drop_probabilities, dtype=np.float64)
    keep = (rng.random(q.shape[0]) >= q).astype(np.float64)
    scale = keep / (1.0 - q)
    return scale, keep


def apply_hybrid_dropout(
    activations,
    labels,
    config: HybridDropoutConfig,
    mode: str = "train",
    rng: np.random.Generator | None = None,
):
    """Mask a batch of activations; identity in eval mode.

    Returns ``(masked activations, keep mask)``. In train mode the drop
    probabilities come from the batch correlations unless the batch is
    smaller than ``config.min_batch``, which falls back to uniform rates.
    """
    activations = np.asarray(activations, dtype=np.float64)
    if mode == "eval":
        return activations, np.ones(activations.shape[1])
    if mode != "train":
        raise ValueError(f"mode must be 'train' or 'eval', got {mode!r}")
    if rng is None:
        raise ValueError("train mode requires a random generator")
    n = activations.shape[0]
    if n < config.min_batch:
        q = np.full(activations.shape[1], config.base_rate)
    else:
        r = neuron_target_correlation(activations, labels)
        q = hybrid_drop_probabilities(r, config)
    scale, keep = dropout_scale_vector(q, rng)
    return activations * scale[None, :], keep
