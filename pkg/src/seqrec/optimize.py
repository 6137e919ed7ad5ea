"""Parameter-update rules: plain SGD, momentum SGD and Adagrad.

Adagrad keeps a per-parameter sum of squared gradients G and scales each
coordinate's step by eta / sqrt(G + epsilon), so frequently-updated
coordinates cool down first. Updates mutate the parameter dict in place.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .network import NumericFault

OPTIMIZER_KINDS = ("sgd", "momentum", "adagrad")


@dataclass(frozen=True)
class OptimizerConfig:
    kind: str = "adagrad"
    eta: float = 0.1
    epsilon: float = 1e-8
    mu: float = 0.9

    def __post_init__(self):
        if self.kind not in OPTIMIZER_KINDS:
            raise ValueError(f"kind must be one of {OPTIMIZER_KINDS}, got {self.kind!r}")
        if self.eta <= 0:
            raise ValueError("eta must be > 0")
        if self.epsilon <= 0:
            raise ValueError("epsilon must be > 0")
        if not 0 <= self.mu < 1:
            raise ValueError("mu must be in [0, 1)")


class Optimizer:
    """Holds the update rule plus per-parameter accumulators."""

    def __init__(self, config: OptimizerConfig, params: dict[str, np.ndarray]):
        self.config = config
        self.accumulators: dict[str, np.ndarray] = {}
        if config.kind in ("momentum", "adagrad"):
            self.accumulators = {k: np.zeros_like(v) for k, v in params.items()}

    def apply_update(self, params: dict[str, np.ndarray],
                     grads: dict[str, np.ndarray]) -> None:
        """One in-place update; rejects non-finite gradients untouched."""
        for key, g in grads.items():
            if params[key].shape != g.shape:
                raise ValueError(f"gradient shape mismatch for {key}")
            if not np.isfinite(g).all():
                raise NumericFault(f"non-finite gradient in {key}; update rejected")
        cfg = self.config
        if cfg.kind == "sgd":
            for key, g in grads.items():
                params[key] -= cfg.eta * g
        elif cfg.kind == "momentum":
            for key, g in grads.items():
                v = self.accumulators[key]
                v *= cfg.mu
                v += cfg.eta * g
                params[key] -= v
        else:  # adagrad
            for key, g in grads.items():
                G = self.accumulators[key]
                G += g * g
                params[key] -= cfg.eta * g / np.sqrt(G + cfg.epsilon)

    def state_arrays(self) -> dict[str, np.ndarray]:
        """Accumulator snapshot for serialization (empty for plain SGD)."""
        return dict(self.accumulators)

    def load_state(self, arrays: dict[str, np.ndarray]) -> None:
        for key, value in arrays.items():
            if key not in self.accumulators:
                raise KeyError(f"unexpected optimizer state key {key}")
            if self.accumulators[key].shape != value.shape:
                raise ValueError(f"optimizer state shape mismatch for {key}")
            self.accumulators[key] = value.copy()


def clip_gradients(grads: dict[str, np.ndarray], max_norm: float) -> float:
    """Scale all gradients so their global L2 norm is at most max_norm.

    Returns the pre-clip norm. No-op when already within bounds.
    """
    if max_norm <= 0:
        raise ValueError("max_norm must be > 0")
    total = 0.0
    for g in grads.values():
        total += float(np.sum(g * g))
    norm = float(np.sqrt(total))
    if norm > max_norm:
        factor = max_norm / norm
        for g in grads.values():
            g *= factor
    return norm
