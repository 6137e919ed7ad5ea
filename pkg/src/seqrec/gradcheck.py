"""Finite-difference verification of the analytic BPTT gradients.

Perturbs every parameter coordinate of a small network, compares the
central-difference slope of the sequence loss against the analytic
gradient, and reports the worst relative error per named gate block.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .network import Network, NetworkConfig, parameter_blocks

FD_STEP = 1e-5
REL_ERR_FLOOR = 1e-6  # treat |a|,|n| below this as zero-vs-noise


@dataclass(frozen=True)
class GradCheckReport:
    config: NetworkConfig
    tolerance: float
    block_errors: dict[str, float]  # block name -> max relative error

    @property
    def passed(self) -> bool:
        return all(err < self.tolerance for err in self.block_errors.values())

    def failing_blocks(self) -> list[str]:
        return sorted(k for k, v in self.block_errors.items() if v >= self.tolerance)


def _relative_error(analytic: float, numeric: float) -> float:
    denom = max(abs(analytic), abs(numeric), REL_ERR_FLOOR)
    return abs(analytic - numeric) / denom


def random_training_instance(config: NetworkConfig, seed: int, length: int = 4):
    """A random sparse input sequence with targets and popularity bins."""
    rng = np.random.default_rng(seed)
    inputs = [np.array([rng.integers(config.input_size)]) for _ in range(length)]
    targets = rng.integers(config.catalog_size, size=length)
    p_bins = rng.integers(1, 11, size=length)
    return inputs, targets, p_bins


def gradient_check(config: NetworkConfig, seed: int = 0, tolerance: float = 1e-4,
                   length: int = 4, delta: float = 0.0) -> GradCheckReport:
    """Exhaustive central-difference check of every parameter coordinate."""
    if config.hidden_size > 8 or config.catalog_size > 10:
        raise ValueError("gradient_check is for small configs (hidden <= 8, catalog <= 10)")
    net = Network.create(config)
    rng = np.random.default_rng(seed)
    # random weights keep gradients healthy (init biases are 0/1 constants)
    for key in net.params:
        net.params[key] = rng.normal(scale=0.5, size=net.params[key].shape)

    inputs, targets, p_bins = random_training_instance(config, seed + 1, length)
    analytic, _ = net.sequence_gradients(inputs, targets, p_bins, delta)

    def loss_at() -> float:
        _, loss = net.sequence_gradients(inputs, targets, p_bins, delta)
        return loss

    errors: dict[str, float] = {}
    for block, (key, rows) in parameter_blocks(config).items():
        arr = net.params[key]
        ana = analytic[key]
        start = rows.indices(arr.shape[0])[0]
        worst = 0.0
        for idx in np.ndindex(arr[rows].shape):
            coord = (start + idx[0],) + idx[1:]
            orig = arr[coord]
            arr[coord] = orig + FD_STEP
            up = loss_at()
            arr[coord] = orig - FD_STEP
            down = loss_at()
            arr[coord] = orig
            numeric = (up - down) / (2.0 * FD_STEP)
            worst = max(worst, _relative_error(float(ana[coord]), numeric))
        errors[block] = worst
    return GradCheckReport(config=config, tolerance=tolerance, block_errors=errors)
