"""Seeded generation of Rician-fading channel power gains.

The fading coefficient mixes a fixed line-of-sight component with a
circularly-symmetric complex Gaussian scattering term,

``g = sqrt(r/(r+1)) * g_los + sqrt(1/(r+1)) * g_scatter``,

and the power gain is ``h = |g|**2``.  The line-of-sight phase is taken as
zero: only ``|g|**2`` enters the link model and the scattering term's
circular symmetry makes the distribution of ``h`` phase-invariant.  The
scattering variance splits evenly across the real and imaginary parts.

All draws go through ``numpy.random.Generator`` (PCG64 when created with
:func:`numpy.random.default_rng`); experiment outputs record the generator
name so results can be reproduced exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "RicianModel",
    "ChannelDraw",
    "dbw_to_linear",
    "mean_gain",
    "sample",
    "sample_gains",
    "spawn_streams",
]


def dbw_to_linear(value_dbw: float) -> float:
    """Convert a dBW quantity to linear watts: ``10**(value/10)``."""
    return 10.0 ** (value_dbw / 10.0)


@dataclass(frozen=True)
class RicianModel:
    """Rician factor plus the line-of-sight and scattering powers (linear)."""

    r_factor: float = 2.0
    g_los_power: float = 1e-3
    var_scatter: float = 1e-3

    def __post_init__(self):
        if self.r_factor < 0.0:
            raise ValueError("r_factor must be nonnegative")
        if self.g_los_power < 0.0:
            raise ValueError("g_los_power must be nonnegative")
        if not self.var_scatter > 0.0:
            raise ValueError("var_scatter must be positive")

    @classmethod
    def from_dbw(
        cls, r_factor: float = 2.0, g_los_dbw: float = -30.0, scatter_dbw: float = -30.0
    ) -> "RicianModel":
        return cls(
            r_factor=r_factor,
            g_los_power=dbw_to_linear(g_los_dbw),
            var_scatter=dbw_to_linear(scatter_dbw),
        )


@dataclass(frozen=True)
class ChannelDraw:
    """One sampled channel power gain ``h = |g|**2``."""

    h: float


def mean_gain(model: RicianModel) -> float:
    """Average power gain ``r/(r+1)*g_los_power + 1/(r+1)*var_scatter``."""
    w = model.r_factor / (model.r_factor + 1.0)
    return w * model.g_los_power + (1.0 - w) * model.var_scatter


def sample_gains(model: RicianModel, rng: np.random.Generator, n: int) -> np.ndarray:
    """Draw ``n`` power gains; deterministic given the generator state."""
    if n < 1:
        raise ValueError("n must be >= 1")
    los = math.sqrt(model.r_factor / (model.r_factor + 1.0)) * math.sqrt(
        model.g_los_power
    )
    scale = math.sqrt(model.var_scatter / 2.0)  # per real/imag part
    parts = rng.normal(0.0, scale, size=(n, 2))
    w = math.sqrt(1.0 / (model.r_factor + 1.0))
    re = los + w * parts[:, 0]
    im = w * parts[:, 1]
    return re * re + im * im


def sample(model: RicianModel, rng: np.random.Generator) -> ChannelDraw:
    """Draw a single power gain."""
    return ChannelDraw(h=float(sample_gains(model, rng, 1)[0]))


def spawn_streams(seed: int, n_streams: int) -> list[np.random.Generator]:
    """Independent child generators for parallel workers.

    Stream ``i`` is derived from ``(seed, i)`` via ``SeedSequence.spawn``;
    reductions over workers must keep the stream-index order to stay
    deterministic.
    """
    return [np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(n_streams)]
