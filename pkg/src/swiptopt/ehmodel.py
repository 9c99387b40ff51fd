"""Achievable rate and harvested-energy models for a power-splitting receiver.

During a block, transmit power ``x`` received through a channel with power
gain ``h`` is split at the receiver: a fraction ``y`` of the received power
feeds a bank of identical rectifier circuits, the rest feeds the decoder
chain.  Each rectifier converts input power with efficiency ``zeta`` up to a
hard ceiling ``p_sat``, above which the harvested power saturates.  All
functions here are pure and accept scalars or numpy arrays (broadcast
elementwise); scalars in, floats out.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "SystemParams",
    "EHModelKind",
    "rate",
    "harvest_per_circuit",
    "harvest_linear",
    "harvest",
    "net_harvest",
]


@dataclass(frozen=True)
class SystemParams:
    """Physical constants of one link instance.

    Attributes
    ----------
    h : float
        Channel power gain, linear scale.
    p_avg : float
        Average transmit power budget over the block (W).
    q_req : float
        Required net harvested energy per block (J).
    p_sat : float
        Per-circuit harvested power at saturation (W).
    p_circuit : float
        Power consumed by the decoding circuitry while it runs (W).
        Must be below ``p_sat``; zero is accepted as a degenerate limit
        used in tests.
    var_antenna : float
        Antenna noise variance (W).
    var_conv : float
        RF-to-baseband conversion noise variance (W), strictly positive.
    t_sym : float
        Block time unit (s).
    zeta : float
        Rectifier conversion efficiency on the linear branch, in (0, 1].
    m_max : int
        Largest number of rectifier circuits that can be switched on.
    """

    h: float
    p_avg: float
    q_req: float
    p_sat: float
    p_circuit: float
    var_antenna: float
    var_conv: float
    t_sym: float = 1.0
    zeta: float = 1.0
    m_max: int = 1

    def __post_init__(self):
        if not self.h > 0.0:
            raise ValueError("channel gain h must be positive")
        if not self.p_avg > 0.0:
            raise ValueError("power budget p_avg must be positive")
        if self.q_req < 0.0:
            raise ValueError("energy requirement q_req must be nonnegative")
        if not self.t_sym > 0.0:
            raise ValueError("block time t_sym must be positive")
        if not 0.0 < self.zeta <= 1.0:
            raise ValueError("conversion efficiency zeta must lie in (0, 1]")
        if not 0.0 <= self.p_circuit < self.p_sat:
            raise ValueError("need 0 <= p_circuit < p_sat")
        if self.var_antenna < 0.0:
            raise ValueError("var_antenna must be nonnegative")
        if not self.var_conv > 0.0:
            raise ValueError("var_conv must be positive")
        if int(self.m_max) != self.m_max or self.m_max < 1:
            raise ValueError("m_max must be a positive integer")

    @classmethod
    def with_diode_limit(cls, *, v_breakdown: float, r_load: float, **kwargs):
        """Build params deriving ``p_sat`` from a single-diode rectifier.

        The ceiling is ``v_breakdown**2 / (4 * r_load)`` for reverse
        breakdown voltage ``v_breakdown`` (V) and load resistance
        ``r_load`` (ohm).
        """
        if v_breakdown <= 0.0 or r_load <= 0.0:
            raise ValueError("v_breakdown and r_load must be positive")
        return cls(p_sat=v_breakdown**2 / (4.0 * r_load), **kwargs)

    def linear_capacity(self) -> float:
        """zeta*h*p_avg*t_sym: harvest if the whole budget fed unsaturated circuits."""
        return self.zeta * self.h * self.p_avg * self.t_sym

    def harvest_ceiling(self, m: int) -> float:
        """Largest net harvest any policy with ``m`` circuits can reach (J).

        Attained by spending the whole block harvesting at full power:
        ``min(zeta*h*p_avg, m*p_sat) * t_sym``.
        """
        return min(self.zeta * self.h * self.p_avg, m * self.p_sat) * self.t_sym


class EHModelKind(enum.Enum):
    """Which harvested-energy law applies to a rectifier input."""

    LINEAR = "linear"
    NONLINEAR_SATURATING = "nonlinear_saturating"


def rate(params: SystemParams, p_tx, rho):
    """Achievable rate in bits per channel use for one split symbol.

    ``log2(1 + (1-rho)*h*p_tx / ((1-rho)*var_antenna + var_conv))``.
    Strictly increasing in ``p_tx`` and, for positive power, strictly
    decreasing in ``rho`` whenever ``var_conv > 0``.
    """
    p_tx = np.asarray(p_tx, dtype=float)
    rho = np.asarray(rho, dtype=float)
    if np.any(p_tx < 0.0):
        raise ValueError("transmit power must be nonnegative")
    if np.any((rho < 0.0) | (rho >= 1.0)):
        raise ValueError("split ratio rho must lie in [0, 1)")
    kept = 1.0 - rho
    snr = kept * params.h * p_tx / (kept * params.var_antenna + params.var_conv)
    out = np.log2(1.0 + snr)
    return float(out) if out.ndim == 0 else out


def harvest_per_circuit(params: SystemParams, p_tx, y):
    """Energy one rectifier harvests from transmit power ``p_tx`` split ``y``.

    The circuit input power is ``y * h * p_tx``; the harvested energy is
    ``zeta * p_tx * y * h * t_sym`` on the linear branch and caps at
    ``p_sat * t_sym`` once ``zeta * p_tx * y * h`` exceeds ``p_sat``.
    Continuous and nondecreasing in both arguments; the two branches agree
    at the breakpoint.
    """
    p_tx = np.asarray(p_tx, dtype=float)
    y = np.asarray(y, dtype=float)
    if np.any(p_tx < 0.0):
        raise ValueError("transmit power must be nonnegative")
    if np.any((y < 0.0) | (y > 1.0)):
        raise ValueError("split fraction y must lie in [0, 1]")
    q_lin = params.zeta * p_tx * y * params.h
    out = np.where(q_lin <= params.p_sat, q_lin, params.p_sat) * params.t_sym
    return float(out) if out.ndim == 0 else out


def harvest_linear(params: SystemParams, p_in):
    """Idealized unbounded harvest ``zeta * p_in * t_sym`` for comparison."""
    p_in = np.asarray(p_in, dtype=float)
    if np.any(p_in < 0.0):
        raise ValueError("input power must be nonnegative")
    out = params.zeta * p_in * params.t_sym
    return float(out) if out.ndim == 0 else out


def harvest(params: SystemParams, p_in, kind: EHModelKind = EHModelKind.NONLINEAR_SATURATING):
    """Single-circuit harvested energy from raw input power ``p_in`` (W)."""
    if kind is EHModelKind.LINEAR:
        return harvest_linear(params, p_in)
    p_in = np.asarray(p_in, dtype=float)
    if np.any(p_in < 0.0):
        raise ValueError("input power must be nonnegative")
    q_lin = params.zeta * p_in
    out = np.where(q_lin <= params.p_sat, q_lin, params.p_sat) * params.t_sym
    return float(out) if out.ndim == 0 else out


def net_harvest(params: SystemParams, m: int, alpha, p_eh, p_id, rho):
    """Net harvested energy of an on-off policy over one block (J).

    A fraction ``alpha`` of the block routes everything to ``m`` rectifiers
    at transmit power ``p_eh``; the remaining ``1-alpha`` runs the decoder
    at power ``p_id`` with split ``rho`` and pays its circuit consumption:

    ``alpha*m*Qc(p_eh, 1/m) + (1-alpha)*m*Qc(p_id, rho/m)
      - (1-alpha)*p_circuit*t_sym``

    where ``Qc`` is :func:`harvest_per_circuit`.  May be negative when the
    circuit consumption dominates; constraint handling is the caller's job.
    """
    if int(m) != m or m < 1:
        raise ValueError("circuit count m must be a positive integer")
    alpha = np.asarray(alpha, dtype=float)
    if np.any((alpha < 0.0) | (alpha > 1.0)):
        raise ValueError("alpha must lie in [0, 1]")
    rho_arr = np.asarray(rho, dtype=float)
    if np.any((rho_arr < 0.0) | (rho_arr >= 1.0)):
        raise ValueError("split ratio rho must lie in [0, 1)")
    eh_term = alpha * m * harvest_per_circuit(params, p_eh, 1.0 / m)
    id_term = (1.0 - alpha) * (
        m * harvest_per_circuit(params, p_id, rho_arr / m)
        - params.p_circuit * params.t_sym
    )
    out = eh_term + id_term
    return float(out) if np.ndim(out) == 0 else out
