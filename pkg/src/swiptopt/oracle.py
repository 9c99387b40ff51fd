"""Brute-force grid verifier for the reduced one-block allocation problem.

Exhaustively scans ``(alpha, rho, p_eh)`` with the joint-phase power pinned
to the budget, ``p_id = (p_avg - alpha*p_eh)/(1-alpha)``; the rate is
strictly increasing in transmit power and the harvest nondecreasing, so
spending less than the budget never helps (an audit mode that also grids
``p_id`` below the budget is available to re-check that reduction).

The saturating harvest kernel is re-implemented here in ``min`` form on
purpose: the verifier must not share evaluation code with the closed-form
path it checks.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .ehmodel import SystemParams
from .errors import InfeasibleError
from .solver import PolicySolution

__all__ = [
    "OracleConfig",
    "brute_force",
    "optimality_gap_bound",
    "sample_feasible_instance",
]


@dataclass(frozen=True)
class OracleConfig:
    """Grid resolutions.  Doubling any step count refines the same grid."""

    alpha_steps: int = 400
    rho_steps: int = 400
    peh_steps: int = 400
    full_power_grid: bool = False  # audit mode: grid p_id below the budget too
    pid_steps: int | None = None  # defaults to peh_steps

    def __post_init__(self):
        for name in ("alpha_steps", "rho_steps", "peh_steps"):
            if getattr(self, name) < 2:
                raise ValueError(f"{name} must be >= 2")
        if self.pid_steps is not None and self.pid_steps < 2:
            raise ValueError("pid_steps must be >= 2")


def _kernel(params: SystemParams, p_tx, y):
    # independent re-statement of the per-circuit harvest law
    return np.minimum(params.zeta * p_tx * y * params.h, params.p_sat) * params.t_sym


def _net(params: SystemParams, m: int, alpha, p_eh, p_id, rho):
    return alpha * m * _kernel(params, p_eh, 1.0 / m) + (1.0 - alpha) * (
        m * _kernel(params, p_id, rho / m) - params.p_circuit * params.t_sym
    )


def _objective(params: SystemParams, alpha, p_id, rho):
    kept = 1.0 - rho
    snr = kept * params.h * p_id / (kept * params.var_antenna + params.var_conv)
    return (1.0 - alpha) * np.log2(1.0 + snr)


def _alpha_grid(cfg: OracleConfig) -> np.ndarray:
    # i/n keeps both endpoints and nests under doubling
    return np.arange(cfg.alpha_steps + 1) / cfg.alpha_steps


def _rho_grid(cfg: OracleConfig) -> np.ndarray:
    # excludes 1: the joint phase carries no information there
    return np.arange(cfg.rho_steps) / cfg.rho_steps


def _peh_grid(params: SystemParams, alpha: float, steps: int) -> np.ndarray:
    # powers above p_avg/alpha would force a negative joint-phase power;
    # at alpha = 0 the harvest-phase power has no effect at all
    if alpha == 0.0:
        return np.zeros(1)
    return (params.p_avg / alpha) * (np.arange(steps + 1) / steps)


def brute_force(
    params: SystemParams, m: int, cfg: OracleConfig | None = None
) -> PolicySolution:
    """Best feasible grid point, or :class:`InfeasibleError` if none exists.

    Ties resolve to the lexicographically smallest ``(alpha, rho, p_eh)``,
    making the result independent of any evaluation-order parallelism.
    """
    cfg = cfg or OracleConfig()
    if int(m) != m or m < 1:
        raise ValueError("circuit count m must be a positive integer")

    rhos_full = _rho_grid(cfg)
    best = None  # (objective, alpha, rho, p_eh, p_id, net)
    for alpha in _alpha_grid(cfg):
        alpha = float(alpha)
        peh = _peh_grid(params, alpha, cfg.peh_steps)
        if alpha < 1.0:
            p_id_cap = np.maximum((params.p_avg - alpha * peh) / (1.0 - alpha), 0.0)
            rhos = rhos_full
        else:
            p_id_cap = np.zeros_like(peh)
            rhos = np.zeros(1)  # no joint phase: rho is irrelevant, pick 0
        rho_col = rhos[:, None]

        if cfg.full_power_grid and alpha < 1.0:
            pid_steps = cfg.pid_steps or cfg.peh_steps
            frac = (np.arange(pid_steps + 1) / pid_steps)[:, None]
            p_id = frac * p_id_cap[None, :]  # (PI, PE)
            net = alpha * m * _kernel(params, peh, 1.0 / m)[None, None, :] + (
                1.0 - alpha
            ) * (
                m * _kernel(params, p_id[None, :, :], rho_col[:, :, None] / m)
                - params.p_circuit * params.t_sym
            )
            feasible = net >= params.q_req
            if not feasible.any():
                continue
            obj = _objective(params, alpha, p_id[None, :, :], rho_col[:, :, None])
            obj = np.where(feasible, obj, -np.inf)
            flat = int(np.argmax(obj))
            ir, ip, ie = np.unravel_index(flat, obj.shape)
            cand = (
                float(obj[ir, ip, ie]),
                alpha,
                float(rhos[ir]),
                float(peh[ie]),
                float(p_id[ip, ie]),
                float(net[ir, ip, ie]),
            )
        else:
            net = alpha * m * _kernel(params, peh, 1.0 / m)[None, :] + (1.0 - alpha) * (
                m * _kernel(params, p_id_cap[None, :], rho_col / m)
                - params.p_circuit * params.t_sym
            )
            feasible = net >= params.q_req
            if not feasible.any():
                continue
            obj = _objective(params, alpha, p_id_cap[None, :], rho_col)
            obj = np.where(feasible, obj, -np.inf)
            flat = int(np.argmax(obj))  # C order: smallest rho, then p_eh
            ir, ie = np.unravel_index(flat, obj.shape)
            cand = (
                float(obj[ir, ie]),
                alpha,
                float(rhos[ir]),
                float(peh[ie]),
                float(p_id_cap[ie]),
                float(net[ir, ie]),
            )

        if best is None or cand[0] > best[0]:  # strict: earliest alpha wins ties
            best = cand

    if best is None:
        raise InfeasibleError("no grid point satisfies the energy constraint")
    objective, alpha, rho, p_eh, p_id, net = best
    return PolicySolution(
        alpha=alpha, rho=rho, p_eh=p_eh, p_id=p_id, m=m, rate=objective, energy=net
    )


def optimality_gap_bound(
    params: SystemParams,
    m: int,
    solution: PolicySolution,
    cfg: OracleConfig | None = None,
) -> float:
    """Certified bound on how far below ``solution.rate`` the oracle may land.

    Rounds the closed-form optimum onto the oracle grid and evaluates the
    nearby grid points with the oracle's own kernel; every feasible one is a
    point the exhaustive scan must reach, so the oracle returns at least the
    best such witness.  The bound is
    ``solution.rate - best_witness + 1e-9*(1 + |rate|)``, or the trivial
    ``solution.rate`` bound when no nearby witness is feasible.
    """
    cfg = cfg or OracleConfig()
    floor = 1e-9 * (1.0 + abs(solution.rate))

    ia = int(math.floor(solution.alpha * cfg.alpha_steps))
    alpha_idx = {min(max(i, 0), cfg.alpha_steps) for i in range(ia - 1, ia + 3)}
    alpha_idx.add(cfg.alpha_steps)  # the all-harvest endpoint always exists
    ir = int(math.floor(solution.rho * cfg.rho_steps))
    rho_idx = {min(max(j, 0), cfg.rho_steps - 1) for j in range(ir - 1, ir + 4)}

    zht = params.zeta * params.h * params.t_sym
    best_witness = -math.inf
    for i in sorted(alpha_idx):
        alpha = float(i / cfg.alpha_steps)
        peh_pts = _peh_grid(params, alpha, cfg.peh_steps)
        step = peh_pts[1] - peh_pts[0] if len(peh_pts) > 1 else 0.0
        idx = set()
        if step > 0.0:
            k = int(math.floor(solution.p_eh / step))
            idx.update(min(max(j, 0), cfg.peh_steps) for j in range(k - 1, k + 4))
            # enough harvest-phase power to cover the demand on its own
            k_need = int(math.ceil(params.q_req / zht / step))
            idx.update(
                min(max(j, 0), cfg.peh_steps) for j in (k_need, k_need + 1)
            )
        else:
            idx.add(0)
        for j in sorted(idx):
            p_eh = float(peh_pts[j])
            if alpha < 1.0:
                p_id = max((params.p_avg - alpha * p_eh) / (1.0 - alpha), 0.0)
            else:
                p_id = 0.0
            for r in sorted(rho_idx):
                rho = float(r / cfg.rho_steps)
                net = float(_net(params, m, alpha, p_eh, p_id, rho))
                if net >= params.q_req:
                    value = float(_objective(params, alpha, p_id, rho))
                    if value > best_witness:
                        best_witness = value

    if not math.isfinite(best_witness):
        return solution.rate + floor
    return max(solution.rate - best_witness, 0.0) + floor


def sample_feasible_instance(
    rng: np.random.Generator,
    *,
    m_choices: tuple[int, ...] = (1, 2, 3, 4, 5),
    q_span: tuple[float, float] = (0.05, 0.9),
) -> tuple[SystemParams, int]:
    """Random feasible instance, log-uniform around the reference setup.

    The energy demand is drawn as a fraction of the instance's harvest
    ceiling, so every returned instance is feasible for the returned
    circuit count.
    """

    def log_uniform(lo: float, hi: float) -> float:
        return float(np.exp(rng.uniform(np.log(lo), np.log(hi))))

    p_avg = 2.0 * log_uniform(0.5, 2.0)
    h_bar = 1e-3 * log_uniform(0.5, 2.0)
    h = h_bar * log_uniform(0.2, 5.0)
    zeta = log_uniform(0.5, 1.0)
    p_sat = 0.4 * h_bar * p_avg * log_uniform(0.5, 2.5)
    p_circuit = p_sat * rng.uniform(0.1, 0.75)
    sigma2 = 0.01 * h_bar * p_avg * log_uniform(0.5, 2.0)
    m = int(rng.choice(m_choices))
    t_sym = 1.0
    ceiling = min(zeta * h * p_avg, m * p_sat) * t_sym
    q_req = ceiling * rng.uniform(*q_span)
    m_max = max(m, math.ceil(zeta * h * p_avg / p_sat))
    params = SystemParams(
        h=h,
        p_avg=p_avg,
        q_req=q_req,
        p_sat=p_sat,
        p_circuit=p_circuit,
        var_antenna=sigma2,
        var_conv=sigma2,
        t_sym=t_sym,
        zeta=zeta,
        m_max=m_max,
    )
    return params, m
