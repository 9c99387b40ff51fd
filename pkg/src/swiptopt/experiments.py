"""Monte Carlo rate-energy tradeoff sweeps with full configuration capture.

A sweep draws a fixed set of channel realizations once, then for every
configured curve (scheme, power budget, circuit-count mode) and every energy
threshold solves each realization and aggregates the achieved rates.  All
outputs are pure functions of (config, seed): the channel draws are shared
across curves and thresholds, realizations are reduced in index order, and
the CSV is written with shortest round-trip float formatting, so re-running
a sweep from its JSON sidecar reproduces the CSV byte for byte.
"""

from __future__ import annotations

import csv
import hashlib
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ._version import __version__
from .channel import RicianModel, mean_gain, sample_gains
from .ehmodel import SystemParams
from .errors import ConfigError, InfeasibleError
from .solver import (
    PolicySolution,
    SolverOptions,
    choose_circuit_count,
    solve_joint,
    solve_time_switching,
)

__all__ = [
    "DEFAULT_Q_FRACTIONS",
    "ParamRules",
    "ParamTemplate",
    "CurveSpec",
    "SweepConfig",
    "REPoint",
    "RECurve",
    "default_paper_params",
    "run_sweep",
    "export_curves",
    "load_sweep_config",
    "config_fingerprint",
]

GENERATOR_NAME = "numpy.random.Generator(PCG64)"

# fractions of the deterministic capacity zeta*h_bar*p_avg*t_sym, covering
# the tradeoff from the rate corner to the energy corner
DEFAULT_Q_FRACTIONS = (0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 0.95)

_SCHEMES = ("joint", "ts")


@dataclass(frozen=True)
class ParamRules:
    """Rules binding the derived constants to the mean gain and the budget."""

    p_sat_over_mean_rx: float = 0.4  # p_sat = coeff * h_bar * p_avg
    p_circuit_over_p_sat: float = 0.3
    snr_db: float = 20.0  # h_bar*p_avg / sigma^2, with sigma^2 on each noise term
    t_sym: float = 1.0
    zeta: float = 1.0
    m_max_from_mean_gain: bool = False  # sensitivity switch: ceil uses h_bar, not h

    def to_dict(self) -> dict:
        return {
            "p_sat_over_mean_rx": self.p_sat_over_mean_rx,
            "p_circuit_over_p_sat": self.p_circuit_over_p_sat,
            "snr_db": self.snr_db,
            "t_sym_s": self.t_sym,
            "zeta": self.zeta,
            "m_max_from_mean_gain": self.m_max_from_mean_gain,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ParamRules":
        return cls(
            p_sat_over_mean_rx=float(data.get("p_sat_over_mean_rx", 0.4)),
            p_circuit_over_p_sat=float(data.get("p_circuit_over_p_sat", 0.3)),
            snr_db=float(data.get("snr_db", 20.0)),
            t_sym=float(data.get("t_sym_s", data.get("t_sym", 1.0))),
            zeta=float(data.get("zeta", 1.0)),
            m_max_from_mean_gain=bool(data.get("m_max_from_mean_gain", False)),
        )


@dataclass(frozen=True)
class ParamTemplate:
    """Instance builder: everything but the realized gain and the threshold."""

    p_avg: float
    h_bar: float
    p_sat: float
    p_circuit: float
    sigma2: float
    rules: ParamRules

    def instantiate(self, h: float, q_req: float) -> SystemParams:
        basis = self.h_bar if self.rules.m_max_from_mean_gain else h
        m_max = max(
            1, math.ceil(self.rules.zeta * basis * self.p_avg / self.p_sat)
        )
        return SystemParams(
            h=h,
            p_avg=self.p_avg,
            q_req=q_req,
            p_sat=self.p_sat,
            p_circuit=self.p_circuit,
            var_antenna=self.sigma2,
            var_conv=self.sigma2,
            t_sym=self.rules.t_sym,
            zeta=self.rules.zeta,
            m_max=m_max,
        )


def default_paper_params(
    p_avg: float, h_bar: float, rules: ParamRules | None = None
) -> ParamTemplate:
    """Reference parameter template for a given budget and mean gain.

    With the default rules: ``p_sat = 0.4*h_bar*p_avg``,
    ``p_circuit = 0.3*p_sat``, both noise variances equal to
    ``h_bar*p_avg/10**(snr_db/10)``, unit block time and efficiency, and the
    per-realization circuit cap ``m_max = ceil(zeta*h*p_avg/p_sat)``.
    """
    if not p_avg > 0.0 or not h_bar > 0.0:
        raise ValueError("p_avg and h_bar must be positive")
    rules = rules or ParamRules()
    p_sat = rules.p_sat_over_mean_rx * h_bar * p_avg
    return ParamTemplate(
        p_avg=p_avg,
        h_bar=h_bar,
        p_sat=p_sat,
        p_circuit=rules.p_circuit_over_p_sat * p_sat,
        sigma2=h_bar * p_avg / 10.0 ** (rules.snr_db / 10.0),
        rules=rules,
    )


@dataclass(frozen=True)
class CurveSpec:
    """One curve: scheme kind, power budget, fixed or adaptive circuit count."""

    scheme: str  # "joint" | "ts"
    p_avg: float
    m: int | None = None  # None: adaptive circuit count

    def __post_init__(self):
        if self.scheme not in _SCHEMES:
            raise ConfigError(f"unknown scheme {self.scheme!r}, expected one of {_SCHEMES}")
        if not self.p_avg > 0.0:
            raise ConfigError("curve p_avg_w must be positive")
        if self.m is not None and (int(self.m) != self.m or self.m < 1):
            raise ConfigError("curve m must be a positive integer or 'adaptive'")

    @property
    def label(self) -> str:
        mode = "adaptive" if self.m is None else f"m{self.m}"
        return f"{self.scheme}_{mode}_P{self.p_avg:g}W"

    def to_dict(self) -> dict:
        return {
            "scheme": self.scheme,
            "p_avg_w": self.p_avg,
            "m": "adaptive" if self.m is None else self.m,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "CurveSpec":
        m = data.get("m", "adaptive")
        try:
            return cls(
                scheme=str(data["scheme"]),
                p_avg=float(data["p_avg_w"]),
                m=None if m in (None, "adaptive") else int(m),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"bad curve entry {data!r}: {exc}") from exc


@dataclass(frozen=True)
class SweepConfig:
    """Complete description of one sweep; serializable and reproducible."""

    curves: tuple[CurveSpec, ...]
    seed: int = 0
    n_realizations: int = 10_000
    q_fractions: tuple[float, ...] | None = DEFAULT_Q_FRACTIONS
    q_joules: tuple[float, ...] | None = None
    channel: RicianModel = field(default_factory=RicianModel)
    rules: ParamRules = field(default_factory=ParamRules)
    infeasible_rate_zero: bool = True  # count infeasible draws as rate 0 in the mean
    solver: SolverOptions = field(default_factory=SolverOptions)

    def __post_init__(self):
        if not self.curves:
            raise ConfigError("sweep needs at least one curve")
        if self.n_realizations < 1:
            raise ConfigError("n_realizations must be >= 1")
        if (self.q_fractions is None) == (self.q_joules is None):
            raise ConfigError("exactly one of q_fractions / q_joules must be set")
        grid = self.q_fractions if self.q_fractions is not None else self.q_joules
        if len(grid) == 0:
            raise ConfigError("the energy-threshold grid must be nonempty")
        if any(q < 0.0 for q in grid):
            raise ConfigError("energy thresholds must be nonnegative")
        if list(grid) != sorted(grid):
            raise ConfigError("the energy-threshold grid must be ascending")

    def q_values(self, spec: CurveSpec) -> tuple[float, ...]:
        if self.q_joules is not None:
            return self.q_joules
        cap = self.rules.zeta * mean_gain(self.channel) * spec.p_avg * self.rules.t_sym
        return tuple(f * cap for f in self.q_fractions)

    def to_dict(self) -> dict:
        return {
            "schema_version": 1,
            "seed": self.seed,
            "n_realizations": self.n_realizations,
            "q_fractions": list(self.q_fractions) if self.q_fractions is not None else None,
            "q_joules": list(self.q_joules) if self.q_joules is not None else None,
            "channel": {
                "r_factor": self.channel.r_factor,
                "g_los_power": self.channel.g_los_power,
                "var_scatter": self.channel.var_scatter,
            },
            "rules": self.rules.to_dict(),
            "infeasible_rate_zero": self.infeasible_rate_zero,
            "solver": {
                "alpha_grid_points": self.solver.alpha_grid_points,
                "refine_iterations": self.solver.refine_iterations,
                "feasibility_tol": self.solver.feasibility_tol,
            },
            "curves": [c.to_dict() for c in self.curves],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "SweepConfig":
        try:
            curves = tuple(CurveSpec.from_dict(c) for c in data["curves"])
        except KeyError as exc:
            raise ConfigError(f"sweep config is missing required key: {exc}") from exc
        chan = data.get("channel", {})
        if "g_los_power_dbw" in chan or "var_scatter_dbw" in chan:
            channel = RicianModel.from_dbw(
                r_factor=float(chan.get("r_factor", 2.0)),
                g_los_dbw=float(chan.get("g_los_power_dbw", -30.0)),
                scatter_dbw=float(chan.get("var_scatter_dbw", -30.0)),
            )
        else:
            channel = RicianModel(
                r_factor=float(chan.get("r_factor", 2.0)),
                g_los_power=float(chan.get("g_los_power", 1e-3)),
                var_scatter=float(chan.get("var_scatter", 1e-3)),
            )
        solver_cfg = data.get("solver", {})
        q_fractions = data.get("q_fractions")
        q_joules = data.get("q_joules")
        if q_fractions is None and q_joules is None:
            q_fractions = DEFAULT_Q_FRACTIONS
        try:
            return cls(
                curves=curves,
                seed=int(data.get("seed", 0)),
                n_realizations=int(data.get("n_realizations", 10_000)),
                q_fractions=tuple(float(f) for f in q_fractions) if q_fractions is not None else None,
                q_joules=tuple(float(q) for q in q_joules) if q_joules is not None else None,
                channel=channel,
                rules=ParamRules.from_dict(data.get("rules", {})),
                infeasible_rate_zero=bool(data.get("infeasible_rate_zero", True)),
                solver=SolverOptions(
                    alpha_grid_points=int(solver_cfg.get("alpha_grid_points", 10_001)),
                    refine_iterations=int(solver_cfg.get("refine_iterations", 40)),
                    feasibility_tol=float(solver_cfg.get("feasibility_tol", 1e-9)),
                ),
            )
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"bad sweep config value: {exc}") from exc


@dataclass(frozen=True)
class REPoint:
    """Aggregate at one energy threshold."""

    q: float
    mean_rate: float
    feasible_fraction: float
    mean_m: float


@dataclass(frozen=True)
class RECurve:
    """One scheme's tradeoff curve plus the per-realization samples."""

    scheme: str
    p_avg: float
    points: tuple[REPoint, ...]
    config_fingerprint: str
    rate_samples: np.ndarray | None = field(default=None, repr=False, compare=False)
    m_samples: np.ndarray | None = field(default=None, repr=False, compare=False)


def config_fingerprint(config: SweepConfig) -> str:
    payload = json.dumps(config.to_dict(), sort_keys=True).encode()
    return hashlib.sha256(payload).hexdigest()[:16]


def _solve_one(spec: CurveSpec, params: SystemParams, opts: SolverOptions) -> PolicySolution:
    base = solve_joint if spec.scheme == "joint" else solve_time_switching
    if spec.m is None:
        _, sol = choose_circuit_count(params, opts, solver=base)
        return sol
    return base(params, spec.m, opts)


def run_sweep(config: SweepConfig) -> list[RECurve]:
    """Run every configured curve; deterministic given the seed.

    Infeasible realizations enter the mean as rate 0 (or are excluded when
    ``infeasible_rate_zero`` is off) and are always counted in
    ``feasible_fraction``; ``mean_m`` averages the chosen circuit count over
    the feasible realizations.
    """
    rng = np.random.default_rng(config.seed)
    draws = sample_gains(config.channel, rng, config.n_realizations)
    h_bar = mean_gain(config.channel)
    fingerprint = config_fingerprint(config)

    curves: list[RECurve] = []
    for spec in config.curves:
        template = default_paper_params(spec.p_avg, h_bar, config.rules)
        qs = config.q_values(spec)
        n = config.n_realizations
        rates = np.zeros((len(qs), n))
        ms = np.zeros((len(qs), n), dtype=np.int64)
        feasible = np.zeros((len(qs), n), dtype=bool)
        for j, q in enumerate(qs):
            for i in range(n):
                params = template.instantiate(float(draws[i]), q)
                m_limit = params.m_max if spec.m is None else spec.m
                if q > params.harvest_ceiling(m_limit):
                    continue  # infeasible: solve_feasibility would reject
                try:
                    sol = _solve_one(spec, params, config.solver)
                except InfeasibleError:
                    continue
                rates[j, i] = sol.rate
                ms[j, i] = sol.m
                feasible[j, i] = True

        points = []
        for j, q in enumerate(qs):
            feas = feasible[j]
            n_feas = int(np.count_nonzero(feas))
            if config.infeasible_rate_zero:
                mean_rate = float(np.mean(rates[j]))
            else:
                mean_rate = float(np.mean(rates[j][feas])) if n_feas else 0.0
            mean_m = float(np.mean(ms[j][feas])) if n_feas else 0.0
            points.append(
                REPoint(
                    q=q,
                    mean_rate=mean_rate,
                    feasible_fraction=n_feas / n,
                    mean_m=mean_m,
                )
            )
        curves.append(
            RECurve(
                scheme=spec.label,
                p_avg=spec.p_avg,
                points=tuple(points),
                config_fingerprint=fingerprint,
                rate_samples=rates,
                m_samples=ms,
            )
        )
    return curves


CSV_HEADER = ("scheme", "q_joules", "mean_rate_bpcu", "feasible_fraction", "mean_m")


def export_curves(
    curves: list[RECurve],
    destination: str | Path,
    *,
    config: SweepConfig,
    basename: str = "re_sweep",
) -> tuple[Path, Path]:
    """Write the CSV table and its JSON sidecar; returns both paths.

    The sidecar holds the complete sweep config, the seed, the generator
    name and the software version; loading it back through
    :func:`load_sweep_config` and re-running reproduces the CSV exactly.
    """
    if not curves:
        raise ConfigError("no curves to export")
    out_dir = Path(destination)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
        csv_path = out_dir / f"{basename}.csv"
        json_path = out_dir / f"{basename}.json"
        with open(csv_path, "w", encoding="utf-8", newline="\n") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(CSV_HEADER)
            for curve in curves:
                for point in curve.points:
                    writer.writerow(
                        (
                            curve.scheme,
                            repr(point.q),
                            repr(point.mean_rate),
                            repr(point.feasible_fraction),
                            repr(point.mean_m),
                        )
                    )
        sidecar = {
            "schema_version": 1,
            "generator": GENERATOR_NAME,
            "software_version": __version__,
            "config_fingerprint": config_fingerprint(config),
            "csv_file": csv_path.name,
            "config": config.to_dict(),
        }
        with open(json_path, "w", encoding="utf-8", newline="\n") as fh:
            json.dump(sidecar, fh, indent=2, sort_keys=True)
            fh.write("\n")
    except OSError as exc:
        raise OSError(f"failed writing sweep outputs under {out_dir}: {exc}") from exc
    return csv_path, json_path


def load_sweep_config(path: str | Path) -> SweepConfig:
    """Load a sweep config from YAML/JSON, or from an exported sidecar."""
    import yaml

    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise OSError(f"cannot read sweep config {path}: {exc}") from exc
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"cannot parse sweep config {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError(f"sweep config {path} must be a mapping")
    if "config" in data and "curves" not in data:
        data = data["config"]  # exported sidecar
    return SweepConfig.from_dict(data)
