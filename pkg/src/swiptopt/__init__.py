"""Joint transmit-power allocation and receive power splitting for links
that decode data and harvest energy through saturating rectifier circuits.

The public surface:

* :mod:`swiptopt.ehmodel` - rate and harvested-energy models.
* :mod:`swiptopt.solver` - the closed-form optimum, the split-free baseline,
  feasibility screening and the adaptive circuit-count loop.
* :mod:`swiptopt.oracle` - independent brute-force verification.
* :mod:`swiptopt.channel` - seeded Rician-fading gains.
* :mod:`swiptopt.experiments` - Monte Carlo rate-energy sweeps with
  reproducible CSV/JSON export.
"""

from ._version import __version__
from .channel import ChannelDraw, RicianModel, dbw_to_linear, mean_gain, sample, sample_gains
from .ehmodel import (
    EHModelKind,
    SystemParams,
    harvest,
    harvest_linear,
    harvest_per_circuit,
    net_harvest,
    rate,
)
from .errors import ConfigError, InfeasibleError, NumericalDomainError, SwiptError
from .experiments import (
    DEFAULT_Q_FRACTIONS,
    CurveSpec,
    ParamRules,
    ParamTemplate,
    RECurve,
    REPoint,
    SweepConfig,
    default_paper_params,
    export_curves,
    load_sweep_config,
    run_sweep,
)
from .oracle import OracleConfig, brute_force, optimality_gap_bound, sample_feasible_instance
from .solver import (
    FeasibilityReport,
    PolicySolution,
    SolverOptions,
    alpha_low,
    choose_circuit_count,
    powers_for,
    rho_candidates,
    solve_feasibility,
    solve_joint,
    solve_time_switching,
)

__all__ = [
    "__version__",
    "ChannelDraw",
    "ConfigError",
    "CurveSpec",
    "DEFAULT_Q_FRACTIONS",
    "EHModelKind",
    "FeasibilityReport",
    "InfeasibleError",
    "NumericalDomainError",
    "OracleConfig",
    "ParamRules",
    "ParamTemplate",
    "PolicySolution",
    "RECurve",
    "REPoint",
    "RicianModel",
    "SolverOptions",
    "SweepConfig",
    "SwiptError",
    "SystemParams",
    "alpha_low",
    "brute_force",
    "choose_circuit_count",
    "dbw_to_linear",
    "default_paper_params",
    "export_curves",
    "harvest",
    "harvest_linear",
    "harvest_per_circuit",
    "load_sweep_config",
    "mean_gain",
    "net_harvest",
    "optimality_gap_bound",
    "powers_for",
    "rate",
    "rho_candidates",
    "run_sweep",
    "sample",
    "sample_feasible_instance",
    "sample_gains",
    "solve_feasibility",
    "solve_joint",
    "solve_time_switching",
]
