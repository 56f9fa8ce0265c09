"""Kinematic-wave traffic flow in supply-demand coordinates.

The package models road links by unimodal fundamental diagrams,
represents traffic states as (demand, supply) pairs, solves the
Riemann problem at link boundaries exactly, advances whole roads with
a Godunov finite-volume scheme, and predicts the asymptotic state of
a two-link ring road from its vehicle count alone.

Internal units: veh/km, veh/s, km, s.  Speeds are km/s internally;
the CLI converts to m/s at the boundary.
"""

from .fundamental_diagram import (
    FundamentalDiagram,
    GreenshieldsDiagram,
    KernerKonhauserDiagram,
    TriangularDiagram,
    find_critical,
    golden_section_max,
)
from .godunov_sim import (
    BoundarySpec,
    ConfigError,
    FluxRule,
    InteriorCell,
    SimGrid,
    SimRecord,
    StepConfig,
    StepFunction,
    cfl_number,
    detect_interior_states,
    grid_from_segments,
    interface_fluxes,
    osher_flux,
    run,
    sd_flux,
    step,
)
from .riemann_solver import (
    Family,
    RiemannProblem,
    RiemannSolution,
    Side,
    StationaryPattern,
    Unique,
    Wave,
    WaveDirection,
    WaveKind,
    admissible_interior_down,
    admissible_interior_up,
    admissible_stationary_down,
    admissible_stationary_up,
    boundary_flux,
    classify_wave,
    entropy_flux,
    sample_profile,
    solve,
    stationary_pair_check,
)
from .ring_analysis import (
    BoundarySide,
    FeasibilityCell,
    InteriorSite,
    LinkPattern,
    ProfileSegment,
    RingPrediction,
    RingScenario,
    RingSpec,
    feasibility_table,
    initial_density,
    predict,
    thresholds,
    vehicles_of_initial,
)
from .supply_demand import (
    Regime,
    SDState,
    classify,
    flux_of,
    from_density,
    gamma_of,
    to_density,
)

__version__ = "0.1.0"

__all__ = [
    "FundamentalDiagram",
    "GreenshieldsDiagram",
    "TriangularDiagram",
    "KernerKonhauserDiagram",
    "find_critical",
    "golden_section_max",
    "Regime",
    "SDState",
    "classify",
    "from_density",
    "to_density",
    "flux_of",
    "gamma_of",
    "RiemannProblem",
    "RiemannSolution",
    "Side",
    "StationaryPattern",
    "Unique",
    "Family",
    "Wave",
    "WaveKind",
    "WaveDirection",
    "boundary_flux",
    "classify_wave",
    "solve",
    "sample_profile",
    "entropy_flux",
    "admissible_stationary_up",
    "admissible_stationary_down",
    "admissible_interior_up",
    "admissible_interior_down",
    "stationary_pair_check",
    "BoundarySpec",
    "ConfigError",
    "FluxRule",
    "InteriorCell",
    "SimGrid",
    "SimRecord",
    "StepConfig",
    "StepFunction",
    "cfl_number",
    "detect_interior_states",
    "grid_from_segments",
    "interface_fluxes",
    "osher_flux",
    "run",
    "sd_flux",
    "step",
    "BoundarySide",
    "FeasibilityCell",
    "InteriorSite",
    "LinkPattern",
    "ProfileSegment",
    "RingPrediction",
    "RingScenario",
    "RingSpec",
    "feasibility_table",
    "initial_density",
    "predict",
    "thresholds",
    "vehicles_of_initial",
    "__version__",
]
