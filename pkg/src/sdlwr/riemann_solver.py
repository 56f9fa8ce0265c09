"""Riemann solver at a linear boundary between two homogeneous links.

Link 1 occupies x < 0 with diagram fd_up (capacity C1), link 2 occupies
x > 0 with fd_down (capacity C2).  Initial data is one state per link,
given in supply-demand coordinates.  The solution consists of

* the boundary flux q = min(D1, S2),
* stationary states just left/right of x = 0, constant in time,
* interior states at x = 0-+, which differ from the stationary states
  only in the tied case D1 = S2 (then a whole family is admissible),
* at most one wave per link connecting the initial state to the
  stationary one, classified as shock or rarefaction with speeds.

Upstream waves never have positive speed and downstream waves never
negative; the solver proves this case by case, and ``classify_wave``
re-checks it at runtime.

The trichotomy D1 < S2 / D1 > S2 / D1 = S2 uses the package flux
tolerance (1e-9 veh/s) as the tie band.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Union

import numpy as np

from .fundamental_diagram import FLUX_TOL, FundamentalDiagram
from .supply_demand import SDState, classify, from_density, to_density

__all__ = [
    "Side",
    "WaveKind",
    "WaveDirection",
    "Wave",
    "Unique",
    "Family",
    "InteriorSet",
    "RiemannProblem",
    "RiemannSolution",
    "StationaryPattern",
    "boundary_flux",
    "solve",
    "classify_wave",
    "admissible_stationary_up",
    "admissible_stationary_down",
    "admissible_interior_up",
    "admissible_interior_down",
    "entropy_flux",
    "stationary_pair_check",
    "sample_profile",
]


class Side(enum.Enum):
    UPSTREAM = "upstream"
    DOWNSTREAM = "downstream"


class WaveKind(enum.Enum):
    NONE = "none"
    SHOCK = "shock"
    RAREFACTION = "rarefaction"


class WaveDirection(enum.Enum):
    BACKWARD = "backward"
    FORWARD = "forward"
    ZERO = "zero"


@dataclass(frozen=True)
class Wave:
    """A single kinematic wave on one link.

    ``speed_range`` is (s_min, s_max) in km/s: equal entries for a shock
    (the Rankine-Hugoniot speed), characteristic speeds at the two end
    states for a rarefaction.  ``rho_left``/``rho_right`` are the end
    densities, branch-consistent with the wave (congested waves use the
    supply branch even for critical end states).
    """

    kind: WaveKind
    direction: WaveDirection | None = None
    speed_range: tuple[float, float] | None = None
    rho_left: float | None = None
    rho_right: float | None = None

    @property
    def is_none(self) -> bool:
        return self.kind is WaveKind.NONE


@dataclass(frozen=True)
class Unique:
    """Interior set with a single member (the stationary state)."""

    state: SDState

    @property
    def representative(self) -> SDState:
        return self.state

    def contains(self, cand: SDState) -> bool:
        return (
            abs(cand.demand - self.state.demand) <= FLUX_TOL
            and abs(cand.supply - self.state.supply) <= FLUX_TOL
        )


@dataclass(frozen=True)
class Family:
    """Interior set of the tied case: all states with D and S above the
    boundary flux.  ``representative`` is the stationary state, always a
    member."""

    min_demand: float
    min_supply: float
    representative: SDState

    def contains(self, cand: SDState) -> bool:
        return (
            cand.demand >= self.min_demand - FLUX_TOL
            and cand.supply >= self.min_supply - FLUX_TOL
        )


InteriorSet = Union[Unique, Family]


@dataclass(frozen=True)
class RiemannProblem:
    """Initial data: one diagram and one state per link."""

    fd_up: FundamentalDiagram
    fd_down: FundamentalDiagram
    u1: SDState
    u2: SDState

    def __post_init__(self):
        classify(self.u1, self.fd_up.capacity)
        classify(self.u2, self.fd_down.capacity)

    @classmethod
    def from_densities(cls, fd_up, fd_down, rho_up: float, rho_down: float):
        return cls(fd_up, fd_down, from_density(fd_up, rho_up),
                   from_density(fd_down, rho_down))


@dataclass(frozen=True)
class RiemannSolution:
    boundary_flux: float
    stat_up: SDState
    stat_down: SDState
    interior_up: InteriorSet
    interior_down: InteriorSet
    wave_up: Wave
    wave_down: Wave


class StationaryPattern(enum.Enum):
    """Joint regime of an admissible stationary pair."""

    BOTH_UC = "both_uc"
    BOTH_OC = "both_oc"
    UP_UC_DOWN_OC = "up_uc_down_oc"
    FORBIDDEN = "forbidden"


def boundary_flux(p: RiemannProblem) -> float:
    """Flux through x = 0: min(D1, S2).

    Depends only on the upstream demand and downstream supply; the
    upstream supply and downstream demand never enter.
    """
    return min(p.u1.demand, p.u2.supply)


def _states_equal(a: SDState, b: SDState) -> bool:
    return abs(a.demand - b.demand) <= FLUX_TOL and abs(a.supply - b.supply) <= FLUX_TOL


def classify_wave(fd: FundamentalDiagram, left: SDState, right: SDState,
                  side: Side) -> Wave:
    """Classify the homogeneous wave between two states on one link.

    Equal states give no wave.  Otherwise the pair is under-critical
    (S = C both sides: forward waves), congested (D = C both sides:
    backward waves) or a transonic compression (left UC, right OC: a
    shock whose sign follows the flux difference, zero-speed when the
    fluxes tie).  A strictly-congested left state against a strictly
    free right state would be a transonic rarefaction; the solver never
    produces one, so that input raises.

    ``side`` declares which link the wave lives on; a wave moving out of
    its half-line signals a solver bug and also raises.
    """
    if _states_equal(left, right):
        return Wave(WaveKind.NONE)

    cap = fd.capacity
    left_uc = left.is_under_critical(cap)
    left_oc = left.is_over_critical(cap)
    right_uc = right.is_under_critical(cap)
    right_oc = right.is_over_critical(cap)

    if left_uc and right_uc:
        rho_l, rho_r = fd.inv_demand(left.demand), fd.inv_demand(right.demand)
        if left.demand < right.demand:
            wave = _shock(left, right, rho_l, rho_r)
        else:
            wave = _rarefaction(fd, rho_l, rho_r, WaveDirection.FORWARD)
    elif left_oc and right_oc:
        rho_l, rho_r = fd.inv_supply(left.supply), fd.inv_supply(right.supply)
        if left.supply > right.supply:
            wave = _shock(left, right, rho_l, rho_r)
        else:
            wave = _rarefaction(fd, rho_l, rho_r, WaveDirection.BACKWARD)
    elif left_uc and right_oc:
        # transonic compression: free flow running into congestion
        rho_l, rho_r = fd.inv_demand(left.demand), fd.inv_supply(right.supply)
        wave = _shock(left, right, rho_l, rho_r)
    else:
        raise RuntimeError(
            "transonic rarefaction (congested left, free right) cannot occur "
            f"in an admissible solution: left={left}, right={right}"
        )

    _check_side(wave, side, fd)
    return wave


def _shock(left: SDState, right: SDState, rho_l: float, rho_r: float) -> Wave:
    dq = right.flux - left.flux
    sigma = dq / (rho_r - rho_l)
    if abs(dq) <= FLUX_TOL:
        direction = WaveDirection.ZERO
    elif sigma > 0.0:
        direction = WaveDirection.FORWARD
    else:
        direction = WaveDirection.BACKWARD
    return Wave(WaveKind.SHOCK, direction, (sigma, sigma), rho_l, rho_r)


def _rarefaction(fd: FundamentalDiagram, rho_l: float, rho_r: float,
                 direction: WaveDirection) -> Wave:
    # rho_l > rho_r for every rarefaction; characteristic speeds are taken
    # one-sided into the fan so kinked diagrams yield degenerate ranges
    s_lo = fd.derivative(rho_l, side=-1)
    s_hi = fd.derivative(rho_r, side=+1)
    return Wave(WaveKind.RAREFACTION, direction, (s_lo, s_hi), rho_l, rho_r)


def _check_side(wave: Wave, side: Side, fd: FundamentalDiagram) -> None:
    slack = 1e-9 * (1.0 + fd.max_wave_speed())
    s_min, s_max = wave.speed_range
    if side is Side.UPSTREAM and s_max > slack:
        raise RuntimeError(
            f"upstream wave with positive speed {s_max:.6g} km/s (solver bug)"
        )
    if side is Side.DOWNSTREAM and s_min < -slack:
        raise RuntimeError(
            f"downstream wave with negative speed {s_min:.6g} km/s (solver bug)"
        )


def solve(p: RiemannProblem) -> RiemannSolution:
    """Full Riemann solution at the boundary.

    Stationary states follow the sign of D1 - S2; in the tied case the
    interior states are non-unique and come back as one-sided families
    (each assuming the opposite side sits at its stationary state).
    """
    c1, c2 = p.fd_up.capacity, p.fd_down.capacity
    d1, s2 = p.u1.demand, p.u2.supply
    q = min(d1, s2)

    if abs(d1 - s2) <= FLUX_TOL:
        stat_up = SDState(d1, c1)
        stat_down = SDState(c2, s2)
        interior_up: InteriorSet = Family(d1, d1, stat_up)
        interior_down: InteriorSet = Family(s2, s2, stat_down)
    elif d1 < s2:
        stat_up = SDState(d1, c1)
        stat_down = SDState(d1, c2)
        interior_up = Unique(stat_up)
        interior_down = Unique(stat_down)
    else:
        stat_up = SDState(c1, s2)
        stat_down = SDState(c2, s2)
        interior_up = Unique(stat_up)
        interior_down = Unique(stat_down)

    wave_up = classify_wave(p.fd_up, p.u1, stat_up, Side.UPSTREAM)
    wave_down = classify_wave(p.fd_down, stat_down, p.u2, Side.DOWNSTREAM)
    return RiemannSolution(q, stat_up, stat_down, interior_up, interior_down,
                           wave_up, wave_down)


def admissible_stationary_up(u1: SDState, cand: SDState, capacity: float) -> bool:
    """Can ``cand`` be the stationary state left of the boundary?

    Either it keeps the initial demand at full supply, (D1, C1), or it
    is congested at a supply strictly below the initial demand, (C1, S)
    with S < D1.  The borderline S = D1 (a zero-speed shock that never
    detaches) is excluded.
    """
    keeps_demand = (
        abs(cand.demand - u1.demand) <= FLUX_TOL
        and abs(cand.supply - capacity) <= FLUX_TOL
    )
    congested = (
        abs(cand.demand - capacity) <= FLUX_TOL
        and cand.supply < u1.demand - FLUX_TOL
    )
    return keeps_demand or congested


def admissible_stationary_down(u2: SDState, cand: SDState, capacity: float) -> bool:
    """Mirror image for the state right of the boundary: (C2, S2), or
    (D, C2) with D strictly below the initial supply."""
    keeps_supply = (
        abs(cand.supply - u2.supply) <= FLUX_TOL
        and abs(cand.demand - capacity) <= FLUX_TOL
    )
    free = (
        abs(cand.supply - capacity) <= FLUX_TOL
        and cand.demand < u2.supply - FLUX_TOL
    )
    return keeps_supply or free


def admissible_interior_up(stat: SDState, cand: SDState, capacity: float) -> bool:
    """Interior states at x = 0- given the stationary state.

    A strictly congested stationary state pins the interior to itself;
    an under-critical one admits anything whose supply covers the
    stationary demand (the interior occupies zero measure, so only the
    flux it lets through matters).
    """
    if stat.supply < capacity - FLUX_TOL:  # SOC
        return _states_equal(cand, stat)
    return cand.supply >= stat.demand - FLUX_TOL


def admissible_interior_down(stat: SDState, cand: SDState, capacity: float) -> bool:
    """Mirror image at x = 0+: SUC stationary pins the interior, congested
    admits any candidate whose demand covers the stationary supply."""
    if stat.demand < capacity - FLUX_TOL:  # SUC
        return _states_equal(cand, stat)
    return cand.demand >= stat.supply - FLUX_TOL


def entropy_flux(interior_up: SDState, interior_down: SDState) -> float:
    """min(D of the left interior state, S of the right one).

    For any admissible selection out of a Riemann solution this equals
    the boundary flux; a mismatch certifies the pair inadmissible.
    """
    return min(interior_up.demand, interior_down.supply)


def stationary_pair_check(stat_up: SDState, stat_down: SDState,
                          cap_up: float, cap_down: float) -> StationaryPattern:
    """Joint regime of a stationary pair sharing one flux.

    The one impossible combination is a strictly congested upstream link
    feeding a strictly free downstream link: the boundary would have to
    throttle below both capacities with slack on both sides.
    """
    if abs(stat_up.flux - stat_down.flux) > FLUX_TOL:
        raise ValueError(
            f"stationary states carry different fluxes: "
            f"{stat_up.flux:.9g} vs {stat_down.flux:.9g} veh/s"
        )
    up_uc = stat_up.is_under_critical(cap_up)
    up_oc = stat_up.is_over_critical(cap_up)
    down_uc = stat_down.is_under_critical(cap_down)
    down_oc = stat_down.is_over_critical(cap_down)
    if up_uc and down_uc:
        return StationaryPattern.BOTH_UC
    if up_oc and down_oc:
        return StationaryPattern.BOTH_OC
    if up_uc and down_oc:
        return StationaryPattern.UP_UC_DOWN_OC
    return StationaryPattern.FORBIDDEN


def _fan_density(fd: FundamentalDiagram, rho_lo: float, rho_hi: float,
                 xi: float) -> float:
    # invert Q'(rho) = xi on [rho_lo, rho_hi]; Q' is nonincreasing in rho
    lo, hi = rho_lo, rho_hi
    while hi - lo > 1e-10 * fd.rho_jam:
        mid = 0.5 * (lo + hi)
        if fd.derivative(mid) > xi:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def _sample_side(fd, wave: Wave, rho_far, rho_near, xi, toward_boundary):
    """Density at similarity coordinates xi for one link.

    ``rho_far`` is the initial state's density (|x| large), ``rho_near``
    the stationary one.  ``toward_boundary`` is +1 upstream (boundary to
    the right of the link) and -1 downstream.
    """
    out = np.empty_like(xi)
    if wave.is_none:
        out[:] = rho_near
        return out
    s_min, s_max = wave.speed_range
    if toward_boundary > 0:  # upstream: far state left, stationary right
        left_rho, right_rho = rho_far, rho_near
    else:
        left_rho, right_rho = rho_near, rho_far
    fan_lo = min(wave.rho_left, wave.rho_right)
    fan_hi = max(wave.rho_left, wave.rho_right)
    for i, x in enumerate(xi):
        if x < s_min:
            out[i] = left_rho
        elif x > s_max:
            out[i] = right_rho
        elif wave.kind is WaveKind.SHOCK:
            out[i] = right_rho if x >= s_min else left_rho
        else:
            out[i] = _fan_density(fd, fan_lo, fan_hi, x)
    return out


def sample_profile(p: RiemannProblem, xi, sol: RiemannSolution | None = None):
    """Density profile rho(xi) of the self-similar solution, xi = x/t in km/s.

    Negative xi samples link 1 (converging to the upstream stationary
    state as xi -> 0-), nonnegative xi samples link 2.
    """
    if sol is None:
        sol = solve(p)
    xi = np.asarray(xi, dtype=float)
    out = np.empty_like(xi)
    up_mask = xi < 0.0

    rho_u1 = to_density(p.fd_up, p.u1)
    rho_stat_up = (sol.wave_up.rho_right if not sol.wave_up.is_none
                   else to_density(p.fd_up, sol.stat_up))
    rho_u1 = sol.wave_up.rho_left if not sol.wave_up.is_none else rho_u1
    out[up_mask] = _sample_side(p.fd_up, sol.wave_up, rho_u1, rho_stat_up,
                                xi[up_mask], +1)

    rho_u2 = to_density(p.fd_down, p.u2)
    rho_stat_down = (sol.wave_down.rho_left if not sol.wave_down.is_none
                     else to_density(p.fd_down, sol.stat_down))
    rho_u2 = sol.wave_down.rho_right if not sol.wave_down.is_none else rho_u2
    out[~up_mask] = _sample_side(p.fd_down, sol.wave_down, rho_u2,
                                 rho_stat_down, xi[~up_mask], -1)
    return out
