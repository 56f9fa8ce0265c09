"""Asymptotic stationary states on a two-link ring road.

The ring has length L; link 1 on [0, L1] is the bottleneck (capacity
C1 strictly below link 2's C2).  Vehicles are conserved, so the total
count N selects the long-time state.  Writing R1, R2 for the two
density maps over the demand/supply ratio, the two thresholds are

    N_a = R1(1) L1 + R2(C1/C2) (L - L1)   (heaviest all-free ring)
    N_c = R1(1) L1 + R2(C2/C1) (L - L1)   (link 2 jammed at flux C1)

and the four regimes are: below N_a both links end up under-critical;
between the thresholds link 1 runs exactly at capacity while link 2
splits into a free head and a congested tail separated by a standing
shock at L2; at N_c link 2 is uniformly congested at flux C1; above it
both links are congested and the common flux drops below C1.

Besides the prediction itself this module computes vehicle counts of
the sinusoid-perturbed initial profiles used in the experiments, and
the feasibility table of all nine (link 1, link 2) regime patterns,
five of which contradict the admissible boundary transitions.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace
from typing import Callable

import numpy as np
from scipy.integrate import simpson

from .fundamental_diagram import FundamentalDiagram
from .riemann_solver import StationaryPattern, stationary_pair_check
from .supply_demand import SDState

__all__ = [
    "RingSpec",
    "RingScenario",
    "BoundarySide",
    "InteriorSite",
    "ProfileSegment",
    "RingPrediction",
    "LinkPattern",
    "FeasibilityCell",
    "thresholds",
    "predict",
    "vehicles_of_initial",
    "initial_density",
    "feasibility_table",
]

# |N - threshold| at or below this (veh) counts as sitting on the
# threshold itself; thresholds are computed, so exact hits are luck.
BOUNDARY_TOL = 1e-6

_FLUX_BISECT_TOL = 1e-10


@dataclass(frozen=True)
class RingSpec:
    """Two-link ring geometry, diagrams, and (optionally) vehicle count.

    Args:
        L: ring length (km).
        L1: length of link 1, the bottleneck (km).
        fd1: diagram of link 1; fd2: diagram of link 2 (larger capacity).
        N: total vehicles on the ring (veh); may be filled in later via
           dataclasses.replace.
    """

    L: float
    L1: float
    fd1: FundamentalDiagram
    fd2: FundamentalDiagram
    N: float | None = None

    def __post_init__(self):
        # L1 == L is the degenerate single-link ring; still useful as a
        # limiting sanity check (both thresholds collapse to R1(1) L).
        if not 0 < self.L1 <= self.L:
            raise ValueError(f"need 0 < L1 <= L, got L1={self.L1}, L={self.L}")
        if self.fd1.capacity >= self.fd2.capacity:
            raise ValueError(
                "link 1 must be the bottleneck: "
                f"C1={self.fd1.capacity:.6g} >= C2={self.fd2.capacity:.6g}"
            )

    @property
    def L2_len(self) -> float:
        return self.L - self.L1

    @property
    def max_vehicles(self) -> float:
        return self.fd1.rho_jam * self.L1 + self.fd2.rho_jam * self.L2_len

    def with_vehicles(self, n: float) -> "RingSpec":
        return replace(self, N=n)


class RingScenario(enum.Enum):
    BOTH_UC = "both_uc"
    CRITICAL_WITH_SS = "critical_with_ss"
    CRITICAL_WITH_SOC = "critical_with_soc"
    BOTH_SOC = "both_soc"


class BoundarySide(enum.Enum):
    """Which side of a position an interior state clings to."""

    MINUS = "-"
    PLUS = "+"


@dataclass(frozen=True)
class InteriorSite:
    """Predicted location of a single-cell interior state."""

    position: float  # km
    side: BoundarySide

    def cell_index(self, dx: float, n_cells: int) -> int:
        """The grid cell adjacent to the site on its side.

        Positions landing within rounding of a cell face snap to the
        face before picking the neighbour.
        """
        p = self.position / dx
        nearest = round(p)
        if abs(p - nearest) < 1e-9 * n_cells:
            p = nearest
        if self.side is BoundarySide.MINUS:
            cell = math.ceil(p) - 1
        else:
            cell = math.floor(p)
        return cell % n_cells


@dataclass(frozen=True)
class ProfileSegment:
    x_start: float
    x_end: float
    rho: float


@dataclass(frozen=True)
class RingPrediction:
    scenario: RingScenario
    q: float
    profile: tuple[ProfileSegment, ...]
    interior_sites: tuple[InteriorSite, ...]
    L2: float | None = None  # shock position, standing-shock scenario only

    def density_at(self, x: float) -> float:
        for seg in self.profile:
            if seg.x_start <= x < seg.x_end:
                return seg.rho
        return self.profile[-1].rho

    def cell_densities(self, n_cells: int, L: float) -> np.ndarray:
        dx = L / n_cells
        return np.array([self.density_at((i + 0.5) * dx) for i in range(n_cells)])

    def vehicle_count(self) -> float:
        return sum(seg.rho * (seg.x_end - seg.x_start) for seg in self.profile)


def thresholds(spec: RingSpec) -> tuple[float, float]:
    """(N_a, N_c): the counts separating the four regimes."""
    c1, c2 = spec.fd1.capacity, spec.fd2.capacity
    r1_crit = spec.fd1.rho_of_gamma(1.0) * spec.L1
    n_a = r1_crit + spec.fd2.rho_of_gamma(c1 / c2) * spec.L2_len
    n_c = r1_crit + spec.fd2.rho_of_gamma(c2 / c1) * spec.L2_len
    return n_a, n_c


def _count_both_uc(spec: RingSpec, q: float) -> float:
    c1, c2 = spec.fd1.capacity, spec.fd2.capacity
    return (spec.fd1.rho_of_gamma(q / c1) * spec.L1
            + spec.fd2.rho_of_gamma(q / c2) * spec.L2_len)


def _count_both_soc(spec: RingSpec, q: float) -> float:
    c1, c2 = spec.fd1.capacity, spec.fd2.capacity
    g1 = math.inf if q == 0.0 else c1 / q
    g2 = math.inf if q == 0.0 else c2 / q
    return (spec.fd1.rho_of_gamma(g1) * spec.L1
            + spec.fd2.rho_of_gamma(g2) * spec.L2_len)


def predict(spec: RingSpec) -> RingPrediction:
    """Asymptotic stationary profile, flux, and interior-state sites.

    The common flux solves the vehicle-count equation of the regime N
    falls in; both bisections shrink the flux bracket to 1e-10*C1.
    Interior states occupy no length, so they never enter the count:
    one can appear at x = L- when N sits exactly on the lower
    threshold, at the standing shock (either face) in between, and at
    x = L1+ when N hits the upper threshold.
    """
    if spec.N is None:
        raise ValueError("RingSpec.N is not set")
    n = spec.N
    if n < -BOUNDARY_TOL or n > spec.max_vehicles + BOUNDARY_TOL:
        raise ValueError(
            f"N={n} veh outside [0, {spec.max_vehicles:.6g}] for this ring"
        )
    c1, c2 = spec.fd1.capacity, spec.fd2.capacity
    n_a, n_c = thresholds(spec)
    tol = _FLUX_BISECT_TOL * c1

    if n <= n_a + BOUNDARY_TOL:
        lo, hi = 0.0, c1
        while hi - lo > tol:
            mid = 0.5 * (lo + hi)
            if _count_both_uc(spec, mid) >= n:
                hi = mid
            else:
                lo = mid
        q = 0.5 * (lo + hi)
        at_boundary = abs(n - n_a) <= BOUNDARY_TOL
        if at_boundary:
            q = c1
        sites = (InteriorSite(spec.L, BoundarySide.MINUS),) if at_boundary else ()
        profile = (
            ProfileSegment(0.0, spec.L1, spec.fd1.rho_of_gamma(q / c1)),
            ProfileSegment(spec.L1, spec.L, spec.fd2.rho_of_gamma(q / c2)),
        )
        return RingPrediction(RingScenario.BOTH_UC, q, profile, sites)

    if n < n_c - BOUNDARY_TOL:
        rho_crit1 = spec.fd1.rho_of_gamma(1.0)
        rho_free = spec.fd2.rho_of_gamma(c1 / c2)
        rho_cong = spec.fd2.rho_of_gamma(c2 / c1)
        l2 = (n - rho_crit1 * spec.L1 + rho_free * spec.L1 - rho_cong * spec.L) \
            / (rho_free - rho_cong)
        profile = (
            ProfileSegment(0.0, spec.L1, rho_crit1),
            ProfileSegment(spec.L1, l2, rho_free),
            ProfileSegment(l2, spec.L, rho_cong),
        )
        sites = (InteriorSite(l2, BoundarySide.MINUS),
                 InteriorSite(l2, BoundarySide.PLUS))
        return RingPrediction(RingScenario.CRITICAL_WITH_SS, c1, profile,
                              sites, L2=l2)

    if abs(n - n_c) <= BOUNDARY_TOL:
        profile = (
            ProfileSegment(0.0, spec.L1, spec.fd1.rho_of_gamma(1.0)),
            ProfileSegment(spec.L1, spec.L, spec.fd2.rho_of_gamma(c2 / c1)),
        )
        sites = (InteriorSite(spec.L1, BoundarySide.PLUS),)
        return RingPrediction(RingScenario.CRITICAL_WITH_SOC, c1, profile, sites)

    lo, hi = 0.0, c1
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if _count_both_soc(spec, mid) >= n:
            lo = mid
        else:
            hi = mid
    q = 0.5 * (lo + hi)
    profile = (
        ProfileSegment(0.0, spec.L1, spec.fd1.rho_of_gamma(c1 / q)),
        ProfileSegment(spec.L1, spec.L, spec.fd2.rho_of_gamma(c2 / q)),
    )
    return RingPrediction(RingScenario.BOTH_SOC, q, profile, ())


def _lane_weight(fd: FundamentalDiagram) -> float:
    return float(getattr(fd, "lanes", 1.0))


def initial_density(spec: RingSpec, rho0: float, amplitude: float = 0.0
                    ) -> Callable[[float], float]:
    """The experiment's initial profile a(x) * (rho0 + amplitude*sin(2 pi x/L)).

    a(x) is each link's lane count (1 for diagrams without lanes), so
    the perturbed base density scales onto wide links the way the
    stationary densities do.
    """
    w1, w2 = _lane_weight(spec.fd1), _lane_weight(spec.fd2)

    def rho(x: float) -> float:
        w = w1 if x < spec.L1 else w2
        return w * (rho0 + amplitude * math.sin(2.0 * math.pi * x / spec.L))

    return rho


def vehicles_of_initial(spec: RingSpec, rho0: float, amplitude: float = 0.0,
                        lane_profile: Callable[[float], float] | None = None
                        ) -> float:
    """Total vehicles of the sinusoid initial condition.

    With the per-link lane weights the sine integrates in closed form;
    an explicit ``lane_profile`` a(x) falls back to Simpson quadrature
    (1e4 panels).  Raises when the profile leaves [0, rho_jam] anywhere.
    """
    if lane_profile is not None:
        x = np.linspace(0.0, spec.L, 10_001)
        base = rho0 + amplitude * np.sin(2.0 * np.pi * x / spec.L)
        lanes = np.array([lane_profile(xx) for xx in x])
        total = lanes * base
        jam = np.where(x < spec.L1, spec.fd1.rho_jam, spec.fd2.rho_jam)
        if np.any(total < -1e-12) or np.any(total > jam + 1e-12):
            raise ValueError("initial profile leaves [0, rho_jam]")
        return float(simpson(total, x=x))

    _check_initial_range(spec, rho0, amplitude)
    w1, w2 = _lane_weight(spec.fd1), _lane_weight(spec.fd2)
    # integral of sin(2 pi x / L) over [0, L1]
    sine_l1 = (spec.L / (2.0 * math.pi)) * (1.0 - math.cos(2.0 * math.pi * spec.L1 / spec.L))
    n1 = w1 * (rho0 * spec.L1 + amplitude * sine_l1)
    n2 = w2 * (rho0 * spec.L2_len - amplitude * sine_l1)
    return n1 + n2


def _check_initial_range(spec: RingSpec, rho0: float, amplitude: float) -> None:
    lo = rho0 - abs(amplitude)
    hi = rho0 + abs(amplitude)
    if lo < 0:
        raise ValueError(f"initial density dips below 0 (rho0={rho0}, "
                         f"amplitude={amplitude})")
    for fd in (spec.fd1, spec.fd2):
        if _lane_weight(fd) * hi > fd.rho_jam:
            raise ValueError(
                f"initial density exceeds rho_jam={fd.rho_jam} veh/km"
            )


class LinkPattern(enum.Enum):
    """Stationary regime of one whole link: uniformly under-critical,
    split by a standing shock, or uniformly strictly congested."""

    UC = "uc"
    SS = "ss"
    SOC = "soc"


@dataclass(frozen=True)
class FeasibilityCell:
    feasible: bool
    scenario: RingScenario | None = None
    reason: str | None = None


def _link_end_states(pattern: LinkPattern, cap: float, q: float
                     ) -> tuple[SDState, SDState]:
    """(start, end) states of a link in the given pattern at flux q."""
    if pattern is LinkPattern.UC:
        return SDState(q, cap), SDState(q, cap)
    if pattern is LinkPattern.SS:
        return SDState(q, cap), SDState(cap, q)
    return SDState(cap, q), SDState(cap, q)


def _pattern_flux_range(p1: LinkPattern, p2: LinkPattern, c1: float):
    """Trial fluxes compatible with the strictness of each pattern.

    A standing shock or a congested link needs q strictly below its own
    capacity, so those patterns exclude q = C1 on link 1 (link 2's
    capacity exceeds C1 and never binds).
    """
    strict = p1 in (LinkPattern.SS, LinkPattern.SOC)
    fluxes = [0.5 * c1]
    if not strict:
        fluxes.append(c1)
    return fluxes


def feasibility_table(spec: RingSpec) -> dict[tuple[LinkPattern, LinkPattern],
                                              FeasibilityCell]:
    """Which of the nine (link 1, link 2) regime patterns can be stationary.

    A pattern pair is feasible when some common flux q <= C1 makes both
    ring boundaries (x = L1 and x = 0) admissible stationary
    transitions.  The check runs the actual pair classifier on witness
    fluxes; infeasible cells record which boundary fails and the flux
    it would need.
    """
    c1, c2 = spec.fd1.capacity, spec.fd2.capacity
    scenario_of = {
        (LinkPattern.UC, LinkPattern.UC): RingScenario.BOTH_UC,
        (LinkPattern.UC, LinkPattern.SS): RingScenario.CRITICAL_WITH_SS,
        (LinkPattern.UC, LinkPattern.SOC): RingScenario.CRITICAL_WITH_SOC,
        (LinkPattern.SOC, LinkPattern.SOC): RingScenario.BOTH_SOC,
    }
    table = {}
    for p1 in LinkPattern:
        for p2 in LinkPattern:
            verdict = None
            for q in _pattern_flux_range(p1, p2, c1):
                start1, end1 = _link_end_states(p1, c1, q)
                start2, end2 = _link_end_states(p2, c2, q)
                at_l1 = stationary_pair_check(end1, start2, c1, c2)
                at_zero = stationary_pair_check(end2, start1, c2, c1)
                if (at_l1 is not StationaryPattern.FORBIDDEN
                        and at_zero is not StationaryPattern.FORBIDDEN):
                    verdict = FeasibilityCell(True, scenario_of.get((p1, p2)))
                    break
                # Either way the forbidden pair would have to carry
                # min(C1, C2) = C1 across the boundary while the pattern
                # itself runs at q < C1.
                if at_l1 is StationaryPattern.FORBIDDEN:
                    reason = (
                        "congested end of link 1 feeding a free start of "
                        "link 2 at x=L1 needs q=C1, which contradicts q<C1"
                    )
                else:
                    reason = (
                        "congested end of link 2 feeding a free start of "
                        "link 1 at x=0 needs q=C1, which contradicts q<C1"
                    )
                verdict = FeasibilityCell(False, None, reason)
            table[(p1, p2)] = verdict
    return table
