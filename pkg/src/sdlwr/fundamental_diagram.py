"""Fundamental diagrams and their demand/supply decomposition.

A fundamental diagram is a unimodal flux-density law q = Q(rho) on
[0, rho_jam] with Q(0) = Q(rho_jam) = 0 and a single maximum, the
capacity C = Q(rho_crit).  On top of Q every diagram exposes

* demand   D(rho) = Q(min(rho, rho_crit))   (nondecreasing, sending flow),
* supply   S(rho) = Q(max(rho, rho_crit))   (nonincreasing, receiving flow),

their branch inverses, and the ratio-parameterised density map

    R(gamma) = D^{-1}(C*gamma)  for gamma <= 1,
               S^{-1}(C/gamma)  for gamma > 1,

so that R(0) = 0, R(1) = rho_crit and R(inf) = rho_jam.

Units are fixed package-wide: density in veh/km, flux in veh/s, length
in km and time in s.  Speeds are therefore km/s; multiply by 1000 for
m/s.  Constructors state the units of every parameter they accept.

Three concrete families are provided: the parabolic Greenshields law,
the triangular/trapezoidal law used by the cell transmission model, and
the Kerner-Konhauser law with its logistic speed function.
"""

from __future__ import annotations

import abc
import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "FLUX_TOL",
    "DENSITY_SLACK",
    "FundamentalDiagram",
    "GreenshieldsDiagram",
    "TriangularDiagram",
    "KernerKonhauserDiagram",
    "find_critical",
    "golden_section_max",
]

# Absolute tolerance for flux comparisons (veh/s).  Every classification
# or tie decision in the package uses this one constant.
FLUX_TOL = 1e-9

# Densities may drift this far beyond [0, rho_jam] before we refuse them;
# smaller excursions are clamped (floating-point drift from the simulator).
DENSITY_SLACK = 1e-9

# Bracket width for golden-section and bisection searches, relative to
# rho_jam.
_SEARCH_TOL = 1e-10

_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0


def _scalarize(x):
    """0-d arrays come back as plain floats; real arrays pass through."""
    arr = np.asarray(x)
    return float(arr) if arr.shape == () else arr


def golden_section_max(f, lo: float, hi: float, tol: float) -> tuple[float, float]:
    """Locate the maximum of a unimodal function on [lo, hi].

    Plain golden-section search, shrinking the bracket until its width
    drops below ``tol``.  Returns (argmax, max).
    """
    a, b = lo, hi
    c = b - _INVPHI * (b - a)
    d = a + _INVPHI * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - _INVPHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INVPHI * (b - a)
            fd = f(d)
    x = 0.5 * (a + b)
    return x, f(x)


class FundamentalDiagram(abc.ABC):
    """Unimodal flux-density law with demand/supply transforms.

    Subclasses set ``rho_jam`` and implement ``flux``; the critical
    point is located in ``__init__`` (closed form where available,
    golden-section search otherwise).  Instances are immutable after
    construction and safe to share between workers.
    """

    #: absolute tolerance on |Q(0)| and |Q(rho_jam)| for this family (veh/s)
    zero_flux_tol: float = FLUX_TOL

    def __init__(self) -> None:
        self.rho_crit, self.capacity = self._locate_critical()
        self._max_speed = self._scan_max_speed()

    # -- family hooks -------------------------------------------------

    @abc.abstractmethod
    def flux_curve(self, rho):
        """Q(rho) without domain checks; accepts scalars or arrays."""

    def _locate_critical(self) -> tuple[float, float]:
        return golden_section_max(
            self.flux_curve, 0.0, self.rho_jam, _SEARCH_TOL * self.rho_jam
        )

    def derivative(self, rho: float, side: int = 0) -> float:
        """Q'(rho) by central finite difference (step 1e-6*rho_jam).

        ``side`` selects the one-sided quotient (-1 from below, +1 from
        above) where it matters; smooth families ignore it beyond domain
        clipping at the ends.
        """
        h = 1e-6 * self.rho_jam
        if side == 0:
            lo = max(rho - h, 0.0)
            hi = min(rho + h, self.rho_jam)
        elif side < 0:
            lo, hi = max(rho - h, 0.0), rho
        else:
            lo, hi = rho, min(rho + h, self.rho_jam)
        return float(self.flux_curve(hi) - self.flux_curve(lo)) / (hi - lo)

    # -- shared interface ---------------------------------------------

    def _check_density(self, rho):
        """Clamp tiny drift beyond [0, rho_jam]; reject real violations."""
        r = np.asarray(rho, dtype=float)
        if np.any(r < -DENSITY_SLACK) or np.any(r > self.rho_jam + DENSITY_SLACK):
            raise ValueError(
                f"density outside [0, {self.rho_jam}] veh/km: {rho!r}"
            )
        return np.clip(r, 0.0, self.rho_jam)

    def flux(self, rho):
        """Q(rho) in veh/s for rho in [0, rho_jam] veh/km."""
        return _scalarize(self.flux_curve(self._check_density(rho)))

    def demand(self, rho):
        """Sending flow D(rho) = Q(min(rho, rho_crit)); nondecreasing."""
        return _scalarize(
            self.flux_curve(np.minimum(self._check_density(rho), self.rho_crit))
        )

    def supply(self, rho):
        """Receiving flow S(rho) = Q(max(rho, rho_crit)); nonincreasing."""
        return _scalarize(
            self.flux_curve(np.maximum(self._check_density(rho), self.rho_crit))
        )

    def speed(self, rho):
        """Mean speed v = Q(rho)/rho in km/s, with the rho -> 0 limit."""
        r = self._check_density(rho)
        tiny = r < 1e-12 * self.rho_jam
        v0 = self.derivative(0.0, side=+1)
        with np.errstate(divide="ignore", invalid="ignore"):
            v = np.where(tiny, v0, self.flux_curve(r) / np.where(tiny, 1.0, r))
        return _scalarize(v)

    def eo_split(self, rho) -> tuple:
        """The (g, h) split of the shifted flux, k = rho_crit - rho.

        With f(k) = C - Q(rho_crit - k), g(k) = f(max(k, 0)) collects the
        increasing part and h(k) = f(min(k, 0)) the decreasing part, so
        that D = C - g and S = C - h.
        """
        k = self.rho_crit - self._check_density(rho)
        f = lambda kk: self.capacity - self.flux_curve(self.rho_crit - kk)
        return _scalarize(f(np.maximum(k, 0.0))), _scalarize(f(np.minimum(k, 0.0)))

    def inv_demand(self, d: float) -> float:
        """The density in [0, rho_crit] with D(rho) = d.

        Predicate bisection for the infimum of {rho : D(rho) >= d}; on a
        trapezoidal plateau at d = C this is the left edge (= rho_crit).
        """
        self._check_flux_level(d)
        lo, hi = 0.0, self.rho_crit
        if self.flux_curve(lo) >= d:
            return lo
        while hi - lo > _SEARCH_TOL * self.rho_jam:
            mid = 0.5 * (lo + hi)
            if self.flux_curve(mid) >= d:
                hi = mid
            else:
                lo = mid
        return 0.5 * (lo + hi)

    def inv_supply(self, s: float) -> float:
        """The density in [rho_crit, rho_jam] with S(rho) = s.

        Supremum of {rho : S(rho) >= s}; at s = C on a trapezoidal
        plateau this is the right edge, keeping the decreasing branch
        inverse continuous.
        """
        self._check_flux_level(s)
        lo, hi = self.rho_crit, self.rho_jam
        if self.flux_curve(hi) >= s:
            return hi
        while hi - lo > _SEARCH_TOL * self.rho_jam:
            mid = 0.5 * (lo + hi)
            if self.flux_curve(mid) >= s:
                lo = mid
            else:
                hi = mid
        return 0.5 * (lo + hi)

    def rho_of_gamma(self, gamma: float) -> float:
        """Density of the state with demand/supply ratio gamma in [0, inf]."""
        if gamma < 0.0 or math.isnan(gamma):
            raise ValueError(f"gamma must be in [0, inf], got {gamma!r}")
        if gamma <= 1.0:
            return self.inv_demand(self.capacity * gamma)
        if math.isinf(gamma):
            return self.inv_supply(0.0)
        return self.inv_supply(self.capacity / gamma)

    def max_wave_speed(self) -> float:
        """max |Q'| over the diagram (km/s); the CFL characteristic speed."""
        return self._max_speed

    # -- internals -----------------------------------------------------

    def _check_flux_level(self, value: float) -> None:
        if not (-FLUX_TOL <= value <= self.capacity + FLUX_TOL):
            raise ValueError(
                f"flux level {value!r} outside [0, capacity={self.capacity}] veh/s"
            )

    def _scan_max_speed(self) -> float:
        rho = np.linspace(0.0, self.rho_jam, 4097)
        h = 1e-6 * self.rho_jam
        lo = np.maximum(rho - h, 0.0)
        hi = np.minimum(rho + h, self.rho_jam)
        slopes = (self.flux_curve(hi) - self.flux_curve(lo)) / (hi - lo)
        return float(np.max(np.abs(slopes)))


@dataclass
class GreenshieldsDiagram(FundamentalDiagram):
    """Parabolic law Q(rho) = v_free * rho * (1 - rho/rho_jam).

    Args:
        v_free: free-flow speed (km/s; divide m/s by 1000).
        rho_jam: jam density (veh/km).

    The critical point is exact: rho_crit = rho_jam/2 and
    capacity = v_free*rho_jam/4.
    """

    v_free: float
    rho_jam: float

    def __post_init__(self):
        if self.v_free <= 0 or self.rho_jam <= 0:
            raise ValueError("v_free and rho_jam must be positive")
        super().__init__()

    def flux_curve(self, rho):
        return self.v_free * rho * (1.0 - rho / self.rho_jam)

    def _locate_critical(self):
        return 0.5 * self.rho_jam, 0.25 * self.v_free * self.rho_jam

    def derivative(self, rho, side=0):
        # exact: Q'(rho) = v_free * (1 - 2 rho / rho_jam)
        return self.v_free * (1.0 - 2.0 * rho / self.rho_jam)

    def _scan_max_speed(self):
        return self.v_free


@dataclass
class TriangularDiagram(FundamentalDiagram):
    """Triangular/trapezoidal law Q = min(v_free*rho, v_cong*(rho_jam-rho), q_max).

    Args:
        v_free: free-flow branch slope (km/s).
        rho_jam: jam density (veh/km).
        q_max: flux ceiling (veh/s); leave infinite for a pure triangle.
        v_cong: congested branch slope magnitude (km/s); defaults to
            v_free (symmetric triangle).

    rho_crit is the left plateau edge.  When the ceiling is inactive the
    slopes satisfy v_cong = v_free*rho_crit/(rho_jam - rho_crit).
    """

    v_free: float
    rho_jam: float
    q_max: float = math.inf
    v_cong: float | None = None

    zero_flux_tol = 0.0  # Q(0) and Q(rho_jam) are exactly zero

    def __post_init__(self):
        if self.v_cong is None:
            self.v_cong = self.v_free
        if self.v_free <= 0 or self.rho_jam <= 0 or self.v_cong <= 0:
            raise ValueError("v_free, v_cong and rho_jam must be positive")
        if self.q_max <= 0:
            raise ValueError("q_max must be positive")
        # apex of the unclipped triangle
        apex = self.v_cong * self.rho_jam / (self.v_free + self.v_cong)
        self._peak = min(self.q_max, self.v_free * apex)
        self._left_edge = self._peak / self.v_free
        self._right_edge = self.rho_jam - self._peak / self.v_cong
        super().__init__()

    def flux_curve(self, rho):
        return np.minimum(
            np.minimum(self.v_free * np.asarray(rho, dtype=float),
                       self.v_cong * (self.rho_jam - np.asarray(rho, dtype=float))),
            self.q_max,
        )

    def _locate_critical(self):
        return self._left_edge, self._peak

    def demand(self, rho):
        # exact sending flow: the CTM form min(v_free*rho, peak)
        return _scalarize(np.minimum(self.v_free * self._check_density(rho), self._peak))

    def supply(self, rho):
        # exact receiving flow: min(v_cong*(rho_jam - rho), peak)
        return _scalarize(
            np.minimum(self.v_cong * (self.rho_jam - self._check_density(rho)),
                       self._peak)
        )

    def derivative(self, rho, side=0):
        """Branch slope; one-sided at the kinks (side < 0 from below)."""
        at_left = abs(rho - self._left_edge) <= 1e-12 * self.rho_jam
        at_right = abs(rho - self._right_edge) <= 1e-12 * self.rho_jam
        if at_left:
            below = side < 0 or (side == 0)
            return self.v_free if below else self._plateau_slope()
        if at_right:
            return self._plateau_slope() if side < 0 or side == 0 else -self.v_cong
        if rho < self._left_edge:
            return self.v_free
        if rho > self._right_edge:
            return -self.v_cong
        return 0.0

    def _plateau_slope(self):
        # degenerate (pure triangle): left and right edges coincide, so the
        # "plateau" slope from above is the congested branch
        if self._right_edge - self._left_edge <= 1e-12 * self.rho_jam:
            return -self.v_cong
        return 0.0

    def _scan_max_speed(self):
        return max(self.v_free, self.v_cong)


# Constants of the Kerner-Konhauser speed function.  The logistic shape
# (0.25, 0.06) and the offset 3.72e-6 place the zero of V just above the
# per-lane jam density.
_KK_GAIN = 5.0461
_KK_MIDPOINT = 0.25
_KK_WIDTH = 0.06
_KK_OFFSET = 3.72e-6


@dataclass
class KernerKonhauserDiagram(FundamentalDiagram):
    """Kerner-Konhauser law for a road with ``lanes`` identical lanes.

    The speed function is

        V(rho) = 5.0461 * [ (1 + exp((rho/(a*rho_jam_lane) - 0.25)/0.06))^-1
                            - 3.72e-6 ] * (unit_len / tau)

    and Q = rho * V.  With the defaults (tau = 5 s, unit_len = 0.028 km,
    rho_jam_lane = 180 veh/km/lane) the free-flow speed is V(0) = 27.83 m/s.
    Doubling ``lanes`` doubles capacity exactly: Q(rho, 2a) = 2 Q(rho/2, a).

    Args:
        lanes: lane count a (dimensionless).
        rho_jam_lane: per-lane jam density (veh/km/lane).
        tau: relaxation time (s).
        unit_len: vehicle-spacing unit l (km); l/tau sets the speed scale.

    Q(rho_jam) is not exactly zero for this family (the logistic offset
    leaves ~3.4e-8 veh/s per lane); ``zero_flux_tol`` reflects that.
    """

    lanes: float = 1.0
    rho_jam_lane: float = 180.0
    tau: float = 5.0
    unit_len: float = 0.028

    zero_flux_tol = 1e-7

    def __post_init__(self):
        if self.lanes <= 0 or self.rho_jam_lane <= 0:
            raise ValueError("lanes and rho_jam_lane must be positive")
        if self.tau <= 0 or self.unit_len <= 0:
            raise ValueError("tau and unit_len must be positive")
        self.rho_jam = self.lanes * self.rho_jam_lane
        super().__init__()

    def speed_curve(self, rho):
        """V(rho) in km/s."""
        x = np.asarray(rho, dtype=float) / self.rho_jam
        logistic = 1.0 / (1.0 + np.exp((x - _KK_MIDPOINT) / _KK_WIDTH))
        return _KK_GAIN * (logistic - _KK_OFFSET) * (self.unit_len / self.tau)

    def flux_curve(self, rho):
        return np.asarray(rho, dtype=float) * self.speed_curve(rho)


def find_critical(fd: FundamentalDiagram) -> tuple[float, float]:
    """(rho_crit, capacity) of a diagram.

    Closed forms for the Greenshields and triangular families; a fresh
    golden-section search (bracket width 1e-10*rho_jam) otherwise.  The
    result is cross-checked against a 1000-point sample of Q; a sample
    exceeding the located maximum beyond tolerance means the curve is
    not unimodal.
    """
    rho_c, cap = fd._locate_critical()
    sample = fd.flux_curve(np.linspace(0.0, fd.rho_jam, 1000))
    if np.max(sample) > cap * (1.0 + 1e-6) + FLUX_TOL:
        raise ValueError("flux profile is not unimodal: sample exceeds located maximum")
    return rho_c, cap
