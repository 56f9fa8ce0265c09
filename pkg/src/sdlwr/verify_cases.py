"""Exhaustive checks of the boundary Riemann case grid.

With equal capacities on both links, the regime pairing of the two
initial states leaves exactly six configurations.  Each has a known
stationary pair, boundary flux, and wave pattern; this module
enumerates every configuration with all of its order sub-branches and
compares the solver output against the closed-form answer.  A second
check runs the capacity-step example (free flow into a wider road):
no wave upstream, forward rarefaction downstream.

Used by the CLI ``verify`` subcommand and the acceptance tests.
"""

from __future__ import annotations

from dataclasses import dataclass

from .fundamental_diagram import FundamentalDiagram, GreenshieldsDiagram, KernerKonhauserDiagram
from .riemann_solver import (
    Family,
    RiemannProblem,
    Unique,
    WaveDirection,
    WaveKind,
    solve,
)
from .supply_demand import SDState

# expected wave: None, or (kind, direction)
ExpectedWave = "tuple[WaveKind, WaveDirection] | None"

_FRACTIONS = (0.25, 0.5, 0.75)  # strictly under-capacity flux levels


@dataclass(frozen=True)
class CaseEntry:
    label: str
    u1: SDState
    u2: SDState
    stat_up: SDState
    stat_down: SDState
    q: float
    wave_up: "tuple[WaveKind, WaveDirection] | None"
    wave_down: "tuple[WaveKind, WaveDirection] | None"
    family_interiors: bool = False


def homogeneous_entries(fd: FundamentalDiagram) -> list[CaseEntry]:
    """The full case grid for one diagram used on both links."""
    cap = fd.capacity
    levels = [f * cap for f in _FRACTIONS]
    entries: list[CaseEntry] = []

    def uc(d):
        return SDState(d, cap)

    def oc(s):
        return SDState(cap, s)

    # 1: strictly under-critical into under-critical; the upstream
    # demand passes through and the downstream adjusts by a forward wave
    for d1 in levels:
        for d2 in levels + [cap]:
            if d2 > d1:
                wave = (WaveKind.SHOCK, WaveDirection.FORWARD)
            elif d2 < d1:
                wave = (WaveKind.RAREFACTION, WaveDirection.FORWARD)
            else:
                wave = None
            entries.append(CaseEntry(
                f"case1 d1={d1:g} d2={d2:g}", uc(d1), uc(d2),
                uc(d1), uc(d1), d1, None, wave,
            ))

    # 2: over-critical into under-critical; both links relax to
    # capacity flow through rarefactions
    for s1 in levels + [cap]:
        for d2 in levels + [cap]:
            w1 = None if s1 == cap else (WaveKind.RAREFACTION,
                                         WaveDirection.BACKWARD)
            w2 = None if d2 == cap else (WaveKind.RAREFACTION,
                                         WaveDirection.FORWARD)
            entries.append(CaseEntry(
                f"case2 s1={s1:g} d2={d2:g}", oc(s1), uc(d2),
                SDState(cap, cap), SDState(cap, cap), cap, w1, w2,
                family_interiors=True,
            ))

    # 3: over-critical into strictly over-critical; the downstream
    # supply propagates back
    for s2 in levels:
        for s1 in levels + [cap]:
            if s1 > s2:
                wave = (WaveKind.SHOCK, WaveDirection.BACKWARD)
            elif s1 < s2:
                wave = (WaveKind.RAREFACTION, WaveDirection.BACKWARD)
            else:
                wave = None
            entries.append(CaseEntry(
                f"case3 s1={s1:g} s2={s2:g}", oc(s1), oc(s2),
                oc(s2), oc(s2), s2, wave, None,
            ))

    # 4: strictly under-critical into over-critical with spare
    # downstream supply; the queue is eaten by a forward shock
    for d1, s2 in [(levels[0], levels[1]), (levels[0], levels[2]),
                   (levels[0], cap), (levels[1], levels[2]),
                   (levels[1], cap)]:
        entries.append(CaseEntry(
            f"case4 d1={d1:g} s2={s2:g}", uc(d1), oc(s2),
            uc(d1), uc(d1), d1, None,
            (WaveKind.SHOCK, WaveDirection.FORWARD),
        ))

    # 5: strictly under-critical into over-critical with a binding
    # downstream supply; congestion spills back as a backward shock
    for d1, s2 in [(levels[1], levels[0]), (levels[2], levels[0]),
                   (levels[2], levels[1])]:
        entries.append(CaseEntry(
            f"case5 d1={d1:g} s2={s2:g}", uc(d1), oc(s2),
            oc(s2), oc(s2), s2,
            (WaveKind.SHOCK, WaveDirection.BACKWARD), None,
        ))

    # 6: matched demand and supply; no waves, but the interior states
    # next to the boundary are only pinned one side at a time
    for q in levels:
        entries.append(CaseEntry(
            f"case6 q={q:g}", uc(q), oc(q),
            uc(q), oc(q), q, None, None,
            family_interiors=True,
        ))

    return entries


def _check_wave(label, side, wave, expected) -> str | None:
    if expected is None:
        if not wave.is_none:
            return (f"{label}: expected no wave {side}, got "
                    f"{wave.kind.value} {wave.direction.value}")
        return None
    kind, direction = expected
    if wave.is_none:
        return (f"{label}: expected {direction.value} {kind.value} {side}, "
                f"got none")
    if wave.kind is not kind or wave.direction is not direction:
        return (f"{label}: expected {direction.value} {kind.value} {side}, "
                f"got {wave.direction.value} {wave.kind.value}")
    return None


def check_entry(fd_up: FundamentalDiagram, fd_down: FundamentalDiagram,
                entry: CaseEntry) -> str | None:
    """Solve one entry and compare every advertised output exactly."""
    sol = solve(RiemannProblem(fd_up, fd_down, entry.u1, entry.u2))
    if sol.boundary_flux != entry.q:
        return f"{entry.label}: flux {sol.boundary_flux!r} != {entry.q!r}"
    if sol.stat_up != entry.stat_up:
        return f"{entry.label}: stat_up {sol.stat_up} != {entry.stat_up}"
    if sol.stat_down != entry.stat_down:
        return f"{entry.label}: stat_down {sol.stat_down} != {entry.stat_down}"
    for side, wave, expected in (("upstream", sol.wave_up, entry.wave_up),
                                 ("downstream", sol.wave_down, entry.wave_down)):
        problem = _check_wave(entry.label, side, wave, expected)
        if problem is not None:
            return problem
    for side, interior, stat in (("upstream", sol.interior_up, sol.stat_up),
                                 ("downstream", sol.interior_down,
                                  sol.stat_down)):
        if entry.family_interiors:
            if not isinstance(interior, Family):
                return f"{entry.label}: expected a family interior {side}"
            ok = (interior.min_demand == entry.q
                  and interior.min_supply == entry.q
                  and interior.representative == stat)
            if not ok:
                return f"{entry.label}: wrong family bounds {side}: {interior}"
        else:
            if not isinstance(interior, Unique) or interior.state != stat:
                return f"{entry.label}: interior {side} not pinned to {stat}"
    return None


def check_capacity_step() -> str | None:
    """Free flow into a doubled capacity: the demand passes unchanged
    and only the downstream link adjusts, through a forward
    rarefaction (its demand drops toward the incoming flow)."""
    fd1 = GreenshieldsDiagram(1.0, 4.0)   # capacity 1
    fd2 = GreenshieldsDiagram(1.0, 8.0)   # capacity 2
    u1, u2 = SDState(0.7, 1.0), SDState(0.5, 2.0)
    sol = solve(RiemannProblem(fd1, fd2, u1, u2))
    if sol.stat_up != u1:
        return f"capacity step: stat_up {sol.stat_up} != {u1}"
    if sol.stat_down != SDState(0.7, 2.0):
        return f"capacity step: stat_down {sol.stat_down} != (0.7, 2)"
    if sol.boundary_flux != 0.7:
        return f"capacity step: flux {sol.boundary_flux!r} != 0.7"
    if not sol.wave_up.is_none:
        return "capacity step: unexpected upstream wave"
    w = sol.wave_down
    if (w.is_none or w.kind is not WaveKind.RAREFACTION
            or w.direction is not WaveDirection.FORWARD):
        return "capacity step: downstream wave is not a forward rarefaction"
    return None


def run_case_table() -> str | None:
    """Run the whole grid; None when everything matches."""
    for fd in (GreenshieldsDiagram(1.0, 4.0), KernerKonhauserDiagram()):
        for entry in homogeneous_entries(fd):
            problem = check_entry(fd, fd, entry)
            if problem is not None:
                return f"{type(fd).__name__} {problem}"
    return check_capacity_step()
