"""Command-line front end: YAML scenarios, reports, CSV, verification.

Four subcommands share one config format (see the README for the full
schema; every numeric field carries its unit in the key name):

* ``riemann``      solve one boundary Riemann problem, report states,
                   flux and waves, optionally sample rho(x/t) to CSV.
* ``simulate``     run the finite-volume scheme on a configured road,
                   write snapshot CSV and a summary report.
* ``ring-predict`` evaluate the two-link ring asymptotics.
* ``verify``       run randomized self-checks of the solver stack.

Reports print values to 4 decimal places; CSV files carry 6
significant digits.  Exit codes: 0 success, 1 failed property
(verify), 2 configuration error.
"""

from __future__ import annotations

import argparse
import math
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Callable, Sequence

import numpy as np
import yaml

from .fundamental_diagram import (
    FundamentalDiagram,
    GreenshieldsDiagram,
    KernerKonhauserDiagram,
    TriangularDiagram,
)
from .godunov_sim import (
    BoundarySpec,
    ConfigError,
    FluxRule,
    SimGrid,
    SimRecord,
    StepConfig,
    StepFunction,
    cfl_number,
    detect_interior_states,
    grid_from_segments,
    run,
)
from .riemann_solver import (
    Family,
    RiemannProblem,
    Unique,
    Wave,
    WaveKind,
    sample_profile,
    solve,
)
from .ring_analysis import (
    RingSpec,
    predict,
    thresholds,
    vehicles_of_initial,
)
from .supply_demand import SDState, from_density, to_density

EXIT_OK = 0
EXIT_PROPERTY = 1
EXIT_CONFIG = 2

_KM_S_TO_M_S = 1000.0


def _fmt(x: float) -> str:
    """Report format: 4 decimals, the precision quoted in summaries."""
    if abs(x) < 5e-5:
        x = 0.0  # avoid "-0.0000"
    return f"{x:.4f}"


def _csv_num(x: float) -> str:
    return f"{float(x):.6g}"


# ---------------------------------------------------------------- config

class _Errors:
    """Collects every config problem before failing, with key paths."""

    def __init__(self) -> None:
        self.items: list[str] = []

    def add(self, path: str, msg: str) -> None:
        self.items.append(f"{path}: {msg}")

    def raise_if_any(self) -> None:
        if self.items:
            raise ConfigError("invalid config:\n  " + "\n  ".join(self.items))


def _need_map(node, path, err) -> dict:
    if not isinstance(node, dict):
        err.add(path, f"expected a mapping, got {type(node).__name__}")
        return {}
    return node


def _check_keys(node: dict, allowed: set[str], path: str, err: _Errors) -> None:
    for key in node:
        if key not in allowed:
            err.add(f"{path}.{key}", "unknown key")


def _get_number(node: dict, key: str, path: str, err: _Errors,
                required=True, default=None, positive=False):
    if key not in node:
        if required:
            err.add(f"{path}.{key}", "missing")
        return default
    value = node[key]
    if not isinstance(value, (int, float)) or isinstance(value, bool):
        err.add(f"{path}.{key}", f"expected a number, got {value!r}")
        return default
    if positive and value <= 0:
        err.add(f"{path}.{key}", f"must be positive, got {value}")
        return default
    return float(value)


def _build_diagram(name: str, node: Any, err: _Errors) -> FundamentalDiagram | None:
    path = f"diagrams.{name}"
    node = _need_map(node, path, err)
    family = node.get("family")
    try:
        if family == "greenshields":
            _check_keys(node, {"family", "v_free_m_s", "rho_jam_veh_km"}, path, err)
            v = _get_number(node, "v_free_m_s", path, err, positive=True)
            rj = _get_number(node, "rho_jam_veh_km", path, err, positive=True)
            if v is None or rj is None:
                return None
            return GreenshieldsDiagram(v / _KM_S_TO_M_S, rj)
        if family == "triangular":
            _check_keys(node, {"family", "v_free_m_s", "rho_jam_veh_km",
                               "q_max_veh_s", "v_cong_m_s"}, path, err)
            v = _get_number(node, "v_free_m_s", path, err, positive=True)
            rj = _get_number(node, "rho_jam_veh_km", path, err, positive=True)
            qm = _get_number(node, "q_max_veh_s", path, err, required=False,
                             default=math.inf, positive=True)
            vc = _get_number(node, "v_cong_m_s", path, err, required=False,
                             positive=True)
            if v is None or rj is None:
                return None
            return TriangularDiagram(
                v / _KM_S_TO_M_S, rj, qm,
                None if vc is None else vc / _KM_S_TO_M_S,
            )
        if family == "kerner_konhauser":
            _check_keys(node, {"family", "lanes", "rho_jam_lane_veh_km",
                               "tau_s", "unit_len_km"}, path, err)
            lanes = _get_number(node, "lanes", path, err, required=False,
                                default=1.0, positive=True)
            rj = _get_number(node, "rho_jam_lane_veh_km", path, err,
                             required=False, default=180.0, positive=True)
            tau = _get_number(node, "tau_s", path, err, required=False,
                              default=5.0, positive=True)
            ul = _get_number(node, "unit_len_km", path, err, required=False,
                             default=0.028, positive=True)
            return KernerKonhauserDiagram(lanes, rj, tau, ul)
    except ValueError as exc:
        err.add(path, str(exc))
        return None
    err.add(f"{path}.family",
            f"unknown family {family!r} (greenshields, triangular, "
            f"kerner_konhauser)")
    return None


@dataclass
class RoadConfig:
    topology: str
    dx: float
    segments: list[tuple[str, FundamentalDiagram, int]]  # name, diagram, cells

    @property
    def n_cells(self) -> int:
        return sum(c for _, _, c in self.segments)

    @property
    def length(self) -> float:
        return self.n_cells * self.dx


def _build_road(node, diagrams, err) -> RoadConfig | None:
    path = "road"
    node = _need_map(node, path, err)
    _check_keys(node, {"topology", "dx_km", "segments"}, path, err)
    topology = node.get("topology", "ring")
    if topology not in ("ring", "open"):
        err.add(f"{path}.topology", f"must be ring or open, got {topology!r}")
    dx = _get_number(node, "dx_km", path, err, positive=True)
    segments = node.get("segments")
    if not isinstance(segments, list) or not segments:
        err.add(f"{path}.segments", "expected a nonempty list")
        return None
    built = []
    for i, seg in enumerate(segments):
        spath = f"{path}.segments[{i}]"
        seg = _need_map(seg, spath, err)
        _check_keys(seg, {"diagram", "length_km"}, spath, err)
        name = seg.get("diagram")
        fd = diagrams.get(name)
        if fd is None:
            err.add(f"{spath}.diagram", f"unknown diagram {name!r}")
            continue
        length = _get_number(seg, "length_km", spath, err, positive=True)
        if length is None or dx is None:
            continue
        cells = length / dx
        if abs(cells - round(cells)) > 1e-9 * max(1.0, cells):
            err.add(f"{spath}.length_km",
                    f"{length} km is not a whole number of dx={dx} km cells")
            continue
        built.append((name, fd, int(round(cells))))
    if dx is None or not built:
        return None
    return RoadConfig(topology, dx, built)


@dataclass
class InitialConfig:
    kind: str
    rho: float = 0.0
    amplitude: float = 0.0
    pieces: list[tuple[float, float]] | None = None  # (length_km, rho)


def _build_initial(node, err) -> InitialConfig | None:
    path = "initial"
    node = _need_map(node, path, err)
    kind = node.get("kind")
    if kind == "uniform":
        _check_keys(node, {"kind", "rho_veh_km"}, path, err)
        rho = _get_number(node, "rho_veh_km", path, err)
        return None if rho is None else InitialConfig("uniform", rho)
    if kind == "sinusoid":
        _check_keys(node, {"kind", "rho0_veh_km", "amplitude_veh_km"}, path, err)
        rho0 = _get_number(node, "rho0_veh_km", path, err)
        amp = _get_number(node, "amplitude_veh_km", path, err, required=False,
                          default=0.0)
        return None if rho0 is None else InitialConfig("sinusoid", rho0, amp)
    if kind == "piecewise":
        _check_keys(node, {"kind", "pieces"}, path, err)
        pieces = node.get("pieces")
        if not isinstance(pieces, list) or not pieces:
            err.add(f"{path}.pieces", "expected a nonempty list")
            return None
        built = []
        for i, piece in enumerate(pieces):
            ppath = f"{path}.pieces[{i}]"
            piece = _need_map(piece, ppath, err)
            _check_keys(piece, {"length_km", "rho_veh_km"}, ppath, err)
            length = _get_number(piece, "length_km", ppath, err, positive=True)
            rho = _get_number(piece, "rho_veh_km", ppath, err)
            if length is not None and rho is not None:
                built.append((length, rho))
        return InitialConfig("piecewise", pieces=built)
    err.add(f"{path}.kind",
            f"must be uniform, sinusoid or piecewise, got {kind!r}")
    return None


@dataclass
class NumericsConfig:
    dt: float
    duration: float
    record_every: int
    flux_rule: FluxRule


def _build_numerics(node, err) -> NumericsConfig | None:
    path = "numerics"
    node = _need_map(node, path, err)
    _check_keys(node, {"dt_s", "duration_s", "record_every", "flux_rule"},
                path, err)
    dt = _get_number(node, "dt_s", path, err, positive=True)
    duration = _get_number(node, "duration_s", path, err)
    if duration is not None and duration < 0:
        err.add(f"{path}.duration_s", "must be nonnegative")
        duration = None
    record = node.get("record_every", 0)
    if not isinstance(record, int) or isinstance(record, bool) or record < 0:
        err.add(f"{path}.record_every", f"expected an integer >= 0, got {record!r}")
        record = 0
    rule_name = node.get("flux_rule", "supply_demand")
    rule = None
    try:
        rule = FluxRule(rule_name)
    except ValueError:
        err.add(f"{path}.flux_rule",
                f"must be supply_demand or osher, got {rule_name!r}")
    if dt is None or duration is None or rule is None:
        return None
    # record_every 0 means snapshots only at start and end
    steps = max(1, int(round(duration / dt)))
    return NumericsConfig(dt, duration, record if record > 0 else steps, rule)


def _build_step_fn(node, path, err) -> Callable[[float], float] | None:
    """A boundary flow: a constant or a list of {t_s, value_veh_s}."""
    if isinstance(node, (int, float)) and not isinstance(node, bool):
        return StepFunction((0.0,), (float(node),))
    if isinstance(node, list) and node:
        times, values = [], []
        for i, pt in enumerate(node):
            ppath = f"{path}[{i}]"
            pt = _need_map(pt, ppath, err)
            _check_keys(pt, {"t_s", "value_veh_s"}, ppath, err)
            t = _get_number(pt, "t_s", ppath, err)
            v = _get_number(pt, "value_veh_s", ppath, err)
            if t is not None and v is not None:
                times.append(t)
                values.append(v)
        if times and times[0] != 0.0:
            err.add(path, "first breakpoint must start at t_s=0")
        try:
            return StepFunction(tuple(times), tuple(values))
        except ConfigError as exc:
            err.add(path, str(exc))
            return None
    err.add(path, "expected a number or a list of {t_s, value_veh_s}")
    return None


def _build_boundaries(node, err) -> BoundarySpec | None:
    path = "boundaries"
    node = _need_map(node, path, err)
    _check_keys(node, {"left_demand_veh_s", "right_supply_veh_s"}, path, err)
    left = right = None
    if "left_demand_veh_s" in node:
        left = _build_step_fn(node["left_demand_veh_s"],
                              f"{path}.left_demand_veh_s", err)
    else:
        err.add(f"{path}.left_demand_veh_s", "missing")
    if "right_supply_veh_s" in node:
        right = _build_step_fn(node["right_supply_veh_s"],
                               f"{path}.right_supply_veh_s", err)
    else:
        err.add(f"{path}.right_supply_veh_s", "missing")
    if left is None or right is None:
        return None
    return BoundarySpec(left, right)


def _build_state(node, diagrams, path, err) -> tuple[FundamentalDiagram, SDState] | None:
    node = _need_map(node, path, err)
    _check_keys(node, {"diagram", "rho_veh_km", "demand_veh_s", "supply_veh_s"},
                path, err)
    fd = diagrams.get(node.get("diagram"))
    if fd is None:
        err.add(f"{path}.diagram", f"unknown diagram {node.get('diagram')!r}")
        return None
    has_rho = "rho_veh_km" in node
    has_ds = "demand_veh_s" in node or "supply_veh_s" in node
    if has_rho == has_ds:
        err.add(path, "give either rho_veh_km or demand_veh_s+supply_veh_s")
        return None
    try:
        if has_rho:
            rho = _get_number(node, "rho_veh_km", path, err)
            if rho is None:
                return None
            return fd, from_density(fd, rho)
        d = _get_number(node, "demand_veh_s", path, err)
        s = _get_number(node, "supply_veh_s", path, err)
        if d is None or s is None:
            return None
        state = SDState(d, s)
        to_density(fd, state)  # validates the state against the diagram
        return fd, state
    except ValueError as exc:
        err.add(path, str(exc))
        return None


@dataclass
class RiemannConfig:
    fd_up: FundamentalDiagram
    fd_down: FundamentalDiagram
    u1: SDState
    u2: SDState
    profile: tuple[float, float, int] | None  # xi min/max (m/s), count


def _build_riemann(node, diagrams, err) -> RiemannConfig | None:
    path = "riemann"
    node = _need_map(node, path, err)
    _check_keys(node, {"upstream", "downstream", "profile"}, path, err)
    up = down = None
    if "upstream" in node:
        up = _build_state(node["upstream"], diagrams, f"{path}.upstream", err)
    else:
        err.add(f"{path}.upstream", "missing")
    if "downstream" in node:
        down = _build_state(node["downstream"], diagrams,
                            f"{path}.downstream", err)
    else:
        err.add(f"{path}.downstream", "missing")
    profile = None
    if "profile" in node:
        ppath = f"{path}.profile"
        pnode = _need_map(node["profile"], ppath, err)
        _check_keys(pnode, {"xi_min_m_s", "xi_max_m_s", "count"}, ppath, err)
        lo = _get_number(pnode, "xi_min_m_s", ppath, err)
        hi = _get_number(pnode, "xi_max_m_s", ppath, err)
        count = pnode.get("count", 101)
        if not isinstance(count, int) or isinstance(count, bool) or count < 2:
            err.add(f"{ppath}.count", f"expected an integer >= 2, got {count!r}")
            count = None
        if lo is not None and hi is not None and count and lo >= hi:
            err.add(ppath, "xi_min_m_s must be below xi_max_m_s")
        elif lo is not None and hi is not None and count:
            profile = (lo, hi, count)
    if up is None or down is None:
        return None
    return RiemannConfig(up[0], down[0], up[1], down[1], profile)


@dataclass
class ScenarioConfig:
    diagrams: dict[str, FundamentalDiagram]
    road: RoadConfig | None
    initial: InitialConfig | None
    numerics: NumericsConfig | None
    boundaries: BoundarySpec | None
    riemann: RiemannConfig | None
    ring_vehicles: float | None
    outputs: dict[str, str]


_TOP_KEYS = {"diagrams", "road", "initial", "numerics", "boundaries",
             "riemann", "ring", "outputs"}


def parse_config(text: str, override_cfl: bool = False) -> ScenarioConfig:
    """Parse and validate a YAML scenario.

    Collects every problem (unknown keys, wrong types, unresolved
    diagram references, CFL violations) and raises one ConfigError
    listing all of them with their key paths.
    """
    err = _Errors()
    try:
        raw = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"invalid config: YAML parse error: {exc}") from exc
    if raw is None:
        raw = {}
    raw = _need_map(raw, "<top>", err)
    _check_keys(raw, _TOP_KEYS, "<top>", err)

    diagrams: dict[str, FundamentalDiagram] = {}
    dnode = raw.get("diagrams")
    if not isinstance(dnode, dict) or not dnode:
        err.add("diagrams", "at least one diagram is required")
    else:
        for name, sub in dnode.items():
            fd = _build_diagram(name, sub, err)
            if fd is not None:
                diagrams[name] = fd

    road = _build_road(raw["road"], diagrams, err) if "road" in raw else None
    initial = _build_initial(raw["initial"], err) if "initial" in raw else None
    numerics = _build_numerics(raw["numerics"], err) if "numerics" in raw else None
    boundaries = (_build_boundaries(raw["boundaries"], err)
                  if "boundaries" in raw else None)
    riemann = (_build_riemann(raw["riemann"], diagrams, err)
               if "riemann" in raw else None)

    ring_vehicles = None
    if "ring" in raw:
        rnode = _need_map(raw["ring"], "ring", err)
        _check_keys(rnode, {"vehicles_veh"}, "ring", err)
        ring_vehicles = _get_number(rnode, "vehicles_veh", "ring", err,
                                    required=False)

    outputs = {}
    if "outputs" in raw:
        onode = _need_map(raw["outputs"], "outputs", err)
        _check_keys(onode, {"csv", "report"}, "outputs", err)
        for key in ("csv", "report"):
            if key in onode:
                if not isinstance(onode[key], str) or not onode[key]:
                    err.add(f"outputs.{key}", "expected a nonempty file name")
                else:
                    outputs[key] = onode[key]

    if road is not None and road.topology == "open" and "boundaries" not in raw:
        err.add("boundaries", "required for open topology")
    if road is not None and road.topology == "ring" and boundaries is not None:
        err.add("boundaries", "a ring road takes no boundary data")

    # CFL precheck: the scheme is only stable when the fastest wave
    # crosses less than one cell per step
    if road is not None and numerics is not None and not override_cfl:
        vmax = max(fd.max_wave_speed() for _, fd, _ in road.segments)
        nu = vmax * numerics.dt / road.dx
        if nu > 0.95:
            err.add("numerics.dt_s",
                    f"CFL number {nu:.2f} exceeds 0.95 "
                    f"(max wave speed {vmax * _KM_S_TO_M_S:.4f} m/s, "
                    f"dx={road.dx} km); reduce dt_s or pass --override-cfl")

    err.raise_if_any()
    return ScenarioConfig(diagrams, road, initial, numerics, boundaries,
                          riemann, ring_vehicles, outputs)


# ------------------------------------------------------------- building

def _initial_density_fn(cfg: ScenarioConfig) -> Callable[[float], float]:
    road, initial = cfg.road, cfg.initial
    if initial.kind == "uniform":
        return lambda x: initial.rho
    if initial.kind == "sinusoid":
        length = road.length
        bounds = np.cumsum([0.0] + [c * road.dx for _, _, c in road.segments])
        weights = [float(getattr(fd, "lanes", 1.0)) for _, fd, _ in road.segments]

        def rho(x: float) -> float:
            i = min(np.searchsorted(bounds, x, side="right") - 1,
                    len(weights) - 1)
            return weights[i] * (initial.rho + initial.amplitude
                                 * math.sin(2.0 * math.pi * x / length))

        return rho
    # piecewise
    edges = np.cumsum([0.0] + [length for length, _ in initial.pieces])
    values = [rho for _, rho in initial.pieces]

    def rho(x: float) -> float:
        i = min(np.searchsorted(edges, x, side="right") - 1, len(values) - 1)
        return values[i]

    return rho


def _build_grid(cfg: ScenarioConfig) -> SimGrid:
    if cfg.road is None or cfg.initial is None:
        raise ConfigError("simulate needs road and initial sections")
    if cfg.initial.kind == "piecewise":
        total = sum(length for length, _ in cfg.initial.pieces)
        if abs(total - cfg.road.length) > 1e-9 * cfg.road.length:
            raise ConfigError(
                f"initial.pieces cover {total} km but the road is "
                f"{cfg.road.length} km"
            )
    segs = [(fd, cells) for _, fd, cells in cfg.road.segments]
    boundaries = cfg.boundaries if cfg.road.topology == "open" else None
    return grid_from_segments(segs, cfg.road.dx, _initial_density_fn(cfg),
                              boundaries)


def _ring_spec(cfg: ScenarioConfig) -> RingSpec:
    road = cfg.road
    if road is None:
        raise ConfigError("ring-predict needs a road section")
    if road.topology != "ring" or len(road.segments) != 2:
        raise ConfigError("ring-predict needs a ring road with exactly two "
                          "segments (bottleneck first)")
    (_, fd1, c1), (_, fd2, _) = road.segments
    spec = RingSpec(road.length, c1 * road.dx, fd1, fd2)
    if cfg.ring_vehicles is not None:
        return spec.with_vehicles(cfg.ring_vehicles)
    if cfg.initial is None:
        raise ConfigError("ring-predict needs ring.vehicles_veh or an "
                          "initial section")
    if cfg.initial.kind == "sinusoid":
        n = vehicles_of_initial(spec, cfg.initial.rho, cfg.initial.amplitude)
    else:
        grid = _build_grid(cfg)
        n = grid.total_vehicles()
    return spec.with_vehicles(n)


# -------------------------------------------------------------- reports

def _describe_interior(interior) -> str:
    if isinstance(interior, Unique):
        st = interior.state
        return (f"unique (D={_fmt(st.demand)}, S={_fmt(st.supply)}) veh/s")
    assert isinstance(interior, Family)
    rep = interior.representative
    return (f"family D>={_fmt(interior.min_demand)}, "
            f"S>={_fmt(interior.min_supply)} veh/s "
            f"(representative D={_fmt(rep.demand)}, S={_fmt(rep.supply)})")


def _describe_wave(wave: Wave) -> str:
    if wave.is_none:
        return "none"
    s_min, s_max = wave.speed_range
    if wave.kind is WaveKind.SHOCK:
        return (f"{wave.direction.value} shock at "
                f"{_fmt(s_min * _KM_S_TO_M_S)} m/s")
    return (f"{wave.direction.value} rarefaction, speeds "
            f"[{_fmt(s_min * _KM_S_TO_M_S)}, {_fmt(s_max * _KM_S_TO_M_S)}] m/s")


def _write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)


def cmd_riemann(cfg: ScenarioConfig, out_dir: Path) -> int:
    if cfg.riemann is None:
        raise ConfigError("riemann section missing")
    rc = cfg.riemann
    problem = RiemannProblem(rc.fd_up, rc.fd_down, rc.u1, rc.u2)
    sol = solve(problem)

    lines = [
        "riemann solution at the link boundary",
        f"  upstream capacity   C1 = {_fmt(rc.fd_up.capacity)} veh/s",
        f"  downstream capacity C2 = {_fmt(rc.fd_down.capacity)} veh/s",
        f"  initial upstream    (D1={_fmt(rc.u1.demand)}, "
        f"S1={_fmt(rc.u1.supply)}) veh/s",
        f"  initial downstream  (D2={_fmt(rc.u2.demand)}, "
        f"S2={_fmt(rc.u2.supply)}) veh/s",
        f"  boundary flux q = {_fmt(sol.boundary_flux)} veh/s",
        f"  stationary up   (D={_fmt(sol.stat_up.demand)}, "
        f"S={_fmt(sol.stat_up.supply)}) veh/s, "
        f"rho={_fmt(to_density(rc.fd_up, sol.stat_up))} veh/km",
        f"  stationary down (D={_fmt(sol.stat_down.demand)}, "
        f"S={_fmt(sol.stat_down.supply)}) veh/s, "
        f"rho={_fmt(to_density(rc.fd_down, sol.stat_down))} veh/km",
        f"  interior up:   {_describe_interior(sol.interior_up)}",
        f"  interior down: {_describe_interior(sol.interior_down)}",
        f"  wave on link 1: {_describe_wave(sol.wave_up)}",
        f"  wave on link 2: {_describe_wave(sol.wave_down)}",
    ]
    report = "\n".join(lines) + "\n"
    sys.stdout.write(report)
    if "report" in cfg.outputs:
        _write(out_dir / cfg.outputs["report"], report)

    if rc.profile is not None:
        lo, hi, count = rc.profile
        xi = np.linspace(lo / _KM_S_TO_M_S, hi / _KM_S_TO_M_S, count)
        rho = sample_profile(problem, xi, sol)
        rows = ["xi_m_s,rho_veh_km"]
        rows += [f"{_csv_num(x * _KM_S_TO_M_S)},{_csv_num(r)}"
                 for x, r in zip(xi, rho)]
        name = cfg.outputs.get("csv", "riemann_profile.csv")
        _write(out_dir / name, "\n".join(rows) + "\n")
    return EXIT_OK


def _snapshot_csv(record: SimRecord) -> str:
    grid = record.grid
    x = grid.x_centers
    rows = ["t,cell,x_km,rho_veh_km,v_m_s,q_veh_s"]
    for k, t in enumerate(record.times):
        for i in range(grid.n):
            rows.append(
                f"{_csv_num(t)},{i},{_csv_num(x[i])},"
                f"{_csv_num(record.rho[k, i])},"
                f"{_csv_num(record.v[k, i] * _KM_S_TO_M_S)},"
                f"{_csv_num(record.q[k, i])}"
            )
    return "\n".join(rows) + "\n"


def cmd_simulate(cfg: ScenarioConfig, out_dir: Path,
                 override_cfl: bool = False) -> int:
    if cfg.numerics is None:
        raise ConfigError("simulate needs a numerics section")
    grid = _build_grid(cfg)
    num = cfg.numerics
    step_cfg = StepConfig(num.dt, num.flux_rule, allow_high_cfl=override_cfl)
    record = run(grid, step_cfg, num.duration, num.record_every)

    drift = record.conservation_drift()
    lines = [
        "simulation summary",
        f"  cells: {grid.n}, dx = {grid.dx:g} km, "
        f"topology: {'ring' if grid.is_ring else 'open'}",
        f"  dt = {num.dt:g} s, steps = {len(record.times) - 1} recorded of "
        f"{int(round(num.duration / num.dt))}, "
        f"CFL = {cfl_number(grid, num.dt):.2f}",
        f"  vehicles: initial {_fmt(record.grid.total_vehicles(record.rho[0]))}"
        f" veh, final {_fmt(record.grid.total_vehicles(record.rho[-1]))} veh",
        f"  inflow {_fmt(record.inflow)} veh, outflow {_fmt(record.outflow)} veh",
        f"  conservation drift: {drift:.3e} (relative)",
        f"  convergence metric: {record.convergence_metric:.3e} veh/km per step",
    ]
    if record.converged:
        cells = detect_interior_states(record)
        if cells:
            for c in cells:
                lines.append(
                    f"  interior state: cell {c.cell} "
                    f"(x = {_fmt((c.cell + 0.5) * grid.dx)} km), "
                    f"rho = {_fmt(c.density)} veh/km, "
                    f"q = {_fmt(c.flux)} veh/s"
                )
        else:
            lines.append("  interior states: none detected")
    else:
        lines.append("  interior states: run not steady, detection skipped")
    report = "\n".join(lines) + "\n"
    sys.stdout.write(report)
    if "report" in cfg.outputs:
        _write(out_dir / cfg.outputs["report"], report)
    name = cfg.outputs.get("csv", "simulate.csv")
    _write(out_dir / name, _snapshot_csv(record))
    return EXIT_OK


def cmd_ring_predict(cfg: ScenarioConfig, out_dir: Path) -> int:
    spec = _ring_spec(cfg)
    n_a, n_c = thresholds(spec)
    pred = predict(spec)

    lines = [
        "two-link ring asymptotic state",
        f"  L = {spec.L:g} km, L1 = {spec.L1:g} km",
        f"  C1 = {_fmt(spec.fd1.capacity)} veh/s, "
        f"C2 = {_fmt(spec.fd2.capacity)} veh/s",
        f"  thresholds: N_a = {_fmt(n_a)} veh, N_c = {_fmt(n_c)} veh",
        f"  N = {_fmt(spec.N)} veh",
        f"  scenario: {pred.scenario.value}",
        f"  flux q = {_fmt(pred.q)} veh/s",
    ]
    if pred.L2 is not None:
        lines.append(f"  standing shock at L2 = {_fmt(pred.L2)} km")
    for seg in pred.profile:
        lines.append(
            f"  [{_fmt(seg.x_start)}, {_fmt(seg.x_end)}] km: "
            f"rho = {_fmt(seg.rho)} veh/km"
        )
    if pred.interior_sites:
        for site in pred.interior_sites:
            lines.append(
                f"  interior state possible at x = "
                f"{_fmt(site.position)}{site.side.value}"
            )
    else:
        lines.append("  interior states: none")
    report = "\n".join(lines) + "\n"
    sys.stdout.write(report)
    if "report" in cfg.outputs:
        _write(out_dir / cfg.outputs["report"], report)

    if cfg.road is not None and "csv" in cfg.outputs:
        n = cfg.road.n_cells
        rho = pred.cell_densities(n, spec.L)
        rows = ["cell,x_km,rho_veh_km"]
        rows += [f"{i},{_csv_num((i + 0.5) * cfg.road.dx)},{_csv_num(rho[i])}"
                 for i in range(n)]
        _write(out_dir / cfg.outputs["csv"], "\n".join(rows) + "\n")
    return EXIT_OK


# --------------------------------------------------------------- verify

def _random_state(rng, fd) -> SDState:
    return from_density(fd, rng.uniform(0.0, fd.rho_jam))


def _verify_families() -> list[FundamentalDiagram]:
    return [
        GreenshieldsDiagram(27.8 / _KM_S_TO_M_S, 120.0),
        TriangularDiagram(30.0 / _KM_S_TO_M_S, 150.0, q_max=0.6,
                          v_cong=6.0 / _KM_S_TO_M_S),
        KernerKonhauserDiagram(lanes=1.0),
        KernerKonhauserDiagram(lanes=2.0),
    ]


def _check_osher(rng, trials) -> str | None:
    from .godunov_sim import osher_flux, sd_flux
    for fd in _verify_families():
        for _ in range(trials):
            a = rng.uniform(0.0, fd.rho_jam)
            b = rng.uniform(0.0, fd.rho_jam)
            got = sd_flux(fd, a, fd, b)
            want = osher_flux(fd, a, b)
            tol = 1e-12 * max(abs(want), 1e-30)
            if abs(got - want) > tol:
                return (f"sd_flux {got!r} != osher {want!r} at "
                        f"rho=({a:.6g},{b:.6g}) on {type(fd).__name__}")
    return None


def _check_flux_formula(rng, trials) -> str | None:
    fams = _verify_families()
    for _ in range(trials):
        fd1, fd2 = rng.choice(len(fams), size=2)
        fd1, fd2 = fams[fd1], fams[fd2]
        p = RiemannProblem(fd1, fd2, _random_state(rng, fd1),
                           _random_state(rng, fd2))
        if solve(p).boundary_flux != min(p.u1.demand, p.u2.supply):
            return f"flux formula broken for {p.u1}, {p.u2}"
    return None


def _check_independence(rng, trials) -> str | None:
    fams = _verify_families()
    for _ in range(trials):
        fd1, fd2 = fams[rng.choice(len(fams))], fams[rng.choice(len(fams))]
        p = RiemannProblem(fd1, fd2, _random_state(rng, fd1),
                           _random_state(rng, fd2))
        base = solve(p)
        u1, u2 = p.u1, p.u2
        if u1.is_over_critical(fd1.capacity):
            u1 = SDState(u1.demand, rng.uniform(0.0, fd1.capacity))
        if u2.is_under_critical(fd2.capacity):
            u2 = SDState(rng.uniform(0.0, fd2.capacity), u2.supply)
        alt = solve(RiemannProblem(fd1, fd2, u1, u2))
        if (alt.boundary_flux != base.boundary_flux
                or alt.stat_up != base.stat_up
                or alt.stat_down != base.stat_down):
            return f"solution changed under S1/D2 perturbation of {p.u1}, {p.u2}"
    return None


def _check_idempotence(rng, trials) -> str | None:
    fams = _verify_families()
    for _ in range(trials):
        fd1, fd2 = fams[rng.choice(len(fams))], fams[rng.choice(len(fams))]
        p = RiemannProblem(fd1, fd2, _random_state(rng, fd1),
                           _random_state(rng, fd2))
        sol = solve(p)
        again = solve(RiemannProblem(fd1, fd2, sol.stat_up, sol.stat_down))
        if not (again.stat_up == sol.stat_up
                and again.stat_down == sol.stat_down
                and again.wave_up.is_none and again.wave_down.is_none):
            return f"stationary pair not a fixed point for {p.u1}, {p.u2}"
    return None


def _check_case_table(rng, trials) -> str | None:
    from .verify_cases import run_case_table
    return run_case_table()


def _check_conservation(rng, trials) -> str | None:
    fd = GreenshieldsDiagram(1.0, 4.0)
    rho0 = rng.uniform(0.2, 3.8, size=16)
    grid = SimGrid([fd] * 16, rho0, dx=1.0)
    cfg = StepConfig(dt=0.5)
    steps = min(max(trials, 1) * 10, 20_000)
    record = run(grid, cfg, duration=steps * cfg.dt, record_every=steps)
    drift = record.conservation_drift()
    if drift > 1e-9:
        return f"ring conservation drift {drift:.3e} over {steps} steps"
    return None


def cmd_verify(seed: int, trials: int) -> int:
    """Randomized self-checks; returns the exit code."""
    checks: list[tuple[str, Callable]] = [
        ("osher-equivalence", _check_osher),
        ("boundary-flux-formula", _check_flux_formula),
        ("s1-d2-independence", _check_independence),
        ("stationary-idempotence", _check_idempotence),
        ("homogeneous-case-table", _check_case_table),
        ("ring-conservation", _check_conservation),
    ]
    if trials <= 0:
        sys.stdout.write("verify: 0 trials requested, nothing to run: PASS\n")
        return EXIT_OK
    rng = np.random.default_rng(seed)
    failed = False
    for name, fn in checks:
        problem = fn(rng, trials)
        if problem is None:
            sys.stdout.write(f"PASS {name}\n")
        else:
            sys.stdout.write(f"FAIL {name}: {problem}\n")
            failed = True
    return EXIT_PROPERTY if failed else EXIT_OK


# ----------------------------------------------------------------- main

def _load_config(path: str | None, override_cfl: bool) -> ScenarioConfig:
    if path is None:
        raise ConfigError("--config is required for this subcommand")
    p = Path(path)
    try:
        text = p.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {p}: {exc}") from exc
    return parse_config(text, override_cfl)


def main(argv: Sequence[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="sdlwr",
        description="kinematic-wave traffic toolkit in supply-demand space",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("riemann", "simulate", "ring-predict"):
        sp = sub.add_parser(name)
        sp.add_argument("--config", required=False)
        sp.add_argument("--out", default=".")
        sp.add_argument("--override-cfl", action="store_true")
    vp = sub.add_parser("verify")
    vp.add_argument("--seed", type=int, default=0)
    vp.add_argument("--trials", type=int, default=200)

    args = parser.parse_args(argv)
    try:
        if args.command == "verify":
            return cmd_verify(args.seed, args.trials)
        cfg = _load_config(args.config, args.override_cfl)
        out_dir = Path(args.out)
        if args.command == "riemann":
            return cmd_riemann(cfg, out_dir)
        if args.command == "simulate":
            return cmd_simulate(cfg, out_dir, args.override_cfl)
        return cmd_ring_predict(cfg, out_dir)
    except ConfigError as exc:
        sys.stderr.write(f"{exc}\n")
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
