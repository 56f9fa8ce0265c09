"""CLI: config validation, reports, CSV output, self-checks."""

import textwrap

import pytest

from sdlwr import ConfigError
from sdlwr.cli import main, parse_config

RIEMANN_CFG = textwrap.dedent("""\
    diagrams:
      road:
        family: greenshields
        v_free_m_s: 1000.0
        rho_jam_veh_km: 4.0
    riemann:
      upstream:
        diagram: road
        demand_veh_s: 1.0
        supply_veh_s: 0.6
      downstream:
        diagram: road
        demand_veh_s: 0.9
        supply_veh_s: 1.0
      profile:
        xi_min_m_s: -600.0
        xi_max_m_s: 600.0
        count: 13
    outputs:
      report: case.txt
      csv: case.csv
    """)

SIM_CFG = textwrap.dedent("""\
    diagrams:
      main:
        family: greenshields
        v_free_m_s: 1000.0
        rho_jam_veh_km: 4.0
    road:
      topology: open
      dx_km: 1.0
      segments:
        - diagram: main
          length_km: 16.0
    initial:
      kind: uniform
      rho_veh_km: 0.5
    numerics:
      dt_s: 0.5
      duration_s: 200.0
      record_every: 0
    boundaries:
      left_demand_veh_s: 0.3
      right_supply_veh_s: 1.0
    outputs:
      report: sim.txt
      csv: sim.csv
    """)

RING_CFG = textwrap.dedent("""\
    diagrams:
      narrow:
        family: kerner_konhauser
        lanes: 1
      wide:
        family: kerner_konhauser
        lanes: 2
    road:
      topology: ring
      dx_km: 0.028
      segments:
        - diagram: narrow
          length_km: 2.8
        - diagram: wide
          length_km: 14.0
    initial:
      kind: sinusoid
      rho0_veh_km: 28.0
      amplitude_veh_km: 3.0
    outputs:
      report: ring.txt
      csv: ring.csv
    """)

FULL_SCALE_CFG = textwrap.dedent("""\
    diagrams:
      narrow:
        family: kerner_konhauser
        lanes: 1
      wide:
        family: kerner_konhauser
        lanes: 2
    road:
      topology: ring
      dx_km: 0.0035
      segments:
        - diagram: narrow
          length_km: 2.8
        - diagram: wide
          length_km: 14.0
    initial:
      kind: sinusoid
      rho0_veh_km: 28.0
      amplitude_veh_km: 3.0
    numerics:
      dt_s: 0.1
      duration_s: 24000.0
      record_every: 60000
    """)


# -- config parsing --------------------------------------------------------


def test_parse_full_scale_config():
    cfg = parse_config(FULL_SCALE_CFG)
    assert set(cfg.diagrams) == {"narrow", "wide"}
    assert cfg.road.n_cells == 4800
    assert cfg.road.length == pytest.approx(16.8)
    # record_every 0 would mean final-only; 60000 is kept as given
    assert cfg.numerics.record_every == 60000


def test_parse_rejects_unstable_dt():
    bad = FULL_SCALE_CFG.replace("dt_s: 0.1", "dt_s: 0.2")
    with pytest.raises(ConfigError, match=r"CFL number 1\.59"):
        parse_config(bad)
    # the override keeps the config usable for deliberate experiments
    cfg = parse_config(bad, override_cfl=True)
    assert cfg.numerics.dt == 0.2


def test_parse_collects_every_error():
    text = textwrap.dedent("""\
        diagrams:
          a:
            family: greenshields
            v_free_m_s: -3
            rho_jam_veh_km: 100
          b:
            family: nosuch
        road:
          topology: spiral
          dx_km: 1.0
          segments:
            - diagram: zzz
              length_km: 2.5
        numerics:
          dt_s: 0.1
          duration_s: -5
        extra_key: 1
        """)
    with pytest.raises(ConfigError) as exc:
        parse_config(text)
    msg = str(exc.value)
    assert msg.startswith("invalid config:")
    for fragment in (
        "diagrams.a.v_free_m_s: must be positive",
        "diagrams.b.family: unknown family",
        "road.topology: must be ring or open",
        "road.segments[0].diagram: unknown diagram 'zzz'",
        "numerics.duration_s: must be nonnegative",
        "<top>.extra_key: unknown key",
    ):
        assert fragment in msg, fragment


def test_parse_rejects_mismatched_boundaries():
    ringed = SIM_CFG.replace("topology: open", "topology: ring")
    with pytest.raises(ConfigError, match="ring road takes no boundary"):
        parse_config(ringed)
    opened = SIM_CFG.replace("boundaries:", "ignored:").replace(
        "  left_demand_veh_s: 0.3\n  right_supply_veh_s: 1.0\n", ""
    )
    with pytest.raises(ConfigError):
        parse_config(opened)


def test_parse_rejects_uneven_segments():
    text = SIM_CFG.replace("length_km: 16.0", "length_km: 16.3")
    with pytest.raises(ConfigError, match="not a whole number"):
        parse_config(text)


def test_parse_rejects_ambiguous_state():
    text = RIEMANN_CFG.replace(
        "    demand_veh_s: 1.0\n    supply_veh_s: 0.6\n",
        "    rho_veh_km: 2.0\n    demand_veh_s: 1.0\n    supply_veh_s: 0.6\n",
        1,
    )
    with pytest.raises(ConfigError, match="either rho_veh_km or"):
        parse_config(text)


def test_parse_rejects_broken_yaml():
    with pytest.raises(ConfigError, match="YAML parse error"):
        parse_config("diagrams: [unclosed")


# -- subcommand runs -------------------------------------------------------


def _run(tmp_path, name, argv, config=None):
    if config is not None:
        cfg_path = tmp_path / name
        cfg_path.write_text(config)
        argv = argv + ["--config", str(cfg_path), "--out", str(tmp_path)]
    return main(argv)


def test_riemann_report_and_profile(tmp_path, capsys):
    code = _run(tmp_path, "case.yaml", ["riemann"], RIEMANN_CFG)
    assert code == 0
    report = (tmp_path / "case.txt").read_text()
    assert report == capsys.readouterr().out
    assert "boundary flux q = 1.0000 veh/s" in report
    assert "backward rarefaction" in report
    assert "forward rarefaction" in report
    # both stationary states sit at capacity, density at critical
    assert report.count("(D=1.0000, S=1.0000) veh/s, rho=2.0000 veh/km") == 2
    csv = (tmp_path / "case.csv").read_text().splitlines()
    assert csv[0] == "xi_m_s,rho_veh_km"
    assert len(csv) == 14
    assert csv[1].startswith("-600,")
    assert csv[-1].startswith("600,")
    # the fan is monotone from the congested tail to the free head
    rho = [float(line.split(",")[1]) for line in csv[1:]]
    assert rho[0] > rho[-1]
    assert all(a >= b - 1e-12 for a, b in zip(rho, rho[1:]))


def test_riemann_byte_identical_reruns(tmp_path):
    for sub in ("one", "two"):
        d = tmp_path / sub
        d.mkdir()
        cfg = d / "case.yaml"
        cfg.write_text(RIEMANN_CFG)
        assert main(["riemann", "--config", str(cfg), "--out", str(d)]) == 0
    assert (tmp_path / "one" / "case.csv").read_bytes() == (
        tmp_path / "two" / "case.csv"
    ).read_bytes()
    assert (tmp_path / "one" / "case.txt").read_bytes() == (
        tmp_path / "two" / "case.txt"
    ).read_bytes()


def test_simulate_open_road(tmp_path, capsys):
    code = _run(tmp_path, "sim.yaml", ["simulate"], SIM_CFG)
    assert code == 0
    out = capsys.readouterr().out
    assert "simulation summary" in out
    assert "cells: 16, dx = 1 km, topology: open" in out
    assert "conservation drift" in out
    csv = (tmp_path / "sim.csv").read_text().splitlines()
    assert csv[0] == "t,cell,x_km,rho_veh_km,v_m_s,q_veh_s"
    # record_every 0 keeps only the first and last snapshots
    assert len(csv) == 1 + 2 * 16
    first = csv[1].split(",")
    assert first[:3] == ["0", "0", "0.5"]
    assert float(first[3]) == 0.5
    # the road drains to the uniform state carrying the inflow demand
    last = csv[-1].split(",")
    assert last[0] == "200"
    assert float(last[3]) == pytest.approx(2.0 - 2.8**0.5, abs=1e-6)


def test_simulate_reports_interior_state(tmp_path, capsys):
    cfg = textwrap.dedent("""\
        diagrams:
          main:
            family: greenshields
            v_free_m_s: 1000.0
            rho_jam_veh_km: 4.0
        road:
          topology: ring
          dx_km: 1.0
          segments:
            - diagram: main
              length_km: 16.0
        initial:
          kind: piecewise
          pieces:
            - length_km: 5.0
              rho_veh_km: 1.0
            - length_km: 1.0
              rho_veh_km: 2.2
            - length_km: 10.0
              rho_veh_km: 1.0
        numerics:
          dt_s: 0.5
          duration_s: 0.0
          record_every: 0
        """)
    code = _run(tmp_path, "spike.yaml", ["simulate"], cfg)
    assert code == 0
    out = capsys.readouterr().out
    assert ("interior state: cell 5 (x = 5.5000 km), "
            "rho = 2.2000 veh/km, q = 0.9900 veh/s") in out


def test_ring_predict_report(tmp_path, capsys):
    code = _run(tmp_path, "ring.yaml", ["ring-predict"], RING_CFG)
    assert code == 0
    report = (tmp_path / "ring.txt").read_text()
    assert "thresholds: N_a = 470.3313 veh, N_c = 1757.4749 veh" in report
    assert "N = 858.3893 veh" in report
    assert "scenario: critical_with_ss" in report
    assert "flux q = 0.7091 veh/s" in report
    assert "standing shock at L2 = 12.5792 km" in report
    assert "interior state possible at x = 12.5792-" in report
    assert "interior state possible at x = 12.5792+" in report
    csv = (tmp_path / "ring.csv").read_text().splitlines()
    assert csv[0] == "cell,x_km,rho_veh_km"
    assert len(csv) == 601
    assert csv[1] == "0,0.014,35.8944"
    assert csv[101].split(",")[2] == "26.4162"
    assert csv[600].split(",")[2] == "118.355"


def test_ring_predict_explicit_count_matches_initial(tmp_path, capsys):
    explicit = RING_CFG.replace(
        "initial:\n  kind: sinusoid\n  rho0_veh_km: 28.0\n  amplitude_veh_km: 3.0\n",
        "ring:\n  vehicles_veh: 858.3892954340843\n",
    )
    _run(tmp_path, "ring_sine.yaml", ["ring-predict"], RING_CFG)
    first = capsys.readouterr().out
    _run(tmp_path, "ring_count.yaml", ["ring-predict"], explicit)
    assert capsys.readouterr().out == first


def test_verify_zero_trials(capsys):
    assert main(["verify", "--trials", "0"]) == 0
    out = capsys.readouterr().out
    assert out == "verify: 0 trials requested, nothing to run: PASS\n"


def test_verify_small_run(capsys):
    assert main(["verify", "--seed", "1", "--trials", "2"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert len(lines) == 6
    assert all(line.startswith("PASS ") for line in lines)
    names = {line.split()[1] for line in lines}
    assert "homogeneous-case-table" in names
    assert "osher-equivalence" in names


def test_config_errors_exit_2(tmp_path, capsys):
    assert main(["riemann"]) == 2
    assert "--config is required" in capsys.readouterr().err
    assert main(["riemann", "--config", str(tmp_path / "nope.yaml")]) == 2
    assert "cannot read config" in capsys.readouterr().err
    bad = tmp_path / "bad.yaml"
    bad.write_text("diagrams: {}\n")
    assert main(["simulate", "--config", str(bad)]) == 2
    assert "invalid config" in capsys.readouterr().err


def test_override_cfl_flag_end_to_end(tmp_path, capsys):
    cfg = SIM_CFG.replace("dt_s: 0.5", "dt_s: 0.96").replace(
        "duration_s: 200.0", "duration_s: 9.6"
    )
    path = tmp_path / "fast.yaml"
    path.write_text(cfg)
    assert main(["simulate", "--config", str(path), "--out", str(tmp_path)]) == 2
    assert "CFL number 0.96" in capsys.readouterr().err
    code = main(["simulate", "--config", str(path), "--out", str(tmp_path),
                 "--override-cfl"])
    assert code == 0
    assert "simulation summary" in capsys.readouterr().out
