"""Two-link ring: thresholds, stationary predictions, feasibility."""

import numpy as np
import pytest

from sdlwr import (
    BoundarySide,
    FeasibilityCell,
    InteriorSite,
    LinkPattern,
    RingScenario,
    RingSpec,
    feasibility_table,
    initial_density,
    predict,
    thresholds,
    vehicles_of_initial,
)

# Regression values for the 16.8 km ring with the 2.8 km single-lane
# bottleneck.  Cross-checked against brentq/minimize_scalar at 1e-13;
# the package's own inverse searches live at ~2e-8 veh/km, so counts
# carry ~5e-7 veh of method noise.
N_LOWER = 470.3312855078813
N_UPPER = 1757.4749088735452
N_SINE_28 = 858.3892954340843
SHOCK_POS_28 = 12.579171772019539
RHO_CRIT_1 = 35.894437265711964


# -- geometry and validation ----------------------------------------------


def test_spec_rejects_bad_geometry(kk1, kk2):
    with pytest.raises(ValueError, match="0 < L1"):
        RingSpec(16.8, 0.0, kk1, kk2)
    with pytest.raises(ValueError, match="0 < L1"):
        RingSpec(16.8, 17.0, kk1, kk2)
    with pytest.raises(ValueError, match="bottleneck"):
        RingSpec(16.8, 2.8, kk2, kk1)


def test_spec_derived_quantities(ring, kk1, kk2):
    assert ring.L2_len == pytest.approx(14.0)
    assert ring.max_vehicles == pytest.approx(
        kk1.rho_jam * 2.8 + kk2.rho_jam * 14.0
    )
    assert ring.N is None
    loaded = ring.with_vehicles(900.0)
    assert loaded.N == 900.0
    assert ring.N is None


def test_thresholds_frozen_and_published_values(ring):
    n_a, n_c = thresholds(ring)
    assert n_a == pytest.approx(N_LOWER, abs=1e-9)
    assert n_c == pytest.approx(N_UPPER, abs=1e-9)
    # the four-decimal values quoted for this geometry
    assert n_a == pytest.approx(470.3311, abs=1e-3)
    assert n_c == pytest.approx(1757.4746, abs=1e-3)
    assert 0.0 < n_a < n_c < ring.max_vehicles


def test_threshold_densities(ring, kk1, kk2):
    c1, c2 = kk1.capacity, kk2.capacity
    assert kk1.rho_of_gamma(1.0) == pytest.approx(RHO_CRIT_1, abs=1e-9)
    # the inverse-search path lands on the located critical density
    # within the combined bracket widths of the two methods
    assert kk1.rho_of_gamma(1.0) == pytest.approx(kk1.rho_crit, abs=5e-8)
    assert kk2.rho_of_gamma(c1 / c2) == pytest.approx(26.4162, abs=1e-3)
    assert kk2.rho_of_gamma(c2 / c1) == pytest.approx(118.3550, abs=1e-3)


def test_degenerate_single_link_ring(kk1, kk2):
    solo = RingSpec(16.8, 16.8, kk1, kk2)
    n_a, n_c = thresholds(solo)
    assert n_a == n_c == pytest.approx(RHO_CRIT_1 * 16.8, abs=1e-9)


# -- stationary predictions -----------------------------------------------


def test_predict_requires_vehicle_count(ring):
    with pytest.raises(ValueError, match="not set"):
        predict(ring)
    with pytest.raises(ValueError, match="outside"):
        predict(ring.with_vehicles(-1.0))
    with pytest.raises(ValueError, match="outside"):
        predict(ring.with_vehicles(ring.max_vehicles + 1.0))


def test_predict_light_traffic(ring, kk1):
    pred = predict(ring.with_vehicles(300.0))
    assert pred.scenario is RingScenario.BOTH_UC
    assert pred.q < kk1.capacity
    assert pred.interior_sites == ()
    assert pred.L2 is None
    assert pred.vehicle_count() == pytest.approx(300.0, rel=1e-6)
    # both links under-critical: densities below their critical values
    assert pred.profile[0].rho < kk1.rho_crit
    assert pred.profile[1].rho < ring.fd2.rho_crit


def test_predict_lower_threshold_site(ring, kk1):
    pred = predict(ring.with_vehicles(N_LOWER))
    assert pred.scenario is RingScenario.BOTH_UC
    assert pred.q == kk1.capacity
    assert pred.interior_sites == (InteriorSite(16.8, BoundarySide.MINUS),)
    assert pred.interior_sites[0].cell_index(16.8 / 600, 600) == 599
    assert pred.vehicle_count() == pytest.approx(N_LOWER, rel=1e-12)


def test_predict_standing_shock(ring, kk1, kk2):
    pred = predict(ring.with_vehicles(N_SINE_28))
    assert pred.scenario is RingScenario.CRITICAL_WITH_SS
    assert pred.q == kk1.capacity
    assert pred.L2 == pytest.approx(SHOCK_POS_28, abs=1e-9)
    assert pred.interior_sites == (
        InteriorSite(pred.L2, BoundarySide.MINUS),
        InteriorSite(pred.L2, BoundarySide.PLUS),
    )
    # the shock sits strictly inside a cell of the 600-cell grid, so
    # both faces point at the same cell
    assert {s.cell_index(16.8 / 600, 600) for s in pred.interior_sites} == {449}
    rho1, rho_free, rho_cong = (seg.rho for seg in pred.profile)
    assert rho1 == pytest.approx(RHO_CRIT_1, abs=1e-9)
    assert rho_free == pytest.approx(kk2.rho_of_gamma(0.5), rel=1e-12)
    assert rho_cong == pytest.approx(kk2.rho_of_gamma(2.0), rel=1e-12)
    assert pred.vehicle_count() == pytest.approx(N_SINE_28, rel=1e-9)


def test_predict_upper_threshold_site(ring, kk1, kk2):
    pred = predict(ring.with_vehicles(N_UPPER))
    assert pred.scenario is RingScenario.CRITICAL_WITH_SOC
    assert pred.q == kk1.capacity
    assert pred.interior_sites == (InteriorSite(2.8, BoundarySide.PLUS),)
    assert pred.interior_sites[0].cell_index(16.8 / 600, 600) == 100
    assert pred.profile[1].rho == pytest.approx(kk2.rho_of_gamma(2.0), rel=1e-12)
    assert pred.vehicle_count() == pytest.approx(N_UPPER, rel=1e-9)


def test_predict_heavy_traffic(ring, kk1, kk2):
    pred = predict(ring.with_vehicles(2200.0))
    assert pred.scenario is RingScenario.BOTH_SOC
    assert 0.0 < pred.q < kk1.capacity
    assert pred.interior_sites == ()
    assert pred.vehicle_count() == pytest.approx(2200.0, rel=1e-6)
    assert pred.profile[0].rho > kk1.rho_crit
    assert pred.profile[1].rho > kk2.rho_crit


def test_predict_empty_and_jammed_ring(ring):
    empty = predict(ring.with_vehicles(0.0))
    assert empty.scenario is RingScenario.BOTH_UC
    assert empty.vehicle_count() == pytest.approx(0.0, abs=1e-6)
    jammed = predict(ring.with_vehicles(ring.max_vehicles))
    assert jammed.scenario is RingScenario.BOTH_SOC
    assert jammed.vehicle_count() == pytest.approx(ring.max_vehicles, rel=1e-6)


def test_predict_flux_monotone_in_count(ring, kk1):
    """Flux rises to C1 at the lower threshold, holds across the middle
    band, then falls again in heavy traffic."""
    counts = [100.0, 300.0, N_LOWER, 900.0, 1500.0, N_UPPER, 2000.0, 3000.0]
    q = [predict(ring.with_vehicles(n)).q for n in counts]
    assert q[0] < q[1] < q[2]
    assert q[2] == q[3] == q[4] == q[5] == kk1.capacity
    assert q[5] > q[6] > q[7]


def test_profile_lookup_and_cells(ring, kk2):
    pred = predict(ring.with_vehicles(N_SINE_28))
    assert pred.density_at(0.0) == pytest.approx(RHO_CRIT_1, abs=1e-9)
    assert pred.density_at(5.0) == pytest.approx(kk2.rho_of_gamma(0.5), rel=1e-12)
    assert pred.density_at(16.0) == pytest.approx(kk2.rho_of_gamma(2.0), rel=1e-12)
    # x = L falls past the last segment and takes its density
    assert pred.density_at(16.8) == pred.profile[-1].rho
    cells = pred.cell_densities(600, 16.8)
    assert cells.shape == (600,)
    assert np.all(cells[:100] == pred.profile[0].rho)
    assert cells[100] == pred.profile[1].rho
    assert np.all(cells[450:] == pred.profile[2].rho)
    # discretized count converges on the exact one at first order in dx
    assert np.sum(cells) * (16.8 / 600) == pytest.approx(N_SINE_28, rel=1e-3)


def test_cell_index_face_and_interior():
    assert InteriorSite(1.0, BoundarySide.MINUS).cell_index(0.25, 8) == 3
    assert InteriorSite(1.0, BoundarySide.PLUS).cell_index(0.25, 8) == 4
    # off-face positions: both sides name the cell containing the point
    assert InteriorSite(1.1, BoundarySide.MINUS).cell_index(0.25, 8) == 4
    assert InteriorSite(1.1, BoundarySide.PLUS).cell_index(0.25, 8) == 4
    # wrap at the ring seam
    assert InteriorSite(2.0, BoundarySide.PLUS).cell_index(0.25, 8) == 0


# -- initial condition bookkeeping -----------------------------------------


def test_initial_density_lane_weighting(ring):
    rho = initial_density(ring, 28.0, amplitude=3.0)
    assert rho(0.0) == pytest.approx(28.0)
    # quarter period x = L/4 = 4.2 km sits on link 2 (two lanes)
    assert rho(4.2) == pytest.approx(2.0 * 31.0)
    assert rho(12.6) == pytest.approx(2.0 * 25.0)


def test_vehicle_count_closed_form(ring):
    assert vehicles_of_initial(ring, 28.0) == pytest.approx(862.4, rel=1e-12)
    assert vehicles_of_initial(ring, 28.0, amplitude=3.0) == pytest.approx(
        N_SINE_28, abs=1e-9
    )
    n = [vehicles_of_initial(ring, r, amplitude=3.0) for r in (15.0, 28.0, 57.0)]
    assert n[0] < n[1] < n[2]


def test_vehicle_count_flat_lane_profile(ring):
    """With a(x) = 1 the sine integrates away and N = rho0 * L."""
    n = vehicles_of_initial(ring, 28.0, amplitude=3.0, lane_profile=lambda x: 1.0)
    assert n == pytest.approx(28.0 * 16.8, rel=1e-9)


def test_experiment_counts_hit_the_thresholds(ring):
    """The three published starting densities bracket the regime band:
    the outer two land on the thresholds to sub-vehicle accuracy."""
    assert vehicles_of_initial(ring, 15.4007, amplitude=3.0) == pytest.approx(
        N_LOWER, abs=1e-3
    )
    assert vehicles_of_initial(ring, 57.1911, amplitude=3.0) == pytest.approx(
        N_UPPER, abs=1e-3
    )


def test_initial_profile_range_checks(ring):
    with pytest.raises(ValueError, match="below 0"):
        vehicles_of_initial(ring, 1.0, amplitude=2.0)
    with pytest.raises(ValueError, match="exceeds rho_jam"):
        vehicles_of_initial(ring, 200.0)
    with pytest.raises(ValueError, match="leaves"):
        vehicles_of_initial(ring, 200.0, lane_profile=lambda x: 1.5)


# -- stationary pattern feasibility -----------------------------------------


def test_feasibility_table(ring):
    table = feasibility_table(ring)
    assert len(table) == 9
    feasible = {pair for pair, cell in table.items() if cell.feasible}
    assert feasible == {
        (LinkPattern.UC, LinkPattern.UC),
        (LinkPattern.UC, LinkPattern.SS),
        (LinkPattern.UC, LinkPattern.SOC),
        (LinkPattern.SOC, LinkPattern.SOC),
    }
    assert table[LinkPattern.UC, LinkPattern.UC].scenario is RingScenario.BOTH_UC
    assert table[LinkPattern.UC, LinkPattern.SS].scenario is (
        RingScenario.CRITICAL_WITH_SS
    )
    assert table[LinkPattern.UC, LinkPattern.SOC].scenario is (
        RingScenario.CRITICAL_WITH_SOC
    )
    assert table[LinkPattern.SOC, LinkPattern.SOC].scenario is (
        RingScenario.BOTH_SOC
    )
    for pair, cell in table.items():
        if cell.feasible:
            continue
        assert cell.scenario is None
        assert "needs q=C1, which contradicts q<C1" in cell.reason
        where = "x=0" if pair == (LinkPattern.SS, LinkPattern.SOC) else "x=L1"
        assert where in cell.reason


def test_feasibility_mirrors_prediction_scenarios(ring):
    """Every scenario predict can produce appears as a feasible pattern."""
    table = feasibility_table(ring)
    reachable = {
        predict(ring.with_vehicles(n)).scenario
        for n in (300.0, N_SINE_28, N_UPPER, 2200.0)
    }
    feasible_scenarios = {
        cell.scenario for cell in table.values() if cell.feasible
    }
    assert reachable == feasible_scenarios == set(RingScenario)
