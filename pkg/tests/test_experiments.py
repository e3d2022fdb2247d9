import math

import numpy as np
import pytest

from bolab import experiments as ex
from bolab.dynamics import EquationParams, SolverConfig
from bolab.energy import energy_single
from bolab.fields import make_initial_data, parse_mode_list, power_law_field, sample_rng
from bolab.spectral import MollifierSpec, mollify, norm_sq, sobolev_norm
from conftest import cos_field

S, S0 = 3.0, 2.6
SMALL = SolverConfig(max_mode=16, dt=1e-3, horizon=0.02, stride=5)


def data(K=16, seed=0, kind="random-sobolev", **kw):
    return make_initial_data(kind, S, seed, K, **kw)


# -- initial data ------------------------------------------------------------------


def test_mode_list_data():
    phi = make_initial_data("mode-list", S, 0, 4, norm=None, modes="1:1")
    assert np.allclose(phi.coeffs, cos_field(1, 4).coeffs)
    assert parse_mode_list("2:0.5-0.1j, 0:1") == {2: 0.5 - 0.1j, 0: 1}
    with pytest.raises(ValueError):
        parse_mode_list("2")
    with pytest.raises(ValueError):
        make_initial_data("mode-list", S, 0, 4, modes="9:1")
    with pytest.raises(ValueError):
        make_initial_data("nope", S, 0, 4)


@pytest.mark.parametrize("kind", ["random-sobolev", "critical-decay", "analytic"])
def test_initial_data_normalized_and_reproducible(kind):
    a, b = data(32, 5, kind), data(32, 5, kind)
    assert np.array_equal(a.coeffs, b.coeffs)
    assert sobolev_norm(a, S) == pytest.approx(1.0)
    # a larger bandwidth extends the same phases
    big = data(64, 5, kind, norm=None)
    small = data(32, 5, kind, norm=None)
    assert np.array_equal(big.coeffs[:33], small.coeffs)


def test_critical_decay_sits_at_the_edge():
    f = power_law_field(2**12, S + 0.51, sample_rng(0, 0))
    assert abs(np.abs(f.coeffs[100]) - 100 ** -(S + 0.51)) < 1e-15
    assert sobolev_norm(f, S) < 10 < sobolev_norm(f, S + 1)


# -- conservation ----------------------------------------------------------------------


def test_conservation_trace():
    tr = ex.run_conservation(data(), SMALL)
    assert tr.status == "completed"
    assert tr.summary["max_relative_drift"] < 1e-8
    assert list(tr.columns()) == list(ex.TRACE_COLUMNS)
    assert len(tr) == 5 and np.isnan(tr.es_total).all()


def test_conservation_rejects_nonconserving_parameters_unless_forced():
    p = EquationParams(c1=0.5, c2=1.0)
    with pytest.raises(ValueError):
        ex.run_conservation(data(), SMALL, p)
    tr = ex.run_conservation(data(norm=3.0), SolverConfig(max_mode=16, dt=1e-3, horizon=0.2), p, force=True)
    assert tr.summary["max_relative_drift"] > 1e-6


# -- energy monitor ------------------------------------------------------------------------


def test_energy_monitor_records_consistent_series():
    phi = data(32)
    p = EquationParams()
    cfg = SolverConfig(max_mode=32, dt=1e-4, horizon=0.01, stride=10)
    tr = ex.run_energy_monitor(phi, S, S0, cfg, p)
    cal = ex.calibration_for(phi, S, S0, p)
    assert tr.es_total[0] == pytest.approx(energy_single(phi, cal).total)
    assert tr.summary["gronwall_holds"]
    assert tr.summary["empirical_C"] == pytest.approx(np.max(np.abs(tr.extra["ratio"])))
    # the chain-rule rate agrees with differences of the recorded energy
    assert tr.summary["fd_rate_max_relative_mismatch"] < 1e-3
    unc = ex.run_energy_monitor(phi, S, S0, cfg, p, cal, correction=False)
    assert unc.summary["empirical_C"] == unc.summary["uncancelled_C"]


def test_energy_monitor_rejects_bad_indices():
    with pytest.raises(ValueError):
        ex.run_energy_monitor(data(), 2.6, 2.8, SMALL)


def test_calibration_for_rounds_radius_to_power_of_two():
    phi = data(16) * 3.0
    cal = ex.calibration_for(phi, S, S0, EquationParams())
    r = 1.1 * math.sqrt(norm_sq(phi))
    assert cal.K >= r and cal.K / 2 < r and math.log2(cal.K).is_integer()


def test_loss_pairing_vanishes_for_single_mode():
    assert ex.loss_pairing(cos_field(2, 8), S) == pytest.approx(0, abs=1e-12)


# -- gamma sweep, Bona-Smith ----------------------------------------------------------------


def test_gamma_sweep_report():
    rep = ex.run_gamma_sweep(data(), [0.25, 0.125, 0.0625], SMALL)
    assert [q["gamma_1"] for q in rep["pairs"]] == [0.25, 0.125]
    assert all(q["normalized"] == pytest.approx(q["sup_diff_l2"] / q["gamma_1"]) for q in rep["pairs"])
    assert rep["checks"]["bounded_normalized"]
    with pytest.raises(ValueError):
        ex.run_gamma_sweep(data(), [0.1, 0.2], SMALL)


def test_gamma_sweep_parallel_matches_serial():
    a = ex.run_gamma_sweep(data(), [0.25, 0.125], SMALL, workers=1)
    b = ex.run_gamma_sweep(data(), [0.25, 0.125], SMALL, workers=2)
    assert a["pairs"] == b["pairs"]


def test_bona_smith_on_band_limited_data():
    phi = cos_field(1, 64)
    rep = ex.run_bona_smith(phi, S, (1,), [0.5, 0.25], expect="at-least")
    assert rep["rates"][0]["difference_slope"] is None
    assert rep["checks"] == {"slopes": True, "monotone": True}
    with pytest.raises(ValueError):
        ex.run_bona_smith(phi, S, (1,), [0.5], expect="sometimes")


def test_bona_smith_rate_on_critical_data():
    phi = data(2**12, 1, "critical-decay")
    rep = ex.run_bona_smith(phi, S, (1,), [2.0**-j for j in range(3, 7)])
    assert rep["rates"][0]["difference_slope"] == pytest.approx(1.0, rel=0.15)
    assert rep["checks"]["monotone"]


# -- pairs of solutions ---------------------------------------------------------------------


def test_difference_energy_trace():
    phi = data(16)
    psi = mollify(phi, MollifierSpec(0.125))
    tr = ex.run_difference_energy(phi, psi, S, S0, SMALL)
    assert tr.status == "completed"
    assert np.all(np.isfinite(tr.etilde)) and np.all(tr.etilde >= 0.5 * tr.l2**2 * (1 - 1e-12))
    assert tr.summary["budget_finite"]


def test_difference_energy_of_identical_data_is_zero():
    phi = data(16)
    tr = ex.run_difference_energy(phi, phi, S, S0, SMALL)
    assert np.all(tr.l2 == 0) and np.all(tr.etilde == 0)


def test_perturbation_is_unit_in_hs():
    assert sobolev_norm(ex.perturbation(32, S, 0), S) == pytest.approx(1.0)


def test_continuous_dependence_report():
    cfg = SolverConfig(max_mode=16, dt=1e-3, horizon=0.02)
    rep = ex.run_continuous_dependence(data(), [1e-1, 1e-2], S, S0, cfg)
    sups = [r["sup_diff_hs"] for r in rep["rows"]]
    assert sups[1] < sups[0]
    assert rep["horizon_half"] == pytest.approx(0.01)
    assert rep["checks"]["monotone"]
    with pytest.raises(ValueError):
        ex.run_continuous_dependence(data(), [1e-2, 1e-1], S, S0, cfg)


def test_safe_horizon_of_completed_run():
    tr = ex.run_conservation(data(), SMALL)
    assert ex.safe_horizon(tr) == pytest.approx(SMALL.horizon)
