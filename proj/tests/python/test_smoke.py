"""Smoke tests for the python bindings.

Run with the staged package on PYTHONPATH, e.g.
PYTHONPATH=build/python python3 -m pytest tests/python -q
"""

import math

import numpy as np
import pytest

import mfalloc as mf


def toy_matrix():
    # Two axis columns plus their bisector.
    s = 1.0 / math.sqrt(2.0)
    return np.array([[1.0, 0.0, s], [0.0, 1.0, s]])


def toy_ensemble(label="low", scale=1.0):
    e = mf.Ensemble()
    e.snapshots = scale * toy_matrix()
    e.parameters = [np.array([float(j)]) for j in range(3)]
    e.fidelity_label = label
    e.model_id = "toy"
    e.validate()
    return e


def test_select_gomp_prefers_the_bisector():
    r = mf.select(toy_matrix(), "gomp", 1)
    assert r.indices == [2]
    assert r.termination == "reached_target"
    assert r.scores[0] == pytest.approx(math.sqrt(2.0), abs=1e-12)
    assert r.coefficients.shape == (1, 3)


def test_every_method_runs_and_respects_size():
    a = np.random.default_rng(0).standard_normal((6, 9))
    for method in ("rand", "lev", "qr", "chol", "lu", "gomp"):
        r = mf.select(a, method, 4, seed=7)
        assert len(r.indices) == 4
        assert len(set(r.indices)) == 4


def test_unknown_method_raises():
    with pytest.raises(ValueError, match="rand, lev, qr, chol, lu, gomp"):
        mf.select(toy_matrix(), "newton", 1)


def test_file_round_trip(tmp_path):
    path = tmp_path / "toy.mfe"
    e = toy_ensemble()
    mf.save_ensemble(path, e, seed=9, config_hash="abc123")
    back = mf.load_ensemble(path)
    assert back.model_id == "toy"
    assert back.fidelity_label == "low"
    np.testing.assert_array_equal(back.snapshots, e.snapshots)
    assert mf.load_ensemble_meta(path) == (9, "abc123")


def test_fit_reconstructs_in_span_columns_exactly():
    low = toy_ensemble("low")
    high = toy_ensemble("high", scale=3.0)
    model = mf.fit(low, high, "gomp", 2)
    for j in range(3):
        c = mf.coefficients(model, low.snapshots[:, j])
        xh = mf.reconstruct_high(model, c)
        np.testing.assert_allclose(xh, high.snapshots[:, j], atol=1e-12)


def test_evaluate_error_is_the_relative_squared_frobenius_ratio():
    truth = np.array([[1.0, 0.0], [0.0, 1.0]])
    assert mf.evaluate_error(truth, truth) == 0.0
    assert mf.evaluate_error(truth, np.zeros((2, 2))) == 1.0


def test_sweep_report_shape_and_csv_header():
    low = toy_ensemble("low")
    high = toy_ensemble("high", scale=2.0)
    rep = mf.sweep(low, high, ["gomp", "rand"], [1, 2], trials=3, workers=2)
    # gomp: one row per size; rand: one row per size per trial.
    assert len(rep.rows) == 2 + 2 * 3
    assert rep.to_csv().splitlines()[0] == "method,subset_size,low_error,high_error,seed"
    assert rep.to_plot_table().startswith("# subset_size")


def test_recovery_instance_and_diagnostics():
    inst = mf.synthetic_recovery_instance(10, 5, 40, 0.7, 0.0, seed=1)
    assert inst.ensemble.shape == (10, 40)
    assert len(inst.basis_indices) == 5
    dbar = mf.consistency_bound(inst.expansion)
    assert dbar <= 0.7 + 1e-12

    r = mf.select(inst.ensemble, "gomp", 5, epsilon=1e-10)
    assert sorted(r.indices) == inst.basis_indices


def test_noisy_thresholds_match_direct_arithmetic():
    exp = np.array([[0.3] * 35, [0.4] * 35])
    diag = mf.noisy_thresholds(exp, 1e-4, 0.1, 40, 10, 1.0)
    expected = 1e-4 * math.sqrt(2 * 400 * math.log(8000.0)) / 0.3
    assert diag.consistency_bound == pytest.approx(0.7, abs=1e-12)
    assert diag.epsilon_threshold == pytest.approx(expected, abs=1e-12)
    assert diag.all_ok()


def test_brute_force_matches_projection_residual():
    a = toy_matrix()
    best = mf.brute_force_cssp(a, 1)
    assert best.subset == [2]
    assert best.residual == pytest.approx(1.0, abs=1e-12)
    assert mf.projection_residual(a, [2]) == pytest.approx(best.residual, abs=1e-12)
    assert mf.rank_k_error(a, 1) <= best.residual + 1e-12


def test_pendulum_series_sample_counts():
    spec = mf.PendulumSpec()
    spec.dt = 0.25
    out = mf.pendulum_series(spec, "linear")
    assert out.series.shape == (61,)
    assert not out.blew_up


def test_burgers_steady_converges_to_a_monotone_front():
    spec = mf.BurgersSpec()
    spec.viscosity = 0.5
    spec.boundary_delta = 0.05
    out = mf.burgers_steady(spec)
    assert out.converged
    assert out.profile.shape == (42,)
    assert out.profile[0] == pytest.approx(1.05)
    assert out.profile[-1] == pytest.approx(-1.0)
    assert np.all(np.diff(out.profile) < 1e-8)


def test_solver_failure_is_a_python_exception():
    grid = mf.burgers_default_grid(1, 1)
    with pytest.raises(mf.SolveFailure):
        mf.build_burgers_ensemble(grid, "low", max_steps=5)
