import json
import math

import numpy as np
import pytest

from modules import euler_estimator as ee
from modules import graph_model as gm
from modules import spectrum_solver as ss
from modules.errors import BoundUndefinedError, FileFormatError, ParameterError
from modules.spectrum_solver import Spectrum

FINE_STEPS = 200


def naive_term(x):
    return 8 * math.pi ** 2 * math.sin(x) / (x * (4 * math.pi ** 2 - x ** 2))


@pytest.mark.parametrize("K", [1, 5, 200])
def test_x_new_interval_removable_point(interval_spectrum, K):
    # k_1 / t = 2 pi, every later term vanishes
    assert ee.x_new(interval_spectrum.head(K), 0.5) == pytest.approx(1.0, abs=1e-6)


def test_x_new_empty_sum():
    assert ee.x_new(Spectrum([]), 1.0) == 2.0


def test_x_new_rejects_non_positive_t(interval_spectrum):
    with pytest.raises(ParameterError):
        ee.x_new(interval_spectrum, 0.0)
    with pytest.raises(ParameterError):
        ee.x_old(interval_spectrum, -1.0)


def test_x_old_interval(interval_spectrum):
    assert ee.x_old(interval_spectrum.head(50), 0.5) == pytest.approx(1.0, abs=0.02)


def test_x_old_literal_prefactor(interval_spectrum):
    assert ee.x_old(interval_spectrum, 0.5, literal=True) == pytest.approx(2 - math.pi, abs=0.02)


def test_x_new_k4_at_t0(k4_graph, k4_spectrum):
    t0 = gm.summarize(k4_graph).t0
    assert abs(ee.x_new(k4_spectrum.head(28), t0) - (-2)) < 0.25


def test_phi_hat_real_special_values():
    assert ee.phi_hat_real(0.0) == pytest.approx(1.0, abs=1e-12)
    assert ee.phi_hat_real(2 * math.pi) == pytest.approx(-0.5, abs=1e-12)
    assert ee.phi_hat_real(math.pi) == pytest.approx(0.0, abs=1e-12)
    assert ee.phi_hat_real(-3.0) == pytest.approx(ee.phi_hat_real(3.0))


def test_new_term_is_twice_phi_hat_real():
    x = np.random.default_rng(0).uniform(1e-3, 1e3, size=1000)
    np.testing.assert_allclose(ee.new_term(x), 2 * ee.phi_hat_real(x), rtol=1e-12)


@pytest.mark.parametrize("k", [0.5, 3.0, 2 * math.pi, 10.0, 25.0])
def test_phi_hat_real_matches_quadrature(k):
    assert ee.phi_hat_numeric(k) == pytest.approx(ee.phi_hat_real(k), abs=1e-8)


def test_phi_window_support():
    values = ee.phi_window([-0.5, 0.0, 0.5, 1.0, 1.5])
    np.testing.assert_allclose(values, [0.0, 0.0, 2.0, 0.0, 0.0], atol=1e-12)


def test_new_term_is_finite_everywhere():
    x = np.geomspace(1e-6, 1e6, 5000)
    assert np.all(np.isfinite(ee.new_term(x)))


def test_new_term_continuous_at_removable_point():
    x = np.linspace(2 * math.pi - 1e-3, 2 * math.pi + 1e-3, 101)
    values = ee.new_term(x)
    assert np.all(np.abs(values + 1.0) < 1e-2)
    assert np.all(np.abs(np.diff(values)) < 1e-3)
    for edge in (2 * math.pi - 1e-2, 2 * math.pi + 1e-2):
        assert float(ee.new_term(edge)) == pytest.approx(naive_term(edge), rel=1e-9)


def test_x_new_is_scale_invariant(k4_spectrum):
    for s in (0.5, 3.0):
        assert ee.x_new(k4_spectrum.scaled(s), 4.0 * s) == pytest.approx(ee.x_new(k4_spectrum, 4.0), abs=1e-10)


def test_chi_curve_sampling(k4_spectrum):
    curve = ee.chi_curve(k4_spectrum, 28, (1.0, 20.0, 60))
    assert len(curve) == 60
    assert curve.K == 28
    assert np.all(np.diff(curve.t) > 0)
    assert curve.t[0] == pytest.approx(1.0) and curve.t[-1] == pytest.approx(20.0)
    assert curve.x[10] == pytest.approx(ee.x_new(k4_spectrum.head(28), curve.t[10]))
    assert list(curve.to_frame().columns) == ["t", "x"]


def test_chi_curve_rejects_bad_K(k4_spectrum):
    with pytest.raises(ParameterError):
        ee.chi_curve(k4_spectrum, 0)
    with pytest.raises(ParameterError):
        ee.chi_curve(k4_spectrum, 107)


def test_interval_curve_value_at_half(interval_spectrum):
    curve = ee.chi_curve(interval_spectrum, 200, (0.5, 20.0, 60))
    assert curve.x[0] == pytest.approx(1.0, abs=1e-6)


def _curve(x, t=None):
    t = np.geomspace(0.5, 20.0, len(x)) if t is None else t
    return ee.ChiCurve(t=t, x=np.asarray(x, dtype=float), formula="new", K=1)


def test_constant_curve_plateau():
    report = ee.detect_plateau(_curve(np.ones(60)))
    assert report.found
    assert report.chi_estimate == 1
    assert report.t_interval == pytest.approx((0.5, 20.0))
    assert report.max_deviation == 0.0


def test_short_curve_is_rejected():
    with pytest.raises(ParameterError):
        ee.detect_plateau(_curve(np.ones(10)))


def test_asymptote_at_two_is_not_a_plateau():
    report = ee.detect_plateau(_curve(np.full(60, 2.0)))
    assert not report.found
    assert report.chi_estimate is None


def test_short_run_is_not_a_plateau():
    x = np.full(60, 2.6)
    x[20:25] = 0.05
    assert not ee.detect_plateau(_curve(x)).found


def test_longest_run_wins():
    x = np.full(60, 2.6)
    x[5:17] = -1.1
    x[25:50] = -2.1
    report = ee.detect_plateau(_curve(x))
    assert report.found
    assert report.chi_estimate == -2
    assert report.max_deviation == pytest.approx(0.1)


def test_k4_plateau_with_k_required(k4_graph, k4_spectrum):
    t0 = gm.summarize(k4_graph).t0
    curve = ee.chi_curve(k4_spectrum, 28, ee.default_t_grid(t0, FINE_STEPS))
    report = ee.detect_plateau(curve)
    assert report.found
    assert report.chi_estimate == -2
    assert report.contains(t0)
    assert report.max_deviation < 0.25


def test_k4_plateau_with_all_levels(k4_spectrum):
    report = ee.detect_plateau(ee.chi_curve(k4_spectrum, 106, (1.0, 20.0, FINE_STEPS)))
    assert report.chi_estimate == -2
    assert report.t_interval[0] <= 3.5 and report.t_interval[1] >= 15.0


def test_k5_plateaus(k5_graph, k5_spectrum):
    t0 = gm.summarize(k5_graph).t0
    grid = ee.default_t_grid(t0, FINE_STEPS)
    short = ee.detect_plateau(ee.chi_curve(k5_spectrum, 74, grid))
    assert short.chi_estimate == -5
    assert short.t_interval[0] <= 2.6 and short.t_interval[1] >= 3.9
    full = ee.detect_plateau(ee.chi_curve(k5_spectrum, 132, grid))
    assert full.chi_estimate == -5
    assert full.t_interval[0] <= 2.6 and full.t_interval[1] >= 7.0


def test_too_few_levels_do_not_give_the_k4_answer(k4_spectrum):
    report = ee.detect_plateau(ee.chi_curve(k4_spectrum, 5, (0.5, 20.0, 60)))
    assert not report.found
    assert report.chi_estimate is None


def test_old_series_misses_k4_with_k_required(k4_graph, k4_spectrum):
    t0 = gm.summarize(k4_graph).t0
    report = ee.detect_plateau(ee.chi_curve(k4_spectrum, 28, ee.default_t_grid(t0), formula="old"))
    assert not report.found


@pytest.mark.parametrize("seed", range(20))
def test_plateau_recovers_chi_of_random_graphs(seed):
    rng = np.random.default_rng(500 + seed)
    n = int(rng.integers(4, 7))
    m = int(rng.integers(n - 1, n * (n - 1) // 2 + 1))
    graph = gm.gen_random_connected(n, m, (0.15, 0.15 * m + 1.0), seed=seed)
    summary = gm.summarize(graph)
    K = ee.k_required(summary.vertex_count, summary.lt0, 0.25)
    spectrum = ss.solve(graph, K)
    report = ee.detect_plateau(ee.chi_curve(spectrum, K, ee.default_t_grid(summary.t0, FINE_STEPS)))
    assert report.found
    assert report.chi_estimate == summary.chi


def test_k_required_published_values():
    assert ee.k_required(4, 4.82, 0.25, "exact") == 28
    assert ee.k_required(5, 9.74, 0.25, "exact") == 74
    assert abs(ee.k_required(5, 9.77, 0.25, "old") - 1243) <= 2


def test_k_required_monotonicity():
    eps = [0.05, 0.1, 0.2, 0.3, 0.45]
    counts = [ee.k_required(5, 9.0, e) for e in eps]
    assert counts == sorted(counts, reverse=True)
    lts = [0.5, 1.0, 4.0, 9.0, 20.0]
    counts = [ee.k_required(5, lt, 0.25) for lt in lts]
    assert counts == sorted(counts)


@pytest.mark.parametrize("lt0", [5.0, 7.5, 10.0, 12.0])
def test_k_required_approx_close_to_exact(lt0):
    # holds while eps * pi * lt0 < 4
    exact = ee.k_required(4, lt0, 0.1, "exact")
    approx = ee.k_required(4, lt0, 0.1, "approx")
    assert exact - 1 <= approx <= exact


@pytest.mark.parametrize("args", [(4, 4.82, 0.0), (4, 4.82, 0.5), (4, 0.4, 0.25), (0, 4.82, 0.25)])
def test_k_required_parameter_errors(args):
    with pytest.raises(ParameterError):
        ee.k_required(*args)


def test_k_required_unknown_mode():
    with pytest.raises(ParameterError):
        ee.k_required(4, 4.82, 0.25, "fast")


def test_truncation_bound_values():
    assert ee.truncation_bound(28, 4, 4.82) == pytest.approx(0.247, abs=2e-3)
    assert ee.truncation_bound(74, 5, 9.74) <= 0.25
    with pytest.raises(BoundUndefinedError):
        ee.truncation_bound(12, 4, 4.82)


def test_denominator_condition():
    assert ee.min_K_for_denominator(4, 4.82) == 13
    assert ee.denominator_condition(13, 4, 4.82)
    assert not ee.denominator_condition(12, 4, 4.82)
    for vertices, lt0 in [(2, 0.5), (4, 4.82), (5, 9.74), (7, 30.0)]:
        assert ee.denominator_condition(ee.k_required(vertices, lt0), vertices, lt0)


@pytest.mark.parametrize("fixture", ["k4", "k5"])
def test_truncation_bound_compliance(fixture, request):
    graph = request.getfixturevalue(f"{fixture}_graph")
    spectrum = request.getfixturevalue(f"{fixture}_spectrum")
    summary = gm.summarize(graph)
    V, lt0, N = summary.vertex_count, summary.lt0, len(spectrum)
    full = ee.x_new(spectrum, summary.t0)
    tail = ee.truncation_bound(N, V, lt0)
    for K in range(ee.min_K_for_denominator(V, lt0), N, 3):
        error = abs(ee.x_new(spectrum.head(K), summary.t0) - full)
        assert error <= ee.truncation_bound(K, V, lt0) + tail


def test_curve_file_round_trip(tmp_path, k4_spectrum):
    curve = ee.chi_curve(k4_spectrum, 28, (1.0, 20.0, 30), formula="old")
    path = ee.write_curve(curve, tmp_path / "curve.csv")
    assert path.read_text().splitlines()[0] == "# formula=old, K=28"
    restored = ee.read_curve(path)
    assert (restored.formula, restored.K) == ("old", 28)
    np.testing.assert_allclose(restored.x, curve.x, rtol=1e-14)


def test_read_curve_missing_file(tmp_path):
    with pytest.raises(FileFormatError, match="not found"):
        ee.read_curve(tmp_path / "missing.csv")


def test_plateau_report_serialization():
    report = ee.detect_plateau(_curve(np.ones(60)))
    data = json.loads(ee.plateau_to_json(report))
    assert set(data) == {"chi", "t_lo", "t_hi", "max_deviation", "found"}
    assert data["chi"] == 1 and data["found"] is True


def test_default_t_grid():
    assert ee.default_t_grid() == (0.5, 20.0, 60)
    assert ee.default_t_grid(2.0, 200) == (1.0, 16.0, 200)
