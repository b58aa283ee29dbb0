import math

import numpy as np
import pytest

from modules import graph_model as gm
from modules import spectrum_solver as ss
from modules.errors import AmbiguousCountError, FileFormatError, ParameterError


def test_interval_levels_are_multiples_of_pi():
    spectrum = ss.solve(gm.interval(1.0), 50)
    np.testing.assert_allclose(spectrum.values, np.arange(1, 51) * np.pi, rtol=1e-9)
    assert spectrum.provenance == "solved"


def test_interval_counting_function():
    graph = gm.interval(1.0)
    assert ss.counting_function(graph, 0.5 * np.pi) == 0
    assert ss.counting_function(graph, 50.5 * np.pi) == 50


def test_counting_on_a_level_is_ambiguous():
    with pytest.raises(AmbiguousCountError):
        ss.counting_function(gm.interval(1.0), np.pi)


def test_bond_evolution_is_unitary(k4_graph):
    U = ss.bond_evolution(k4_graph, 7.3)
    np.testing.assert_allclose(U @ U.conj().T, np.eye(12), atol=1e-12)


def test_vertex_scattering_is_orthogonal(k5_graph):
    S = ss.SpectrumSolver(k5_graph).scattering
    np.testing.assert_allclose(S @ S.T, np.eye(20), atol=1e-12)


def test_bond_evolution_rejects_non_positive_k(k4_graph):
    with pytest.raises(ParameterError):
        ss.bond_evolution(k4_graph, 0.0)


def test_degenerate_star_levels():
    # equal legs: cos k = 0 twice, sin k = 0 once
    star = gm.star_graph([1.0, 1.0, 1.0])
    spectrum = ss.solve(star, 6)
    expected = np.array([0.5, 0.5, 1.0, 1.5, 1.5, 2.0]) * np.pi
    np.testing.assert_allclose(spectrum.values, expected, rtol=1e-8)
    assert ss.kernel_dimension(star, 0.5 * np.pi) == 2
    assert ss.kernel_dimension(star, np.pi) == 1


def test_secular_function_changes_sign_at_simple_level(k4_spectrum, k4_graph):
    k = k4_spectrum.values[10]
    gap = 1e-3 * min(k - k4_spectrum.values[9], k4_spectrum.values[11] - k)
    assert ss.secular_function(k4_graph, k - gap) * ss.secular_function(k4_graph, k + gap) < 0


def test_k4_spectrum_is_complete(k4_spectrum, k4_graph):
    values = k4_spectrum.values
    assert len(k4_spectrum) == 106
    assert np.all(np.diff(values) >= 0)
    assert ss.counting_function(k4_graph, 0.5 * (values[104] + values[105])) == 105
    assert ss.counting_function(k4_graph, values[-1] * (1 + 1e-7)) == 106


@pytest.mark.parametrize("fixture", ["k4", "k5"])
def test_solved_spectra_pass_weyl_checks(fixture, request):
    graph = request.getfixturevalue(f"{fixture}_graph")
    spectrum = request.getfixturevalue(f"{fixture}_spectrum")
    report = ss.verify_weyl(spectrum, graph)
    assert report.lower_bound_ok
    assert report.residual_bounded
    assert not report.drift_flagged
    assert report.passed


@pytest.mark.parametrize("deleted", [1, 50, 100])
def test_deleted_level_is_flagged_as_drift(deleted, k4_spectrum, k4_graph):
    report = ss.verify_weyl(k4_spectrum.without([deleted]), k4_graph)
    assert report.drift_flagged
    assert report.first_drift_level <= deleted
    assert report.drift.max() == 1


def test_scaled_graph_scales_spectrum(k4_graph, k4_spectrum):
    scaled = ss.solve(k4_graph.scaled(2.0), 20)
    np.testing.assert_allclose(scaled.values, k4_spectrum.values[:20] / 2.0, rtol=1e-8)


def test_solve_rejects_non_positive_count():
    with pytest.raises(ParameterError):
        ss.solve(gm.interval(1.0), 0)


def test_solver_config_validation():
    with pytest.raises(ParameterError):
        ss.SolverConfig(refine_tolerance=0.0)
    with pytest.raises(ParameterError):
        ss.SolverConfig(scan_step_factor=2.0)


def test_spectrum_invariants():
    with pytest.raises(ParameterError):
        ss.Spectrum([1.0, -2.0])
    with pytest.raises(ParameterError):
        ss.Spectrum([2.0, 1.0])
    with pytest.raises(ParameterError):
        ss.Spectrum([1.0], provenance="guessed")
    spectrum = ss.Spectrum([1.0, 2.0, 3.0])
    assert spectrum.without([2]).values.tolist() == [1.0, 3.0]
    assert spectrum.head(2).values.tolist() == [1.0, 2.0]
    assert list(spectrum.to_frame().columns) == ["index", "k"]


def test_spectrum_file_round_trip(tmp_path, k4_spectrum):
    path = ss.write_spectrum(k4_spectrum, tmp_path / "out" / "k4.csv")
    restored = ss.read_spectrum(path)
    np.testing.assert_allclose(restored.values, k4_spectrum.values, rtol=1e-14)
    assert restored.provenance == "solved"
    assert path.read_text().splitlines()[0] == "# unit=k_per_m, provenance=solved"


def test_spectrum_output_is_deterministic():
    star = gm.star_graph([0.3, 0.7, 1.1])
    assert ss.spectrum_to_csv(ss.solve(star, 30)) == ss.spectrum_to_csv(ss.solve(star, 30))


def test_read_spectrum_rejects_bad_files(tmp_path):
    path = tmp_path / "s.csv"
    path.write_text("1,3.14\n")
    with pytest.raises(FileFormatError, match="header"):
        ss.read_spectrum(path)
    path.write_text("# unit=k_per_m, provenance=solved\n1,3.0\n3,2.0\n")
    with pytest.raises(FileFormatError):
        ss.read_spectrum(path)
    with pytest.raises(FileFormatError, match="not found"):
        ss.read_spectrum(tmp_path / "missing.csv")


def test_weyl_lower_bound_on_interval():
    graph = gm.interval(2.0)
    spectrum = ss.solve(graph, 10)
    report = ss.verify_weyl(spectrum, graph)
    assert report.passed
    assert report.weyl_residual == pytest.approx(0.0, abs=1e-8)
    assert math.isclose(report.residual_bound, 2.0)


def test_k5_count_at_top_of_measured_band(k5_graph):
    # 5.12 GHz in vacuum
    k = 2 * np.pi * 5.12 / 0.299792458
    assert abs(ss.counting_function(k5_graph, k) - 132) <= 3


@pytest.mark.parametrize("fixture", ["k4", "k5"])
def test_counting_function_upper_bound(fixture, request):
    graph = request.getfixturevalue(f"{fixture}_graph")
    values = request.getfixturevalue(f"{fixture}_spectrum").values
    mids = 0.5 * (values[:-1] + values[1:])
    gaps = np.diff(values) > 1e-6 * values[1:]
    for k in mids[gaps][::7]:
        assert ss.counting_function(graph, k) <= graph.total_length * k / np.pi + graph.vertex_count - 1


def test_bond_evolution_unitary_on_random_samples():
    rng = np.random.default_rng(11)
    for seed in range(100):
        n = int(rng.integers(3, 7))
        m = int(rng.integers(n - 1, n * (n - 1) // 2 + 1))
        graph = gm.gen_random_connected(n, m, (0.05, 0.05 * m + rng.uniform(0.1, 3.0)), seed=seed)
        U = ss.bond_evolution(graph, float(rng.uniform(0.1, 200.0)))
        np.testing.assert_allclose(U @ U.conj().T, np.eye(2 * m), atol=1e-10)
