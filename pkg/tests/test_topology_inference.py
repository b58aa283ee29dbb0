import numpy as np
import pytest

from modules import graph_model as gm
from modules import topology_inference as ti
from modules.errors import InconsistentInputError, ParameterError
from modules.spectrum_solver import Spectrum

COMPLETE_CHI = {1, 0, -2, -5, -9, -14}


@pytest.mark.parametrize(
    "chi, beta, planarity, vertices",
    [
        (-2, 3, ti.PLANAR, 4),
        (-5, 6, ti.UNKNOWN, 5),
        (-3, 4, ti.UNKNOWN, None),
        (1, 0, ti.PLANAR, 2),
        (0, 1, ti.PLANAR, 3),
    ],
)
def test_infer(chi, beta, planarity, vertices):
    report = ti.infer(chi)
    assert report.beta == beta
    assert report.planarity == planarity
    assert report.complete_vertices == vertices
    assert report.total_length_estimate is None


def test_infer_rejects_impossible_chi():
    with pytest.raises(InconsistentInputError):
        ti.infer(2)


def test_caveats_are_reported():
    report = ti.infer(-5)
    assert any("non-planar" in c for c in report.caveats)
    assert any("K_5" in c for c in report.caveats)
    assert ti.infer(-3).caveats and not any("K_" in c for c in ti.infer(-3).caveats)


def test_report_serialization():
    data = ti.infer(-2).as_dict()
    assert data["completeness"] == {"complete": True, "vertices": 4}
    assert ti.infer(-3).as_dict()["completeness"] == {"complete": False}
    assert '"beta": 3' in ti.infer(-2).to_json()


@pytest.mark.parametrize("n", range(3, 8))
def test_complete_graphs_are_recognised(n):
    m = n * (n - 1) // 2
    graph = gm.gen_complete(n, (0.1, 0.1 * m + 1.0), seed=n)
    assert ti.infer(gm.summarize(graph).chi).complete_vertices == n


def test_complete_chi_values_are_exactly_the_collisions():
    assert {ti.complete_graph_chi(n) for n in range(2, 8)} == COMPLETE_CHI
    up_to_k8 = {ti.complete_graph_chi(n) for n in range(2, 9)}
    for chi in range(-20, 2):
        assert (ti.complete_vertices(chi) is not None) == (chi in up_to_k8)


@pytest.mark.parametrize("seed", range(20))
def test_random_graphs_only_match_on_collisions(seed):
    rng = np.random.default_rng(100 + seed)
    n = int(rng.integers(4, 7))
    m = int(rng.integers(n - 1, n * (n - 1) // 2))
    chi = gm.summarize(gm.gen_random_connected(n, m, (0.05, 1.0), seed=seed)).chi
    report = ti.infer(chi)
    if chi not in COMPLETE_CHI:
        assert report.complete_vertices is None


def test_total_length_of_interval(interval_spectrum):
    assert ti.estimate_total_length(interval_spectrum) == pytest.approx(1.0, rel=1e-3)


def test_total_length_of_k5(k5_spectrum_150):
    assert ti.estimate_total_length(k5_spectrum_150) == pytest.approx(3.949, rel=0.02)


def test_total_length_scaling(interval_spectrum):
    assert ti.estimate_total_length(interval_spectrum.scaled(2.0)) == pytest.approx(0.5, rel=1e-3)


def test_total_length_needs_levels():
    with pytest.raises(ParameterError):
        ti.estimate_total_length(Spectrum(np.arange(1, 11) * np.pi))


def test_with_length_attaches_estimate(interval_spectrum):
    report = ti.with_length(ti.infer(1), interval_spectrum)
    assert report.total_length_estimate == pytest.approx(1.0, rel=1e-3)


def test_total_length_error_shrinks_with_more_levels(interval_spectrum):
    errors = [abs(ti.estimate_total_length(interval_spectrum.head(n)) - 1.0) for n in (50, 100, 150, 200)]
    for before, after in zip(errors, errors[1:]):
        assert after <= before + 0.005
    assert errors[-1] < 1e-3
