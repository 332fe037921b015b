import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.cluster.hierarchy import fcluster, linkage
from scipy.spatial.distance import pdist

from icesync.attractors import (N_CAP, NSaturated, count_clusters, default_t0, evolve_section,
                                grid_ics, locate_attractors, random_ics)
from icesync.forcing import insolation, sinusoid
from icesync.lyapunov import long_term_spectrum
from icesync.oscillator import OscillatorParams

P = OscillatorParams()


def test_identical_points_one_cluster():
    r = count_clusters(np.tile([0.3, -0.2], (10, 1)))
    assert r.N == 1
    assert r.clusters[0].diameter == 0.0


def test_threshold_is_inclusive_at_d_T():
    assert count_clusters([[0, 0], [0.2, 0]], 0.1).N == 2
    assert count_clusters([[0, 0], [0.1, 0]], 0.1).N == 1


def test_chains_link_single_linkage():
    pts = np.column_stack([np.arange(10) * 0.09, np.zeros(10)])
    r = count_clusters(pts, 0.1)
    assert r.N == 1
    assert r.clusters[0].diameter == pytest.approx(0.81)


def test_empty_input_and_bad_threshold():
    r = count_clusters(np.zeros((0, 2)))
    assert r.N == 0 and r.clusters == []
    with pytest.raises(ValueError):
        count_clusters([[0, 0]], 0.0)


def test_saturation_and_min_size():
    pts = np.column_stack([np.arange(7) * 1.0, np.zeros(7)])
    r = count_clusters(pts, 0.1)
    assert r.N == N_CAP and r.saturated and r.n_raw == 7
    # singletons are stragglers under the attractor-count protocol
    pts = np.array([[0, 0], [0.01, 0], [1, 1], [1.01, 1], [5, 5]])
    r = count_clusters(pts, 0.1, min_size=2)
    assert r.N == 2
    assert r.stragglers.tolist() == [4]
    assert count_clusters([[0, 0], [3, 3]], 0.1, min_size=2).N == N_CAP


point_sets = st.lists(st.tuples(st.floats(-2, 2), st.floats(-2, 2)), min_size=2, max_size=40)


@settings(max_examples=80, deadline=None)
@given(point_sets, st.floats(0.02, 0.5))
def test_matches_scipy_single_linkage(pts, d_T):
    pts = np.array(pts)
    ref = fcluster(linkage(pdist(pts), "single"), t=d_T, criterion="distance")
    r = count_clusters(pts, d_T, cap=10 ** 6)
    assert r.n_raw == len(np.unique(ref))
    for c in r.clusters:
        assert len(np.unique(ref[c.members])) == 1
        assert np.sum(ref == ref[c.members[0]]) == c.size


@settings(max_examples=40, deadline=None)
@given(point_sets, st.randoms(use_true_random=False))
def test_permutation_invariant(pts, rnd):
    pts = np.array(pts)
    perm = list(range(len(pts)))
    rnd.shuffle(perm)
    a = count_clusters(pts, 0.1)
    b = count_clusters(pts[perm], 0.1, index=np.array(perm))
    assert a.N == b.N
    assert [c.members.tolist() for c in a.clusters] == [c.members.tolist() for c in b.clusters]


def test_grid_and_random_ics():
    g = grid_ics()
    assert g.shape == (49, 2)
    assert g[0].tolist() == [-2.2, -2.2] and g[1, 1] == -2.2
    r = random_ics(70, seed=0)
    assert r.shape == (70, 2) and np.all(np.abs(r) <= 2.2)
    np.testing.assert_array_equal(r, random_ics(70, seed=0))


def test_default_t0_conventions():
    assert default_t0(sinusoid(period=41.0)) == -1640.0
    assert default_t0(insolation()) == -1600.0
    assert default_t0(None, 100.0) == -1500.0


def test_evolve_section_zero_gap_returns_ics():
    ics = grid_ics()
    sec = evolve_section(ics, 5.0, 5.0, P, sinusoid())
    np.testing.assert_array_equal(sec.points, ics)
    assert len(sec) == 49 and len(sec.diverged) == 0


def test_sine_two_groups(sine_locked, fine):
    p, f = sine_locked
    sec = evolve_section(random_ics(70, seed=0), 0.0, 550.0, p, f, fine)
    assert count_clusters(sec.points, 0.1, min_size=2).N == 2


def test_astro_grid_three_attractors(astro_three):
    p, f = astro_three
    ats = locate_attractors(p, f)
    assert len(ats.points) == 3
    assert ats.min_distance > 0.1


def test_unforced_saturates():
    with pytest.raises(NSaturated) as e:
        locate_attractors(P, None, t0=-500.0)
    assert e.value.report.saturated


def test_large_gamma_is_monostable():
    ats = locate_attractors(P.with_(gamma=10.0), sinusoid())
    assert len(ats.points) == 1


def test_diameters_shrink_when_contracting(sine_locked):
    p, f = sine_locked
    assert long_term_spectrum(p, f, t_total=1500, transient=300).lambda_max < 0
    ics = grid_ics()
    a = evolve_section(ics, -1640.0, 0.0, p, f)
    b = evolve_section(ics, -1640.0, 200.0, p, f)
    ra, rb = count_clusters(a.points, min_size=2), count_clusters(b.points, min_size=2)
    assert ra.N == rb.N == 2
    for ca, cb in zip(sorted(ra.clusters, key=lambda c: c.members[0]),
                      sorted(rb.clusters, key=lambda c: c.members[0])):
        assert cb.diameter <= ca.diameter


def test_report_to_dict():
    d = count_clusters([[0, 0], [0.05, 0], [1, 1]], 0.1).to_dict()
    assert d["N"] == 2
    assert len(d["clusters"]) == 2
