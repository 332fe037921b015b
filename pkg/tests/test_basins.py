import json

import numpy as np
import pytest

from icesync.attractors import locate_attractors
from icesync.basins import (UNRESOLVED, BasinMap, DegenerateAttractors, GridSpec, _boundary_flags,
                            basin_areas, basin_sequence, capture_radius, classify_grid,
                            continue_attractors, jump_detect)
from icesync.forcing import sinusoid
from icesync.integrator import IntegratorConfig
from icesync.oscillator import OscillatorParams, SystemState
from icesync.provenance import read_csv, read_json

SMALL = GridSpec(51, 31)


def hand_map(labels, n_at=2):
    labels = np.asarray(labels)
    g = GridSpec(labels.shape[1], labels.shape[0])
    ats = np.column_stack([np.arange(n_at), np.zeros(n_at)]).astype(float)
    return BasinMap(0.0, 1.0, g, labels, ats, capture_radius(ats))


def test_hand_built_areas():
    np.testing.assert_allclose(basin_areas(hand_map([[0, 0], [1, UNRESOLVED]])), [2 / 3, 1 / 3])
    assert basin_areas(hand_map([[0, 0]], n_at=1)).tolist() == [1.0]
    with pytest.raises(ValueError):
        basin_areas(hand_map([[UNRESOLVED, UNRESOLVED]]))


def test_capture_radius_rule():
    ats = [[0, 0], [1, 0], [0, 3]]
    assert capture_radius(ats) == 0.25
    assert capture_radius([[0.4, 0.1]]) == float("inf")
    with pytest.raises(DegenerateAttractors):
        capture_radius([[0, 0], [0, 1e-9]])


@pytest.fixture(scope="module")
def sine_ats():
    p, f = OscillatorParams(gamma=3.33, tau=35.09), sinusoid()
    ats = locate_attractors(p, f, t_section=0.0)
    at600 = continue_attractors(ats.points, 0.0, [600.0], p, f)[0]
    return p, f, ats.points, at600


def test_ic_on_attractor_gets_its_label(sine_ats):
    p, f, at0, at600 = sine_ats
    for k, (x, y) in enumerate(at0):
        g = GridSpec(1, 1, (x, x + 1.0), (y, y + 1.0))
        m = classify_grid(p, f, g, 0.0, 600.0, at600)
        assert m.labels[0, 0] == k


def test_labels_independent_of_at_order(sine_ats):
    p, f, at0, at600 = sine_ats
    a = classify_grid(p, f, GridSpec(26, 16), 0.0, 600.0, at600)
    b = classify_grid(p, f, GridSpec(26, 16), 0.0, 600.0, at600[::-1])
    flipped = np.where(b.labels == UNRESOLVED, UNRESOLVED, len(at600) - 1 - b.labels)
    np.testing.assert_array_equal(a.labels, flipped)
    assert a.capture_radius == pytest.approx(0.25 * np.linalg.norm(at600[0] - at600[1]))


def test_single_attractor_map():
    p, f = OscillatorParams(gamma=10.0, tau=35.09), sinusoid()
    m = basin_sequence(p, f, GridSpec(21, 11), [0.0])[0]
    assert m.n_basins == 1
    assert set(np.unique(m.labels)) <= {0, UNRESOLVED}
    assert basin_areas(m).tolist() == [1.0]


def test_boundary_flag_synthetic():
    g = GridSpec(11, 11, (0.0, 10.0), (0.0, 10.0))
    labels = np.zeros((11, 11), dtype=int)
    labels[:, 6:] = 1
    at = np.array([[5.0, 5.0], [9.0, 5.0]])
    assert _boundary_flags(g, labels, at) == [True, False]
    at_far = np.array([[1.0, 5.0], [9.0, 5.0]])
    assert _boundary_flags(g, labels, at_far) == [False, False]


def test_singleton_sequence_equals_classify_grid(sine_ats):
    p, f, at0, _ = sine_ats
    seq = basin_sequence(p, f, SMALL, [0.0])
    assert len(seq) == 1
    at600 = continue_attractors(seq[0].at_points_t0, 0.0, [600.0], p, f)[0]
    direct = classify_grid(p, f, SMALL, 0.0, 600.0, at600)
    np.testing.assert_array_equal(seq[0].labels, direct.labels)


def test_refinement_keeps_areas(sine_locked, astro_three):
    for p, f in (sine_locked, astro_three):
        a = basin_areas(basin_sequence(p, f, SMALL, [0.0])[0])
        b = basin_areas(basin_sequence(p, f, SMALL.refined(2), [0.0])[0])
        assert np.abs(a - b).max() < 0.02


def test_sine_pattern_is_82_kyr_periodic(sine_locked):
    p, f = sine_locked
    a, b = basin_sequence(p, f, SMALL, [0.0, 82.0])
    res = (a.labels != UNRESOLVED) & (b.labels != UNRESOLVED)
    assert np.mean(a.labels[res] == b.labels[res]) >= 0.99


def test_sine_basins_equal_on_average_over_locking_period(sine_locked):
    p, f = sine_locked
    t0s = np.arange(8) * 10.25
    maps = basin_sequence(p, f, GridSpec(26, 16), t0s)
    mean = np.mean([basin_areas(m) for m in maps], axis=0)
    np.testing.assert_allclose(mean, [0.5, 0.5], atol=0.1)


def test_astro_smallest_basin_changes(astro_three):
    p, f = astro_three
    a, b = basin_sequence(p, f, SMALL, [0.0, 90.0])
    aa, ab = basin_areas(a), basin_areas(b)
    assert a.n_basins == 3 and np.all(aa > 0)
    k = int(aa.argmin())
    assert abs(ab[k] - aa[k]) / aa[k] > 0.2


def test_map_save(tmp_path, sine_ats):
    p, f, _, at600 = sine_ats
    m = classify_grid(p, f, GridSpec(5, 4), 0.0, 600.0, at600)
    m.save(tmp_path / "b.csv", {"seed": 0})
    header, rows = read_csv(tmp_path / "b.csv")
    assert header == ["ix", "iy", "x0", "y0", "label"]
    assert len(rows) == 20
    side = read_json(tmp_path / "b.json")
    assert side["capture_radius"] == m.capture_radius
    assert json.dumps(side)


def test_jumps_need_noise(sine_ats):
    p, f, at0, _ = sine_ats
    ic = SystemState(float(at0[0, 0]), float(at0[0, 1]), 0.0)
    assert jump_detect(p, f, IntegratorConfig(h=0.05), ic, 300.0, at0) == []
    tiny = IntegratorConfig(h=0.05, noise_b=1e-4, seed=3)
    assert jump_detect(p, f, tiny, ic, 300.0, at0) == []
