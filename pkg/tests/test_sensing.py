import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from colloidrl.core import Colloid
from colloidrl.sensing import (
    ConcentrationChange,
    ConcentrationField,
    ConcentrationValue,
    MultiSensing,
    PositionDirector,
    VisionCones,
    cone_index,
)


def col(x, y, d=(1.0, 0.0), i=0, t=0):
    return Colloid(pos=(x, y), director=d, id=i, type=t)


def test_position_director_values():
    obs = PositionDirector((10, 10))
    np.testing.assert_allclose(obs([col(5, 5)]).values, [[0.5, 0.5, 1, 0]])
    np.testing.assert_allclose(obs([col(0, 0)]).values[0, :2], [0, 0])


def test_position_director_ignores_other_species():
    obs = PositionDirector((10, 10), particle_type=1)
    out = obs([col(1, 1, t=0), col(2, 2, i=1, t=1)])
    assert out.values.shape == (1, 4)


@given(st.lists(st.tuples(st.floats(0, 7), st.floats(0, 3)), min_size=1, max_size=8))
def test_position_round_trip(points):
    obs = PositionDirector((7.0, 3.0))
    cs = [col(x, y, i=k) for k, (x, y) in enumerate(points)]
    v = obs(cs).values
    assert np.all((v[:, :2] >= 0) & (v[:, :2] <= 1))
    np.testing.assert_allclose(obs.denormalize(v), np.array(points), atol=1e-12)


def test_gaussian_field_peaks_at_source():
    f = ConcentrationField((0.0, 0.0), "gaussian", 2.0, 1.5)
    r = np.array([[0, 0], [1, 0], [0, 3]], dtype=float)
    v = f(r)
    assert v[0] == pytest.approx(2.0)
    assert np.all(v > 0) and v[0] > v[1] > v[2]


def test_inverse_distance_field():
    f = ConcentrationField((0.0, 0.0), "inverse_distance", 1.0, 0.5)
    np.testing.assert_allclose(f(np.array([[2.0, 0.0]])), [1 / 2.5])


def test_concentration_change_sequence():
    field = ConcentrationField((0.0, 0.0), "gaussian", 1.0, 1.0)
    obs = ConcentrationChange(field)
    assert obs([col(2, 0)]).values[0, 0] == 0.0  # no history yet
    dc = obs([col(1, 0)]).values[0, 0]
    assert dc == pytest.approx(math.exp(-0.5) - math.exp(-2.0), abs=1e-12)
    assert dc == pytest.approx(0.4712, abs=1e-4)
    assert obs([col(1, 0)]).values[0, 0] == 0.0  # stationary
    assert obs([col(0.5, 0)]).values[0, 0] > 0  # toward source


def test_concentration_change_forgets_on_reset():
    obs = ConcentrationChange(ConcentrationField((0.0, 0.0)))
    obs([col(2, 0)])
    obs.reset()
    assert obs([col(1, 0)]).values[0, 0] == 0.0


def test_concentration_value_scaled():
    f = ConcentrationField((0.0, 0.0), "gaussian", 1.0, 1.0)
    out = ConcentrationValue(f, scale=3.0)([col(0, 0), col(1, 0, i=1)]).values[:, 0]
    np.testing.assert_allclose(out, [3.0, 3.0 * math.exp(-0.5)])


# --- vision cones ------------------------------------------------------------


def test_empty_neighbourhood():
    vc = VisionCones((20, 20), n_cones=5, radius=2.0)
    assert not vc([col(10, 10), col(15, 15, i=1)]).values.any()


def test_neighbour_straight_ahead():
    vc = VisionCones((20, 20), n_cones=5, radius=2.0)
    out = vc([col(10, 10), col(11, 10, i=1)]).values[0]
    np.testing.assert_array_equal(out, [1, 0, 0, 0, 0])


def test_neighbour_beyond_radius():
    vc = VisionCones((20, 20), n_cones=5, radius=2.0)
    assert not vc([col(10, 10), col(14, 10, i=1)]).values[0].any()


def test_default_radius_quarter_box():
    assert VisionCones((20, 40)).radius == 5.0


def test_brute_force_sector_assignment(rng):
    # oracle: the sector whose centre k*w is angularly closest
    n = 7
    w = 2 * math.pi / n
    for a in rng.uniform(-math.pi, math.pi, 500):
        gaps = [abs(math.remainder(a - k * w, 2 * math.pi)) for k in range(n)]
        assert cone_index(a, n) == int(np.argmin(gaps))


def test_boundary_goes_to_lower_sector():
    w = 2 * math.pi / 4
    assert cone_index(0.5 * w, 4) == 0
    assert cone_index(1.5 * w, 4) == 1


def test_type_resolved_layout():
    vc = VisionCones((20, 20), n_cones=2, radius=3.0, observed_types=[0, 1])
    cs = [col(10, 10), col(11, 10, i=1, t=1), col(9, 10, i=2, t=0), col(10.5, 10.2, i=3, t=1)]
    out = vc(cs).values[0]
    # [sector][type]: ahead holds two type-1 particles, behind one type-0
    np.testing.assert_array_equal(out, [0, 2, 1, 0])


def test_counts_across_periodic_boundary():
    vc = VisionCones((20, 20), n_cones=4, radius=2.0, boundary="periodic")
    out = vc([col(19.5, 10), col(0.5, 10, i=1)]).values[0]
    assert out[0] == 1


def test_field_of_view_hides_particles_behind():
    vc = VisionCones((20, 20), n_cones=4, radius=3.0, field_of_view=math.pi)
    out = vc([col(10, 10), col(8, 10, i=1)]).values
    assert not out[0].any()
    assert out[1, 0] == 1  # the other one sees the first straight ahead


@given(st.floats(-math.pi, math.pi))
def test_cones_rotation_equivariant(phi):
    rng = np.random.default_rng(4)
    pts = rng.uniform(-3, 3, size=(12, 2))
    dirs = rng.normal(size=(12, 2))
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    rot = np.array([[math.cos(phi), -math.sin(phi)], [math.sin(phi), math.cos(phi)]])
    vc = VisionCones((100, 100), n_cones=6, radius=2.5, boundary="reflecting")

    def build(p, d):
        return [col(50 + p[k, 0], 50 + p[k, 1], tuple(d[k]), i=k) for k in range(12)]

    a = vc(build(pts, dirs)).values
    b = vc(build(pts @ rot.T, dirs @ rot.T)).values
    # a neighbour can land exactly on a sector edge only with probability zero
    np.testing.assert_array_equal(a, b)


# --- multi sensing -----------------------------------------------------------


def test_single_sub_observable_is_identity():
    cs = [col(1, 2), col(3, 4, i=1)]
    pd = PositionDirector((10, 10))
    np.testing.assert_array_equal(MultiSensing([pd])(cs).values, pd(cs).values)


def test_segments_and_offsets():
    f = ConcentrationField((5.0, 5.0))
    ms = MultiSensing([ConcentrationValue(f), PositionDirector((10, 10))])
    out = ms([col(1, 2), col(3, 4, i=1)])
    assert out.width == 5 == ms.size
    assert [(s.offset, s.length) for s in out.layout] == [(0, 1), (1, 4)]
    np.testing.assert_array_equal(out.segment("position_director"), PositionDirector((10, 10))([col(1, 2), col(3, 4, i=1)]).values)


def test_two_and_three_wide_segments():
    f = ConcentrationField((5.0, 5.0))
    vc = VisionCones((10, 10), n_cones=3, radius=1.0)
    ms = MultiSensing([MultiSensing([ConcentrationValue(f), ConcentrationValue(f, scale=2)]), vc])
    out = ms([col(1, 2)])
    assert [(s.offset, s.length) for s in out.layout] == [(0, 2), (2, 3)]


def test_order_swap_permutes_segments():
    f = ConcentrationField((5.0, 5.0))
    cs = [col(1, 2, d=(0, 1)), col(3, 4, i=1)]
    a = MultiSensing([ConcentrationValue(f), PositionDirector((10, 10))])(cs).values
    b = MultiSensing([PositionDirector((10, 10)), ConcentrationValue(f)])(cs).values
    np.testing.assert_array_equal(np.roll(a, -1, axis=1), b)
    for r in range(2):
        assert sorted(a[r]) == sorted(b[r])


def test_inconsistent_rows_rejected():
    ms = MultiSensing([PositionDirector((10, 10), 0), PositionDirector((10, 10), 1)])
    with pytest.raises(ValueError, match="rows"):
        ms([col(1, 1), col(2, 2, i=1), col(3, 3, i=2, t=1)])


def test_repeated_evaluation_is_idempotent():
    cs = [col(1, 2), col(3, 4, i=1, d=(0, 1))]
    obs = VisionCones((10, 10), radius=5)
    np.testing.assert_array_equal(obs(cs).values, obs(cs).values)
