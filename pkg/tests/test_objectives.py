import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from colloidrl.core import Colloid
from colloidrl.engine import rod_colloids
from colloidrl.objectives import (
    GradientTask,
    KillConditions,
    KillSwitchTask,
    Multitasking,
    RotateRod,
    Task,
    aggregate_rewards,
    kill_switch_condition,
)
from colloidrl.sensing import ConcentrationField


def col(x, y, i=0, t=0):
    return Colloid(pos=(x, y), director=(1, 0), id=i, type=t)


class Constant(Task):
    def __init__(self, value, kill=False):
        super().__init__(0)
        self.value = value
        self.kill = kill

    def __call__(self, colloids):
        self._raise_kill(self.kill)
        return np.full(len(colloids), float(self.value))


# --- rod rotation ------------------------------------------------------------


def _scene(angle):
    return [col(1, 1, i=100), col(2, 1, i=101)] + rod_colloids(5, (10, 10), 1.0, angle, ptype=1)


def test_rod_reward_sequence():
    task = RotateRod(rod_type=1, particle_type=0, scale=10.0)
    np.testing.assert_array_equal(task(_scene(0.3)), [0, 0])
    np.testing.assert_array_equal(task(_scene(0.3)), [0, 0])
    np.testing.assert_allclose(task(_scene(0.4)), [1.0, 1.0], rtol=1e-10)
    np.testing.assert_allclose(task(_scene(0.3)), [-1.0, -1.0], rtol=1e-10)


def test_rod_direction_flips_sign():
    task = RotateRod(1, 0, scale=10.0, direction=-1)
    task(_scene(0.3))
    np.testing.assert_allclose(task(_scene(0.4)), [-1.0, -1.0], rtol=1e-10)


def test_rod_angle_wraps_through_pi():
    task = RotateRod(1, 0, scale=1.0)
    task(_scene(math.pi - 0.05))
    np.testing.assert_allclose(task(_scene(math.pi + 0.05)), [0.1, 0.1], rtol=1e-9)


def test_rod_reset_forgets_previous_angle():
    task = RotateRod(1, 0)
    task(_scene(0.3))
    task.reset()
    assert not task(_scene(1.0)).any()


def test_missing_rod_rejected():
    with pytest.raises(ValueError, match="rod species"):
        RotateRod(1, 0, colloids=[col(1, 1)])


def test_rod_across_periodic_boundary():
    rod = rod_colloids(4, (0.0, 5.0), 1.0, 0.0, ptype=1)
    wrapped = [Colloid(pos=(c.pos[0] % 20, c.pos[1]), director=c.director, id=c.id, type=1) for c in rod]
    task = RotateRod(1, 0, box=(20, 20), boundary="periodic")
    angle = task.rod_angle(wrapped)
    assert min(angle, math.pi - angle) < 1e-12


# --- gradient ----------------------------------------------------------------


def test_gradient_reward_shares_the_sensing_case():
    task = GradientTask(ConcentrationField((0.0, 0.0), "gaussian", 1.0, 1.0), scale=10.0)
    assert task([col(2, 0)])[0] == 0.0
    assert task([col(1, 0)])[0] == pytest.approx(10 * (math.exp(-0.5) - math.exp(-2)), abs=1e-12)
    assert task([col(1, 0)])[0] == 0.0


def test_gradient_clipping():
    f = ConcentrationField((0.0, 0.0))
    clipped, signed = GradientTask(f), GradientTask(f, clip=False)
    for t in (clipped, signed):
        t([col(1, 0)])
    assert clipped([col(2, 0)])[0] == 0.0
    assert signed([col(2, 0)])[0] < 0


def test_gradient_never_kills():
    task = GradientTask(ConcentrationField((0.0, 0.0)))
    assert not task.evaluate([col(1, 0)]).kill


# --- multitasking ------------------------------------------------------------


def test_multitasking_identity_and_weights():
    cs = [col(0, 0), col(1, 1, i=1)]
    np.testing.assert_array_equal(Multitasking([Constant(3.0)])(cs), [3, 3])
    np.testing.assert_array_equal(Multitasking([Constant(1), Constant(2)], [0.5, 0.5])(cs), [1.5, 1.5])


def test_multitasking_weight_mismatch():
    with pytest.raises(ValueError, match="weights"):
        Multitasking([Constant(1)], [1, 2])


def test_multitasking_kill_is_or():
    m = Multitasking([Constant(1), Constant(0, kill=True)])
    out = m.evaluate([col(0, 0)])
    assert out.kill


@given(st.floats(-10, 10), st.lists(st.floats(-5, 5), min_size=2, max_size=2))
def test_multitasking_linear_in_weights(alpha, w):
    cs = [col(0, 0)]
    base = Multitasking([Constant(1.5), Constant(-2.0)], w)(cs)
    scaled = Multitasking([Constant(1.5), Constant(-2.0)], [alpha * x for x in w])(cs)
    np.testing.assert_allclose(scaled, alpha * base, atol=1e-12)


# --- kill switch -------------------------------------------------------------


def test_kill_conditions():
    cs = [col(5, 5)]
    assert not kill_switch_condition(cs, KillConditions())
    assert kill_switch_condition([col(11, 5)], KillConditions(safe_region=[[0, 10], [0, 10]]))
    assert not kill_switch_condition(cs, KillConditions(safe_region=[[0, 10], [0, 10]]))
    assert kill_switch_condition(cs, KillConditions(max_slices=3), n_slices=3)


def test_success_threshold_on_constructed_state():
    f = ConcentrationField((0.0, 0.0), "gaussian", 1.0, 1.0)
    near = [col(0.1, 0), col(0, 0.2, i=1)]
    mean = np.mean([math.exp(-0.01 / 2), math.exp(-0.04 / 2)])
    assert kill_switch_condition(near, KillConditions(field=f, success_threshold=mean - 1e-9))
    assert not kill_switch_condition(near, KillConditions(field=f, success_threshold=mean + 1e-9))


def test_kill_latches_until_reset():
    task = KillSwitchTask(KillConditions(safe_region=[[0, 10], [0, 10]]))
    assert not task.evaluate([col(5, 5)]).kill
    assert task.evaluate([col(15, 5)]).kill
    assert task.evaluate([col(5, 5)]).kill
    task.reset()
    assert not task.evaluate([col(5, 5)]).kill


def test_kill_after_max_slices():
    task = KillSwitchTask(KillConditions(max_slices=3))
    flags = [task.evaluate([col(5, 5)]).kill for _ in range(4)]
    assert flags == [False, False, True, True]


# --- aggregation -------------------------------------------------------------


def test_aggregation_examples():
    np.testing.assert_array_equal(aggregate_rewards([1, 2, 3]), [1, 2, 3])
    np.testing.assert_array_equal(aggregate_rewards([1, 2, 3], "team_average"), [2, 2, 2])
    with pytest.raises(ValueError, match="empty"):
        aggregate_rewards([], "team_average")
    with pytest.raises(ValueError, match="reward mode"):
        aggregate_rewards([1.0], "zero_sum")


@given(st.floats(-100, 100), st.integers(1, 20))
def test_modes_agree_on_equal_rewards(v, n):
    r = np.full(n, v)
    # the mean of equal floats may differ from them by rounding
    np.testing.assert_allclose(aggregate_rewards(r, "individual"), aggregate_rewards(r, "team_average"), rtol=1e-14)
