from fractions import Fraction

import numpy as np
import pytest

from tightriesz.linalg import BlockShape, block_hermitian_basis
from tightriesz.opsys import SystemError_, generated_algebra, make_full, make_linf, make_subsystem
from tightriesz.riesz import (
    InterpolationInstance,
    Status,
    check_interpolant,
    cstr_instance_check,
    interpolant,
    interpolate,
    lemma_crosscheck,
    tr_instance_check,
)
from tightriesz.standard import NP_INTERPOLANT, NP_LOWER, NP_UPPER, v_system


def test_example_interpolation_in_linf4():
    inst = InterpolationInstance(make_linf(4), NP_LOWER, NP_UPPER)
    v = interpolate(inst)
    assert v.feasible and v.exact and v.witness.delta >= Fraction(1, 2)
    assert check_interpolant(inst, NP_INTERPOLANT, 0.5)


def test_example_no_interpolation_in_v():
    v = interpolate(InterpolationInstance(v_system(), NP_LOWER, NP_UPPER))
    assert v.infeasible and v.exact and v.certificate is not None


def test_zero_unit_trivial():
    for s in (make_linf(3), make_full(2), v_system()):
        inst = InterpolationInstance(s, (np.zeros((s.ambient.dim,) * 2),), (s.unit,))
        v = interpolate(inst)
        assert v.feasible
        assert float(v.witness.delta) == pytest.approx(0.5, abs=1e-6)
        assert np.allclose(interpolant(inst, v), s.unit / 2, atol=1e-6)


def test_instance_validation():
    with pytest.raises(ValueError):
        InterpolationInstance(make_linf(2), (), (np.eye(2),))
    with pytest.raises(SystemError_):
        InterpolationInstance(make_linf(2), (np.eye(3),), (np.eye(2),))
    with pytest.raises(SystemError_):
        tr_instance_check(v_system(), make_linf(4), [np.diag([1.0, 1, -1, -1])], [np.eye(4)])


def random_diag_instance(rng, s, n, k):
    lower = tuple(s.element(rng.integers(-3, 4, size=s.dim).astype(float)) for _ in range(n))
    upper = tuple(s.element(rng.integers(-3, 4, size=s.dim).astype(float)) + 4 * s.unit for _ in range(k))
    return InterpolationInstance(s, lower, upper)


@pytest.mark.parametrize("seed", range(10))
def test_shift_and_scale_invariance(seed):
    rng = np.random.default_rng(seed)
    inst = random_diag_instance(rng, v_system(), 2, 2)
    st = interpolate(inst).status
    assert interpolate(inst.shifted(3.0)).status is st
    assert interpolate(inst.shifted(-1.5)).status is st
    assert interpolate(inst.scaled(0.25)).status is st
    assert interpolate(inst.scaled(8.0)).status is st


@pytest.mark.parametrize("seed", range(10))
def test_monotonicity(seed):
    rng = np.random.default_rng(100 + seed)
    s = v_system()
    inst = random_diag_instance(rng, s, 2, 2)
    more = InterpolationInstance(s, inst.lower + random_diag_instance(rng, s, 1, 1).lower, inst.upper)
    if interpolate(inst).infeasible:
        assert interpolate(more).infeasible
    if interpolate(more).feasible:
        assert interpolate(inst).feasible


def test_tr_records():
    rec = tr_instance_check(v_system(), make_linf(4), NP_LOWER, NP_UPPER)
    assert rec.feasible_in_big and not rec.feasible_in_small and rec.violation and rec.holds is False
    same = tr_instance_check(v_system(), v_system(), NP_LOWER, NP_UPPER)
    assert same.holds


def test_diagonal_pair_tr_holds_on_samples():
    big = make_linf(4)
    small = make_subsystem(big, [np.diag([1.0, 1, 0, 0])])
    rng = np.random.default_rng(9)
    for _ in range(20):
        inst = random_diag_instance(rng, small, 2, 2)
        assert tr_instance_check(small, big, inst.lower, inst.upper).holds


def test_cstr():
    rec = cstr_instance_check(v_system(), make_linf(4), NP_LOWER, NP_UPPER)
    assert rec.feasible_in_big and rec.feasible_in_small
    s = make_linf(3)
    a = cstr_instance_check(s, s, [np.zeros((3, 3))], [np.eye(3)])
    b = tr_instance_check(s, s, [np.zeros((3, 3))], [np.eye(3)])
    assert a.small.status is b.small.status
    flip = make_subsystem(make_full(2), [np.array([[0.0, 1.0], [1.0, 0.0]])])
    assert generated_algebra(flip).dim == 2
    x = np.array([[0.0, 1.0], [1.0, 0.0]])
    rec = cstr_instance_check(flip, make_full(2), [x], [x + 3 * np.eye(2)])
    assert rec.holds


def test_lemma_crosscheck_examples():
    cc = lemma_crosscheck(v_system(), NP_LOWER, NP_UPPER)
    assert cc.exact and cc.match and cc.interpolation.infeasible
    cc4 = lemma_crosscheck(make_linf(4), NP_LOWER, NP_UPPER)
    assert cc4.match and cc4.interpolation.feasible
    s = make_full(2)
    unit = lemma_crosscheck(s, [-s.unit], [s.unit])
    assert unit.match and unit.interpolation.status is Status.FEASIBLE


def test_lemma_crosscheck_block_algebra():
    big = make_full(3)
    s = make_subsystem(big, block_hermitian_basis(BlockShape((2, 1))))
    rng = np.random.default_rng(4)
    for _ in range(3):
        lower = [s.element(rng.integers(-2, 3, size=s.dim).astype(float)) for _ in range(2)]
        upper = [s.element(rng.integers(-2, 3, size=s.dim).astype(float)) + 2 * s.unit for _ in range(2)]
        assert lemma_crosscheck(s, lower, upper).match
