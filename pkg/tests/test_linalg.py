import numpy as np
import pytest
from fractions import Fraction
from hypothesis import given, settings, strategies as st

from tightriesz.linalg import (
    BlockShape,
    NotHermitianError,
    block_hermitian_basis,
    direct_sum,
    herm,
    hermitian_basis,
    is_psd,
    kron,
    min_eig,
    nullspace_exact,
    rank_exact,
    real_embed,
    solve_exact,
    to_fraction,
)

from oracles import char_poly_value, kron_index, min_eig_bisection, real_symmetric_form


def int_herm(rng, d, complex_=True, lo=-4, hi=5):
    a = rng.integers(lo, hi, size=(d, d)).astype(float)
    if complex_:
        a = a + 1j * rng.integers(lo, hi, size=(d, d))
    return herm((a + a.conj().T) / 2)


@pytest.mark.parametrize("seed", range(12))
def test_min_eig_matches_bisection(seed):
    rng = np.random.default_rng(seed)
    d = 1 + seed % 4
    h = int_herm(rng, d, complex_=seed % 2 == 0)
    ref = min_eig_bisection(h)
    assert abs(min_eig(h) - ref) < 1e-9
    # the characteristic polynomial changes sign across the oracle value
    m = real_symmetric_form(h)
    lo, hi = Fraction(ref) - Fraction(1, 10**6), Fraction(ref) + Fraction(1, 10**6)
    assert char_poly_value(m, lo) * char_poly_value(m, hi) <= 0 or abs(char_poly_value(m, Fraction(ref))) < 1e-6


def test_min_eig_known_values():
    assert min_eig(np.diag([3.0, -2.0, 5.0])) == -2.0
    assert min_eig(np.array([[0, 1], [1, 0]])) == pytest.approx(-1.0)
    assert min_eig(np.array([[1, 1j], [-1j, 1]])) == pytest.approx(0.0, abs=1e-12)


@given(st.integers(1, 3), st.integers(1, 3), st.integers(0, 2**31))
@settings(max_examples=40, deadline=None)
def test_kron_index_formula(p, q, seed):
    rng = np.random.default_rng(seed)
    a = int_herm(rng, p)
    b = int_herm(rng, q)
    assert np.array_equal(kron(a, b), kron_index(a, b))


def test_herm_rejects_and_symmetrizes():
    with pytest.raises(NotHermitianError):
        herm(np.array([[0, 1], [0, 0]]))
    with pytest.raises(NotHermitianError):
        herm(np.zeros((2, 3)))
    h = herm(np.array([[1, 1 + 1e-14], [1, 1]]))
    assert h[0, 1] == h[1, 0]
    assert not h.flags.writeable
    assert herm(np.array([[1 + 0j]])).dtype == float


def test_is_psd_tolerance():
    assert is_psd(np.diag([0.0, -1e-10]))
    assert not is_psd(np.diag([0.0, -1e-8]))
    with pytest.raises(ValueError):
        is_psd(np.eye(2), tol=-1)


def test_real_embed_spectrum():
    rng = np.random.default_rng(3)
    h = int_herm(rng, 3)
    ev = np.sort(np.linalg.eigvalsh(h))
    ev2 = np.sort(np.linalg.eigvalsh(real_embed(h)))
    assert np.allclose(np.repeat(ev, 2), ev2)


def test_hermitian_basis_spans():
    for d in range(1, 5):
        basis = hermitian_basis(d)
        assert len(basis) == d * d
        mat = np.array([np.concatenate([b.real.ravel(), b.imag.ravel()]) if np.iscomplexobj(b)
                        else np.concatenate([b.ravel(), np.zeros(d * d)]) for b in basis])
        assert np.linalg.matrix_rank(mat) == d * d


def test_block_shape():
    s = BlockShape((2, 1))
    assert s.dim == 3 and s.algebra_dim == 5 and not s.is_commutative
    assert len(block_hermitian_basis(s)) == 5
    assert s.contains(direct_sum([np.eye(2), np.ones((1, 1))]))
    assert not s.contains(np.ones((3, 3)))
    assert s.amplify(2).blocks == (4, 2)
    assert (s + BlockShape((1,))).blocks == (2, 1, 1)
    with pytest.raises(ValueError):
        BlockShape(())


def test_exact_helpers():
    assert to_fraction(0.5) == Fraction(1, 2)
    assert to_fraction("2/3") == Fraction(2, 3)
    with pytest.raises(ValueError):
        to_fraction(float("nan"))
    rows = [[Fraction(1), Fraction(1), Fraction(0)], [Fraction(0), Fraction(1), Fraction(1)]]
    assert rank_exact(rows) == 2
    ns = nullspace_exact(rows, 3)
    assert len(ns) == 1 and all(sum(r[i] * ns[0][i] for i in range(3)) == 0 for r in rows)
    x = solve_exact(rows, [Fraction(2), Fraction(3)])
    assert [sum(r[i] * x[i] for i in range(3)) for r in rows] == [2, 3]
    assert solve_exact([[Fraction(1)], [Fraction(1)]], [Fraction(0), Fraction(1)]) is None
