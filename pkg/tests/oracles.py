"""Independent reference computations used by the tests.

None of these call an eigensolver, an LP solver or an SDP solver.
"""
from __future__ import annotations

import itertools
from fractions import Fraction

import numpy as np


def _frac(x) -> Fraction:
    return Fraction(float(x))


def real_symmetric_form(h: np.ndarray) -> list[list[Fraction]]:
    """``[[A, -B], [B, A]]`` for ``H = A + iB``; same spectrum as ``H``, doubled."""
    a, b = np.real(h), np.imag(h)
    n = h.shape[0]
    out = [[Fraction(0)] * (2 * n) for _ in range(2 * n)]
    for i in range(n):
        for j in range(n):
            out[i][j] = out[n + i][n + j] = _frac(a[i, j])
            out[i][n + j] = -_frac(b[i, j])
            out[n + i][j] = _frac(b[i, j])
    return out


def char_poly_value(m: list[list[Fraction]], t: Fraction) -> Fraction:
    """``det(m - t I)`` by exact elimination."""
    n = len(m)
    a = [[m[i][j] - (t if i == j else 0) for j in range(n)] for i in range(n)]
    det = Fraction(1)
    for c in range(n):
        piv = next((r for r in range(c, n) if a[r][c] != 0), None)
        if piv is None:
            return Fraction(0)
        if piv != c:
            a[c], a[piv] = a[piv], a[c]
            det = -det
        det *= a[c][c]
        for r in range(c + 1, n):
            f = a[r][c] / a[c][c]
            if f:
                a[r] = [x - f * y for x, y in zip(a[r], a[c])]
    return det


def positive_definite_exact(m: list[list[Fraction]]) -> bool:
    """Sylvester: all leading pivots of a symmetric matrix are positive."""
    n = len(m)
    a = [row[:] for row in m]
    for c in range(n):
        if a[c][c] <= 0:
            return False
        for r in range(c + 1, n):
            f = a[r][c] / a[c][c]
            a[r] = [x - f * y for x, y in zip(a[r], a[c])]
    return True


def min_eig_bisection(h: np.ndarray, iters: int = 60) -> float:
    """Smallest eigenvalue: bisection on ``t`` for positive definiteness of ``H - t I``.

    At the returned bracket the characteristic polynomial changes sign or vanishes.
    """
    m = real_symmetric_form(np.asarray(h))
    bound = max(sum(abs(x) for x in row) for row in m) + 1
    lo, hi = -bound, bound  # H - lo I is PD, H - hi I is not
    for _ in range(iters):
        mid = (lo + hi) / 2
        shifted = [[x - (mid if i == j else 0) for j, x in enumerate(row)] for i, row in enumerate(m)]
        if positive_definite_exact(shifted):
            lo = mid
        else:
            hi = mid
        lo, hi = Fraction(lo).limit_denominator(10**18), Fraction(hi).limit_denominator(10**18)
    return float((lo + hi) / 2)


def kron_index(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """``(a (x) b)[i*p + k, j*q + l] = a[i, j] b[k, l]``."""
    m, n = a.shape
    p, q = b.shape
    out = np.zeros((m * p, n * q), dtype=np.result_type(a, b))
    for i in range(m):
        for j in range(n):
            for k in range(p):
                for l in range(q):
                    out[i * p + k, j * q + l] = a[i, j] * b[k, l]
    return out


def solve_square(rows: list[list[Fraction]], rhs: list[Fraction]) -> list[Fraction] | None:
    """Unique solution of a square system, or None when singular."""
    n = len(rows)
    a = [r[:] + [b] for r, b in zip(rows, rhs)]
    for c in range(n):
        piv = next((r for r in range(c, n) if a[r][c] != 0), None)
        if piv is None:
            return None
        a[c], a[piv] = a[piv], a[c]
        for r in range(n):
            if r != c and a[r][c] != 0:
                f = a[r][c] / a[c][c]
                a[r] = [x - f * y for x, y in zip(a[r], a[c])]
    return [a[i][n] / a[i][i] for i in range(n)]


def max_margin_vertices(const, coeffs, margin, cap: Fraction = Fraction(1)) -> Fraction:
    """``max delta`` s.t. ``const_r + coeffs_r . x - delta margin_r >= 0``, ``delta <= cap``.

    Vertex enumeration over all square active sets; the coefficient rows must
    span ``R^n`` so the feasible region is pointed.
    """
    n = len(coeffs[0])
    rows = [[_frac(a) for a in r] + [-_frac(m)] for r, m in zip(coeffs, margin)]
    rhs = [-_frac(c) for c in const]
    rows.append([Fraction(0)] * n + [Fraction(1)])
    rhs.append(cap)
    best = None
    for act in itertools.combinations(range(len(rows)), n + 1):
        sol = solve_square([rows[i] for i in act], [rhs[i] for i in act])
        if sol is None:
            continue
        x, d = sol[:n], sol[n]
        ok = all(sum((a * xi for a, xi in zip(r[:n], x)), Fraction(0)) + r[n] * d >= b
                 for r, b in zip(rows[:-1], rhs[:-1])) and d <= cap
        if ok and (best is None or d > best):
            best = d
    if best is None:
        raise ValueError("no vertex; coefficient rows do not span")
    return best


def hermitian_psd_exact(h: np.ndarray) -> bool:
    """PSD test by exact pivoting that tolerates zero pivots (LDL with symmetric pivoting)."""
    a = real_symmetric_form(np.asarray(h))
    n = len(a)
    idx = list(range(n))
    while idx:
        c = max(idx, key=lambda i: a[i][i])
        if a[c][c] < 0:
            return False
        if a[c][c] == 0:
            # then the whole remaining submatrix must vanish
            return all(a[i][j] == 0 for i in idx for j in idx)
        idx.remove(c)
        for r in idx:
            f = a[r][c] / a[c][c]
            for s in idx:
                a[r][s] -= f * a[c][s]
    return True


def unit(d, j, k):
    e = np.zeros((d, d), dtype=complex)
    e[j, k] = 1
    return e


def choi_by_index(f, d, integral=True):
    """Choi matrix from the index formula; rounded when the map has integer data."""
    c = sum(kron_index(unit(d, j, k), np.asarray(f(unit(d, j, k)), dtype=complex))
               for j in range(d) for k in range(d))
    return np.round(c.real) + 1j * np.round(c.imag) if integral else c


def random_kraus(rng, d, m, r=2):
    return [rng.integers(-2, 3, size=(m, d)) + 1j * rng.integers(-2, 3, size=(m, d)) for _ in range(r)]
