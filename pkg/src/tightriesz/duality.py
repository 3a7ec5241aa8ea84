"""Duality between Namioka-Phelps pullbacks and pushout quotients of l^inf.

With weights ``w = (k, .., k, n, .., n)`` the pairing ``<g, x> = sum_i w_i g_i x_i``
on ``l^inf_{n+k}`` has ``V_{n,k}`` as annihilator of ``J = span{(1_n, -1_k)}``.
So a matrix of functionals on ``V_{n,k}`` corresponds to an element of
``M_m(l^inf_{n+k} / J)``, and complete positivity on one side should match
membership in the quotient cone on the other.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import sdp
from .cones import QuotientElement, quotient_problem
from .cpmaps import CpMap, cp_lmi, is_cp
from .linalg import DEFAULT_TOL, herm, to_fraction
from .opsys import OperatorSystem, QuotientSystem, StateFunctional, dual, make_linf, uniform_state
from .standard import namioka_phelps, np_pushout


def pairing_weights(n: int, k: int) -> np.ndarray:
    return np.array([k] * n + [n] * k, dtype=float)


def functional_from_blocks(v: OperatorSystem, blocks, n: int, k: int) -> CpMap:
    """The map ``x -> sum_i w_i x_i G_i`` on ``V_{n,k}`` for Hermitian ``G_i``."""
    w = pairing_weights(n, k)
    g = [herm(np.atleast_2d(b)) for b in blocks]
    m = g[0].shape[0]
    values = []
    for basis_el in v.basis:
        d = np.diag(basis_el).real
        values.append(herm(sum(w[i] * d[i] * g[i] for i in range(n + k))))
    return CpMap(v, m, tuple(values))


def pushout_element(q: QuotientSystem, blocks) -> QuotientElement:
    """``(G_1, ..., G_{n+k})`` as an element of ``M_m(q)``."""
    g = [herm(np.atleast_2d(b)) for b in blocks]
    m = g[0].shape[0]
    size = len(g) * m
    rep = np.zeros((size, size), dtype=complex if any(np.iscomplexobj(x) for x in g) else float)
    for i, b in enumerate(g):
        rep[i * m:(i + 1) * m, i * m:(i + 1) * m] = b
    return QuotientElement(q, herm(rep), level=m)


def preimage_blocks(f: CpMap, n: int, k: int) -> list[np.ndarray]:
    """Some ``G`` with ``f = functional_from_blocks(G)``; unique up to ``M_m(J)``."""
    v = f.domain
    w = pairing_weights(n, k)
    # linear system in the entries of G: rows are V basis elements
    a = np.array([[w[i] * np.diag(b).real[i] for i in range(n + k)] for b in v.basis])
    vals = np.array([np.asarray(val, dtype=complex) for val in f.values])  # (dim V, m, m)
    flat = vals.reshape(len(v.basis), -1)
    sol, *_ = np.linalg.lstsq(a, flat, rcond=None)
    m = f.m
    out = []
    for i in range(n + k):
        g = sol[i].reshape(m, m)
        out.append(herm(g if np.any(np.abs(g.imag) > 0) else g.real))
    return out


@dataclass(frozen=True)
class PairingCheck:
    cp_status: sdp.Status
    quotient_status: sdp.Status
    replay: bool = True

    @property
    def agree(self) -> bool:
        return self.cp_status is self.quotient_status

    @property
    def decided(self) -> bool:
        return sdp.Status.UNKNOWN not in (self.cp_status, self.quotient_status)


def pairing_check(f: CpMap, n: int, k: int, q: QuotientSystem | None = None, tol: float = 1e-7,
                  blocks=None) -> PairingCheck:
    """Complete positivity of ``f`` on ``V_{n,k}`` against positivity of its image in the pushout.

    Pass ``blocks`` when a preimage is known; the least-squares preimage carries
    rounding that can flip boundary cases on the exact path.
    """
    q = q or np_pushout(n, k)
    e = pushout_element(q, preimage_blocks(f, n, k) if blocks is None else blocks)
    pc, pq = cp_lmi(f), quotient_problem(e, strict=False)
    vc, vq = sdp.solve(pc, tol), sdp.solve(pq, tol)
    replay = all(sdp.replay_check(p, v, tol) for p, v in ((pc, vc), (pq, vq)) if v.feasible)
    return PairingCheck(vc.status, vq.status, replay)


def random_blocks(rng: np.random.Generator, n: int, k: int, m: int, positive: bool) -> list[np.ndarray]:
    """Integer Hermitian blocks; ``positive`` draws PSD blocks then adds a kernel element."""
    out = []
    for _ in range(n + k):
        if m == 1:
            out.append(np.array([[float(rng.integers(0 if positive else -3, 6))]]))
            continue
        a = rng.integers(-2, 3, size=(m, m)) + 1j * rng.integers(-2, 3, size=(m, m))
        out.append(a @ a.conj().T if positive else a + a.conj().T)
    if positive:
        h = rng.integers(-2, 3, size=(m, m)) + (1j * rng.integers(-2, 3, size=(m, m)) if m > 1 else 0)
        h = h + np.conj(h).T
        out = [b + (h if i < n else -h) for i, b in enumerate(out)]
    return [herm(b) for b in out]


# --- l^inf_n self-duality ----------------------------------------------------------------------------


def linf_functional_positive(n: int, coords, w: StateFunctional | None = None) -> bool:
    """Positivity of the functional with the given values on the minimal projections."""
    s = make_linf(n)
    d = dual(s, w or uniform_state(s))
    return d.is_positive(np.asarray(coords, dtype=float))


def nonnegative_exact(coords) -> bool:
    return all(to_fraction(c) >= 0 for c in coords)


def v_dual_positive_by_extension(v: OperatorSystem, values, tol: float = DEFAULT_TOL) -> bool:
    """Positivity of a functional on ``v`` inside ``l^inf_N`` via a nonnegative extension (exact LP)."""
    b = sdp.LmiBuilder()
    n = v.ambient.dim
    cs = b.new_vars(n)
    for i, c in enumerate(cs):
        b.add_block(np.zeros((1, 1)), {c: np.ones((1, 1))})
    for basis_el, val in zip(v.basis, values):
        b.add_eq({c: float(np.diag(basis_el)[i].real) for i, c in enumerate(cs)}, float(val))
    verdict = sdp.solve(b.build(strict=False, label="nonnegative extension"), tol)
    if verdict.status is sdp.Status.UNKNOWN:
        raise RuntimeError("extension search undecided")
    return verdict.feasible


__all__ = [
    "PairingCheck", "functional_from_blocks", "is_cp", "linf_functional_positive", "namioka_phelps",
    "nonnegative_exact", "pairing_check", "pairing_weights", "preimage_blocks", "pushout_element", "random_blocks",
    "v_dual_positive_by_extension",
]
