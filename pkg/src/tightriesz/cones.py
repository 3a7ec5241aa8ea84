"""Membership in tensor and quotient cones.

* min tensor cone: spatial, so membership is PSD-ness in the Kronecker ambient.
* max tensor cone with a commutative factor ``l^inf_k``: ``S (x)max l^inf_k``
  is ``S + ... + S`` with the direct-sum cone.
* general max tensor cone: only a bounded-rank inner approximation.
* quotient cones: strict membership ``rep + j >= delta 1`` for some kernel
  element ``j``, with ``delta`` maximized by the solver.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import sdp
from .choi import add_value_constraint
from .linalg import DEFAULT_TOL, herm, hermitian_basis, is_diagonal, is_psd, min_eig, to_fraction
from .opsys import (
    OperatorSystem,
    QuotientSystem,
    SystemError_,
    as_element,
    contains,
    direct_sum_system,
    embed_block,
)


class ConeError(ValueError):
    pass


# --- tensor elements ---------------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class TensorElement:
    """``x = sum_ab s_a (x) t_b (x) C_ab`` in ``M_n(S (x) T)``.

    ``coeffs`` has shape ``(dim S, dim T, n, n)`` with Hermitian ``C_ab``; a
    real ``(dim S, dim T)`` array is read as level 1.
    """

    left: OperatorSystem
    right: OperatorSystem
    coeffs: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.coeffs)
        if c.ndim == 2:
            c = c.reshape(c.shape + (1, 1))
        if c.ndim != 4 or c.shape[:2] != (self.left.dim, self.right.dim) or c.shape[2] != c.shape[3]:
            raise ConeError(f"coefficient array of shape {np.shape(self.coeffs)} does not match the factors")
        if np.max(np.abs(c - np.conj(np.swapaxes(c, 2, 3))), initial=0.0) > 1e-12 * max(1.0, np.max(np.abs(c))):
            raise ConeError("coefficient blocks must be Hermitian")
        c = (c + np.conj(np.swapaxes(c, 2, 3))) / 2
        if np.iscomplexobj(c) and not np.any(c.imag):
            c = c.real
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    @property
    def level(self) -> int:
        return self.coeffs.shape[2]

    def matrix(self) -> np.ndarray:
        """Assembled element of ``ambient(S) (x) ambient(T) (x) M_n``."""
        out = 0
        for a, s in enumerate(self.left.basis):
            for b, t in enumerate(self.right.basis):
                cab = self.coeffs[a, b]
                if np.any(cab):
                    out = out + np.kron(np.kron(s, t), cab)
        if isinstance(out, int):
            d = self.left.ambient.dim * self.right.ambient.dim * self.level
            return herm(np.zeros((d, d)))
        return herm(out)


def elementary(left: OperatorSystem, right: OperatorSystem, s, t) -> TensorElement:
    """``s (x) t`` at level 1."""
    cs, ct = left.coords(s), right.coords(t)
    return TensorElement(left, right, np.outer(cs, ct))


def tensor_unit(left: OperatorSystem, right: OperatorSystem, n: int = 1) -> TensorElement:
    c = np.einsum("a,b,ij->abij", left.unit_coords, right.unit_coords, np.eye(n))
    return TensorElement(left, right, c)


def min_cone_member(x: TensorElement, tol: float = DEFAULT_TOL) -> bool:
    """Membership in ``M_n(S (x)min T)^+``."""
    return is_psd(x.matrix(), tol)


def max_commutative_member(s: OperatorSystem, parts: Sequence, strict: bool = False,
                           tol: float = DEFAULT_TOL) -> bool:
    """Membership of ``(s_1, ..., s_k)`` in ``S (x)max l^inf_k``.

    Strict membership asks for ``s_i >= delta 1`` with ``delta > 0``; on
    diagonal data both variants are decided exactly.
    """
    mats = []
    for i, p in enumerate(parts):
        p = as_element(p, s.ambient)
        if not contains(s, p):
            raise SystemError_(f"component {i} lies outside the system")
        mats.append(p)
    if all(is_diagonal(p) and not np.iscomplexobj(p) for p in mats):
        low = min(min(to_fraction(v) for v in np.diag(p)) for p in mats)
        return low > 0 if strict else low >= 0
    low = min(min_eig(p) for p in mats)
    return low > tol if strict else low >= -tol


# --- quotient cones -------------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class QuotientElement:
    """A coset ``representative + M_n(J)`` in ``M_n(S / J)``."""

    quotient: QuotientSystem
    representative: np.ndarray
    level: int = 1

    def __post_init__(self):
        q = self.quotient
        shape = q.ambient_system.ambient.amplify(self.level)
        rep = as_element(self.representative, shape)
        object.__setattr__(self, "representative", rep)

    @property
    def amplified(self) -> QuotientSystem:
        return self.quotient.amplify(self.level)


def quotient_problem(e: QuotientElement, eps: float = 0.0, strict: bool = True) -> sdp.LmiProblem:
    """``rep + eps 1 + sum c_j J_j >= delta 1`` over kernel coordinates ``c``."""
    q = e.amplified
    rep = e.representative
    if eps:
        rep = herm(rep + eps * np.eye(rep.shape[0]))
    b = sdp.LmiBuilder()
    cs = b.new_vars(len(q.kernel_basis))
    b.add_block(rep, dict(zip(cs, q.kernel_basis)))
    return b.build(strict=strict, label="quotient cone membership")


def quotient_strict_member(e: QuotientElement, tol: float = DEFAULT_TOL, eps: float = 0.0,
                           check_kernel: bool = True) -> sdp.FeasibilityVerdict:
    """Strict positivity of the coset of ``e`` (of ``e + eps 1`` when ``eps > 0``).

    The witness holds the kernel coordinates ``c`` and the margin ``delta``.
    """
    if check_kernel and not e.quotient.is_null:
        raise ConeError("kernel is not a null-subspace")
    return sdp.solve(quotient_problem(e, eps), tol)


def quotient_closed_member(e: QuotientElement, tol: float = DEFAULT_TOL,
                           check_kernel: bool = True) -> sdp.FeasibilityVerdict:
    """Non-strict variant: some representative is PSD (within ``tol``)."""
    if check_kernel and not e.quotient.is_null:
        raise ConeError("kernel is not a null-subspace")
    return sdp.solve(quotient_problem(e, strict=False), tol)


def kernel_element(e: QuotientElement, coords: Sequence[float]) -> np.ndarray:
    q = e.amplified
    out = np.zeros(e.representative.shape, dtype=complex)
    for c, j in zip(coords, q.kernel_basis):
        out += float(c) * j
    return herm(out if np.any(out.imag) else out.real)


# --- S (x) (l^inf_n + l^inf_k) ---------------------------------------------------------------------


def tensor_linf_quotient(s: OperatorSystem, n: int, k: int) -> QuotientSystem:
    """``S (x) (l^inf_n pushout l^inf_k)`` as ``(S + ... + S) / {(b,..,b,-b,..,-b)}``."""
    if n < 1 or k < 1:
        raise ConeError("need n, k >= 1")
    big = direct_sum_system([s] * (n + k), label=f"{s.label}^{n + k}")
    shapes = [s.ambient] * (n + k)
    kernel = []
    for b in s.basis:
        j = sum(embed_block(b, big.ambient, i, shapes) * (1 if i < n else -1) for i in range(n + k))
        kernel.append(herm(j))
    return QuotientSystem(big, tuple(kernel), label=f"{s.label}(x)(linf{n}+linf{k})")


def tuple_element(q: QuotientSystem, parts: Sequence) -> QuotientElement:
    """``s_1 (x) e_1 + ... + s_{n+k} (x) e_{n+k}`` as a coset representative."""
    sys_ = q.ambient_system
    mats = [as_element(p) for p in parts]
    if sum(m.shape[0] for m in mats) != sys_.ambient.dim:
        raise ConeError("tuple does not fit the quotient ambient")
    out = np.zeros((sys_.ambient.dim, sys_.ambient.dim), dtype=complex if any(np.iscomplexobj(m) for m in mats)
                   else float)
    pos = 0
    for m in mats:
        d = m.shape[0]
        out[pos:pos + d, pos:pos + d] = m
        pos += d
    return QuotientElement(q, herm(out))


# --- bounded-rank inner approximation of the max cone -------------------------------------------------
#
# For P = [P_cd] in M_q'(M_n(S))^+ and Q = [Q_cd] in M_q'(T)^+ the element
# sum_cd P_cd (x) Q_cd is a compression of P (x) Q, so it lies in the max cone
# with factor sizes (q' n, q'). Fixing a dictionary of Q's (and mirrored P's)
# makes the search one convex feasibility problem whose witness replays.


@dataclass(frozen=True, eq=False)
class Factor:
    """A fixed positive ``Q = sum_b kron(G_b, t_b)`` in ``M_q'(T)``; ``mirrored`` swaps the factors."""

    size: int
    g: tuple[np.ndarray, ...]
    mirrored: bool
    label: str


@dataclass(frozen=True, eq=False)
class MaxDecomposition:
    p_max: int
    q_max: int
    factors: tuple[Factor, ...]
    lmi: sdp.LmiProblem
    verdict: sdp.FeasibilityVerdict

    @property
    def found(self) -> bool:
        return self.verdict.feasible


def _positive_factors(sys_: OperatorSystem, x_marginal: np.ndarray | None,
                      mirrored: bool, size_cap: int, outer_cap: int, n: int) -> list[Factor]:
    out = []
    unit = sys_.unit_coords
    if n <= outer_cap:
        out.append(Factor(1, tuple(np.array([[u]]) for u in unit), mirrored, "unit"))
        for b, t in enumerate(sys_.basis):
            norm = float(np.max(np.abs(np.linalg.eigvalsh(t))))
            for sign in (1, -1):
                g = unit.copy()
                g[b] += sign / norm
                out.append(Factor(1, tuple(np.array([[c]]) for c in g), mirrored, f"unit{'+-'[sign < 0]}basis{b}"))
        if x_marginal is not None and min_eig(x_marginal) >= -1e-12:
            out.append(Factor(1, tuple(np.array([[c]]) for c in sys_.coords(x_marginal)), mirrored, "marginal"))
    # maximally entangled factor on each full block, when the system is the whole algebra
    if sys_.is_algebra_ambient:
        for s_, db in zip(sys_.ambient.slices(), sys_.ambient.blocks):
            if db < 2 or db > size_cap or db * n > outer_cap:
                continue
            q = np.zeros((db * sys_.ambient.dim, db * sys_.ambient.dim), dtype=complex)
            for c in range(db):
                for e in range(db):
                    unit_ce = np.zeros((db, db))
                    unit_ce[c, e] = 1.0
                    emb = np.zeros((sys_.ambient.dim, sys_.ambient.dim))
                    emb[s_, s_][c, e] = 1.0
                    q += np.kron(unit_ce, emb)
            out.append(Factor(db, _expand(q, sys_, db), mirrored, f"omega{db}"))
    return out


def _expand(q: np.ndarray, sys_: OperatorSystem, size: int) -> tuple[np.ndarray, ...]:
    """``G_b`` with ``q = sum_b kron(G_b, t_b)``, solved blockwise by least squares."""
    dim = sys_.ambient.dim
    q4 = q.reshape(size, dim, size, dim)
    gs = np.zeros((sys_.dim, size, size), dtype=complex)
    for c in range(size):
        for e in range(size):
            blk = q4[c, :, e, :]
            re = sys_.coords(herm((blk + blk.conj().T) / 2))
            im = sys_.coords(herm((blk - blk.conj().T) / 2j))
            gs[:, c, e] = re + 1j * im
    return tuple(g if np.any(g.imag) else g.real for g in gs)


def max_problem(x: TensorElement, p_max: int, q_max: int, eps: float = 0.0):
    """Convex inner approximation of ``x + eps 1`` in the max cone with factor caps."""
    if p_max < 1 or q_max < 1:
        raise ConeError("caps must be positive")
    n = x.level
    c = np.asarray(x.coeffs, dtype=complex)
    if eps:
        c = c + eps * np.einsum("a,b,ij->abij", x.left.unit_coords, x.right.unit_coords, np.eye(n))
    xm = x.matrix()
    ds, dt = x.left.ambient.dim, x.right.ambient.dim
    s_marg = t_marg = None
    if n == 1:
        x4 = xm.reshape(ds, dt, ds, dt)
        s_marg = herm(np.trace(x4, axis1=1, axis2=3))
        t_marg = herm(np.trace(x4, axis1=0, axis2=2))
    factors = (_positive_factors(x.right, t_marg, False, q_max, p_max, n)
               + _positive_factors(x.left, s_marg, True, p_max, q_max, n))
    b = sdp.LmiBuilder()
    value_terms: dict[tuple[int, int], dict[int, np.ndarray]] = {}
    for f in factors:
        inner, outer = (x.left, x.right) if not f.mirrored else (x.right, x.left)
        size = f.size * n
        hb = hermitian_basis(size)
        blocks = []
        for ia, s_el in enumerate(inner.basis):
            vars_ = b.new_vars(len(hb))
            blocks.append((ia, vars_, s_el))
        terms = {}
        for ia, vars_, s_el in blocks:
            for v, h in zip(vars_, hb):
                terms[v] = np.kron(h, s_el)
                h4 = h.reshape(f.size, n, f.size, n)
                for jb, g in enumerate(f.g):
                    if not np.any(g):
                        continue
                    val = np.einsum("cd,cidj->ij", g, h4)
                    if not np.any(val):
                        continue
                    key = (ia, jb) if not f.mirrored else (jb, ia)
                    value_terms.setdefault(key, {})[v] = val
        b.add_block(np.zeros((size * inner.ambient.dim,) * 2), terms)
    for ia in range(x.left.dim):
        for jb in range(x.right.dim):
            add_value_constraint(b, [(1, value_terms.get((ia, jb), {}))], c[ia, jb])
    return tuple(factors), b.build(strict=False, label="bounded-rank max cone")


def max_bounded_rank_decomposition(x: TensorElement, p_max: int, q_max: int, eps: float = 0.0,
                                   tol: float = 1e-8) -> MaxDecomposition:
    factors, lmi = max_problem(x, p_max, q_max, eps)
    v = sdp.solve(lmi, tol)
    return MaxDecomposition(p_max, q_max, factors, lmi, v)


def max_bounded_rank_member(x: TensorElement, p_max: int, q_max: int, eps: float = 0.0) -> bool:
    """Sound inner approximation of ``M_n(S (x)max T)^+``; ``False`` is inconclusive."""
    return max_bounded_rank_decomposition(x, p_max, q_max, eps).found
