"""Concrete finite-dimensional operator systems.

An :class:`OperatorSystem` is a unital self-adjoint subspace of a block
matrix algebra, given by a real basis of its self-adjoint part. Systems whose
basis is diagonal take the exact rational path wherever a decision is made.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Sequence

import numpy as np

from . import sdp
from .linalg import (
    DEFAULT_TOL,
    BlockShape,
    block_hermitian_basis,
    herm,
    hermitian_basis,
    is_diagonal,
    nullspace_exact,
    rank_exact,
    solve_exact,
    real_vec,
    to_fraction,
)

BASIS_TOL = 1e-10


class SystemError_(ValueError):
    """Invalid operator-system data (not unital, dependent basis, outside the ambient)."""


class UndecidedError(RuntimeError):
    """A required decision came back UNKNOWN from the solver."""

    def __init__(self, what: str, verdict: sdp.FeasibilityVerdict):
        super().__init__(f"{what}: {verdict.message or 'undecided'}")
        self.verdict = verdict


def as_element(x, shape: BlockShape | None = None) -> np.ndarray:
    """Hermitian matrix from a matrix or a 1-d diagonal shorthand."""
    a = np.asarray(x)
    if a.ndim == 1:
        a = np.diag(a.astype(complex if np.iscomplexobj(a) else float))
    m = herm(a)
    if shape is not None and m.shape != (shape.dim, shape.dim):
        raise SystemError_(f"element of size {m.shape[0]} does not fit ambient of size {shape.dim}")
    return m


def _independent(cands: Sequence[np.ndarray], exact: bool, start: Sequence[np.ndarray] = ()) -> list[np.ndarray]:
    """Greedy linearly independent subset of ``cands`` extending ``start``."""
    chosen = list(start)
    if exact:
        rows = [[to_fraction(v) for v in np.diag(c).real] for c in chosen]
        for c in cands:
            row = [to_fraction(v) for v in np.diag(c).real]
            if any(row) and rank_exact(rows + [row]) > len(rows):
                rows.append(row)
                chosen.append(c)
        return chosen
    q: list[np.ndarray] = []
    for c in chosen:
        v = real_vec(c)
        for u in q:
            v = v - (u @ v) * u
        q.append(v / np.linalg.norm(v))
    for c in cands:
        v0 = real_vec(c)
        nv0 = np.linalg.norm(v0)
        if nv0 == 0:
            continue
        v = v0
        for _ in range(2):
            for u in q:
                v = v - (u @ v) * u
        if np.linalg.norm(v) > BASIS_TOL * nv0:
            q.append(v / np.linalg.norm(v))
            chosen.append(c)
    return chosen


@dataclass(frozen=True, eq=False)
class OperatorSystem:
    ambient: BlockShape
    basis: tuple[np.ndarray, ...]
    label: str = ""

    def __post_init__(self):
        basis = tuple(as_element(b, self.ambient) for b in self.basis)
        for i, b in enumerate(basis):
            if not self.ambient.contains(b, 1e-12):
                raise SystemError_(f"basis element {i} leaves the block structure {self.ambient.blocks}")
        object.__setattr__(self, "basis", basis)
        if len(_independent(basis, self.diagonal)) != len(basis):
            raise SystemError_("basis is linearly dependent")
        if not self.contains(self.unit):
            raise SystemError_("unit is not in the span of the basis")

    @property
    def dim(self) -> int:
        return len(self.basis)

    @property
    def unit(self) -> np.ndarray:
        return self.ambient.identity()

    @property
    def diagonal(self) -> bool:
        return all(is_diagonal(b) and not np.iscomplexobj(b) for b in self.basis)

    @property
    def is_algebra_ambient(self) -> bool:
        return self.dim == self.ambient.algebra_dim

    @cached_property
    def _frame(self) -> np.ndarray:
        return np.array([real_vec(b) for b in self.basis]).T

    @cached_property
    def _pinv(self) -> np.ndarray:
        return np.linalg.pinv(self._frame)

    def coords(self, x) -> np.ndarray:
        """Real coordinates of ``x`` in the basis (least squares)."""
        x = as_element(x, self.ambient)
        return self._pinv @ real_vec(x)

    def coords_exact(self, x) -> list[Fraction]:
        x = as_element(x, self.ambient)
        rows = [[to_fraction(v) for v in np.diag(b)] for b in self.basis]
        target = [to_fraction(v) for v in np.diag(x)]
        sol = solve_exact([list(col) for col in zip(*rows)], target)
        if sol is None:
            raise SystemError_("element is not in the system")
        return sol

    def element(self, coeffs: Sequence[float]) -> np.ndarray:
        out = np.zeros((self.ambient.dim, self.ambient.dim), dtype=complex if self.is_complex else float)
        for c, b in zip(coeffs, self.basis):
            out = out + float(c) * b
        return herm(out)

    @property
    def is_complex(self) -> bool:
        return any(np.iscomplexobj(b) for b in self.basis)

    @cached_property
    def unit_coords(self) -> np.ndarray:
        return self.coords(self.unit)

    def contains(self, x, tol: float = BASIS_TOL) -> bool:
        return contains(self, x, tol)

    def __repr__(self) -> str:
        return f"OperatorSystem({self.label or '?'}, ambient={self.ambient.blocks}, dim={self.dim})"


def contains(s: OperatorSystem, x, tol: float = BASIS_TOL) -> bool:
    """True iff ``x`` lies in the span of the basis (exact on the diagonal path)."""
    x = as_element(x, s.ambient)
    if s.diagonal and is_diagonal(x) and not np.iscomplexobj(x):
        rows = [[to_fraction(v) for v in np.diag(b)] for b in s.basis]
        return rank_exact(rows + [[to_fraction(v) for v in np.diag(x)]]) == len(rows)
    c = s._pinv @ real_vec(x)
    resid = np.linalg.norm(s._frame @ c - real_vec(x))
    return resid <= tol * max(1.0, np.linalg.norm(x))


def same_span(a: OperatorSystem, b: OperatorSystem, tol: float = BASIS_TOL) -> bool:
    return (a.ambient == b.ambient and a.dim == b.dim
            and all(contains(a, x, tol) for x in b.basis))


# --- constructors -------------------------------------------------------------------


def make_linf(n: int) -> OperatorSystem:
    """``l^inf_n``: diagonal ``n x n`` matrices, basis the coordinate projections."""
    if n < 1:
        raise ValueError("n must be positive")
    shape = BlockShape((1,) * n)
    return OperatorSystem(shape, tuple(block_hermitian_basis(shape)), label=f"linf{n}")


def make_full(d: int) -> OperatorSystem:
    if d < 1:
        raise ValueError("d must be positive")
    return OperatorSystem(BlockShape((d,)), tuple(hermitian_basis(d)), label=f"M{d}")


def make_block_algebra(shape: BlockShape, label: str = "") -> OperatorSystem:
    """The whole block algebra ``shape`` as an operator system."""
    return OperatorSystem(shape, tuple(block_hermitian_basis(shape)), label=label or f"A{shape.blocks}")


def make_subsystem(ambient: OperatorSystem, generators: Sequence, label: str = "") -> OperatorSystem:
    """Span of ``generators`` and the unit inside ``ambient``."""
    gens = []
    for i, g in enumerate(generators):
        try:
            g = as_element(g, ambient.ambient)
        except ValueError as exc:
            raise SystemError_(f"generator {i}: {exc}") from None
        if not contains(ambient, g):
            raise SystemError_(f"generator {i} lies outside {ambient.label or 'the ambient system'}")
        gens.append(g)
    exact = ambient.diagonal and all(is_diagonal(g) and not np.iscomplexobj(g) for g in gens)
    basis = _independent(gens, exact, start=[ambient.unit])
    return OperatorSystem(ambient.ambient, tuple(basis), label=label or f"sub({ambient.label})")


def embed_block(x: np.ndarray, shape: BlockShape, index: int, parts: Sequence[BlockShape]) -> np.ndarray:
    """Place an element of summand ``index`` into the direct-sum ambient ``shape``."""
    offset = sum(p.dim for p in parts[:index])
    out = np.zeros((shape.dim, shape.dim), dtype=x.dtype)
    d = x.shape[0]
    out[offset:offset + d, offset:offset + d] = x
    return out


def direct_sum_system(systems: Sequence[OperatorSystem], label: str = "") -> OperatorSystem:
    """``S_1 + ... + S_k`` inside the direct sum of the ambients."""
    if not systems:
        raise ValueError("need at least one system")
    shapes = [s.ambient for s in systems]
    shape = BlockShape(tuple(b for s in shapes for b in s.blocks))
    basis = [herm(embed_block(b, shape, i, shapes)) for i, s in enumerate(systems) for b in s.basis]
    return OperatorSystem(shape, tuple(basis), label=label or "+".join(s.label or "?" for s in systems))


def amplify(s: OperatorSystem, m: int) -> OperatorSystem:
    """``M_m(S)`` realized as ``S (x) M_m`` with Kronecker ordering ``kron(s, h)``."""
    if m == 1:
        return s
    basis = [herm(np.kron(b, h)) for b in s.basis for h in hermitian_basis(m)]
    return OperatorSystem(s.ambient.amplify(m), tuple(basis), label=f"M{m}({s.label})")


def amplify_element(x: np.ndarray, m: int) -> np.ndarray:
    return herm(np.kron(x, np.eye(m)))


# --- states -------------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class StateFunctional:
    """Linear functional on ``system`` given by its values on the basis; unital."""

    system: OperatorSystem
    coords: tuple[float, ...]

    def __post_init__(self):
        coords = tuple(float(c) for c in self.coords)
        if len(coords) != self.system.dim:
            raise SystemError_("state needs one value per basis element")
        object.__setattr__(self, "coords", coords)
        if abs(self.value(self.system.unit) - 1) > 1e-9:
            raise SystemError_("state does not take the value 1 on the unit")

    def value(self, x) -> float:
        return float(self.system.coords(x) @ np.array(self.coords))

    def is_positive(self, tol: float = 1e-7) -> bool:
        from .cpmaps import CpMap, is_cp

        return is_cp(CpMap(self.system, 1, tuple(np.array([[c]]) for c in self.coords)), tol)


def state_from_density(s: OperatorSystem, rho) -> StateFunctional:
    rho = as_element(rho, s.ambient)
    return StateFunctional(s, tuple(float(np.real(np.trace(rho @ b))) for b in s.basis))


def uniform_state(s: OperatorSystem) -> StateFunctional:
    """Normalized trace of the ambient; the averaging state on ``l^inf_n``."""
    return state_from_density(s, np.eye(s.ambient.dim) / s.ambient.dim)


def faithfulness_verdict(w: StateFunctional, tol: float = DEFAULT_TOL) -> sdp.FeasibilityVerdict:
    """Search for a trace-one PSD element of ``S`` on which ``w`` vanishes (closed problem).

    The minimum of ``w`` over trace-one PSD elements is positive iff this
    search is infeasible, so FEASIBLE here means ``w`` is not faithful.
    """
    s = w.system
    b = sdp.LmiBuilder()
    cs = b.new_vars(s.dim)
    b.add_block(np.zeros((s.ambient.dim, s.ambient.dim)), dict(zip(cs, s.basis)))
    b.add_eq({c: float(np.real(np.trace(x))) for c, x in zip(cs, s.basis)}, 1.0)
    b.add_eq(dict(zip(cs, w.coords)), 0.0)
    return sdp.solve(b.build(strict=False, label="state vanishing on a positive element"), tol)


def is_faithful(w: StateFunctional, tol: float = DEFAULT_TOL) -> bool:
    v = faithfulness_verdict(w, tol)
    if v.status is sdp.Status.UNKNOWN:
        raise UndecidedError("faithfulness", v)
    return v.infeasible


# --- pullback / pushout / quotients ------------------------------------------------------------


def _snap(x: float) -> Fraction:
    """Rational value of a state coefficient; floats of small-denominator rationals snap back."""
    f = to_fraction(x)
    g = f.limit_denominator(10**6)
    return g if abs(float(g) - float(x)) <= 1e-15 * max(1.0, abs(float(x))) else f


def _lcm_den(vec) -> int:
    out = 1
    for v in vec:
        out = out * v.denominator // math.gcd(out, v.denominator)
    return out


def pullback(parts: Sequence[tuple[OperatorSystem, StateFunctional]], label: str = "") \
        -> tuple[OperatorSystem, StateFunctional]:
    """Subsystem of the direct sum where all the states agree."""
    if not parts:
        raise ValueError("pullback needs at least one part")
    if len(parts) == 1:
        return parts[0]
    systems = [s for s, _ in parts]
    big = direct_sum_system(systems)
    offsets = np.cumsum([0] + [s.dim for s in systems])
    total = int(offsets[-1])
    rows = []
    w0 = parts[0][1].coords
    for i in range(1, len(parts)):
        row = [0.0] * total
        for j, c in enumerate(w0):
            row[offsets[0] + j] += c
        for j, c in enumerate(parts[i][1].coords):
            row[offsets[i] + j] -= c
        rows.append(row)
    exact = big.diagonal
    if exact:
        vecs = nullspace_exact([[_snap(v) for v in r] for r in rows], total)
        null = [[float(v * _lcm_den(vec)) for v in vec] for vec in vecs]
    else:
        _, sv, vt = np.linalg.svd(np.array(rows))
        r = int(np.sum(sv > BASIS_TOL * max(1.0, sv[0])))
        null = list(vt[r:])
    cands = [big.element(v) for v in null]
    basis = _independent(cands, exact, start=[big.unit])
    sys_ = OperatorSystem(big.ambient, tuple(basis), label=label or "pullback(" + ",".join(s.label for s in systems) + ")")
    # common value: evaluate the first component's state
    first = systems[0]
    d0 = first.ambient.dim
    state = StateFunctional(sys_, tuple(parts[0][1].value(b[:d0, :d0]) for b in sys_.basis))
    return sys_, state


@dataclass(frozen=True, eq=False)
class QuotientSystem:
    """``ambient_system / span(kernel_basis)`` with the kernel checked to be a null-subspace."""

    ambient_system: OperatorSystem
    kernel_basis: tuple[np.ndarray, ...]
    label: str = ""

    def __post_init__(self):
        s = self.ambient_system
        kb = tuple(as_element(j, s.ambient) for j in self.kernel_basis)
        for i, j in enumerate(kb):
            if not contains(s, j):
                raise SystemError_(f"kernel element {i} lies outside the system")
        if len(_independent(kb, s.diagonal)) != len(kb):
            raise SystemError_("kernel basis is linearly dependent")
        if kb and len(_independent([s.unit], s.diagonal, start=kb)) == len(kb):
            raise SystemError_("unit lies in the kernel")
        object.__setattr__(self, "kernel_basis", kb)

    @property
    def dim(self) -> int:
        return self.ambient_system.dim - len(self.kernel_basis)

    @cached_property
    def is_null(self) -> bool:
        """Cached :func:`null_subspace_check` at the default tolerance."""
        return null_subspace_check(self)

    def amplify(self, m: int) -> "QuotientSystem":
        """``M_m(S / J) = M_m(S) / M_m(J)`` in the ``kron(s, h)`` ordering."""
        if m == 1:
            return self
        kernel = tuple(herm(np.kron(j, h)) for j in self.kernel_basis for h in hermitian_basis(m))
        return QuotientSystem(amplify(self.ambient_system, m), kernel, label=f"M{m}({self.label})")


def pushout_quotient(systems: Sequence[OperatorSystem], label: str = "") -> QuotientSystem:
    """``(S_1 + ... + S_k) / span{(e, -e, 0, ...), (e, 0, -e, ...), ...}``."""
    if not systems:
        raise ValueError("pushout needs at least one system")
    big = direct_sum_system(systems)
    shapes = [s.ambient for s in systems]
    e0 = embed_block(systems[0].unit, big.ambient, 0, shapes)
    kernel = [herm(e0 - embed_block(s.unit, big.ambient, i, shapes)) for i, s in enumerate(systems) if i > 0]
    return QuotientSystem(big, tuple(kernel), label=label or "pushout(" + ",".join(s.label for s in systems) + ")")


def null_subspace_verdict(q: QuotientSystem, tol: float = DEFAULT_TOL) -> sdp.FeasibilityVerdict:
    """Search for a trace-one PSD element of the kernel (closed problem)."""
    s = q.ambient_system
    b = sdp.LmiBuilder()
    cs = b.new_vars(len(q.kernel_basis))
    b.add_block(np.zeros((s.ambient.dim, s.ambient.dim)), {c: j for c, j in zip(cs, q.kernel_basis)})
    b.add_eq({c: float(np.real(np.trace(j))) for c, j in zip(cs, q.kernel_basis)}, 1.0)
    return sdp.solve(b.build(strict=False, label="psd element of kernel"), tol)


def null_subspace_check(q: QuotientSystem, tol: float = DEFAULT_TOL) -> bool:
    """True iff the kernel contains no nonzero PSD element."""
    if not q.kernel_basis:
        return True
    v = null_subspace_verdict(q, tol)
    if v.status is sdp.Status.UNKNOWN:
        raise UndecidedError("null-subspace check", v)
    return v.infeasible


# --- duals ---------------------------------------------------------------------------------


class NotFaithfulError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class DualSystem:
    """``S*`` ordered by complete positivity, with a faithful state as order unit."""

    predual: OperatorSystem
    order_unit_state: StateFunctional

    @property
    def dim(self) -> int:
        return self.predual.dim

    def is_positive(self, functionals, tol: float = 1e-7) -> bool:
        """``functionals[i][j]`` are coordinate vectors; positive iff ``s -> [f_ij(s)]`` is CP."""
        from .cpmaps import CpMap, is_cp

        f = np.asarray(functionals, dtype=complex)
        if f.ndim == 1:
            f = f.reshape(1, 1, -1)
        n = f.shape[0]
        values = tuple(herm(f[:, :, k]) for k in range(self.predual.dim))
        return is_cp(CpMap(self.predual, n, values), tol)


def dual(s: OperatorSystem, w: StateFunctional, tol: float = DEFAULT_TOL) -> DualSystem:
    if w.system is not s:
        raise ValueError("state belongs to a different system")
    if not is_faithful(w, tol):
        raise NotFaithfulError("order-unit state must be faithful")
    return DualSystem(s, w)


# --- generated C*-algebra --------------------------------------------------------------------


def generated_algebra(s: OperatorSystem) -> OperatorSystem:
    """Smallest unital *-subalgebra of the ambient containing ``s``."""
    exact = s.diagonal
    current = list(s.basis)
    while True:
        cands = []
        for i, x in enumerate(current):
            for y in current[i:]:
                p = x @ y
                cands.append((p + p.conj().T) / 2)
                skew = 1j * (p - p.conj().T) / 2
                if np.any(np.abs(skew) > 0):
                    cands.append(skew)
        cands = [herm(c) for c in cands]
        grown = _independent(cands, exact, start=current)
        if len(grown) == len(current):
            break
        current = grown
    return OperatorSystem(s.ambient, tuple(current), label=f"C*({s.label})")
