"""Completely positive maps on concrete operator systems.

A :class:`CpMap` stores the values of a map ``S -> M_m`` on the basis of
``S``. CP-ness on a subsystem is decided through Arveson extension: the map is
CP iff some PSD Choi matrix on the ambient algebra restricts to it. Extension
problems put one Choi matrix per unknown map on the ambient of the big system
and tie them together with linear equalities.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from . import sdp
from .choi import ChoiSpace, add_value_constraint, choi_of_map
from .linalg import BlockShape, herm, min_eig, to_fraction
from .opsys import OperatorSystem, UndecidedError, contains, generated_algebra

# closed CP decisions compare the best margin against this scale
CP_TOL = 1e-7


class MapError(ValueError):
    """Inconsistent map data or extension problem."""


def _split(x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """``x = h + i g`` with ``h``, ``g`` Hermitian."""
    x = np.asarray(x)
    h = (x + x.conj().T) / 2
    g = (x - x.conj().T) / 2j
    return h, g


@dataclass(frozen=True, eq=False)
class CpMap:
    domain: OperatorSystem
    m: int
    values: tuple[np.ndarray, ...]
    label: str = ""

    def __post_init__(self):
        if self.m < 1:
            raise MapError("codomain dimension must be positive")
        if len(self.values) != self.domain.dim:
            raise MapError(f"expected {self.domain.dim} values, got {len(self.values)}")
        vals = []
        for i, v in enumerate(self.values):
            v = herm(v, f"value[{i}]")
            if v.shape != (self.m, self.m):
                raise MapError(f"value[{i}] has shape {v.shape}, expected {(self.m, self.m)}")
            vals.append(v)
        object.__setattr__(self, "values", tuple(vals))

    def __call__(self, x) -> np.ndarray:
        """Value on an element of the domain (complex elements allowed)."""
        h, g = _split(np.asarray(x))
        out = self._apply_herm(h)
        if np.any(g):
            out = out + 1j * self._apply_herm(g)
        return out

    def _apply_herm(self, h) -> np.ndarray:
        c = self.domain.coords(herm(h))
        out = np.zeros((self.m, self.m), dtype=complex)
        for ci, v in zip(c, self.values):
            out += ci * v
        return out if np.any(out.imag) else out.real

    def __add__(self, other: "CpMap") -> "CpMap":
        _same_frame(self, other)
        return CpMap(self.domain, self.m, tuple(a + b for a, b in zip(self.values, other.values)))

    def __sub__(self, other: "CpMap") -> "CpMap":
        _same_frame(self, other)
        return CpMap(self.domain, self.m, tuple(a - b for a, b in zip(self.values, other.values)))

    def scale(self, c: float) -> "CpMap":
        return CpMap(self.domain, self.m, tuple(c * v for v in self.values))

    def restrict(self, sub: OperatorSystem) -> "CpMap":
        if sub.ambient != self.domain.ambient or not all(contains(self.domain, b) for b in sub.basis):
            raise MapError("restriction target is not a subsystem of the domain")
        return CpMap(sub, self.m, tuple(herm(self(b)) for b in sub.basis), self.label)

    def close_to(self, other: "CpMap", tol: float) -> bool:
        _same_frame(self, other)
        return all(np.max(np.abs(a - b)) <= tol for a, b in zip(self.values, other.values))


def _same_frame(a: CpMap, b: CpMap) -> None:
    if a.domain is not b.domain and not (a.domain.ambient == b.domain.ambient and a.domain.dim == b.domain.dim
                                         and all(np.allclose(x, y) for x, y in zip(a.domain.basis, b.domain.basis))):
        raise MapError("maps live on different domains")
    if a.m != b.m:
        raise MapError("maps have different codomains")


def from_callable(domain: OperatorSystem, m: int, f: Callable[[np.ndarray], np.ndarray], label: str = "") -> CpMap:
    return CpMap(domain, m, tuple(herm(f(b)) for b in domain.basis), label)


def identity_map(domain: OperatorSystem) -> CpMap:
    if len(domain.ambient.blocks) != 1:
        raise MapError("identity map needs a single-block ambient")
    return from_callable(domain, domain.ambient.dim, lambda x: x, "id")


def transpose_map(domain: OperatorSystem) -> CpMap:
    if len(domain.ambient.blocks) != 1:
        raise MapError("transpose map needs a single-block ambient")
    return from_callable(domain, domain.ambient.dim, lambda x: np.asarray(x).T, "transpose")


def coordinate_functional(domain: OperatorSystem, i: int) -> CpMap:
    """``a -> a_ii``: the i-th diagonal entry, a state on any subsystem."""
    return from_callable(domain, 1, lambda x: np.array([[np.asarray(x)[i, i].real]]), f"coord{i}")


def zero_map(domain: OperatorSystem, m: int) -> CpMap:
    return CpMap(domain, m, tuple(np.zeros((m, m)) for _ in domain.basis), "0")


def kraus_map(domain: OperatorSystem, kraus: Sequence[np.ndarray], label: str = "") -> CpMap:
    """``x -> sum_k K_k x K_k^*``; CP by construction."""
    kraus = [np.asarray(k) for k in kraus]
    m = kraus[0].shape[0]
    return from_callable(domain, m, lambda x: sum(k @ x @ k.conj().T for k in kraus), label)


def direct_sum_map(maps: Sequence[CpMap]) -> CpMap:
    """``x -> phi_1(x) + ... + phi_k(x)`` block-diagonally in ``M_{m_1 + ... + m_k}``."""
    if not maps:
        raise MapError("need at least one map")
    dom = maps[0].domain
    sizes = [f.m for f in maps]
    total = sum(sizes)
    vals = []
    for i in range(dom.dim):
        out = np.zeros((total, total), dtype=complex)
        pos = 0
        for f in maps:
            out[pos:pos + f.m, pos:pos + f.m] = f.values[i]
            pos += f.m
        vals.append(out)
    return CpMap(dom, total, tuple(vals), "+".join(f.label or "?" for f in maps))


# --- CP decisions -----------------------------------------------------------------------------------


def choi_blocks(f: CpMap) -> list[np.ndarray]:
    """Choi blocks of a map whose domain is the whole ambient block algebra."""
    if not f.domain.is_algebra_ambient:
        raise MapError("Choi matrix is only determined on a full block algebra")
    return choi_of_map(f.domain.ambient, f.m, f)


def choi_min_eig(f: CpMap) -> float:
    return min(min_eig(c) for c in choi_blocks(f))


def cp_problem(f: CpMap) -> sdp.LmiProblem:
    """Closed LMI: a PSD Choi matrix on the ambient restricting to ``f``."""
    b = sdp.LmiBuilder()
    space = ChoiSpace(f.domain.ambient, f.m, b)
    space.add_psd(b)
    for x, v in zip(f.domain.basis, f.values):
        add_value_constraint(b, [(1, space.value_terms(x))], v)
    return b.build(strict=False, label=f"cp extension of {f.label or 'map'}")


def _pow2_scale(f: CpMap) -> float:
    big = max(float(np.max(np.abs(v))) for v in f.values)
    return 2.0 ** math.ceil(math.log2(big)) if big > 0 else 1.0


def cp_lmi(f: CpMap) -> sdp.LmiProblem:
    """:func:`cp_problem` for ``f`` rescaled by a power of two to unit size."""
    s = _pow2_scale(f)
    return cp_problem(f if s == 1.0 else f.scale(1 / s))


def cp_verdict(f: CpMap, tol: float = CP_TOL) -> sdp.FeasibilityVerdict:
    return sdp.solve(cp_lmi(f), tol)


def is_cp(f: CpMap, tol: float = CP_TOL) -> bool:
    """Complete positivity; direct Choi test on full algebras, Choi extension otherwise."""
    if f.domain.is_algebra_ambient:
        if f.m == 1 and f.domain.ambient.is_commutative and f.domain.diagonal:
            # a functional on l^inf_n: the Choi blocks are its values on the minimal projections
            return all(to_fraction(c[0, 0].real) >= 0 for c in choi_blocks(f))
        return choi_min_eig(f) >= -tol
    v = cp_verdict(f, tol)
    if v.status is sdp.Status.UNKNOWN:
        raise UndecidedError("complete positivity", v)
    return v.feasible


def cp_leq(f: CpMap, g: CpMap, tol: float = CP_TOL) -> bool:
    """``f <= g`` in the CP order."""
    return is_cp(g - f, tol)


# --- extension problems ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class ExtensionProblem:
    """Find CP extensions ``phi~_i`` to ``big`` of the maps on ``small``.

    ``sums``: pairs ``(left, right)`` of index tuples with
    ``sum_left phi~ = sum_right phi~`` on ``big``. ``dominance``: pairs
    ``(i, j)`` with ``phi~_i <= phi~_j`` on ``big``. ``functionals``: triples
    ``(F, i, j)`` with ``tr(F phi~_i(x)) = tr(F phi~_j(x))`` for ``x`` in
    ``big``; ``F = None`` means the trace.
    """

    small: OperatorSystem
    big: OperatorSystem
    maps: tuple[CpMap, ...]
    sums: tuple[tuple[tuple[int, ...], tuple[int, ...]], ...] = ()
    dominance: tuple[tuple[int, int], ...] = ()
    functionals: tuple[tuple[np.ndarray | None, int, int], ...] = ()
    label: str = ""

    def __post_init__(self):
        if not self.maps:
            raise MapError("extension problem needs at least one map")
        if self.small.ambient != self.big.ambient:
            raise MapError("small and big systems must share the ambient")
        if not all(contains(self.big, b) for b in self.small.basis):
            raise MapError("small system is not contained in the big one")
        m = self.maps[0].m
        for i, f in enumerate(self.maps):
            if f.m != m:
                raise MapError(f"map {i} has codomain M_{f.m}, expected M_{m}")
            if f.domain is not self.small and not all(contains(self.small, b) for b in f.domain.basis):
                raise MapError(f"map {i} is not defined on the small system")
        n = len(self.maps)
        idx = [i for l, r in self.sums for i in (*l, *r)] + [i for p in self.dominance for i in p] \
            + [i for _, a, b in self.functionals for i in (a, b)]
        if any(not 0 <= i < n for i in idx):
            raise MapError("constraint refers to a missing map")
        object.__setattr__(self, "maps", tuple(f if f.domain is self.small else f.restrict(self.small)
                                               for f in self.maps))
        object.__setattr__(self, "sums", tuple((tuple(l), tuple(r)) for l, r in self.sums))
        object.__setattr__(self, "dominance", tuple(tuple(p) for p in self.dominance))

    @property
    def m(self) -> int:
        return self.maps[0].m


@dataclass
class _Layout:
    lmi: sdp.LmiProblem
    spaces: list[ChoiSpace]
    gaps: list[tuple[int, int, ChoiSpace | None]]


def _build(p: ExtensionProblem) -> _Layout:
    b = sdp.LmiBuilder()
    shape, m = p.big.ambient, p.m
    spaces = [ChoiSpace(shape, m, b) for _ in p.maps]
    cache: dict[int, list] = {}

    def terms(space: ChoiSpace, x: np.ndarray) -> dict[int, np.ndarray]:
        # all spaces share the shape, so the contraction is done once per element
        if id(x) not in cache:
            cache[id(x)] = space.value_arrays(x)
        return space.value_terms(x, cache[id(x)])

    for s in spaces:
        s.add_psd(b)
    for s, f in zip(spaces, p.maps):
        for x, v in zip(p.small.basis, f.values):
            add_value_constraint(b, [(1, terms(s, x))], v)
    zero = np.zeros((m, m))
    for left, right in p.sums:
        for x in p.big.basis:
            add_value_constraint(b, [(1, terms(spaces[i], x)) for i in left]
                                 + [(-1, terms(spaces[j], x)) for j in right], zero)
    gaps = []
    for i, j in p.dominance:
        if p.big.is_algebra_ambient:
            spaces[j].add_psd(b, other=spaces[i])
            gaps.append((i, j, None))
        else:
            g = ChoiSpace(shape, m, b)
            g.add_psd(b)
            for x in p.big.basis:
                add_value_constraint(b, [(1, terms(g, x)), (-1, terms(spaces[j], x)),
                                         (1, terms(spaces[i], x))], zero)
            gaps.append((i, j, g))
    for F, i, j in p.functionals:
        F = np.eye(m) if F is None else np.asarray(F)
        for x in p.big.basis:
            row: dict[int, float] = {}
            for sign, k in ((1, i), (-1, j)):
                for v, val in terms(spaces[k], x).items():
                    row[v] = row.get(v, 0.0) + sign * float(np.real(np.trace(F @ val)))
            b.add_eq(row, 0.0)
    return _Layout(b.build(strict=False, label=p.label or "cp extension"), spaces, gaps)


@dataclass(frozen=True, eq=False)
class ExtensionResult:
    verdict: sdp.FeasibilityVerdict
    lmi: sdp.LmiProblem
    extensions: tuple[CpMap, ...] | None = None

    @property
    def status(self) -> sdp.Status:
        return self.verdict.status

    @property
    def feasible(self) -> bool:
        return self.verdict.feasible

    @property
    def infeasible(self) -> bool:
        return self.verdict.infeasible

    def replay(self, tol: float = CP_TOL) -> bool:
        return sdp.replay_check(self.lmi, self.verdict, tol)


def _extensions(p: ExtensionProblem, layout: _Layout, x) -> tuple[CpMap, ...]:
    out = []
    arrays = [layout.spaces[0].value_arrays(b) for b in p.big.basis]
    for k, s in enumerate(layout.spaces):
        terms = [s.value_terms(b, a) for b, a in zip(p.big.basis, arrays)]
        vals = [sum((float(x[v]) * t for v, t in tm.items()), np.zeros((p.m, p.m))) for tm in terms]
        out.append(CpMap(p.big, p.m, tuple(herm(v) for v in vals), f"ext{k}"))
    return tuple(out)


def _validate_inputs(p: ExtensionProblem, tol: float) -> list[str]:
    warnings = []
    for i, f in enumerate(p.maps):
        v = cp_verdict(f, tol)
        if v.status is sdp.Status.UNKNOWN:
            raise UndecidedError(f"complete positivity of input map {i}", v)
        if not v.feasible:
            raise MapError(f"input map {i} is not completely positive")
        if v.best_margin is not None and v.best_margin < 0:
            warnings.append(f"input map {i} is CP only within tolerance (margin {float(v.best_margin):.2e})")
    return warnings


def _normalized(p: ExtensionProblem) -> tuple[ExtensionProblem, float]:
    """Rescale all maps by a power of two so the largest value entry is at most 1."""
    s = max(_pow2_scale(f) for f in p.maps)
    if s == 1.0:
        return p, s
    maps = tuple(f.scale(1 / s) for f in p.maps)
    return ExtensionProblem(p.small, p.big, maps, p.sums, p.dominance, p.functionals, p.label), s


def solve_extension(p: ExtensionProblem, tol: float = CP_TOL, validate: bool = True) -> ExtensionResult:
    """Decide the extension problem.

    The closed-problem threshold is absolute, so the maps are first rescaled
    by a power of two (exact in floating point); the reported LMI and witness
    refer to the rescaled problem and the extensions are scaled back.
    """
    warnings = _validate_inputs(p, tol) if validate else []
    q, s = _normalized(p)
    layout = _build(q)
    v = sdp.solve(layout.lmi, tol)
    if warnings:
        v = v.with_warnings(*warnings)
    ext = tuple(f.scale(s) for f in _extensions(q, layout, v.witness.x)) if v.feasible else None
    return ExtensionResult(v, layout.lmi, ext)


def riesz_arveson(small: OperatorSystem, big: OperatorSystem, n: int, k: int, maps: Sequence[CpMap],
                  tol: float = CP_TOL, validate: bool = True) -> ExtensionResult:
    """Extensions preserving ``phi_1 + ... + phi_n = phi_{n+1} + ... + phi_{n+k}``."""
    if n < 1 or k < 1 or len(maps) != n + k:
        raise MapError(f"expected {n}+{k} maps, got {len(maps)}")
    lhs = sum(maps[1:n], maps[0])
    rhs = sum(maps[n + 1:], maps[n])
    gap = max(float(np.max(np.abs(a - b))) for a, b in zip(lhs.values, rhs.values))
    if gap > tol:
        raise MapError(f"input maps violate the sum identity by {gap:.3e}")
    p = ExtensionProblem(small, big, tuple(maps), sums=((tuple(range(n)), tuple(range(n, n + k))),),
                         label=f"({n},{k}) Riesz-Arveson")
    return solve_extension(p, tol, validate)


def dominated_extend(small: OperatorSystem, big: OperatorSystem, dominated: Sequence[CpMap], dominating: CpMap,
                     tol: float = CP_TOL, validate: bool = True) -> ExtensionResult:
    """Extensions with ``phi~_i <= phi~`` for every dominated ``phi_i``."""
    for i, f in enumerate(dominated):
        if not cp_leq(f, dominating, tol):
            raise MapError(f"dominated map {i} is not below the dominating map")
    maps = tuple(dominated) + (dominating,)
    last = len(maps) - 1
    p = ExtensionProblem(small, big, maps, dominance=tuple((i, last) for i in range(last)),
                         label="dominated extension")
    return solve_extension(p, tol, validate)


# --- conditional expectations ----------------------------------------------------------------------


def is_subalgebra(s: OperatorSystem) -> bool:
    return generated_algebra(s).dim == s.dim


@dataclass(frozen=True, eq=False)
class ConditionalExpectation:
    """Trace-preserving conditional expectation onto a unital *-subalgebra.

    It is the Hilbert-Schmidt orthogonal projection onto the subalgebra.
    """

    algebra: OperatorSystem
    onb: tuple[np.ndarray, ...] = field(repr=False, default=())

    def __post_init__(self):
        if not is_subalgebra(self.algebra):
            raise MapError("conditional expectation needs a *-subalgebra")
        # Hermitian orthonormal basis: Gram-Schmidt in the real inner product Re tr(x y)
        q = []
        for b in self.algebra.basis:
            v = b.astype(complex)
            for _ in range(2):
                for u in q:
                    v = v - np.real(np.vdot(u, v)) * u
            q.append(v / np.sqrt(np.real(np.vdot(v, v))))
        object.__setattr__(self, "onb", tuple(q))

    def __call__(self, x) -> np.ndarray:
        h, g = _split(np.asarray(x, dtype=complex))
        out = self._proj(h)
        if np.any(g):
            out = out + 1j * self._proj(g)
        return out

    def _proj(self, h) -> np.ndarray:
        out = np.zeros(h.shape, dtype=complex)
        for u in self.onb:
            out += np.real(np.vdot(u, h)) * u
        return out


def compose(f: CpMap, e: ConditionalExpectation, big: OperatorSystem) -> CpMap:
    """``f o E`` restricted to ``big``."""
    return from_callable(big, f.m, lambda x: f(e(x)), f"{f.label}oE")


def expectation_witness(p: ExtensionProblem, tol: float = CP_TOL) -> tuple[sdp.LmiProblem, sdp.Witness, bool]:
    """Constructive witness ``phi~_i = phi_i o E`` for a C*-pair, replay-checked.

    ``p.small`` must be a unital *-subalgebra of the ambient of ``p.big``.
    """
    e = ConditionalExpectation(p.small)
    shape = p.big.ambient
    layout = _build(p)
    x = np.zeros(layout.lmi.num_vars)
    full = _full_algebra(shape)
    for s, f in zip(layout.spaces, p.maps):
        fe = from_callable(full, p.m, lambda y, f=f: f(e(y)))
        for v, c in s.coords_of(choi_of_map(shape, p.m, fe)).items():
            x[v] = c
    for i, j, g in layout.gaps:
        if g is None:
            continue
        diff = from_callable(full, p.m, lambda y, i=i, j=j: p.maps[j](e(y)) - p.maps[i](e(y)))
        for v, c in g.coords_of(choi_of_map(shape, p.m, diff)).items():
            x[v] = c
    w = sdp.Witness(tuple(float(v) for v in x), 0.0)
    ok = sdp.replay_check(layout.lmi, sdp.FeasibilityVerdict(sdp.Status.FEASIBLE, witness=w), tol)
    return layout.lmi, w, ok


_FULL_CACHE: dict[BlockShape, OperatorSystem] = {}


def _full_algebra(shape: BlockShape) -> OperatorSystem:
    from .opsys import make_block_algebra

    if shape not in _FULL_CACHE:
        _FULL_CACHE[shape] = make_block_algebra(shape)
    return _FULL_CACHE[shape]
