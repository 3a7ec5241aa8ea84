"""Dense Hermitian matrix kernel.

Matrices are plain ``numpy`` arrays made read-only after validation. Block
structure of a finite-dimensional C*-algebra ``M_{d_1} + ... + M_{d_r}`` is
described by :class:`BlockShape`; its elements are stored as block-diagonal
matrices of the total dimension.

Diagonal (commutative) data has an exact path through :class:`fractions.Fraction`
vectors, see :func:`rational_vector` and :func:`is_nonneg_exact`.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

DEFAULT_TOL = 1e-9
SYMMETRIZE_TOL = 1e-12


class NotHermitianError(ValueError):
    """Raised when a matrix is not Hermitian within ``SYMMETRIZE_TOL``."""


def herm(m, name: str | None = None) -> np.ndarray:
    """Validate ``m`` as a Hermitian matrix and return a read-only copy.

    Inputs within ``SYMMETRIZE_TOL`` (relative to the largest entry) of being
    Hermitian are symmetrized, anything further away is rejected. Real inputs
    stay real.
    """
    a = np.array(m, dtype=complex if np.iscomplexobj(m) else float)
    if a.ndim == 0:
        a = a.reshape(1, 1)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] < 1:
        raise NotHermitianError(f"{name or 'matrix'}: expected a nonempty square matrix, got shape {a.shape}")
    scale = max(1.0, float(np.max(np.abs(a))))
    gap = float(np.max(np.abs(a - a.conj().T)))
    if gap > SYMMETRIZE_TOL * scale:
        raise NotHermitianError(f"{name or 'matrix'} is not Hermitian (asymmetry {gap:.3g})")
    a = (a + a.conj().T) / 2
    if np.iscomplexobj(a) and not np.any(a.imag):
        a = a.real.copy()
    a.setflags(write=False)
    return a


def is_diagonal(m: np.ndarray) -> bool:
    return not np.any(m - np.diag(np.diag(m)))


def min_eig(m: np.ndarray) -> float:
    """Smallest eigenvalue of a Hermitian matrix."""
    m = herm(m)
    if is_diagonal(m):
        return float(np.min(np.diag(m).real))
    return float(np.linalg.eigvalsh(m)[0])


def is_psd(m: np.ndarray, tol: float = DEFAULT_TOL) -> bool:
    if tol < 0:
        raise ValueError("tol must be nonnegative")
    return min_eig(m) >= -tol


def kron(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return herm(np.kron(a, b))


def direct_sum(parts: Sequence[np.ndarray]) -> np.ndarray:
    """Block-diagonal assembly of Hermitian parts."""
    if len(parts) == 0:
        raise ValueError("direct_sum needs at least one part")
    parts = [herm(p) for p in parts]
    dim = sum(p.shape[0] for p in parts)
    dtype = complex if any(np.iscomplexobj(p) for p in parts) else float
    out = np.zeros((dim, dim), dtype=dtype)
    pos = 0
    for p in parts:
        d = p.shape[0]
        out[pos:pos + d, pos:pos + d] = p
        pos += d
    return herm(out)


@dataclass(frozen=True)
class BlockShape:
    """Block dimensions of ``M_{d_1} + ... + M_{d_r}`` embedded block-diagonally."""

    blocks: tuple[int, ...]

    def __post_init__(self):
        blocks = tuple(int(b) for b in self.blocks)
        if not blocks or any(b < 1 for b in blocks):
            raise ValueError(f"invalid block shape {self.blocks!r}")
        object.__setattr__(self, "blocks", blocks)

    @property
    def dim(self) -> int:
        return sum(self.blocks)

    @property
    def is_commutative(self) -> bool:
        return all(b == 1 for b in self.blocks)

    @property
    def algebra_dim(self) -> int:
        """Real dimension of the self-adjoint part of the algebra."""
        return sum(b * b for b in self.blocks)

    def slices(self) -> list[slice]:
        out, pos = [], 0
        for b in self.blocks:
            out.append(slice(pos, pos + b))
            pos += b
        return out

    def contains(self, m: np.ndarray, tol: float = 0.0) -> bool:
        """True iff ``m`` has the right size and vanishes off the diagonal blocks."""
        if m.shape != (self.dim, self.dim):
            return False
        mask = np.ones(m.shape, dtype=bool)
        for s in self.slices():
            mask[s, s] = False
        return not np.any(np.abs(m[mask]) > tol)

    def identity(self) -> np.ndarray:
        return herm(np.eye(self.dim))

    def amplify(self, m: int) -> "BlockShape":
        return BlockShape(tuple(b * m for b in self.blocks))

    def __add__(self, other: "BlockShape") -> "BlockShape":
        return BlockShape(self.blocks + other.blocks)


def hermitian_basis(d: int) -> list[np.ndarray]:
    """Real basis of the Hermitian ``d x d`` matrices.

    Order: ``E_jj``, then for ``j < k`` the pair ``E_jk + E_kj`` and
    ``i(E_jk - E_kj)``. The coefficient of ``i(E_jk - E_kj)`` is the imaginary
    part of entry ``(j, k)``.
    """
    out = []
    for j in range(d):
        e = np.zeros((d, d))
        e[j, j] = 1.0
        out.append(herm(e))
    for j in range(d):
        for k in range(j + 1, d):
            e = np.zeros((d, d))
            e[j, k] = e[k, j] = 1.0
            out.append(herm(e))
            f = np.zeros((d, d), dtype=complex)
            f[j, k] = 1j
            f[k, j] = -1j
            out.append(herm(f))
    return out


def block_hermitian_basis(shape: BlockShape) -> list[np.ndarray]:
    """Real basis of the self-adjoint part of the block algebra ``shape``."""
    out = []
    for s, b in zip(shape.slices(), shape.blocks):
        for h in hermitian_basis(b):
            e = np.zeros((shape.dim, shape.dim), dtype=h.dtype)
            e[s, s] = h
            out.append(herm(e))
    return out


def real_vec(m: np.ndarray) -> np.ndarray:
    """Real coordinates of a matrix: real parts then imaginary parts, flattened."""
    m = np.asarray(m)
    return np.concatenate([m.real.ravel(), m.imag.ravel()]) if np.iscomplexobj(m) else np.concatenate(
        [m.ravel(), np.zeros(m.size)])


def real_embed(m: np.ndarray) -> np.ndarray:
    """``[[Re, -Im], [Im, Re]]``: PSD iff ``m`` is PSD, eigenvalues doubled."""
    m = np.asarray(m)
    if not np.iscomplexobj(m):
        return m
    return np.block([[m.real, -m.imag], [m.imag, m.real]])


# --- exact path -------------------------------------------------------------


def to_fraction(x) -> Fraction:
    """Exact rational value of an int, Fraction, ``"p/q"`` string, or finite float."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (int, np.integer)):
        return Fraction(int(x))
    if isinstance(x, str):
        return Fraction(x)
    if isinstance(x, (complex, np.complexfloating)):
        if x.imag != 0:
            raise ValueError(f"complex value {x} has no rational representation")
        x = x.real
    x = float(x)
    if not np.isfinite(x):
        raise ValueError(f"non-finite value {x}")
    return Fraction(x)


def rational_vector(coords: Iterable) -> tuple[Fraction, ...]:
    return tuple(to_fraction(c) for c in coords)


def is_nonneg_exact(v: Sequence[Fraction]) -> bool:
    """Exact PSD test for a diagonal matrix given by its diagonal."""
    return all(to_fraction(c) >= 0 for c in v)


def diag_rational(m: np.ndarray) -> tuple[Fraction, ...]:
    if not is_diagonal(m):
        raise ValueError("matrix is not diagonal")
    return rational_vector(np.diag(m))


def rank(vectors: Sequence[np.ndarray], tol: float = 1e-10) -> int:
    if len(vectors) == 0:
        return 0
    mat = np.array([real_vec(v) for v in vectors])
    s = np.linalg.svd(mat, compute_uv=False)
    return int(np.sum(s > tol * max(1.0, s[0])))


def rank_exact(rows: Sequence[Sequence[Fraction]]) -> int:
    return len(rref(rows)[1])


def rref(rows: Sequence[Sequence[Fraction]]) -> tuple[list[list[Fraction]], list[int]]:
    """Reduced row echelon form over the rationals; returns (rows, pivot columns)."""
    m = [[to_fraction(x) for x in r] for r in rows]
    pivots: list[int] = []
    if not m:
        return m, pivots
    ncol = len(m[0])
    r = 0
    for c in range(ncol):
        piv = next((i for i in range(r, len(m)) if m[i][c] != 0), None)
        if piv is None:
            continue
        m[r], m[piv] = m[piv], m[r]
        p = m[r][c]
        m[r] = [x / p for x in m[r]]
        for i in range(len(m)):
            if i != r and m[i][c] != 0:
                f = m[i][c]
                m[i] = [a - f * b for a, b in zip(m[i], m[r])]
        pivots.append(c)
        r += 1
        if r == len(m):
            break
    return m, pivots


def nullspace_exact(rows: Sequence[Sequence[Fraction]], ncol: int) -> list[list[Fraction]]:
    """Basis of ``{v : rows @ v = 0}`` over the rationals."""
    if not rows:
        return [[Fraction(int(i == j)) for i in range(ncol)] for j in range(ncol)]
    m, pivots = rref(rows)
    free = [c for c in range(ncol) if c not in pivots]
    out = []
    for f in free:
        v = [Fraction(0)] * ncol
        v[f] = Fraction(1)
        for r, p in enumerate(pivots):
            v[p] = -m[r][f]
        out.append(v)
    return out


def solve_exact(rows: Sequence[Sequence[Fraction]], rhs: Sequence[Fraction]):
    """One solution of ``rows @ v = rhs`` over the rationals, or None if inconsistent."""
    ncol = len(rows[0]) if rows else 0
    aug = [list(map(to_fraction, r)) + [to_fraction(b)] for r, b in zip(rows, rhs)]
    m, pivots = rref(aug)
    if ncol in pivots:
        return None
    v = [Fraction(0)] * ncol
    for r, p in enumerate(pivots):
        v[p] = m[r][ncol]
    return v
