"""Choi-block parameterization of linear maps ``A -> M_m`` on a block algebra.

A map on ``A = M_{d_1} + ... + M_{d_r}`` is encoded by one Choi block
``C_i = sum_{jk} E_jk (x) phi(E_jk)`` per summand; the map is CP iff every
``C_i`` is PSD, and ``phi(x) = sum_i Tr_1[(x_i^T (x) 1) C_i]``.
"""
from __future__ import annotations

from functools import lru_cache

import numpy as np

from .linalg import BlockShape, hermitian_basis
from .sdp import LmiBuilder


@lru_cache(maxsize=64)
def _stacked_basis(d: int, m: int) -> np.ndarray:
    """Hermitian basis of ``M_{dm}`` reshaped to ``(n, d, m, d, m)``."""
    hb = hermitian_basis(d * m)
    arr = np.array([h.astype(complex) for h in hb]).reshape(len(hb), d, m, d, m)
    arr.setflags(write=False)
    return arr


def herm_coords(m: np.ndarray) -> np.ndarray:
    """Real coordinates of a Hermitian matrix matching :func:`hermitian_basis`."""
    d = m.shape[0]
    out = [m[j, j].real for j in range(d)]
    for j in range(d):
        for k in range(j + 1, d):
            out.append(m[j, k].real)
            out.append(m[j, k].imag)
    return np.array(out, dtype=float)


def herm_from_coords(c, d: int) -> np.ndarray:
    m = np.zeros((d, d), dtype=complex)
    for j in range(d):
        m[j, j] = c[j]
    pos = d
    for j in range(d):
        for k in range(j + 1, d):
            m[j, k] = c[pos] + 1j * c[pos + 1]
            m[k, j] = np.conj(m[j, k])
            pos += 2
    return m if np.any(m.imag) else m.real


def partial_apply(x_block: np.ndarray, choi_block: np.ndarray, m: int) -> np.ndarray:
    """``Tr_1[(x^T (x) 1_m) C]`` for one summand."""
    d = x_block.shape[0]
    c4 = np.asarray(choi_block).reshape(d, m, d, m)
    return np.einsum("lj,lajb->ab", x_block, c4)


class ChoiSpace:
    """Real parameters of the Choi blocks of maps ``shape -> M_m``, registered in a builder."""

    def __init__(self, shape: BlockShape, m: int, builder: LmiBuilder):
        self.shape = shape
        self.m = m
        self.block_vars: list[range] = []
        self.block_basis: list[list[np.ndarray]] = []
        for d in shape.blocks:
            hb = hermitian_basis(d * m)
            self.block_basis.append(hb)
            self.block_vars.append(builder.new_vars(len(hb)))

    @property
    def variables(self) -> list[int]:
        return [v for r in self.block_vars for v in r]

    def add_psd(self, builder: LmiBuilder, sign: int = 1, other: "ChoiSpace | None" = None) -> None:
        """Require ``sign * C_i`` (minus ``other``'s ``C_i`` if given) PSD for every summand."""
        for i, (vars_, hb) in enumerate(zip(self.block_vars, self.block_basis)):
            terms = {v: sign * h for v, h in zip(vars_, hb)}
            if other is not None:
                for v, h in zip(other.block_vars[i], other.block_basis[i]):
                    terms[v] = terms.get(v, 0) - sign * h
            builder.add_block(np.zeros(hb[0].shape), terms)

    def value_arrays(self, x: np.ndarray) -> list[np.ndarray | None]:
        """Per summand, ``phi(x)`` for every Choi basis element, stacked; ``None`` if ``x`` misses it."""
        out = []
        for s, d in zip(self.shape.slices(), self.shape.blocks):
            xb = np.asarray(x)[s, s]
            if not np.any(xb):
                out.append(None)
                continue
            out.append(np.einsum("lj,nlajb->nab", xb, _stacked_basis(d, self.m)))
        return out

    def value_terms(self, x: np.ndarray, arrays: list | None = None) -> dict[int, np.ndarray]:
        """Linear dependence of ``phi(x)`` on the parameters.

        ``arrays`` from :meth:`value_arrays` of a space with the same shape may
        be passed in to skip the contraction.
        """
        if arrays is None:
            arrays = self.value_arrays(x)
        terms = {}
        for vars_, vals in zip(self.block_vars, arrays):
            if vals is None:
                continue
            nz = np.flatnonzero(np.any(vals.reshape(len(vals), -1) != 0, axis=1))
            for i in nz:
                v = vals[i]
                terms[vars_[i]] = v if np.any(v.imag) else v.real
        return terms

    def matrices(self, xvec) -> list[np.ndarray]:
        out = []
        for d, vars_ in zip(self.shape.blocks, self.block_vars):
            out.append(herm_from_coords([float(xvec[v]) for v in vars_], d * self.m))
        return out

    def coords_of(self, chois: list[np.ndarray]) -> dict[int, float]:
        out = {}
        for vars_, c in zip(self.block_vars, chois):
            for v, val in zip(vars_, herm_coords(np.asarray(c))):
                out[v] = float(val)
        return out


def add_value_constraint(builder: LmiBuilder, terms_list: list[tuple[int, dict[int, np.ndarray]]],
                         target: np.ndarray) -> None:
    """Require ``sum_k sign_k phi_k(x) == target`` entrywise (Hermitian coordinates)."""
    m = target.shape[0]
    tcoords = herm_coords(np.asarray(target))
    merged: dict[int, np.ndarray] = {}
    for sign, terms in terms_list:
        for v, val in terms.items():
            merged[v] = merged.get(v, 0) + sign * herm_coords(val)
    for r in range(m * m):
        builder.add_eq({v: c[r] for v, c in merged.items() if c[r] != 0}, tcoords[r])


def choi_of_map(shape: BlockShape, m: int, apply) -> list[np.ndarray]:
    """Choi blocks of a map given as a callable on ambient matrices."""
    out = []
    for s, d in zip(shape.slices(), shape.blocks):
        c = np.zeros((d * m, d * m), dtype=complex)
        for j in range(d):
            for k in range(d):
                e = np.zeros((shape.dim, shape.dim))
                e[s, s][j, k] = 1.0
                c += np.kron(_unit(d, j, k), apply(e))
        out.append((c + c.conj().T) / 2)
    return out


def _unit(d, j, k):
    e = np.zeros((d, d))
    e[j, k] = 1.0
    return e
