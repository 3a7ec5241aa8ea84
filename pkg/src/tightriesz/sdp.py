"""Strict feasibility of affine Hermitian block constraints.

An :class:`LmiProblem` asks for real variables ``x`` and a margin ``delta``
with::

    C_b + sum_i x_i A_bi - delta * M_b  >= 0      for every block b
    A_eq x = b_eq

``strict`` problems want ``delta > 0``; closed problems (``strict=False``)
only want ``delta >= 0``. The margin is maximized (capped at 1), never fixed.

All-diagonal real problems go through an exact rational simplex and come back
with a rational witness or a Farkas certificate. Everything else is solved
numerically with Clarabel through cvxpy; margins within ``10 * tol`` of the
decision threshold are reported as ``UNKNOWN``.
"""
from __future__ import annotations

import json
import logging
import warnings
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Sequence

import numpy as np

from . import _simplex
from .linalg import (
    DEFAULT_TOL,
    herm,
    is_diagonal,
    min_eig,
    nullspace_exact,
    real_embed,
    solve_exact,
    to_fraction,
)
from .serialize import FormatError, check_keys, decode_matrix, decode_number, encode_matrix, encode_number, encode_vector

log = logging.getLogger(__name__)

MARGIN_CAP = 1.0
FORMAT_NAME = "lmi-problem"
FORMAT_VERSION = 1


class Status(str, Enum):
    FEASIBLE = "feasible"
    INFEASIBLE = "infeasible"
    UNKNOWN = "unknown"


class ProblemError(ValueError):
    """Ill-formed LMI problem."""


@dataclass(frozen=True, eq=False)
class LmiBlock:
    constant: np.ndarray
    coeffs: tuple[np.ndarray, ...]
    margin_unit: np.ndarray

    @property
    def dim(self) -> int:
        return self.constant.shape[0]

    @property
    def diagonal(self) -> bool:
        mats = (self.constant, self.margin_unit, *self.coeffs)
        return all(not np.iscomplexobj(m) and is_diagonal(m) for m in mats)

    def value(self, x: Sequence[float], delta: float = 0.0) -> np.ndarray:
        out = np.array(self.constant, dtype=complex if self.is_complex else float)
        for xi, a in zip(x, self.coeffs):
            if xi:
                out = out + float(xi) * a
        return out - float(delta) * self.margin_unit

    @property
    def is_complex(self) -> bool:
        return any(np.iscomplexobj(m) for m in (self.constant, self.margin_unit, *self.coeffs))


def block(constant, coeffs: Sequence = (), margin_unit=None) -> LmiBlock:
    c = herm(constant, "constant")
    cs = tuple(herm(a, f"coeff[{i}]") for i, a in enumerate(coeffs))
    if any(a.shape != c.shape for a in cs):
        raise ProblemError("coefficient shape does not match constant")
    mu = herm(np.eye(c.shape[0]) if margin_unit is None else margin_unit, "margin_unit")
    if mu.shape != c.shape:
        raise ProblemError("margin unit shape does not match constant")
    if min_eig(mu) <= 0:
        raise ProblemError("margin unit must be strictly positive")
    return LmiBlock(c, cs, mu)


@dataclass(frozen=True, eq=False)
class LmiProblem:
    num_vars: int
    blocks: tuple[LmiBlock, ...]
    eq_coeffs: np.ndarray = field(default_factory=lambda: np.zeros((0, 0)))
    eq_rhs: np.ndarray = field(default_factory=lambda: np.zeros(0))
    strict: bool = True
    label: str = ""

    def __post_init__(self):
        a = np.asarray(self.eq_coeffs, dtype=float).reshape(-1, self.num_vars) if np.size(self.eq_coeffs) \
            else np.zeros((0, self.num_vars))
        b = np.asarray(self.eq_rhs, dtype=float).reshape(-1)
        if a.shape[0] != b.shape[0]:
            raise ProblemError("equality rows and right-hand sides differ in number")
        for i, blk in enumerate(self.blocks):
            if len(blk.coeffs) != self.num_vars:
                raise ProblemError(f"block {i} has {len(blk.coeffs)} coefficients, expected {self.num_vars}")
        a.setflags(write=False)
        b.setflags(write=False)
        object.__setattr__(self, "eq_coeffs", a)
        object.__setattr__(self, "eq_rhs", b)
        object.__setattr__(self, "blocks", tuple(self.blocks))

    @property
    def diagonal(self) -> bool:
        return all(b.diagonal for b in self.blocks)

    def scaled(self, c: float) -> "LmiProblem":
        """Every block and margin unit multiplied by ``c``."""
        blocks = tuple(LmiBlock(herm(b.constant * c), tuple(herm(a * c) for a in b.coeffs), herm(b.margin_unit * c))
                       for b in self.blocks)
        return LmiProblem(self.num_vars, blocks, self.eq_coeffs, self.eq_rhs, self.strict, self.label)

    def with_blocks(self, extra: Sequence[LmiBlock]) -> "LmiProblem":
        return LmiProblem(self.num_vars, self.blocks + tuple(extra), self.eq_coeffs, self.eq_rhs,
                          self.strict, self.label)


def problem(num_vars: int, blocks: Sequence[LmiBlock], eqs: Sequence[tuple[Sequence[float], float]] = (),
            strict: bool = True, label: str = "") -> LmiProblem:
    a = np.array([list(r) for r, _ in eqs], dtype=float).reshape(len(eqs), num_vars)
    b = np.array([rhs for _, rhs in eqs], dtype=float)
    return LmiProblem(num_vars, tuple(blocks), a, b, strict, label)


@dataclass(frozen=True)
class Witness:
    x: tuple
    delta: float | Fraction

    @property
    def exact(self) -> bool:
        return isinstance(self.delta, Fraction)


@dataclass(frozen=True)
class FarkasCertificate:
    """Exact infeasibility proof for an all-diagonal problem.

    ``kind == "margin"``: rows are the diagonal entries of all blocks in order;
    ``y >= 0`` with ``sum y_r m_r = 1``, ``sum_r y_r a_r + A_eq^T z = 0`` and
    ``y.c - z.b_eq`` <= 0 (strict problems) or < 0 (closed problems).

    ``kind == "equality"``: ``A_eq^T z = 0`` and ``z.b_eq != 0``.
    """

    kind: str
    y: tuple[Fraction, ...]
    z: tuple[Fraction, ...]


@dataclass(frozen=True, eq=False)
class DualCertificate:
    """Numerical dual infeasibility certificate: PSD ``Z_b`` with ``sum <Z_b, M_b> = 1``."""

    z_blocks: tuple[np.ndarray, ...]
    y: np.ndarray
    value: float


@dataclass(frozen=True, eq=False)
class FeasibilityVerdict:
    status: Status
    witness: Witness | None = None
    certificate: FarkasCertificate | DualCertificate | None = None
    best_margin: float | Fraction | None = None
    exact: bool = False
    message: str = ""
    warnings: tuple[str, ...] = ()

    @property
    def feasible(self) -> bool:
        return self.status is Status.FEASIBLE

    @property
    def infeasible(self) -> bool:
        return self.status is Status.INFEASIBLE

    def with_warnings(self, *w: str) -> "FeasibilityVerdict":
        return FeasibilityVerdict(self.status, self.witness, self.certificate, self.best_margin, self.exact,
                                  self.message, self.warnings + tuple(w))

    def to_dict(self) -> dict:
        out: dict = {"status": self.status.value, "exact": self.exact}
        if self.best_margin is not None:
            out["best_margin"] = encode_number(self.best_margin)
        if self.witness is not None:
            out["witness"] = {"x": encode_vector(self.witness.x), "delta": encode_number(self.witness.delta)}
        if isinstance(self.certificate, FarkasCertificate):
            out["certificate"] = {"type": "farkas", "kind": self.certificate.kind,
                                  "y": encode_vector(self.certificate.y), "z": encode_vector(self.certificate.z)}
        elif isinstance(self.certificate, DualCertificate):
            out["certificate"] = {"type": "dual", "value": encode_number(self.certificate.value),
                                  "y": encode_vector(self.certificate.y),
                                  "z_blocks": [encode_matrix(z) for z in self.certificate.z_blocks]}
        if self.message:
            out["message"] = self.message
        if self.warnings:
            out["warnings"] = list(self.warnings)
        return out


# --- exact path ---------------------------------------------------------------


def _rows_exact(p: LmiProblem):
    """(constant, coefficient row, margin) for every diagonal entry, as Fractions."""
    rows = []
    for b in p.blocks:
        cs = [np.diag(a) for a in b.coeffs]
        c, m = np.diag(b.constant), np.diag(b.margin_unit)
        for t in range(b.dim):
            rows.append((to_fraction(c[t]), [to_fraction(a[t]) for a in cs], to_fraction(m[t])))
    return rows


def _eqs_exact(p: LmiProblem):
    return ([[to_fraction(v) for v in row] for row in p.eq_coeffs], [to_fraction(v) for v in p.eq_rhs])


def solve_exact_lp(p: LmiProblem) -> FeasibilityVerdict:
    """Exact verdict for an all-diagonal problem; never ``UNKNOWN``."""
    if not p.diagonal:
        raise ProblemError("solve_exact_lp needs every block diagonal and real")
    n = p.num_vars
    rows = _rows_exact(p)
    A, b = _eqs_exact(p)
    if A:
        x0 = solve_exact(A, b)
        if x0 is None:
            # A^T z = 0, z.b != 0 from the left null space of A.
            left_null = nullspace_exact([list(col) for col in zip(*A)], len(A))
            z = next(v for v in left_null if sum(vi * bi for vi, bi in zip(v, b)) != 0)
            cert = FarkasCertificate("equality", (), tuple(z))
            return FeasibilityVerdict(Status.INFEASIBLE, certificate=cert, exact=True,
                                      message="linear equalities are inconsistent")
        N = nullspace_exact(A, n)
    else:
        x0 = [Fraction(0)] * n
        N = [[Fraction(int(i == j)) for i in range(n)] for j in range(n)]
    k = len(N)
    # reduced rows: c' + a'.t - delta*m >= 0 with x = x0 + sum_j t_j N_j
    red = []
    for c, a, m in rows:
        c2 = c + sum((ai * xi for ai, xi in zip(a, x0)), Fraction(0))
        a2 = [sum((ai * nj for ai, nj in zip(a, N[j])), Fraction(0)) for j in range(k)]
        red.append((c2, a2, m))
    # variables: t+ (k), t- (k), d+, d- ; rows: -a'.t + m delta <= c',  delta <= 1
    G, h = [], []
    for c2, a2, m in red:
        G.append([-v for v in a2] + list(a2) + [m, -m])
        h.append(c2)
    G.append([Fraction(0)] * (2 * k) + [Fraction(1), Fraction(-1)])
    h.append(Fraction(1))
    cost = [Fraction(0)] * (2 * k) + [Fraction(1), Fraction(-1)]
    res = _simplex.maximize(cost, G, h)
    if res.status != "optimal":  # pragma: no cover - bounded and feasible by construction
        raise RuntimeError(f"exact LP unexpectedly {res.status}")
    delta = res.value
    t = [res.primal[j] - res.primal[k + j] for j in range(k)]
    x = [x0[i] + sum((t[j] * N[j][i] for j in range(k)), Fraction(0)) for i in range(n)]
    ok = delta > 0 if p.strict else delta >= 0
    if ok:
        return FeasibilityVerdict(Status.FEASIBLE, witness=Witness(tuple(x), delta), best_margin=delta, exact=True)
    y = res.dual[:len(red)]
    # sum_r y_r a_r lies in the row space of A; find z with A^T z = -sum y_r a_r
    g = [sum((yr * r[1][i] for yr, r in zip(y, rows)), Fraction(0)) for i in range(n)]
    if A:
        z = solve_exact([list(col) for col in zip(*A)], [-v for v in g])
    else:
        z = []
    cert = FarkasCertificate("margin", tuple(y), tuple(z))
    return FeasibilityVerdict(Status.INFEASIBLE, certificate=cert, best_margin=delta, exact=True,
                              message=f"maximal margin {delta} {'<= 0' if p.strict else '< 0'}")


def _check_farkas(p: LmiProblem, cert: FarkasCertificate) -> bool:
    A, b = _eqs_exact(p)
    n = p.num_vars
    z = list(cert.z)
    if len(z) != len(A):
        return False
    ATz = [sum((z[r] * A[r][i] for r in range(len(A))), Fraction(0)) for i in range(n)]
    zb = sum((zi * bi for zi, bi in zip(z, b)), Fraction(0))
    if cert.kind == "equality":
        return all(v == 0 for v in ATz) and zb != 0
    rows = _rows_exact(p)
    y = list(cert.y)
    if len(y) != len(rows) or any(v < 0 for v in y):
        return False
    if sum((yr * r[2] for yr, r in zip(y, rows)), Fraction(0)) != 1:
        return False
    for i in range(n):
        if sum((yr * r[1][i] for yr, r in zip(y, rows)), Fraction(0)) + ATz[i] != 0:
            return False
    value = sum((yr * r[0] for yr, r in zip(y, rows)), Fraction(0)) - zb
    return value <= 0 if p.strict else value < 0


def _check_exact_witness(p: LmiProblem, w: Witness) -> bool:
    x = [to_fraction(v) for v in w.x]
    d = to_fraction(w.delta)
    if len(x) != p.num_vars or (d <= 0 if p.strict else d < 0):
        return False
    A, b = _eqs_exact(p)
    for row, rhs in zip(A, b):
        if sum((a * xi for a, xi in zip(row, x)), Fraction(0)) != rhs:
            return False
    for c, a, m in _rows_exact(p):
        if c + sum((ai * xi for ai, xi in zip(a, x)), Fraction(0)) - d * m < 0:
            return False
    return True


# --- numeric path ---------------------------------------------------------------


def _eq_precheck(p: LmiProblem, tol: float):
    """Least-squares consistency of the equalities; returns a certificate if inconsistent."""
    A, b = p.eq_coeffs, p.eq_rhs
    if A.shape[0] == 0:
        return None
    x, *_ = np.linalg.lstsq(A, b, rcond=None)
    r = b - A @ x
    if np.linalg.norm(r) <= max(tol, 1e-9) * (1 + np.linalg.norm(b)):
        return None
    return r  # A^T r = 0 (normal equations), r.b = |r|^2 > 0


def _project_eqs(p: LmiProblem, x: np.ndarray) -> np.ndarray:
    A, b = p.eq_coeffs, p.eq_rhs
    if A.shape[0] == 0:
        return x
    corr, *_ = np.linalg.lstsq(A, b - A @ x, rcond=None)
    return x + corr


def _numeric_witness_ok(p: LmiProblem, x, delta: float, tol: float) -> bool:
    x = np.asarray(x, dtype=float)
    if x.shape != (p.num_vars,) or not np.all(np.isfinite(x)):
        return False
    A, b = p.eq_coeffs, p.eq_rhs
    if A.shape[0] and np.max(np.abs(A @ x - b)) > tol * (1 + np.max(np.abs(b))):
        return False
    if p.strict and not delta > 0:
        return False
    for blk in p.blocks:
        if p.strict:
            if min_eig(blk.value(x, delta)) < -tol:
                return False
        else:
            slack = tol * max(1.0, float(np.max(np.linalg.eigvalsh(blk.margin_unit))))
            if min_eig(blk.value(x, max(delta, 0.0))) < -slack:
                return False
    return True


def _stack(blk: LmiBlock, n: int):
    if blk.is_complex:
        emb_c = real_embed(blk.constant.astype(complex))
        emb_m = real_embed(blk.margin_unit.astype(complex))
        coeffs = [real_embed(a.astype(complex)) for a in blk.coeffs]
    else:
        emb_c, emb_m, coeffs = blk.constant, blk.margin_unit, list(blk.coeffs)
    size = emb_c.shape[0]
    K = np.stack([a.ravel() for a in coeffs], axis=1) if n else np.zeros((size * size, 0))
    return emb_c, emb_m, K, size


def _solve_numeric(p: LmiProblem, tol: float) -> FeasibilityVerdict:
    import cvxpy as cp

    r = _eq_precheck(p, tol)
    if r is not None:
        return FeasibilityVerdict(Status.INFEASIBLE, certificate=DualCertificate((), r, float(-r @ r)),
                                  message="linear equalities are inconsistent")
    n = p.num_vars
    x = cp.Variable(n) if n else None
    d = cp.Variable()
    cons, psd = [], []
    for blk in p.blocks:
        emb_c, emb_m, K, size = _stack(blk, n)
        if blk.diagonal:
            idx = np.arange(size) * (size + 1)
            expr = np.diag(emb_c) - d * np.diag(emb_m)
            if n:
                expr = expr + K[idx, :] @ x
            con = expr >= 0
        else:
            flat = emb_c.ravel() - d * emb_m.ravel()
            if n:
                flat = flat + K @ x
            con = cp.reshape(flat, (size, size), order="C") >> 0
        cons.append(con)
        psd.append(con)
    if n and p.eq_coeffs.shape[0]:
        cons.append(p.eq_coeffs @ x == p.eq_rhs)
    cons.append(d <= MARGIN_CAP)
    prob = cp.Problem(cp.Maximize(d), cons)
    # tight settings first; Clarabel occasionally stalls there, so retry at its defaults
    for settings in ({"tol_gap_abs": 1e-10, "tol_gap_rel": 1e-10, "tol_feas": 1e-10}, {}):
        try:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                prob.solve(solver="CLARABEL", **settings)
            break
        except cp.error.SolverError as exc:  # pragma: no cover - solver breakdown
            err = exc
    else:  # pragma: no cover
        log.warning("solver error: %s", err)
        return FeasibilityVerdict(Status.UNKNOWN, message=f"solver error: {err}")
    if prob.status not in ("optimal", "optimal_inaccurate") or d.value is None:
        return FeasibilityVerdict(Status.UNKNOWN, message=f"solver status {prob.status}")
    dstar = float(d.value)
    xv = _project_eqs(p, np.asarray(x.value, dtype=float)) if n else np.zeros(0)
    band = 10 * tol
    threshold_ok = dstar > band if p.strict else dstar >= -tol
    if threshold_ok:
        for dw in ((dstar, dstar / 2) if p.strict else (min(dstar, MARGIN_CAP),)):
            if _numeric_witness_ok(p, xv, dw, tol):
                return FeasibilityVerdict(Status.FEASIBLE, witness=Witness(tuple(float(v) for v in xv), float(dw)),
                                          best_margin=dstar)
        return FeasibilityVerdict(Status.UNKNOWN, best_margin=dstar,
                                  message="solver margin above threshold but witness failed replay")
    if dstar < -band:
        cert = _dual_certificate(p, psd, tol)
        return FeasibilityVerdict(Status.INFEASIBLE, certificate=cert, best_margin=dstar,
                                  message=f"no witness found above margin (best margin {dstar:.3e})")
    return FeasibilityVerdict(Status.UNKNOWN, best_margin=dstar,
                              message=f"best margin {dstar:.3e} inside the undecided band")


def _to_complex_dual(zr: np.ndarray, blk: LmiBlock) -> np.ndarray:
    if not blk.is_complex:
        return zr
    n = blk.dim
    P, Q, S = zr[:n, :n], zr[:n, n:], zr[n:, n:]
    # <Zr, embed(A)> == Re tr(Z A)
    return (P + S) + 1j * (Q.T - Q)


def _dual_certificate(p: LmiProblem, psd_cons, tol: float) -> DualCertificate | None:
    zs = []
    for con, blk in zip(psd_cons, p.blocks):
        if con.dual_value is None:
            return None
        z = np.asarray(con.dual_value)
        z = np.diag(z) if z.ndim == 1 else z
        z = _to_complex_dual(z, blk)
        z = (z + z.conj().T) / 2
        w, v = np.linalg.eigh(z)
        zs.append((v * np.clip(w, 0, None)) @ v.conj().T)
    s_m = sum(float(np.real(np.trace(z @ b.margin_unit))) for z, b in zip(zs, p.blocks))
    if s_m <= 0:
        return None
    zs = [z / s_m for z in zs]
    cert = _complete_dual(p, zs)
    return cert if cert is not None and _check_dual(p, cert, tol) else None


def _complete_dual(p: LmiProblem, zs) -> DualCertificate | None:
    n = p.num_vars
    g = np.array([sum(float(np.real(np.trace(z @ b.coeffs[i]))) for z, b in zip(zs, p.blocks)) for i in range(n)])
    A, bvec = p.eq_coeffs, p.eq_rhs
    if A.shape[0]:
        y, *_ = np.linalg.lstsq(A.T, -g, rcond=None)
    else:
        y = np.zeros(0)
    value = sum(float(np.real(np.trace(z @ b.constant))) for z, b in zip(zs, p.blocks)) - float(y @ bvec)
    return DualCertificate(tuple(zs), y, value)


def _check_dual(p: LmiProblem, cert: DualCertificate, tol: float) -> bool:
    A, b = p.eq_coeffs, p.eq_rhs
    if not cert.z_blocks:  # inconsistent equalities
        r = cert.y
        return A.shape[0] == len(r) and np.linalg.norm(A.T @ r) <= tol * (1 + np.linalg.norm(r)) and r @ b > tol
    if len(cert.z_blocks) != len(p.blocks):
        return False
    if any(min_eig(herm(z)) < -tol for z in cert.z_blocks):
        return False
    s_m = sum(float(np.real(np.trace(z @ blk.margin_unit))) for z, blk in zip(cert.z_blocks, p.blocks))
    if abs(s_m - 1) > tol:
        return False
    g = np.array([sum(float(np.real(np.trace(z @ blk.coeffs[i]))) for z, blk in zip(cert.z_blocks, p.blocks))
                  for i in range(p.num_vars)])
    resid = g + (A.T @ cert.y if A.shape[0] else 0.0)
    if np.size(resid) and np.max(np.abs(resid)) > 10 * tol * (1 + np.max(np.abs(g))):
        return False
    value = sum(float(np.real(np.trace(z @ blk.constant))) for z, blk in zip(cert.z_blocks, p.blocks)) \
        - float(cert.y @ b if A.shape[0] else 0.0)
    # slack from the stationarity residual times a bound on |x| is not available; demand a clear gap
    return value < -10 * tol


# --- public API -------------------------------------------------------------------


def solve(p: LmiProblem, tol: float = DEFAULT_TOL) -> FeasibilityVerdict:
    """Decide ``p``; all-diagonal problems are decided exactly."""
    if tol <= 0:
        raise ValueError("tol must be positive")
    if p.diagonal:
        return solve_exact_lp(p)
    return _solve_numeric(p, tol)


def replay_check(p: LmiProblem, v: FeasibilityVerdict, tol: float = DEFAULT_TOL) -> bool:
    """Re-verify a witness or certificate against ``p`` from scratch."""
    if v.witness is not None:
        if v.witness.exact:
            return p.diagonal and _check_exact_witness(p, v.witness)
        return _numeric_witness_ok(p, v.witness.x, float(v.witness.delta), tol)
    if isinstance(v.certificate, FarkasCertificate):
        return p.diagonal and _check_farkas(p, v.certificate)
    if isinstance(v.certificate, DualCertificate):
        return _check_dual(p, v.certificate, tol)
    raise ValueError("verdict carries neither witness nor certificate")


# --- serialization -------------------------------------------------------------------


def problem_to_dict(p: LmiProblem) -> dict:
    return {
        "format": FORMAT_NAME,
        "version": FORMAT_VERSION,
        "label": p.label,
        "num_vars": p.num_vars,
        "strict": p.strict,
        "blocks": [{"constant": encode_matrix(b.constant),
                    "coeffs": [encode_matrix(a) for a in b.coeffs],
                    "margin_unit": encode_matrix(b.margin_unit)} for b in p.blocks],
        "linear_eqs": [{"coeffs": encode_vector(row), "rhs": encode_number(r)}
                       for row, r in zip(p.eq_coeffs, p.eq_rhs)],
    }


def problem_from_dict(obj) -> LmiProblem:
    check_keys(obj, "$", {"format", "version", "num_vars", "blocks"}, {"label", "strict", "linear_eqs"})
    if obj["format"] != FORMAT_NAME or obj["version"] != FORMAT_VERSION:
        raise FormatError("$.format", f"expected {FORMAT_NAME} version {FORMAT_VERSION}")
    n = obj["num_vars"]
    if not isinstance(n, int) or n < 0:
        raise FormatError("$.num_vars", "expected a nonnegative integer")
    blocks = []
    for i, b in enumerate(obj["blocks"]):
        path = f"$.blocks[{i}]"
        check_keys(b, path, {"constant", "coeffs"}, {"margin_unit"})
        if len(b["coeffs"]) != n:
            raise FormatError(path + ".coeffs", f"expected {n} coefficient matrices")
        try:
            blocks.append(block(decode_matrix(b["constant"], path + ".constant"),
                                [decode_matrix(a, f"{path}.coeffs[{j}]") for j, a in enumerate(b["coeffs"])],
                                decode_matrix(b["margin_unit"], path + ".margin_unit") if "margin_unit" in b else None))
        except ProblemError as exc:
            raise FormatError(path, str(exc)) from None
    eqs = []
    for i, e in enumerate(obj.get("linear_eqs", [])):
        path = f"$.linear_eqs[{i}]"
        check_keys(e, path, {"coeffs", "rhs"})
        if len(e["coeffs"]) != n:
            raise FormatError(path + ".coeffs", f"expected {n} coefficients")
        eqs.append(([decode_number(c, f"{path}.coeffs[{j}]") for j, c in enumerate(e["coeffs"])],
                    decode_number(e["rhs"], path + ".rhs")))
    return problem(n, blocks, eqs, strict=bool(obj.get("strict", True)), label=str(obj.get("label", "")))


def dump_problem(p: LmiProblem, path) -> None:
    with open(path, "w") as fh:
        json.dump(problem_to_dict(p), fh, indent=1, sort_keys=True)


def load_problem(path) -> LmiProblem:
    with open(path) as fh:
        return problem_from_dict(json.load(fh))


class LmiBuilder:
    """Incremental construction of an :class:`LmiProblem` with sparse coefficient maps."""

    def __init__(self):
        self.num_vars = 0
        self._blocks: list[tuple[np.ndarray, dict[int, np.ndarray], np.ndarray | None]] = []
        self._eqs: list[tuple[dict[int, float], float]] = []

    def new_vars(self, k: int) -> range:
        start = self.num_vars
        self.num_vars += k
        return range(start, start + k)

    def add_block(self, constant, terms: dict[int, np.ndarray], margin_unit=None) -> None:
        self._blocks.append((np.asarray(constant), dict(terms), margin_unit))

    def add_eq(self, terms: dict[int, float], rhs: float) -> None:
        terms = {k: float(v) for k, v in terms.items() if v != 0}
        self._eqs.append((terms, float(rhs)))

    def build(self, strict: bool = True, label: str = "") -> LmiProblem:
        n = self.num_vars
        blocks = []
        for const, terms, mu in self._blocks:
            zero = np.zeros(const.shape)
            blocks.append(block(const, [terms.get(i, zero) for i in range(n)], mu))
        a = np.zeros((len(self._eqs), n))
        b = np.zeros(len(self._eqs))
        for r, (terms, rhs) in enumerate(self._eqs):
            for k, v in terms.items():
                a[r, k] = v
            b[r] = rhs
        return LmiProblem(n, tuple(blocks), a, b, strict, label)
