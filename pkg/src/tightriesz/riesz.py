"""Strict Riesz interpolation inside operator systems.

``interpolate`` looks for ``a`` in the system and ``delta > 0`` with
``x_i + delta 1 <= a <= y_j - delta 1``. The tight Riesz check for a pair
``small <= big`` is the implication "interpolates in big => interpolates in
small", reported instance by instance.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import sdp
from .cones import QuotientElement, quotient_strict_member, tensor_linf_quotient, tuple_element
from .linalg import DEFAULT_TOL, herm
from .opsys import OperatorSystem, SystemError_, amplify, amplify_element, as_element, contains, generated_algebra

Status = sdp.Status


@dataclass(frozen=True, eq=False)
class InterpolationInstance:
    system: OperatorSystem
    lower: tuple[np.ndarray, ...]
    upper: tuple[np.ndarray, ...]
    ambient_witness: np.ndarray | None = None

    def __post_init__(self):
        if not self.lower or not self.upper:
            raise ValueError("lower and upper lists must be nonempty")
        shape = self.system.ambient
        conv = []
        for name, xs in (("lower", self.lower), ("upper", self.upper)):
            try:
                conv.append(tuple(as_element(x, shape) for x in xs))
            except ValueError as exc:
                raise SystemError_(f"{name}: {exc}") from None
        object.__setattr__(self, "lower", conv[0])
        object.__setattr__(self, "upper", conv[1])
        if self.ambient_witness is not None:
            object.__setattr__(self, "ambient_witness", as_element(self.ambient_witness, shape))

    @property
    def nk(self) -> tuple[int, int]:
        return len(self.lower), len(self.upper)

    def shifted(self, c: float) -> "InterpolationInstance":
        u = self.system.unit
        return InterpolationInstance(self.system, tuple(herm(x + c * u) for x in self.lower),
                                     tuple(herm(y + c * u) for y in self.upper))

    def scaled(self, c: float) -> "InterpolationInstance":
        return InterpolationInstance(self.system, tuple(herm(c * x) for x in self.lower),
                                     tuple(herm(c * y) for y in self.upper))

    def in_system(self, s: OperatorSystem) -> "InterpolationInstance":
        return InterpolationInstance(s, self.lower, self.upper, self.ambient_witness)

    def amplified(self, m: int) -> "InterpolationInstance":
        return InterpolationInstance(amplify(self.system, m), tuple(amplify_element(x, m) for x in self.lower),
                                     tuple(amplify_element(y, m) for y in self.upper))


def interpolation_problem(inst: InterpolationInstance) -> sdp.LmiProblem:
    s = inst.system
    b = sdp.LmiBuilder()
    cs = b.new_vars(s.dim)
    for x in inst.lower:
        b.add_block(-x, dict(zip(cs, s.basis)))
    for y in inst.upper:
        b.add_block(y, {c: -e for c, e in zip(cs, s.basis)})
    return b.build(strict=True, label=f"interpolation in {s.label or 'system'}")


def interpolate(inst: InterpolationInstance, tol: float = DEFAULT_TOL) -> sdp.FeasibilityVerdict:
    """Strict interpolant ``a`` in the system; the witness holds its coordinates and ``delta``."""
    return sdp.solve(interpolation_problem(inst), tol)


def interpolant(inst: InterpolationInstance, v: sdp.FeasibilityVerdict) -> np.ndarray:
    if v.witness is None:
        raise ValueError("verdict has no witness")
    return inst.system.element([float(c) for c in v.witness.x])


def witness_for(inst: InterpolationInstance, a, delta: float) -> sdp.Witness:
    """Witness in the coordinates of :func:`interpolation_problem` for a given interpolant."""
    return sdp.Witness(tuple(float(c) for c in inst.system.coords(a)), float(delta))


def check_interpolant(inst: InterpolationInstance, a, delta: float, tol: float = DEFAULT_TOL) -> bool:
    """Replay ``a`` (which must lie in the system) with margin ``delta`` against the instance."""
    if not contains(inst.system, a, 1e-8):
        return False
    v = sdp.FeasibilityVerdict(Status.FEASIBLE, witness=witness_for(inst, a, delta))
    return sdp.replay_check(interpolation_problem(inst), v, tol)


# --- TR implication records -----------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class TrRecord:
    big: sdp.FeasibilityVerdict
    small: sdp.FeasibilityVerdict

    @property
    def feasible_in_big(self) -> bool:
        return self.big.feasible

    @property
    def feasible_in_small(self) -> bool:
        return self.small.feasible

    @property
    def violation(self) -> bool:
        """Interpolates in the big system but provably not in the small one."""
        return self.big.feasible and self.small.infeasible

    @property
    def holds(self) -> bool | None:
        """The implication big => small; ``None`` when a side is UNKNOWN."""
        if self.big.status is Status.UNKNOWN or (self.big.feasible and self.small.status is Status.UNKNOWN):
            return None
        return not self.violation


def _require_in(s: OperatorSystem, xs, what: str) -> None:
    for i, x in enumerate(xs):
        if not contains(s, x, 1e-8):
            raise SystemError_(f"{what} element {i} lies outside {s.label or 'the subsystem'}")


def tr_instance_check(small: OperatorSystem, big: OperatorSystem, lower: Sequence, upper: Sequence,
                      tol: float = DEFAULT_TOL) -> TrRecord:
    if small.ambient != big.ambient or not all(contains(big, b, 1e-8) for b in small.basis):
        raise SystemError_("small system is not contained in the big one")
    inst = InterpolationInstance(small, tuple(lower), tuple(upper))
    _require_in(small, inst.lower, "lower")
    _require_in(small, inst.upper, "upper")
    return TrRecord(interpolate(inst.in_system(big), tol), interpolate(inst, tol))


def cstr_instance_check(s: OperatorSystem, big: OperatorSystem, lower: Sequence, upper: Sequence,
                        tol: float = DEFAULT_TOL) -> TrRecord:
    """TR implication with the interpolant sought in the C*-algebra generated by ``s``."""
    inst = InterpolationInstance(s, tuple(lower), tuple(upper))
    _require_in(s, inst.lower, "lower")
    _require_in(s, inst.upper, "upper")
    return tr_instance_check(generated_algebra(s), big, inst.lower, inst.upper, tol)


# --- Lemma cross-check ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class CrossCheck:
    interpolation: sdp.FeasibilityVerdict
    quotient: sdp.FeasibilityVerdict

    @property
    def exact(self) -> bool:
        return self.interpolation.exact and self.quotient.exact

    @property
    def match(self) -> bool:
        a, b = self.interpolation.status, self.quotient.status
        if a is b:
            return True
        return not self.exact and Status.UNKNOWN in (a, b)


def tuple_quotient_element(s: OperatorSystem, lower: Sequence, upper: Sequence) -> QuotientElement:
    """``(-x_1, ..., -x_n, y_1, ..., y_k)`` in ``S (x) (l^inf_n pushout l^inf_k)``."""
    q = tensor_linf_quotient(s, len(lower), len(upper))
    return tuple_element(q, [-as_element(x) for x in lower] + [as_element(y) for y in upper])


def lemma_crosscheck(s: OperatorSystem, lower: Sequence, upper: Sequence, tol: float = DEFAULT_TOL) -> CrossCheck:
    """Interpolation in ``s`` against strict positivity of the tuple in the pushout tensor."""
    inst = InterpolationInstance(s, tuple(lower), tuple(upper))
    e = tuple_quotient_element(s, inst.lower, inst.upper)
    # the kernel {(b,..,b,-b,..,-b)} never contains a nonzero PSD element
    return CrossCheck(interpolate(inst, tol), quotient_strict_member(e, tol, check_kernel=False))


def run_campaign(cfg):
    """See :func:`tightriesz.campaign.run_campaign`."""
    from .campaign import run_campaign as _run

    return _run(cfg)
