"""Standard systems and data: Namioka-Phelps systems and the classic l^inf_4 instances."""
from __future__ import annotations

import numpy as np

from .cpmaps import ExtensionProblem, coordinate_functional
from .opsys import OperatorSystem, QuotientSystem, make_linf, make_subsystem, pullback, pushout_quotient, uniform_state

# lower and upper data in V = {a_1 + a_2 = a_3 + a_4}
NP_LOWER = (np.diag([-3.0, 1.0, -1.0, -1.0]), np.diag([1.0, -3.0, -1.0, -1.0]))
NP_UPPER = (np.diag([2.0, 2.0, 4.0, 0.0]), np.diag([2.0, 2.0, 0.0, 4.0]))
# an interpolant in l^inf_4 with margin 1/2
NP_INTERPOLANT = np.diag([1.5, 1.5, -0.5, -0.5])


def namioka_phelps(n: int = 2, k: int = 2) -> OperatorSystem:
    """``V_{n,k}``: the pullback of ``l^inf_n`` and ``l^inf_k`` over their averaging states."""
    ln, lk = make_linf(n), make_linf(k)
    s, _ = pullback([(ln, uniform_state(ln)), (lk, uniform_state(lk))], label=f"V{n},{k}")
    return s


def v_system() -> OperatorSystem:
    """``V`` inside ``l^inf_4``, built from three generators."""
    return make_subsystem(make_linf(4), [np.diag([1, 0, 1, 0]), np.diag([0, 1, 0, 1]), np.diag([1, 0, 0, 1])],
                          label="V")


def np_pushout(n: int = 2, k: int = 2) -> QuotientSystem:
    """``l^inf_n`` pushout ``l^inf_k`` as ``l^inf_{n+k} / span{(1,..,1,-1,..,-1)}``."""
    return pushout_quotient([make_linf(n), make_linf(k)], label=f"linf{n}+linf{k}")


def coordinate_extension_problem(small: OperatorSystem | None = None) -> ExtensionProblem:
    """Coordinate states on ``V`` extended to ``l^inf_4`` with ``f1 + f2 = f3 + f4``."""
    small = small or v_system()
    big = make_linf(4)
    maps = tuple(coordinate_functional(small, i) for i in range(4))
    return ExtensionProblem(small, big, maps, sums=(((0, 1), (2, 3)),), label="coordinate states on V")
