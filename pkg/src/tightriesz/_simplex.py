"""Exact rational simplex for ``max c.v  s.t.  G v <= h, v >= 0``.

Dense tableau, Bland's rule, Chvatal's auxiliary-variable phase one. The
dual solution is read off the slack columns of the final tableau (they hold
the inverse basis matrix), so every optimum comes with a rational dual
``w >= 0`` satisfying ``G^T w >= c`` and ``h.w == c.v``.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

ZERO = Fraction(0)
ONE = Fraction(1)


@dataclass
class LpResult:
    status: str  # "optimal" | "infeasible" | "unbounded"
    value: Fraction | None = None
    primal: list[Fraction] | None = None
    dual: list[Fraction] | None = None


class _Tableau:
    def __init__(self, G, h):
        self.m = len(G)
        self.n = len(G[0]) if G else 0
        # columns: v (n) | slacks (m) | x0 (1)
        self.ncol = self.n + self.m + 1
        self.x0 = self.n + self.m
        self.rows = []
        for i in range(self.m):
            row = list(G[i]) + [ONE if j == i else ZERO for j in range(self.m)] + [-ONE]
            self.rows.append(row)
        self.rhs = list(h)
        self.basis = [self.n + i for i in range(self.m)]

    def pivot(self, r: int, c: int) -> None:
        prow = self.rows[r]
        p = prow[c]
        prow = [x / p for x in prow]
        self.rows[r] = prow
        self.rhs[r] /= p
        for i in range(self.m):
            if i == r:
                continue
            f = self.rows[i][c]
            if f != 0:
                row = self.rows[i]
                self.rows[i] = [a - f * b for a, b in zip(row, prow)]
                self.rhs[i] -= f * self.rhs[r]
        self.basis[r] = c

    def reduced_costs(self, cost: Sequence[Fraction], allowed) -> dict[int, Fraction]:
        cb = [cost[b] for b in self.basis]
        out = {}
        for j in allowed:
            out[j] = cost[j] - sum((cb[i] * self.rows[i][j] for i in range(self.m) if cb[i] != 0), ZERO)
        return out

    def run(self, cost, allowed, prefer_leaving=None) -> str:
        allowed = sorted(allowed)
        while True:
            rc = self.reduced_costs(cost, [j for j in allowed if j not in self.basis])
            entering = next((j for j in sorted(rc) if rc[j] > 0), None)
            if entering is None:
                return "optimal"
            ratios = {i: self.rhs[i] / self.rows[i][entering]
                      for i in range(self.m) if self.rows[i][entering] > 0}
            best = None
            if ratios:
                low = min(ratios.values())
                ties = [i for i, r in ratios.items() if r == low]
                preferred = [i for i in ties if self.basis[i] == prefer_leaving]
                best = preferred[0] if preferred else min(ties, key=lambda i: self.basis[i])
            if best is None:
                return "unbounded"
            self.pivot(best, entering)


def maximize(c: Sequence, G: Sequence[Sequence], h: Sequence) -> LpResult:
    c = [Fraction(x) for x in c]
    G = [[Fraction(x) for x in row] for row in G]
    h = [Fraction(x) for x in h]
    n, m = len(c), len(G)
    if m == 0:
        if any(x > 0 for x in c):
            return LpResult("unbounded")
        return LpResult("optimal", ZERO, [ZERO] * n, [])
    t = _Tableau(G, h)
    real_cols = range(n + m)
    if min(h) < 0:
        r = min(range(m), key=lambda i: (h[i], i))
        t.pivot(r, t.x0)
        aux = [ZERO] * t.ncol
        aux[t.x0] = -ONE
        t.run(aux, list(real_cols) + [t.x0], prefer_leaving=t.x0)
        if t.x0 in t.basis:
            r = t.basis.index(t.x0)
            if t.rhs[r] != 0:
                return LpResult("infeasible")
            c_out = next(j for j in real_cols if j not in t.basis and t.rows[r][j] != 0)
            t.pivot(r, c_out)
    cost = c + [ZERO] * m + [ZERO]
    status = t.run(cost, real_cols)
    if status == "unbounded":
        return LpResult("unbounded")
    primal = [ZERO] * n
    for i, b in enumerate(t.basis):
        if b < n:
            primal[b] = t.rhs[i]
    cb = [cost[b] for b in t.basis]
    dual = [sum((cb[i] * t.rows[i][n + j] for i in range(m)), ZERO) for j in range(m)]
    value = sum((ci * vi for ci, vi in zip(c, primal)), ZERO)
    return LpResult("optimal", value, primal, dual)
