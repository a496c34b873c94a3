"""Dense two-phase bounded-variable simplex with Bland's pivoting rule.

Solves ``min c.x  s.t.  A x = b,  0 <= x <= u`` with every variable boxed.
Arithmetic is generic: pass :class:`~fractions.Fraction` data for exact
solves (``tol=0``) or floats with a small positive tolerance.

Nonbasic variables sitting at their upper bound are handled by the usual
substitution ``x = u - x'``, so every nonbasic column in the tableau is at
zero and the right-hand side column always holds the basic values.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence


class LPInfeasible(Exception):
    """No x satisfies the constraints; ``row`` is the most violated equation."""

    def __init__(self, row: int, residual):
        super().__init__(f"infeasible LP (equation {row} violated by {residual})")
        self.row = row
        self.residual = residual


class LPInternalError(RuntimeError):
    pass


@dataclass(frozen=True)
class LPResult:
    x: tuple
    objective: object
    pivots: int


class _Tableau:
    def __init__(self, rows, rhs, upper, tol):
        self.rows = rows        # list of lists, one per equation
        self.rhs = rhs          # basic values
        self.upper = upper      # None = unbounded above (artificials)
        self.tol = tol
        self.flipped = [False] * len(upper)
        self.basis: list[int] = []
        self.pivots = 0

    def pivot(self, r: int, j: int):
        row = self.rows[r]
        piv = row[j]
        if piv != 1:
            inv = 1 / piv
            self.rows[r] = row = [v * inv for v in row]
            self.rhs[r] = self.rhs[r] * inv
        zero = 0
        for i, other in enumerate(self.rows):
            if i == r:
                continue
            f = other[j]
            if f == zero:
                continue
            self.rows[i] = [a - f * b if b != zero else a for a, b in zip(other, row)]
            self.rhs[i] = self.rhs[i] - f * self.rhs[r]
        self.basis[r] = j
        self.pivots += 1

    def flip(self, j: int):
        """Substitute x_j -> u_j - x_j for a nonbasic column."""
        u = self.upper[j]
        for i, row in enumerate(self.rows):
            a = row[j]
            if a != 0:
                self.rhs[i] = self.rhs[i] - a * u
                row[j] = -a
        self.flipped[j] = not self.flipped[j]

    def reduced_costs(self, cost):
        """cost is indexed by column in the original (unflipped) orientation."""
        c = [-cj if fl else cj for cj, fl in zip(cost, self.flipped)]
        d = list(c)
        for r, b in enumerate(self.basis):
            cb = c[b]
            if cb == 0:
                continue
            for j, a in enumerate(self.rows[r]):
                if a != 0:
                    d[j] -= cb * a
        return c, d

    def run(self, cost, allowed):
        """Iterate to optimality over the columns flagged in ``allowed``."""
        tol = self.tol
        while True:
            c, d = self.reduced_costs(cost)
            basic = set(self.basis)
            entering = next((j for j in range(len(d))
                             if allowed[j] and j not in basic and d[j] < -tol), None)
            if entering is None:
                return
            self._step(entering)

    def _step(self, j: int):
        tol = self.tol
        col = [row[j] for row in self.rows]
        best = self.upper[j]
        leave = None          # (row, leaves_at_upper)
        for r, a in enumerate(col):
            b = self.basis[r]
            if a > tol:
                ratio = self.rhs[r] / a
                up = False
            elif a < -tol:
                ub = self.upper[b]
                if ub is None:
                    continue
                ratio = (ub - self.rhs[r]) / (-a)
                up = True
            else:
                continue
            if ratio < 0:
                ratio = ratio * 0
            # Bland: minimum ratio, ties go to the lowest basic variable index
            if (best is None or ratio < best
                    or (leave is not None and ratio == best and b < self.basis[leave[0]])):
                best = ratio
                leave = (r, up)
            elif leave is None and ratio == best:
                # tie between bound flip and a basic row: prefer the pivot
                best = ratio
                leave = (r, up)
        if best is None:
            raise LPInternalError("unbounded direction in a boxed LP")
        if leave is None:
            self.flip(j)
            return
        r, up = leave
        old = self.basis[r]
        self.pivot(r, j)
        if up:
            self.flip(old)


def lp_solve(cost: Sequence, a_eq: Sequence[Sequence], b_eq: Sequence, upper: Sequence,
             tol=0) -> LPResult:
    """Minimise ``cost . x`` subject to ``a_eq x = b_eq`` and ``0 <= x <= upper``.

    Returns an optimal basic solution. The entering variable is always the
    lowest-index column with a negative reduced cost, which makes the result
    reproducible when several optima exist. Raises :class:`LPInfeasible`.
    """
    n = len(cost)
    if len(upper) != n:
        raise ValueError("upper has the wrong length")
    m = len(b_eq)
    if any(u is None or u < 0 for u in upper):
        raise ValueError("every variable needs a finite, nonnegative upper bound")
    zero = cost[0] * 0 if n else Fraction(0)

    # columns fixed at zero never enter; drop them and keep relative order
    keep = [j for j in range(n) if upper[j] > tol]
    nk = len(keep)
    rows, rhs = [], []
    for i in range(m):
        row = [a_eq[i][j] for j in keep]
        bi = b_eq[i]
        if bi < 0:
            row = [-v for v in row]
            bi = -bi
        art = [zero] * m
        art[i] = zero + 1
        rows.append(row + art)
        rhs.append(bi)
    ub = [upper[j] for j in keep] + [None] * m
    tab = _Tableau(rows, rhs, ub, tol)
    tab.basis = list(range(nk, nk + m))

    phase1 = [zero] * nk + [zero + 1] * m
    tab.run(phase1, [True] * nk + [False] * m)
    infeas = [(tab.rhs[r], r) for r, b in enumerate(tab.basis) if b >= nk and tab.rhs[r] > tol]
    if infeas:
        residual, r = max(infeas)
        raise LPInfeasible(tab.basis[r] - nk, residual)

    # drive zero-level artificials out of the basis, drop redundant rows
    r = 0
    while r < len(tab.rows):
        if tab.basis[r] < nk:
            r += 1
            continue
        basic = set(tab.basis)
        j = next((j for j in range(nk) if j not in basic and abs(tab.rows[r][j]) > tol), None)
        if j is None:
            del tab.rows[r], tab.rhs[r], tab.basis[r]
            continue
        tab.pivot(r, j)
        r += 1

    phase2 = [cost[j] for j in keep] + [zero] * m
    tab.run(phase2, [True] * nk + [False] * m)

    values = [zero] * (nk + m)
    for r, b in enumerate(tab.basis):
        values[b] = tab.rhs[r]
    x = [zero] * n
    for pos, j in enumerate(keep):
        v = values[pos]
        if tab.flipped[pos]:
            v = ub[pos] - v
        if tol and abs(v) <= tol:
            v = zero
        x[j] = v
    objective = sum((c * v for c, v in zip(cost, x)), zero)
    return LPResult(x=tuple(x), objective=objective, pivots=tab.pivots)
