"""Shapley value, pessimistic recursive core, minimal claim, extended Shapley."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from math import factorial
from typing import Iterable, Sequence

from .lp import LPInfeasible, lp_solve
from .games import CharacteristicFunction, Partition, PartitionFunction, canonical, partitions_of

ZERO = Fraction(0)


class EmptyCoreError(RuntimeError):
    pass


class Method(str, Enum):
    CFF_SHAPLEY = "cff_shapley"
    PFF_MINIMAL_CLAIM_SHAPLEY = "pff_minimal_claim_shapley"
    PFF_EXTENDED_SHAPLEY = "pff_extended_shapley"


@dataclass
class PowerReport:
    shapley: list[Fraction]
    method: Method
    stable_partitions: dict[frozenset[int], list[Partition]] | None = None
    warnings: list[str] = field(default_factory=list)


def shapley(v: CharacteristicFunction) -> list[Fraction]:
    """Exact Shapley value by the subset formula."""
    n = v.n
    nf = factorial(n)
    weights = [Fraction(factorial(s) * factorial(n - s - 1), nf) for s in range(n)]
    out = []
    for i in range(n):
        others = [j for j in range(n) if j != i]
        total = ZERO
        for size in range(n):
            w = weights[size]
            for c in itertools.combinations(others, size):
                c = frozenset(c)
                total += w * (v(c | {i}) - v(c))
        out.append(total)
    return out


class RecursiveCore:
    """Stable partitions of residual games under the pessimistic recursive core.

    A residual game is the set of players ``S`` left once the coalitions in
    ``fixed`` have formed. A deviating coalition D ⊆ S can secure
    ``claim(D)``: its worst value over the stable arrangements of S \\ D
    (given ``fixed`` plus D), or over all arrangements when that residual
    core is empty and the fallback is on.

    With ``payoff_rule="imputation"`` a partition Q of S is stable when some
    payoff vector that splits each coalition's value among its members gives
    every D at least ``claim(D)``; this is an LP feasibility check.
    ``payoff_rule="equal_split"`` instead fixes the payoffs by splitting each
    coalition's value equally, which is much stricter.

    Results are memoised per (S, fixed); an instance is not thread safe.
    """

    def __init__(self, pf: PartitionFunction, pessimistic_fallback: bool = True,
                 payoff_rule: str = "imputation"):
        if payoff_rule not in ("imputation", "equal_split"):
            raise ValueError(f"unknown payoff rule {payoff_rule!r}")
        self.pf = pf
        self.fallback = pessimistic_fallback
        self.payoff_rule = payoff_rule
        self._memo: dict[tuple[frozenset, frozenset], list[Partition]] = {}
        self._claims: dict[tuple[frozenset, frozenset], Fraction | None] = {}
        self.warnings: list[str] = []

    def _value(self, c: frozenset, partition: Iterable[frozenset]) -> Fraction:
        return self.pf.value(c, partition)

    def residual_outcomes(self, rest: frozenset, fixed: frozenset) -> list[Partition] | None:
        """Arrangements of ``rest`` a deviator must expect; None if it cannot deviate."""
        if not rest:
            return [()]
        stable = self.stable(rest, fixed)
        if stable:
            return stable
        if not self.fallback:
            return None
        return partitions_of(sorted(rest))

    def claim(self, d: frozenset, s: frozenset, fixed: frozenset) -> Fraction | None:
        """Pessimistic value D secures by leaving S; None if it has no credible deviation."""
        key = (d, fixed)
        if key not in self._claims:
            outcomes = self.residual_outcomes(s - d, fixed | {d})
            if outcomes is None:
                self._claims[key] = None
            else:
                base = list(fixed) + [d]
                self._claims[key] = min(self._value(d, base + list(o)) for o in outcomes)
        return self._claims[key]

    def equal_split_payoff(self, d: frozenset, q: Sequence[frozenset], fixed: frozenset) -> Fraction:
        full = list(fixed) + list(q)
        total = ZERO
        for c in q:
            shared = len(c & d)
            if shared:
                total += self._value(c, full) * Fraction(shared, len(c))
        return total

    def _unblocked(self, q: Sequence[frozenset], s: frozenset, fixed: frozenset) -> bool:
        members = sorted(s)
        claims = {}
        for size in range(1, len(members) + 1):
            for d in itertools.combinations(members, size):
                d = frozenset(d)
                a = self.claim(d, s, fixed)
                if a is not None:
                    claims[d] = a
        if self.payoff_rule == "equal_split":
            return all(self.equal_split_payoff(d, q, fixed) >= a for d, a in claims.items())
        full = list(fixed) + list(q)
        return imputation_exists([(c, self._value(c, full)) for c in q], claims)

    def stable(self, s: Iterable[int], fixed: Iterable[Iterable[int]] = ()) -> list[Partition]:
        s = frozenset(s)
        fixed = frozenset(frozenset(c) for c in fixed)
        key = (s, fixed)
        if key in self._memo:
            return self._memo[key]
        if len(s) == 1:
            result = [(s,)]
        else:
            result = [q for q in partitions_of(sorted(s)) if self._unblocked(q, s, fixed)]
        if not result:
            label = ",".join(map(str, sorted(s)))
            self.warnings.append(f"empty recursive core for residual players {{{label}}}")
        self._memo[key] = result
        return result


def imputation_exists(coalitions: Sequence[tuple[frozenset, Fraction]],
                      claims: dict[frozenset, Fraction]) -> bool:
    """Is there x with sum_C x = value(C) for every listed C and sum_D x >= claims[D]?"""
    players = sorted(i for c, _ in coalitions for i in c)
    pos = {i: k for k, i in enumerate(players)}
    n = len(players)
    # box every x_i so the simplex can run: singleton claims (or a safe floor) from
    # below, coalition totals minus the other members' floors from above
    floor = -(sum(abs(v) for _, v in coalitions) + sum(abs(a) for a in claims.values()) + 1)
    lo = {i: claims.get(frozenset([i]), floor) for i in players}
    ub = {}
    for c, v in coalitions:
        room = v - sum(lo[i] for i in c)
        if room < 0:
            return False
        for i in c:
            ub[i] = room
    # variables: y_i = x_i - lo_i in [0, ub_i], then one surplus per claim
    others = [d for d in claims if len(d) > 1]
    width = n + len(others)
    rows, rhs = [], []
    for c, v in coalitions:
        row = [ZERO] * width
        for i in c:
            row[pos[i]] = Fraction(1)
        rows.append(row)
        rhs.append(v - sum(lo[i] for i in c))
    upper = [ub[i] for i in players]
    for k, d in enumerate(others):
        row = [ZERO] * width
        for i in d:
            row[pos[i]] = Fraction(1)
        row[n + k] = Fraction(-1)
        need = claims[d] - sum(lo[i] for i in d)
        rows.append(row)
        rhs.append(need)
        upper.append(max(sum(ub[i] for i in d) - need, ZERO))
    try:
        lp_solve([ZERO] * width, rows, rhs, upper)
    except LPInfeasible:
        return False
    return True


def recursive_core_stable_partitions(pf: PartitionFunction, players: Iterable[int],
                                     fixed: Iterable[Iterable[int]] = (),
                                     pessimistic_fallback: bool = True,
                                     payoff_rule: str = "imputation") -> list[Partition]:
    """Stable partitions of the residual game on ``players`` given ``fixed`` coalitions.

    ``players`` together with the ``fixed`` coalitions must cover every player.
    """
    players = frozenset(players)
    fixed = [frozenset(c) for c in fixed]
    covered = sorted(list(players) + [i for c in fixed for i in c])
    if covered != list(range(pf.n)):
        raise ValueError("players and fixed coalitions must partition the player set")
    return RecursiveCore(pf, pessimistic_fallback, payoff_rule).stable(players, fixed)


def minimal_claim(pf: PartitionFunction, pessimistic_fallback: bool = True,
                  payoff_rule: str = "imputation") -> CharacteristicFunction:
    """Each coalition's worst value over recursively stable arrangements of the outsiders."""
    n = pf.n
    core = RecursiveCore(pf, pessimistic_fallback, payoff_rule)
    players = frozenset(range(n))
    cf = CharacteristicFunction(n, {}, dict(pf.reference_costs))
    for size in range(1, n + 1):
        for c in itertools.combinations(range(n), size):
            c = frozenset(c)
            rest = players - c
            if not rest:
                cf.values[c] = pf.value(c, [c])
                cf.stable_partitions[c] = [()]
                continue
            stable = core.stable(rest, [c])
            if not stable:
                if not pessimistic_fallback:
                    raise EmptyCoreError(f"no stable arrangement of the players outside {sorted(c)}")
                cf.warnings.append(f"coalition {sorted(c)}: empty residual core, "
                                   f"minimum taken over all residual partitions")
                candidates = partitions_of(sorted(rest))
            else:
                candidates = stable
            cf.values[c] = min(pf.value(c, [c, *q]) for q in candidates)
            cf.stable_partitions[c] = [canonical(q) for q in stable]
    cf.warnings.extend(w for w in core.warnings if w not in cf.warnings)
    return cf


def complement_game(pf: PartitionFunction) -> CharacteristicFunction:
    """w(C) = value of C when all outsiders form a single coalition."""
    n = pf.n
    players = frozenset(range(n))
    values = {}
    for size in range(1, n + 1):
        for c in itertools.combinations(range(n), size):
            c = frozenset(c)
            rest = players - c
            values[c] = pf.value(c, [c, rest] if rest else [c])
    return CharacteristicFunction(n, values, dict(pf.reference_costs))


def extended_shapley(pf: PartitionFunction) -> list[Fraction]:
    return shapley(complement_game(pf))


def power_report(method: Method | str, cf: CharacteristicFunction | None = None,
                 pf: PartitionFunction | None = None, pessimistic_fallback: bool = True) -> PowerReport:
    method = Method(method)
    if method is Method.CFF_SHAPLEY:
        return PowerReport(shapley(cf), method)
    if method is Method.PFF_MINIMAL_CLAIM_SHAPLEY:
        mc = minimal_claim(pf, pessimistic_fallback)
        return PowerReport(shapley(mc), method, mc.stable_partitions, list(mc.warnings))
    return PowerReport(extended_shapley(pf), method)
