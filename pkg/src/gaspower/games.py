"""Characteristic and partition function games built from coalition flows."""

from __future__ import annotations

import itertools
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Iterator, Mapping, Sequence

from .flows import (
    CoalitionFlows,
    PartitionFlows,
    TransferMatrices,
    allocate_coalition_flows,
    allocate_partition_flows,
    transfer_matrices,
)
from .scenario import Network, ScenarioConfig

ZERO = Fraction(0)
MAX_PLAYERS = 12

Partition = tuple  # tuple of frozensets, canonical order


def restricted_growth_strings(n: int) -> Iterator[tuple[int, ...]]:
    """All restricted growth strings of length n in lexicographic order."""
    if n == 0:
        yield ()
        return
    a = [0] * n
    while True:
        yield tuple(a)
        # rightmost position that can still grow
        i = n - 1
        while i > 0 and a[i] > max(a[:i]):
            i -= 1
        if i == 0:
            return
        a[i] += 1
        for j in range(i + 1, n):
            a[j] = 0


def partitions_of(items: Sequence[int]) -> list[Partition]:
    """Partitions of ``items`` in lexicographic restricted-growth-string order."""
    items = list(items)
    out = []
    for rgs in restricted_growth_strings(len(items)):
        blocks: dict[int, list[int]] = {}
        for item, b in zip(items, rgs):
            blocks.setdefault(b, []).append(item)
        out.append(tuple(frozenset(blocks[b]) for b in sorted(blocks)))
    return out


def enumerate_partitions(n: int) -> list[Partition]:
    """Partitions of players 0..n-1; there are Bell(n) of them."""
    if not 1 <= n <= MAX_PLAYERS:
        raise ValueError(f"player count must be between 1 and {MAX_PLAYERS}, got {n}")
    return partitions_of(range(n))


def canonical(partition: Iterable[Iterable[int]]) -> Partition:
    return tuple(sorted((frozenset(c) for c in partition), key=lambda c: min(c)))


def all_coalitions(n: int) -> list[frozenset[int]]:
    """Nonempty subsets of range(n), by size then lexicographically."""
    return [frozenset(c) for size in range(1, n + 1) for c in itertools.combinations(range(n), size)]


def internal_profit(tm: TransferMatrices, c: Iterable[int]) -> Fraction:
    """Fees members receive from each other minus costs they impose on each other.

    The diagonal of Q is a player's cost on its own pipelines, which is
    already part of its LP cost, so only pairs of distinct members count.
    """
    c = list(c)
    return sum((tm.R[i, j] - tm.Q[i, j] for i in c for j in c if i != j), ZERO)


def externality(tm: TransferMatrices, source: Iterable[int], target: Iterable[int]) -> Fraction:
    """Net fee-over-cost transfer from the flows of ``source`` to members of ``target``."""
    source, target = list(source), list(target)
    if set(source) & set(target):
        raise ValueError("coalitions must be disjoint")
    return sum((tm.R[i, j] - tm.Q[i, j] for i in target for j in source), ZERO)


@dataclass
class CharacteristicFunction:
    n: int
    values: dict[frozenset[int], Fraction]
    reference_costs: dict[int, Fraction] = field(default_factory=dict)
    costs: dict[frozenset[int], Fraction] = field(default_factory=dict)
    internal: dict[frozenset[int], Fraction] = field(default_factory=dict)
    # minimal claim bookkeeping: stable residual partitions used per coalition
    stable_partitions: dict[frozenset[int], list[Partition]] = field(default_factory=dict)
    warnings: list[str] = field(default_factory=list)

    def __call__(self, c: Iterable[int]) -> Fraction:
        c = frozenset(c)
        if not c:
            return ZERO
        return self.values.get(c, ZERO)

    @classmethod
    def from_mapping(cls, n: int, values: Mapping[Iterable[int], object]) -> "CharacteristicFunction":
        return cls(n, {frozenset(k): Fraction(v) for k, v in values.items()})


@dataclass(frozen=True)
class EmbeddedValue:
    value: Fraction
    phi: Fraction = ZERO
    internal_profit: Fraction = ZERO
    external_profit: Fraction = ZERO


@dataclass
class PartitionFunction:
    n: int
    partitions: list[Partition]
    values: dict[tuple[frozenset[int], int], EmbeddedValue]
    reference_costs: dict[int, Fraction] = field(default_factory=dict)

    def __post_init__(self):
        self._index = {frozenset(p): idx for idx, p in enumerate(self.partitions)}

    def partition_index(self, partition: Iterable[Iterable[int]]) -> int:
        return self._index[frozenset(frozenset(c) for c in partition)]

    def value(self, c: Iterable[int], partition: Iterable[Iterable[int]]) -> Fraction:
        c = frozenset(c)
        return self.values[(c, self.partition_index(partition))].value

    @classmethod
    def from_table(cls, n: int, table: Mapping[tuple, Sequence]) -> "PartitionFunction":
        """Build from ``{partition: values}`` with values listed in partition order.

        Every partition of the n players must be present.
        """
        partitions = enumerate_partitions(n)
        index = {frozenset(p): idx for idx, p in enumerate(partitions)}
        values = {}
        for part, vals in table.items():
            part = [frozenset(c) for c in part]
            idx = index[frozenset(part)]
            if len(vals) != len(part):
                raise ValueError("one value per coalition is required")
            for c, v in zip(part, vals):
                values[(c, idx)] = EmbeddedValue(Fraction(v))
        missing = [p for idx, p in enumerate(partitions) if any((c, idx) not in values for c in p)]
        if missing:
            raise ValueError(f"partition function is missing {len(missing)} partitions")
        return cls(n, partitions, values)


def coalition_value(net: Network, res: CoalitionFlows, reference: Mapping[int, Fraction]) -> tuple:
    tm = transfer_matrices(net, res.flows)
    pi = internal_profit(tm, res.coalition)
    value = sum((reference[i] for i in res.coalition), ZERO) - res.cost + pi
    return value, pi


def build_cff(net: Network, config: ScenarioConfig | None = None) -> CharacteristicFunction:
    """Each coalition is evaluated alone on the full-capacity network."""
    config = config or ScenarioConfig()
    n = net.player_count
    if not 1 <= n <= MAX_PLAYERS:
        raise ValueError(f"player count must be between 1 and {MAX_PLAYERS}")
    runs = {c: allocate_coalition_flows(net, c, None, config) for c in all_coalitions(n)}
    reference = {i: runs[frozenset([i])].cost for i in range(n)}
    cf = CharacteristicFunction(n, {}, reference)
    for c, res in runs.items():
        cf.values[c], cf.internal[c] = coalition_value(net, res, reference)
        cf.costs[c] = res.cost
    return cf


def _embedded_values(net: Network, run: PartitionFlows, reference: Mapping[int, Fraction]):
    tm = run.transfers
    out = {}
    for c in run.partition:
        pi_i = internal_profit(tm, c)
        outside = [j for j in range(net.player_count) if j not in c]
        pi_e = externality(tm, outside, c) if outside else ZERO
        ref = sum((reference[i] for i in c), ZERO)
        out[c] = EmbeddedValue(ref - run.costs[c] + pi_i + pi_e, run.costs[c], pi_i, pi_e)
    return out


def _run_partition(args):
    net, partition, config = args
    return allocate_partition_flows(net, partition, config)


def evaluate_partitions(net: Network, config: ScenarioConfig | None = None,
                        workers: int | None = None) -> list[PartitionFlows]:
    """Flow runs for every partition, in canonical partition order."""
    config = config or ScenarioConfig()
    partitions = enumerate_partitions(net.player_count)
    jobs = [(net, p, config) for p in partitions]
    if workers and workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(_run_partition, jobs))
    return [_run_partition(j) for j in jobs]


def build_pff(net: Network, config: ScenarioConfig | None = None, workers: int | None = None,
              runs: list[PartitionFlows] | None = None) -> PartitionFunction:
    """Value every embedded coalition; singleton costs come from the all-singleton partition."""
    runs = runs if runs is not None else evaluate_partitions(net, config, workers)
    n = net.player_count
    partitions = [r.partition for r in runs]
    singletons = next(r for r in runs if len(r.partition) == n)
    reference = {i: singletons.costs[frozenset([i])] for i in range(n)}
    values = {}
    for idx, run in enumerate(runs):
        for c, ev in _embedded_values(net, run, reference).items():
            values[(c, idx)] = ev
    return PartitionFunction(n, partitions, values, reference)
