"""Iterative flow allocation.

Each coalition member solves its own min-cost LP over the sub-network the
coalition may use, after the flows of every previously evaluated member (of
this or earlier coalitions) have been subtracted from the residual
capacities. Per-player flows give the transfer matrices: ``Q[i, j]`` is the
transport cost player j's flows impose on player i and ``R[i, j]`` the fee
player j pays to player i.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .lp import LPInfeasible, lp_solve
from .scenario import Granularity, Network, OrderPolicy, ScenarioConfig
from .subnetwork import AccessSet, access_set

ZERO = Fraction(0)


class UnservableDemand(RuntimeError):
    def __init__(self, node: str, player: str):
        super().__init__(f"unservable demand at node {node} (player {player})")
        self.node = node
        self.player = player


@dataclass(frozen=True)
class PlayerFlow:
    player: int
    f_plus: tuple[Fraction, ...]
    f_minus: tuple[Fraction, ...]
    production: tuple[Fraction, ...]
    cost: Fraction

    @property
    def nominal(self) -> tuple[Fraction, ...]:
        """Gross flow per edge; fees and costs accrue on both directions."""
        return tuple(a + b for a, b in zip(self.f_plus, self.f_minus))

    @classmethod
    def zero(cls, net: Network, player: int) -> "PlayerFlow":
        m, p = net.edge_count, net.source_count
        return cls(player, (ZERO,) * m, (ZERO,) * m, (ZERO,) * p, ZERO)

    def __add__(self, other: "PlayerFlow") -> "PlayerFlow":
        if other.player != self.player:
            raise ValueError("cannot merge flows of different players")
        add = lambda a, b: tuple(x + y for x, y in zip(a, b))  # noqa: E731
        return PlayerFlow(self.player, add(self.f_plus, other.f_plus), add(self.f_minus, other.f_minus),
                          add(self.production, other.production), self.cost + other.cost)


@dataclass(frozen=True)
class ResidualState:
    q_mod: tuple[Fraction, ...]   # length 2m: forward block then backward block
    L_mod: tuple[Fraction, ...]

    @classmethod
    def fresh(cls, net: Network) -> "ResidualState":
        q = tuple(net.capacity)
        return cls(q + q, tuple(net.production_cap))

    def commit(self, flow: PlayerFlow) -> "ResidualState":
        used = flow.f_plus + flow.f_minus
        return ResidualState(tuple(a - b for a, b in zip(self.q_mod, used)),
                             tuple(a - b for a, b in zip(self.L_mod, flow.production)))


@dataclass(frozen=True)
class TransferMatrices:
    Q: np.ndarray
    R: np.ndarray


def transfer_matrices(net: Network, flows: Iterable[PlayerFlow]) -> TransferMatrices:
    n = net.player_count
    Q = np.full((n, n), ZERO, dtype=object)
    R = np.full((n, n), ZERO, dtype=object)
    T, F = net.transport_cost, net.transport_fee
    for fl in flows:
        j = fl.player
        nom = fl.nominal
        for i in range(n):
            Q[i, j] += sum((T[i, k] * q for k, q in enumerate(nom) if q), ZERO)
            if i != j:
                R[i, j] += sum((F[i, k] * q for k, q in enumerate(nom) if q), ZERO)
    Q.flags.writeable = False
    R.flags.writeable = False
    return TransferMatrices(Q, R)


def member_cost_vector(net: Network, payer: int) -> list[Fraction]:
    """Per-variable unit costs [edge, edge, source] for ``payer``.

    An edge costs the payer its own transport cost plus the fees of all
    other entitled players; a source costs its production cost.
    """
    m = net.edge_count
    edge = []
    for k in range(m):
        fees = sum((net.transport_fee[i, k] for i in range(net.player_count) if i != payer), ZERO)
        edge.append(net.transport_cost[payer, k] + fees)
    src = [net.source_unit_cost(r) for r in range(net.source_count)]
    return edge + edge + src


def _equality_system(net: Network) -> list[list[Fraction]]:
    A = net.incidence
    S_pos = [[Fraction(1) if net.source_cost[j, r] > 0 else ZERO for r in range(net.source_count)]
             for j in range(net.node_count)]
    return [list(A[j, :]) + [-a for a in A[j, :]] + S_pos[j] for j in range(net.node_count)]


def solve_member_flow(net: Network, access: AccessSet, member_demand: Sequence[Fraction], payer: int,
                      state: ResidualState, tol=0) -> PlayerFlow:
    """Cheapest way for ``payer`` to serve ``member_demand`` on the residual network."""
    member_demand = tuple(Fraction(d) for d in member_demand)
    if not any(member_demand):
        return PlayerFlow.zero(net, payer)
    return _solve_member_flow(net, access, member_demand, payer, state, Fraction(tol))


@functools.lru_cache(maxsize=1 << 16)
def _solve_member_flow(net, access, demand, payer, state, tol):
    m, p = net.edge_count, net.source_count
    upper = []
    for direction in range(2):
        for k in range(m):
            upper.append(state.q_mod[direction * m + k] if k in access.usable_edges else ZERO)
    for r in range(p):
        upper.append(state.L_mod[r] if r in access.usable_sources else ZERO)
    upper = [max(u, ZERO) for u in upper]
    try:
        res = lp_solve(member_cost_vector(net, payer), _equality_system(net), list(demand), upper, tol)
    except LPInfeasible as exc:
        raise UnservableDemand(net.node_ids[exc.row], net.player_ids[payer]) from None
    x = res.x
    return PlayerFlow(payer, tuple(x[:m]), tuple(x[m:2 * m]), tuple(x[2 * m:]), res.objective)


def clear_cache():
    _solve_member_flow.cache_clear()


def member_order(net: Network, members: Iterable[int]) -> list[int]:
    """Decreasing total demand, lower index first on ties."""
    return sorted(members, key=lambda i: (-net.player_demand(i), i))


@dataclass(frozen=True)
class CoalitionFlows:
    coalition: frozenset[int]
    flows: tuple[PlayerFlow, ...]
    state: ResidualState
    cost: Fraction


def allocate_coalition_flows(net: Network, c: Iterable[int], state: ResidualState | None = None,
                             config: ScenarioConfig | None = None,
                             order: Sequence[int] | None = None) -> CoalitionFlows:
    """Evaluate the members of ``c`` one after another on a shared residual state.

    ``order`` overrides the default decreasing-demand member order.
    """
    config = config or ScenarioConfig()
    c = frozenset(c)
    state = state or ResidualState.fresh(net)
    access = access_set(net, c)
    tol = Fraction(str(config.lp_tolerance))
    members = list(order) if order is not None else member_order(net, c)
    if set(members) != c:
        raise ValueError("member order must list every coalition member exactly once")
    flows = []
    for i in members:
        nodes = [j for j in net.player_nodes(i) if net.demand[j] > 0]
        if config.member_granularity is Granularity.PER_NODE:
            groups = [[j] for j in sorted(nodes, key=lambda j: (-net.demand[j], j))]
        else:
            groups = [nodes] if nodes else []
        total = PlayerFlow.zero(net, i)
        for group in groups:
            d = [net.demand[j] if j in group else ZERO for j in range(net.node_count)]
            fl = solve_member_flow(net, access, d, i, state, tol)
            state = state.commit(fl)
            total = total + fl
        flows.append(total)
    cost = sum((f.cost for f in flows), ZERO)
    return CoalitionFlows(c, tuple(flows), state, cost)


def coalition_order(net: Network, partition: Iterable[frozenset[int]],
                    config: ScenarioConfig) -> list[frozenset[int]]:
    parts = [frozenset(c) for c in partition]
    if config.coalition_order_policy is OrderPolicy.EXPLICIT_LIST:
        listed = [net.player_index(pid) for pid in config.explicit_order]
        n = net.player_count
        rank = {i: pos for pos, i in enumerate(listed)}
        key = lambda c: (min(rank.get(i, n + i) for i in c), min(c))  # noqa: E731
    else:
        key = lambda c: (-sum(net.player_demand(i) for i in c), min(c))  # noqa: E731
    return sorted(parts, key=key)


@dataclass(frozen=True)
class PartitionFlows:
    partition: tuple[frozenset[int], ...]
    order: tuple[frozenset[int], ...]
    flows: dict[int, PlayerFlow]
    transfers: TransferMatrices
    costs: dict[frozenset[int], Fraction]
    state: ResidualState = field(repr=False)


def allocate_partition_flows(net: Network, partition: Iterable[Iterable[int]],
                             config: ScenarioConfig | None = None) -> PartitionFlows:
    """Evaluate every coalition of ``partition`` sequentially on one residual state."""
    config = config or ScenarioConfig()
    partition = tuple(frozenset(c) for c in partition)
    covered = [i for c in partition for i in c]
    if sorted(covered) != list(range(net.player_count)):
        raise ValueError("not a partition of the player set")
    state = ResidualState.fresh(net)
    flows: dict[int, PlayerFlow] = {}
    costs = {}
    order = coalition_order(net, partition, config)
    for c in order:
        res = allocate_coalition_flows(net, c, state, config)
        state = res.state
        costs[c] = res.cost
        for fl in res.flows:
            flows[fl.player] = fl
    return PartitionFlows(partition, tuple(order), flows, transfer_matrices(net, flows.values()), costs, state)


TRACE_HEADER = ("partition", "coalition", "member", "edge_or_source", "direction", "quantity", "cost",
                "fee_paid_to")


def trace_rows(net: Network, partition_label: str, coalition_label: str, flow: PlayerFlow) -> list[tuple]:
    """Flow-trace rows for one member: one per used edge direction and source."""
    rows = []
    i = flow.player
    pid = net.player_ids[i]
    for direction, vec in (("+", flow.f_plus), ("-", flow.f_minus)):
        for k, q in enumerate(vec):
            if not q:
                continue
            fees = [f"{net.player_ids[o]}:{float(net.transport_fee[o, k] * q):g}"
                    for o in range(net.player_count) if o != i and net.transport_fee[o, k] != 0]
            rows.append((partition_label, coalition_label, pid, f"edge:{net.edge_ids[k]}", direction,
                         float(q), float(net.transport_cost[i, k] * q), ";".join(fees)))
    for r, q in enumerate(flow.production):
        if q:
            rows.append((partition_label, coalition_label, pid, f"source:{net.source_ids[r]}", "",
                         float(q), float(net.source_unit_cost(r) * q), ""))
    return rows
