"""Network scenario: typed container, JSON document parsing and validation.

All numeric data is held as :class:`fractions.Fraction` so that the whole
pipeline (LPs, game values, Shapley values) runs in exact arithmetic.
Decimal literals in scenario files are read exactly (``0.7`` is 7/10).
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from pathlib import Path
from typing import Any, Mapping, Sequence

import numpy as np


class ScenarioError(ValueError):
    """Malformed scenario document (missing field, bad type, unknown id)."""


class DimensionError(ScenarioError):
    """Matrix dimensions of a Network do not agree."""


class OrderPolicy(str, Enum):
    BY_TOTAL_DEMAND_DESC = "by_total_demand_desc"
    EXPLICIT_LIST = "explicit_list"


class Granularity(str, Enum):
    PER_PLAYER = "per_player"
    PER_NODE = "per_node"


def to_fraction(x: Any) -> Fraction:
    """Exact conversion; floats go through their shortest decimal repr."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, bool):
        raise TypeError("boolean is not a number")
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, float):
        return Fraction(repr(x))
    if isinstance(x, str):
        return Fraction(x.strip())
    return Fraction(x)


def _frac_array(values: Any, ndim: int) -> np.ndarray:
    arr = np.array(values, dtype=object)
    if arr.size == 0:
        arr = arr.reshape((0,) * ndim) if arr.ndim < ndim else arr
    flat = [to_fraction(v) for v in arr.ravel()]
    out = np.empty(arr.shape, dtype=object)
    for i, v in enumerate(flat):
        out.flat[i] = v
    out.flags.writeable = False
    return out


@dataclass(frozen=True)
class ScenarioConfig:
    coalition_order_policy: OrderPolicy = OrderPolicy.BY_TOTAL_DEMAND_DESC
    # player ids, highest priority first; used with EXPLICIT_LIST
    explicit_order: tuple[str, ...] = ()
    member_granularity: Granularity = Granularity.PER_PLAYER
    lp_tolerance: float = 1e-9
    pessimistic_fallback: bool = True

    def __post_init__(self):
        object.__setattr__(self, "coalition_order_policy", OrderPolicy(self.coalition_order_policy))
        object.__setattr__(self, "member_granularity", Granularity(self.member_granularity))
        object.__setattr__(self, "explicit_order", tuple(self.explicit_order))
        if not self.lp_tolerance > 0:
            raise ScenarioError("config.lp_tolerance must be > 0")
        if self.coalition_order_policy is OrderPolicy.EXPLICIT_LIST and not self.explicit_order:
            raise ScenarioError("config.explicit_order is required with the explicit_list policy")


@dataclass(frozen=True, eq=False)
class Network:
    """Gas network with l nodes, m edges, n players and p sources.

    Matrices follow the usual conventions: ``incidence`` is l x m with -1 at
    the tail and +1 at the head of each edge, ``node_owner`` is l x n,
    ``transport_cost``/``transport_fee`` are n x m, ``source_cost`` is l x p
    with the unit cost of source r at the row of its host node.
    """

    incidence: np.ndarray
    node_owner: np.ndarray
    capacity: np.ndarray
    transport_cost: np.ndarray
    transport_fee: np.ndarray
    demand: np.ndarray
    source_cost: np.ndarray
    production_cap: np.ndarray
    tpa: tuple[bool, ...]
    player_ids: tuple[str, ...] = ()
    player_names: tuple[str, ...] = ()
    node_ids: tuple[str, ...] = ()
    edge_ids: tuple[str, ...] = ()
    source_ids: tuple[str, ...] = ()

    def __post_init__(self):
        set_ = lambda k, v: object.__setattr__(self, k, v)  # noqa: E731
        set_("incidence", _frac_array(self.incidence, 2))
        set_("node_owner", _frac_array(self.node_owner, 2))
        set_("capacity", _frac_array(self.capacity, 1))
        set_("transport_cost", _frac_array(self.transport_cost, 2))
        set_("transport_fee", _frac_array(self.transport_fee, 2))
        set_("demand", _frac_array(self.demand, 1))
        set_("source_cost", _frac_array(self.source_cost, 2))
        set_("production_cap", _frac_array(self.production_cap, 1))
        set_("tpa", tuple(bool(t) for t in self.tpa))

        l = self.demand.shape[0]
        n = self.node_owner.shape[1] if self.node_owner.ndim == 2 else 0
        m = self.capacity.shape[0]
        p = self.production_cap.shape[0]
        expected = {
            "incidence": (self.incidence.shape, (l, m)),
            "node_owner": (self.node_owner.shape, (l, n)),
            "transport_cost": (self.transport_cost.shape, (n, m)),
            "transport_fee": (self.transport_fee.shape, (n, m)),
            "source_cost": (self.source_cost.shape, (l, p)),
        }
        for name, (got, want) in expected.items():
            if got != want:
                raise DimensionError(f"{name} has shape {got}, expected {want}")
        if len(self.tpa) != m:
            raise DimensionError(f"tpa has length {len(self.tpa)}, expected {m}")

        defaults = {
            "player_ids": [f"P{i + 1}" for i in range(n)],
            "node_ids": [f"N{j + 1}" for j in range(l)],
            "edge_ids": [str(k + 1) for k in range(m)],
            "source_ids": [str(r + 1) for r in range(p)],
        }
        for name, default in defaults.items():
            ids = tuple(getattr(self, name)) or tuple(default)
            if len(ids) != len(default):
                raise DimensionError(f"{name} has {len(ids)} entries, expected {len(default)}")
            set_(name, ids)
        names = tuple(self.player_names) or self.player_ids
        if len(names) != n:
            raise DimensionError(f"player_names has {len(names)} entries, expected {n}")
        set_("player_names", names)

    @property
    def node_count(self) -> int:
        return self.demand.shape[0]

    @property
    def edge_count(self) -> int:
        return self.capacity.shape[0]

    @property
    def player_count(self) -> int:
        return self.node_owner.shape[1]

    @property
    def source_count(self) -> int:
        return self.production_cap.shape[0]

    def owner_of_node(self, j: int) -> int:
        """Player owning node j (first nonzero column of its owner row)."""
        for i in range(self.player_count):
            if self.node_owner[j, i] != 0:
                return i
        raise ValueError(f"node {self.node_ids[j]} has no owner")

    def edge_endpoints(self, k: int) -> tuple[int, int]:
        """(tail, head) node indices of edge k."""
        col = self.incidence[:, k]
        tail = next(j for j in range(self.node_count) if col[j] < 0)
        head = next(j for j in range(self.node_count) if col[j] > 0)
        return tail, head

    def source_node(self, r: int) -> int | None:
        for j in range(self.node_count):
            if self.source_cost[j, r] != 0:
                return j
        return None

    def source_unit_cost(self, r: int) -> Fraction:
        return sum(self.source_cost[:, r], Fraction(0))

    def player_nodes(self, i: int) -> list[int]:
        return [j for j in range(self.node_count) if self.node_owner[j, i] != 0]

    def player_demand(self, i: int) -> Fraction:
        return sum((self.demand[j] for j in self.player_nodes(i)), Fraction(0))

    def player_index(self, pid: str) -> int:
        try:
            return self.player_ids.index(pid)
        except ValueError:
            raise KeyError(f"unknown player {pid!r}") from None

    def coalition_label(self, members) -> str:
        return "{" + ",".join(self.player_ids[i] for i in sorted(members)) + "}"

    def replace(self, **changes) -> "Network":
        kwargs = {f: getattr(self, f) for f in self.__dataclass_fields__}
        kwargs.update(changes)
        return Network(**kwargs)


@dataclass(frozen=True)
class Diagnostic:
    level: str  # "error" | "warning"
    message: str

    def __str__(self):
        return f"{self.level}: {self.message}"


def validate(net: Network) -> list[Diagnostic]:
    """Check the structural invariants of ``net``; never raises."""
    out: list[Diagnostic] = []
    err = lambda msg: out.append(Diagnostic("error", msg))  # noqa: E731
    l, m, n, p = net.node_count, net.edge_count, net.player_count, net.source_count

    for k in range(m):
        col = list(net.incidence[:, k])
        if any(v not in (-1, 0, 1) for v in col) or col.count(1) != 1 or col.count(-1) != 1:
            err(f"edge {net.edge_ids[k]} must have exactly one +1 and one -1 in the incidence matrix")
    for j in range(l):
        row = list(net.node_owner[j, :])
        if any(v not in (0, 1) for v in row) or sum(row) != 1:
            err(f"node {net.node_ids[j]} must be owned by exactly one player")

    for name, vec in (("capacity", net.capacity), ("demand", net.demand), ("production_cap", net.production_cap)):
        for idx, v in enumerate(vec):
            if v < 0:
                err(f"{name}[{idx + 1}] is negative")
    for name, mat in (("transport_cost", net.transport_cost), ("transport_fee", net.transport_fee),
                      ("source_cost", net.source_cost)):
        for (a, b), v in np.ndenumerate(mat):
            if v < 0:
                err(f"{name}({a + 1},{b + 1}) is negative")

    for i in range(n):
        for k in range(m):
            if net.transport_fee[i, k] < net.transport_cost[i, k]:
                err(f"fee below cost at ({i + 1},{k + 1})")

    for r in range(p):
        nz = [j for j in range(l) if net.source_cost[j, r] != 0]
        if len(nz) > 1:
            err(f"source {net.source_ids[r]} is placed at more than one node")

    # the checks below need a well-formed incidence and ownership
    if any(d.level == "error" for d in out):
        return out

    for k in range(m):
        tail, head = net.edge_endpoints(k)
        owners = {net.owner_of_node(tail), net.owner_of_node(head)}
        for i in range(n):
            if i in owners:
                continue
            if net.transport_cost[i, k] != 0 or net.transport_fee[i, k] != 0:
                err(f"player {net.player_ids[i]} has cost/fee on edge {net.edge_ids[k]} "
                    f"but owns neither endpoint")

    for j in range(l):
        if net.demand[j] > 0:
            has_local = any(net.source_cost[j, r] != 0 and net.production_cap[r] > 0 for r in range(p))
            if not has_local:
                out.append(Diagnostic(
                    "warning",
                    f"node {net.node_ids[j]} demand {_fmt(net.demand[j])} has no local backstop"))
    return out


def _fmt(x: Fraction) -> str:
    return str(int(x)) if x.denominator == 1 else str(float(x))


# ---------------------------------------------------------------- documents

def _require(obj: Mapping, key: str, where: str):
    if not isinstance(obj, Mapping):
        raise ScenarioError(f"{where} must be an object")
    if key not in obj:
        raise ScenarioError(f"{where}.{key} is required")
    return obj[key]


def _number(value, where: str) -> Fraction:
    try:
        return to_fraction(value)
    except (TypeError, ValueError, ZeroDivisionError):
        raise ScenarioError(f"{where} must be a number, got {value!r}") from None


def _list(obj: Mapping, key: str, where: str) -> list:
    value = _require(obj, key, where)
    if not isinstance(value, list):
        raise ScenarioError(f"{where}.{key} must be a list")
    return value


def parse_config(doc: Mapping | None) -> ScenarioConfig:
    doc = dict(doc or {})
    known = {"coalition_order_policy", "explicit_order", "member_granularity",
             "lp_tolerance", "pessimistic_fallback"}
    for key in doc:
        if key not in known:
            raise ScenarioError(f"config.{key} is not a known setting")
    try:
        if "lp_tolerance" in doc:
            doc["lp_tolerance"] = float(doc["lp_tolerance"])
        return ScenarioConfig(**doc)
    except ScenarioError:
        raise
    except (TypeError, ValueError) as exc:
        raise ScenarioError(f"config: {exc}") from None


def parse_scenario(document: str | bytes | Mapping) -> tuple[Network, ScenarioConfig]:
    """Build a Network and ScenarioConfig from a scenario document.

    ``document`` is JSON text or an already-decoded mapping. Matrices are
    derived from the node/edge/source lists.
    """
    if isinstance(document, (str, bytes)):
        try:
            doc = json.loads(document, parse_float=Fraction)
        except json.JSONDecodeError as exc:
            raise ScenarioError(f"invalid JSON: {exc}") from None
    else:
        doc = document
    if not isinstance(doc, Mapping):
        raise ScenarioError("scenario document must be an object")

    players = _list(doc, "players", "scenario")
    player_ids = []
    player_names = []
    for idx, pl in enumerate(players):
        pid = str(_require(pl, "id", f"players[{idx}]"))
        if pid in player_ids:
            raise ScenarioError(f"players[{idx}].id {pid!r} is duplicated")
        player_ids.append(pid)
        player_names.append(str(pl.get("name", pid)))
    pindex = {pid: i for i, pid in enumerate(player_ids)}

    nodes = _list(doc, "nodes", "scenario")
    node_ids = []
    node_owner = np.zeros((len(nodes), len(players)), dtype=object)
    node_owner[...] = Fraction(0)
    demand = []
    for j, nd in enumerate(nodes):
        where = f"nodes[{j}]"
        nid = str(_require(nd, "id", where))
        if nid in node_ids:
            raise ScenarioError(f"{where}.id {nid!r} is duplicated")
        node_ids.append(nid)
        owner = str(_require(nd, "owner", where))
        if owner not in pindex:
            raise ScenarioError(f"{where}.owner {owner!r} is not a player")
        node_owner[j, pindex[owner]] = Fraction(1)
        demand.append(_number(nd.get("demand", 0), f"{where}.demand"))
    nindex = {nid: j for j, nid in enumerate(node_ids)}

    edges = _list(doc, "edges", "scenario")
    m = len(edges)
    incidence = np.zeros((len(nodes), m), dtype=object)
    incidence[...] = Fraction(0)
    tcost = np.zeros((len(players), m), dtype=object)
    tcost[...] = Fraction(0)
    tfee = tcost.copy()
    capacity, tpa, edge_ids = [], [], []
    for k, ed in enumerate(edges):
        where = f"edges[{k}]"
        edge_ids.append(str(_require(ed, "id", where)))
        tail, head = str(_require(ed, "from", where)), str(_require(ed, "to", where))
        for end, label in ((tail, "from"), (head, "to")):
            if end not in nindex:
                raise ScenarioError(f"{where}.{label} {end!r} is not a node")
        if tail == head:
            raise ScenarioError(f"{where} connects node {tail!r} to itself")
        incidence[nindex[tail], k] = Fraction(-1)
        incidence[nindex[head], k] = Fraction(1)
        capacity.append(_number(_require(ed, "capacity", where), f"{where}.capacity"))
        tpa_flag = ed.get("tpa", False)
        if not isinstance(tpa_flag, bool):
            raise ScenarioError(f"{where}.tpa must be a boolean")
        tpa.append(tpa_flag)
        owners = ed.get("owners", {})
        if not isinstance(owners, Mapping):
            raise ScenarioError(f"{where}.owners must be an object")
        for pid, entry in owners.items():
            if pid not in pindex:
                raise ScenarioError(f"{where}.owners key {pid!r} is not a player")
            cost = _number(entry.get("cost", 0), f"{where}.owners.{pid}.cost")
            tcost[pindex[pid], k] = cost
            tfee[pindex[pid], k] = _number(entry.get("fee", cost), f"{where}.owners.{pid}.fee")

    sources = _list(doc, "sources", "scenario")
    scost = np.zeros((len(nodes), len(sources)), dtype=object)
    scost[...] = Fraction(0)
    cap, source_ids = [], []
    for r, src in enumerate(sources):
        where = f"sources[{r}]"
        source_ids.append(str(_require(src, "id", where)))
        node = str(_require(src, "node", where))
        if node not in nindex:
            raise ScenarioError(f"{where}.node {node!r} is not a node")
        unit = _number(_require(src, "unit_cost", where), f"{where}.unit_cost")
        if unit == 0:
            # a zero entry in S would detach the source from its node
            raise ScenarioError(f"{where}.unit_cost must be nonzero")
        scost[nindex[node], r] = unit
        cap.append(_number(_require(src, "capacity", where), f"{where}.capacity"))

    net = Network(
        incidence=incidence,
        node_owner=node_owner,
        capacity=capacity,
        transport_cost=tcost,
        transport_fee=tfee,
        demand=demand,
        source_cost=scost,
        production_cap=cap,
        tpa=tuple(tpa),
        player_ids=tuple(player_ids),
        player_names=tuple(player_names),
        node_ids=tuple(node_ids),
        edge_ids=tuple(edge_ids),
        source_ids=tuple(source_ids),
    )
    return net, parse_config(doc.get("config"))


def load_scenario(path: str | Path) -> tuple[Network, ScenarioConfig]:
    return parse_scenario(Path(path).read_text())


def _num_out(x: Fraction):
    if x.denominator == 1:
        return int(x)
    f = float(x)
    if Fraction(repr(f)) == x:
        return f
    return f"{x.numerator}/{x.denominator}"


def serialize_scenario(net: Network, config: ScenarioConfig | None = None) -> dict:
    """Inverse of :func:`parse_scenario` (returns a JSON-ready dict)."""
    doc: dict[str, Any] = {
        "players": [{"id": pid, "name": name} for pid, name in zip(net.player_ids, net.player_names)],
        "nodes": [
            {"id": nid, "owner": net.player_ids[net.owner_of_node(j)], "demand": _num_out(net.demand[j])}
            for j, nid in enumerate(net.node_ids)
        ],
        "edges": [],
        "sources": [],
    }
    for k, eid in enumerate(net.edge_ids):
        tail, head = net.edge_endpoints(k)
        owners = {}
        for i, pid in enumerate(net.player_ids):
            c, f = net.transport_cost[i, k], net.transport_fee[i, k]
            if c != 0 or f != 0:
                owners[pid] = {"cost": _num_out(c), "fee": _num_out(f)}
        doc["edges"].append({
            "id": eid,
            "from": net.node_ids[tail],
            "to": net.node_ids[head],
            "capacity": _num_out(net.capacity[k]),
            "tpa": net.tpa[k],
            "owners": owners,
        })
    for r, sid in enumerate(net.source_ids):
        j = net.source_node(r)
        doc["sources"].append({
            "id": sid,
            "node": net.node_ids[j] if j is not None else None,
            "unit_cost": _num_out(net.source_unit_cost(r)),
            "capacity": _num_out(net.production_cap[r]),
        })
    if config is not None:
        doc["config"] = {
            "coalition_order_policy": config.coalition_order_policy.value,
            "explicit_order": list(config.explicit_order),
            "member_granularity": config.member_granularity.value,
            "lp_tolerance": config.lp_tolerance,
            "pessimistic_fallback": config.pessimistic_fallback,
        }
    return doc


def networks_equal(a: Network, b: Network) -> bool:
    fields = ("incidence", "node_owner", "capacity", "transport_cost", "transport_fee",
              "demand", "source_cost", "production_cap")
    if a.tpa != b.tpa or a.player_ids != b.player_ids or a.node_ids != b.node_ids:
        return False
    if a.edge_ids != b.edge_ids or a.source_ids != b.source_ids or a.player_names != b.player_names:
        return False
    return all(getattr(a, f).shape == getattr(b, f).shape and bool(np.all(getattr(a, f) == getattr(b, f)))
               for f in fields)


def demand_vector_for(net: Network, nodes: Sequence[int]) -> list[Fraction]:
    """Demand vector holding d only at ``nodes`` (zeros elsewhere)."""
    keep = set(nodes)
    return [net.demand[j] if j in keep else Fraction(0) for j in range(net.node_count)]

