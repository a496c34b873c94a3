"""Resources (pipelines and sources) a coalition is allowed to use."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

from .scenario import Network

Coalition = frozenset  # of player indices


def coalition(members: Iterable[int]) -> frozenset[int]:
    c = frozenset(members)
    if not c:
        raise ValueError("a coalition needs at least one member")
    return c


@dataclass(frozen=True)
class AccessSet:
    usable_edges: frozenset[int]
    usable_sources: frozenset[int]


def accessible_edges(net: Network, c: Iterable[int]) -> frozenset[int]:
    """Edges whose both endpoint owners are in ``c``, plus every TPA edge."""
    c = frozenset(c)
    out = set()
    for k in range(net.edge_count):
        if net.tpa[k]:
            out.add(k)
            continue
        tail, head = net.edge_endpoints(k)
        if net.owner_of_node(tail) in c and net.owner_of_node(head) in c:
            out.add(k)
    return frozenset(out)


def accessible_sources(net: Network, c: Iterable[int]) -> frozenset[int]:
    c = frozenset(c)
    out = set()
    for r in range(net.source_count):
        j = net.source_node(r)
        if j is not None and net.owner_of_node(j) in c:
            out.add(r)
    return frozenset(out)


def access_set(net: Network, c: Iterable[int]) -> AccessSet:
    c = frozenset(c)
    return AccessSet(accessible_edges(net, c), accessible_sources(net, c))
