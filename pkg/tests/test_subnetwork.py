import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gaspower.subnetwork import access_set, accessible_edges, accessible_sources, coalition
from strategies import networks


def test_exclusive_edges_need_both_owners(ex1):
    net, _ = ex1
    assert accessible_edges(net, {0, 1}) == {0}
    assert accessible_edges(net, {0, 2}) == {2}
    assert accessible_edges(net, {2}) == set()
    assert accessible_edges(net, {0, 1, 2}) == {0, 1, 2}


def test_tpa_edges_are_open_to_everyone(ex1_tpa):
    net, _ = ex1_tpa
    assert accessible_edges(net, {2}) == {1, 2}
    assert accessible_edges(net, {0, 1}) == {0, 1, 2}


def test_sources_follow_node_ownership(ex1):
    net, _ = ex1
    assert accessible_sources(net, {1}) == {1}
    assert accessible_sources(net, {0, 2}) == {0, 2}


def test_empty_coalition_rejected():
    with pytest.raises(ValueError):
        coalition([])


@settings(max_examples=100, deadline=None)
@given(networks(), st.data())
def test_access_is_monotone(net, data):
    n = net.player_count
    small = frozenset(data.draw(st.sets(st.integers(0, n - 1))))
    big = small | frozenset(data.draw(st.sets(st.integers(0, n - 1))))
    a, b = access_set(net, small), access_set(net, big)
    assert a.usable_edges <= b.usable_edges
    assert a.usable_sources <= b.usable_sources
