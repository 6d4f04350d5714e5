import itertools

import networkx as nx
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import brute_hall
from villadsen_lab.matching import (
    grouped_hall_check,
    hall_check,
    hopcroft_karp,
    is_sdr,
    verify_allocation,
)


def nx_matching_size(sets):
    g = nx.Graph()
    left = [("L", j) for j in range(len(sets))]
    g.add_nodes_from(left, bipartite=0)
    for j, s in enumerate(sets):
        for c in s:
            g.add_edge(("L", j), ("R", c))
    m = nx.bipartite.hopcroft_karp_matching(g, top_nodes=left)
    return sum(1 for u in m if u[0] == "L")


def test_examples():
    r = hall_check([[1], [2]])
    assert r.ok and r.matching == {0: 1, 1: 2}
    r = hall_check([[1], [1]])
    assert not r.ok and r.violator == (0, 1) and r.union == (1,)
    r = hall_check([[1, 2]] * 3)
    assert not r.ok and r.violator == (0, 1, 2)


def test_empty_support_rejected():
    with pytest.raises(ValueError):
        hall_check([[1], []])


def test_empty_family_is_trivially_matched():
    assert hall_check([]).ok


families = st.lists(st.sets(st.integers(1, 7), min_size=1, max_size=4), min_size=1, max_size=8)


@given(families)
@settings(max_examples=300, deadline=None)
def test_against_networkx_and_hall(sets):
    r = hall_check(sets)
    assert r.ok == (nx_matching_size(sets) == len(sets)) == brute_hall(sets)
    if r.ok:
        assert is_sdr(sets, r.matching)
    else:
        union = set().union(*(sets[j] for j in r.violator))
        assert set(r.union) == union
        assert len(union) < len(r.violator)


@given(families)
@settings(max_examples=200, deadline=None)
def test_hopcroft_karp_is_maximum(sets):
    m = hopcroft_karp([sorted(s) for s in sets])
    assert len(set(m.values())) == len(m)
    assert all(m[u] in sets[u] for u in m)
    assert len(m) == nx_matching_size(sets)


def test_is_sdr_rejects_bad_matchings():
    sets = [{1, 2}, {2}]
    assert is_sdr(sets, {0: 1, 1: 2})
    assert not is_sdr(sets, {0: 2, 1: 2})
    assert not is_sdr(sets, {0: 1})
    assert not is_sdr(sets, {0: 3, 1: 2})


def expand_types(types, capacity):
    """Explicit family: each atom becomes its own run of coordinates."""
    start, coords = 0, {}
    for a in sorted(capacity):
        coords[a] = set(range(start, start + capacity[a]))
        start += capacity[a]
    sets = []
    for t in sorted(types):
        count, atoms = types[t]
        sets.extend([set().union(*(coords[a] for a in atoms))] * count)
    return sets


@given(st.data())
@settings(max_examples=200, deadline=None)
def test_grouped_matches_explicit(data):
    atoms = list(range(data.draw(st.integers(1, 4))))
    capacity = {a: data.draw(st.integers(1, 3)) for a in atoms}
    ntypes = data.draw(st.integers(1, 4))
    types = {
        t: (data.draw(st.integers(1, 4)), tuple(data.draw(st.sets(st.sampled_from(atoms), min_size=1))))
        for t in range(ntypes)
    }
    r = grouped_hall_check(types, capacity)
    explicit = hall_check(expand_types(types, capacity))
    assert r.ok == explicit.ok
    if r.ok:
        assert verify_allocation(types, capacity, r.allocation)
    else:
        seen = set().union(*(types[t][1] for t in r.violator))
        assert r.union_size == sum(capacity[a] for a in seen)
        assert r.union_size < r.family_size


def test_grouped_small_cases():
    cap = {"a": 2, "b": 1}
    assert grouped_hall_check({0: (3, ("a", "b"))}, cap).ok
    r = grouped_hall_check({0: (3, ("a",)), 1: (1, ("b",))}, cap)
    assert not r.ok and r.violator == (0,)
    assert (r.family_size, r.union_size) == (3, 2)


def test_exhaustive_small_universe():
    subsets = [set(s) for r in (1, 2, 3) for s in itertools.combinations((1, 2, 3), r)]
    for k in (1, 2, 3, 4):
        for fam in itertools.product(subsets, repeat=k):
            assert hall_check(fam).ok == brute_hall(fam)
