import itertools
import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import brute_sdr_count
from villadsen_lab.cohomology import (
    AmbientMismatch,
    CohomologyClass,
    add,
    cup,
    is_zero,
    product,
    top_term,
)

C = CohomologyClass


def x(m, *subset, coeff=1):
    return C.monomial(m, subset, coeff)


def naive_cup(a, b):
    """Distribute term by term over explicit index sets."""
    out = {}
    for s, u in a.subset_terms():
        for t, v in b.subset_terms():
            if set(s) & set(t):
                continue
            key = tuple(sorted(set(s) | set(t)))
            out[key] = out.get(key, 0) + u * v
    return {k: v for k, v in out.items() if v}


def as_dict(c):
    return {tuple(s): v for s, v in c.subset_terms()}


class TestExamples:
    def test_add(self):
        assert is_zero(add(x(2, 1), x(2, 1, coeff=-1)))
        assert as_dict(add(x(2, 1), x(2, 2))) == {(1,): 1, (2,): 1}
        assert as_dict(x(2, 1, 2, coeff=2) + x(2, 1, 2, coeff=3)) == {(1, 2): 5}

    def test_cup(self):
        assert cup(x(1, 1), x(1, 1)).is_zero()
        s = x(3, 1) + x(3, 2)
        assert as_dict(s * s) == {(1, 2): 2}
        assert as_dict((x(3, 1) + x(3, 2)) * x(3, 3)) == {(1, 3): 1, (2, 3): 1}

    def test_is_zero(self):
        assert C.zero(3).is_zero()
        assert not x(2, 1, 2).is_zero()
        assert not ((x(2, 1) + x(2, 2)) * (x(2, 1) + x(2, 2))).is_zero()

    def test_top_term(self):
        a = C.one(2) + x(2, 1) + x(2, 1, 2)
        assert top_term(a, 2) == x(2, 1, 2)
        assert top_term(C.one(3), 1).is_zero()
        assert top_term((C.one(2) + x(2, 1)) * (C.one(2) + x(2, 2)), 2) == x(2, 1, 2)

    def test_ambient_mismatch(self):
        with pytest.raises(AmbientMismatch):
            x(2, 1) + x(3, 1)
        with pytest.raises(AmbientMismatch):
            x(2, 1) * x(3, 1)

    def test_subset_outside_ambient(self):
        with pytest.raises(ValueError):
            x(2, 3)


def test_json_round_trip_is_canonical():
    c = x(4, 2, 3, coeff=-2) + x(4, 1) + C.one(4)
    data = c.to_json()
    assert [t["subset"] for t in data["terms"]] == [[], [1], [2, 3]]
    assert C.from_json(json.loads(json.dumps(data))) == c


m_small = st.integers(1, 6)


@st.composite
def classes(draw, m):
    subsets = [s for r in range(m + 1) for s in itertools.combinations(range(1, m + 1), r)]
    chosen = draw(st.lists(st.sampled_from(subsets), max_size=6))
    coeffs = draw(st.lists(st.integers(-3, 3), min_size=len(chosen), max_size=len(chosen)))
    out = C.zero(m)
    for s, v in zip(chosen, coeffs):
        out = out + C.monomial(m, s, v)
    return out


@st.composite
def triples(draw):
    m = draw(m_small)
    return draw(classes(m)), draw(classes(m)), draw(classes(m))


@given(triples())
@settings(max_examples=150, deadline=None)
def test_cup_ring_laws(t):
    a, b, c = t
    assert a * b == b * a
    assert (a * b) * c == a * (b * c)
    assert a * (b + c) == a * b + a * c
    assert as_dict(a * b) == naive_cup(a, b)


def test_cup_associative_exhaustive_m2():
    m = 2
    monos = [C.monomial(m, s) for r in range(3) for s in itertools.combinations((1, 2), r)]
    basis = monos + [monos[1] + monos[2], monos[0] - monos[3]]
    for a, b, c in itertools.product(basis, repeat=3):
        assert (a * b) * c == a * (b * c)
        assert a * b == b * a


@given(st.data())
@settings(max_examples=60, deadline=None)
def test_monomial_kills_meeting_terms(data):
    m = data.draw(m_small)
    a = data.draw(classes(m))
    S = data.draw(st.sets(st.integers(1, m), min_size=1))
    prod = a * C.monomial(m, S)
    expected = {
        tuple(sorted(set(s) | S)): v for s, v in a.subset_terms() if not set(s) & S
    }
    assert as_dict(prod) == expected


@pytest.mark.parametrize("m,k", [(m, k) for m in range(1, 5) for k in range(1, 5)])
def test_top_coefficient_counts_sdrs(m, k):
    subsets = [frozenset(s) for r in range(1, m + 1) for s in itertools.combinations(range(1, m + 1), r)]
    fams = itertools.product(subsets, repeat=k) if k <= 2 else itertools.islice(
        itertools.product(subsets, repeat=k), 0, None, 97
    )
    for fam in fams:
        e = product([C.linear(m, {s: 1 for s in S}) for S in fam], m)
        top = top_term(e, k)
        assert e == top  # a product of k linear forms is homogeneous of degree k
        assert sum(v for _, v in top.subset_terms()) == brute_sdr_count(fam)
