import itertools
import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from villadsen_lab.bundles import (
    KClass,
    LineBundle,
    ReindexError,
    VectorBundle,
    certified_positive,
    chern_class,
    euler_class,
    euler_nonzero,
    external_tensor,
    pullback,
    tensor,
    vil_obstruction,
)
from villadsen_lab.cohomology import CohomologyClass as C
from villadsen_lab.cohomology import top_term

xi = LineBundle.xi
V = VectorBundle


def mono(m, *s, coeff=1):
    return C.monomial(m, s, coeff)


class TestCharacteristicClasses:
    def test_euler_examples(self):
        assert euler_class(V.trivial(1, 1)).is_zero()
        assert euler_class(V.xi_sum(2, [[1], [2]])) == mono(2, 1, 2)
        assert euler_class(V.xi_sum(1, [[1], [1]])).is_zero()

    def test_chern_examples(self):
        assert chern_class(V.trivial(3, 2)) == C.one(3)
        assert chern_class(V.xi_sum(1, [[1]])) == C.one(1) + mono(1, 1)
        assert chern_class(V.xi_sum(2, [[1], [2]])) == C.one(2) + mono(2, 1) + mono(2, 2) + mono(2, 1, 2)

    def test_euler_nonzero_examples(self):
        assert euler_nonzero(V.xi_sum(2, [[1, 2], [1, 2]]))
        assert euler_class(V.xi_sum(2, [[1, 2], [1, 2]])) == mono(2, 1, 2, coeff=2)
        assert not euler_nonzero(V.xi_sum(1, [[1], [1]]))
        assert not euler_nonzero(V.xi_sum(1, [[1]], trivial=1))

    def test_multiplicity_in_c1(self):
        line = LineBundle.from_mapping(3, {1: 2, 3: 1})
        assert line.c1() == mono(3, 1, coeff=2) + mono(3, 3)


class TestProducts:
    def test_tensor_examples(self):
        v = tensor(V.xi_sum(2, [[1]]), V.xi_sum(2, [[2]]))
        assert v == V.xi_sum(2, [[1, 2]])
        w = V.xi_sum(3, [[1, 2], [3]], trivial=1)
        assert tensor(V.trivial(3, 1), w) == w

    def test_tensor_adds_multiplicities(self):
        v = xi(2, [1, 2]).tensor(xi(2, [1]))
        assert v.multiplicity(1) == 2 and v.multiplicity(2) == 1

    def test_external_tensor(self):
        v = external_tensor(V.xi_sum(1, [[1]]), V.xi_sum(1, [[1]]))
        assert v == V.xi_sum(2, [[1, 2]]) and v.rank == 1

    def test_pullback_examples(self):
        assert pullback(V.xi_sum(2, [[1]]), 2, 4) == V.xi_sum(4, [[3]])
        assert pullback(V.trivial(2, 3), 2, 4) == V.trivial(4, 3)
        p1 = V.xi_sum(9, [range(1, 10)] * 2, trivial=1)
        p1_block2 = pullback(p1, 9, 18)
        assert p1_block2.rank == p1.rank == 3
        assert p1_block2.supports() == [tuple(range(10, 19))] * 2

    def test_pullback_must_be_injective(self):
        with pytest.raises(ReindexError):
            pullback(V.xi_sum(2, [[1], [2]]), {1: 1, 2: 1}, 2)
        with pytest.raises(ReindexError):
            pullback(V.xi_sum(2, [[1]]), 3, 4)


@st.composite
def bundles(draw, m=None, max_lines=4):
    m = m or draw(st.integers(1, 6))
    lines = []
    for _ in range(draw(st.integers(0, max_lines))):
        idx = draw(st.dictionaries(st.integers(1, m), st.integers(1, 3), min_size=1, max_size=3))
        lines.append(LineBundle.from_mapping(m, idx))
    return V(m, draw(st.integers(0, 1)), tuple(lines))


@st.composite
def bundle_pairs(draw):
    m = draw(st.integers(1, 6))
    return draw(bundles(m)), draw(bundles(m))


@given(bundle_pairs())
@settings(max_examples=150, deadline=None)
def test_whitney_formula(pair):
    a, b = pair
    assert euler_class(a + b) == euler_class(a) * euler_class(b)
    assert chern_class(a + b) == chern_class(a) * chern_class(b)
    assert (a + b).rank == a.rank + b.rank
    assert tensor(a, b).rank == a.rank * b.rank


@given(bundles(), bundles())
@settings(max_examples=80, deadline=None)
def test_external_tensor_rank(a, b):
    assert external_tensor(a, b).rank == a.rank * b.rank
    assert external_tensor(a, b).ambient == a.ambient + b.ambient


@given(bundles())
@settings(max_examples=150, deadline=None)
def test_chern_top_is_euler(v):
    if v.trivial_rank == 0:
        assert top_term(chern_class(v), len(v.lines)) == euler_class(v)


@given(bundles(max_lines=5))
@settings(max_examples=300, deadline=None)
def test_matching_agrees_with_expansion_with_multiplicities(v):
    assert euler_nonzero(v) == (not euler_class(v).is_zero())


def test_prop32_small_exhaustive():
    subsets = [s for r in (1, 2, 3) for s in itertools.combinations((1, 2, 3), r)]
    for k in (1, 2, 3):
        for fam in itertools.product(subsets, repeat=k):
            v = V.xi_sum(3, fam)
            assert euler_nonzero(v) == (not euler_class(v).is_zero())


class TestKTheory:
    def test_virtual_rank_and_canonical_form(self):
        a = KClass.of_bundle(V.xi_sum(2, [[1], [1]], trivial=1))
        b = KClass.of_bundle(V.xi_sum(2, [[1]]))
        d = a - b - b
        assert d.virtual_rank == 1
        assert d.lines == ()

    def test_certified_positive_examples(self):
        assert certified_positive(KClass.difference(V.trivial(2, 5), V.trivial(2, 1)), 4)
        assert not certified_positive(KClass.difference(V.xi_sum(1, [[1]]), V.trivial(1, 1)), 2)
        # homembed-style: rank a*N well above dim/2
        h = KClass.of_bundle(V.xi_sum(3, [[1, 2, 3]] * 3))
        assert certified_positive(h, 6)

    def test_certified_positive_refuses_negative_lines(self):
        x = KClass.of_bundle(V.trivial(1, 5)) - KClass.of_bundle(V.xi_sum(1, [[1]]))
        assert not certified_positive(x, 0)


class TestVil:
    def test_examples(self):
        cert = vil_obstruction([xi(2, [1, 2]), xi(2, [1, 2])], 1)
        assert cert is not None and cert.verify()
        assert cert.claim.virtual_rank == 1
        assert vil_obstruction([xi(1, [1]), xi(1, [1])], 1) is None
        assert vil_obstruction([xi(1, [1])], 1) is None

    @given(st.data())
    @settings(max_examples=150, deadline=None)
    def test_never_fires_when_it_should_not(self, data):
        m = data.draw(st.integers(1, 4))
        k = data.draw(st.integers(1, 4))
        lines = [xi(m, data.draw(st.sets(st.integers(1, m), min_size=1))) for _ in range(k)]
        l = data.draw(st.integers(0, 5))
        cert = vil_obstruction(lines, l)
        e = euler_class(V.of_lines(lines))
        if l >= k or e.is_zero():
            assert cert is None
        else:
            assert cert is not None and cert.verify()


def test_json_round_trip():
    v = V(4, 1, (LineBundle.from_mapping(4, {1: 2, 4: 1}), xi(4, [2])))
    data = json.loads(json.dumps(v.to_json()))
    assert data["lines"][0]["indices"] in ({"1": 2, "4": 1}, {"2": 1})
    assert V.from_json(data) == v
