import math
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import brute_represent
from villadsen_lab.embeddings import (
    EmbedWitness,
    NotRepresentable,
    dimdrop_schedule,
    frobenius,
    homembed_min_rank,
    homembed_threshold,
    homembed_witness,
    lochom_exponent,
    represent,
)

COPRIME = [(p, q) for p in range(2, 13) for q in range(2, 13) if math.gcd(p, q) == 1]


def test_frobenius_examples():
    assert frobenius(2, 3) == 1
    assert frobenius(3, 5) == 7
    assert frobenius(2, 5) == 3


@pytest.mark.parametrize("p,q", [(2, 4), (1, 3), (6, 9)])
def test_frobenius_rejects(p, q):
    with pytest.raises(ValueError):
        frobenius(p, q)


def test_represent_examples():
    assert represent(7, 2, 3) == (2, 1)
    assert represent(1, 2, 3) is None
    assert represent(0, 2, 3) == (0, 0)


@pytest.mark.parametrize("p,q", COPRIME)
def test_frobenius_and_represent_scan(p, q):
    f = frobenius(p, q)
    assert brute_represent(f, p, q) is None
    for M in range(0, 201):
        assert represent(M, p, q) == brute_represent(M, p, q)
        if M > f:
            assert represent(M, p, q) is not None


def test_represent_non_coprime():
    assert represent(10, 4, 6) == (1, 1)
    assert represent(7, 4, 6) is None


class TestHomembed:
    def test_examples(self):
        assert homembed_min_rank(5, 10) == 55
        w = homembed_witness(55, 10, 5)
        assert w.pairs == ((55, 5, 5),)
        assert homembed_witness(5, 0, 5).pairs == ((5, 1, 0),)
        for rank in range(0, 60):
            w = homembed_witness(rank, 0, 4)
            rep = represent(rank, 4, 5)
            assert (w is None) == (rep is None)
            if w:
                assert w.pairs[0][1:] == rep

    @pytest.mark.parametrize("N", range(1, 9))
    def test_tightness(self, N):
        for dim in range(0, 13):
            t = math.ceil(dim / 2)
            brute = [
                r for r in range(0, 3 * t * (N + 1) + 2 * N * N + 5)
                if any(a * N + (r - a * N) // (N + 1) * (N + 1) == r and a >= t and (r - a * N) // (N + 1) >= t
                       for a in range(t, r // N + 1))
            ]
            lo = homembed_min_rank(N, dim)
            assert brute[0] == lo
            assert homembed_witness(lo - 1, dim, N) is None if lo else True
            thr = homembed_threshold(N, dim)
            assert all(r in brute for r in range(thr, brute[-1] + 1))
            assert thr - 1 not in brute or thr == lo

    @given(st.integers(0, 400), st.integers(0, 20), st.integers(1, 10))
    def test_floor_respected(self, rank, dim, N):
        w = homembed_witness(rank, dim, N)
        if w is not None:
            _, a, b = w.pairs[0]
            assert a >= math.ceil(dim / 2) and b >= math.ceil(dim / 2)
            assert a * N + b * (N + 1) == rank


class TestDimdrop:
    def test_examples(self):
        w = dimdrop_schedule(2, 3, [5, 7])
        assert [(a, b) for _, a, b in w.pairs] == [(1, 1), (2, 1)]
        with pytest.raises(NotRepresentable) as exc:
            dimdrop_schedule(2, 3, [1])
        assert exc.value.value == 1

    @given(st.sampled_from(COPRIME), st.lists(st.integers(0, 300), max_size=10))
    def test_resubstitutes(self, pq, sizes):
        p, q = pq
        sizes = [k for k in sizes if k > frobenius(p, q)]
        w = dimdrop_schedule(p, q, sizes)
        assert [v for v, _, _ in w.pairs] == sizes
        assert all(a * p + b * q == k for k, a, b in w.pairs)


def test_witness_validates():
    with pytest.raises(ValueError):
        EmbedWitness("x", (2, 3), ((7, 1, 1),), 0)


class TestLochom:
    def test_examples(self):
        assert lochom_exponent(4, 2, 1) == 5
        assert lochom_exponent(0, 2, Fraction(1, 100)) == 1
        with pytest.raises(ValueError):
            lochom_exponent(4, 1, 1)

    @given(st.integers(0, 50), st.integers(2, 10), st.fractions(Fraction(1, 10**4), 5))
    def test_doubling_rank_never_increases(self, d, r, eps):
        assert lochom_exponent(d, 2 * r, eps) <= lochom_exponent(d, r, eps)
