"""Two-generator numerical semigroup witnesses for unital embeddings.

A unital embedding of ``M_N (+) M_{N+1}`` into ``p (C(X) (x) K) p`` comes
from writing ``rank(p) = a N + b (N + 1)`` with both ``a`` and ``b`` large
enough that the corresponding K-classes are positive; a unital map from a
dimension-drop interval ``I[p, pq, q]`` into ``M_k`` needs ``k = a p + b q``.
Both reduce to representing an integer by two generators.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any


class NotRepresentable(ValueError):
    def __init__(self, value: int, p: int, q: int):
        super().__init__(f"{value} is not a nonnegative combination of {p} and {q}")
        self.value = value
        self.p = p
        self.q = q


def _check_pair(p: int, q: int) -> None:
    if p < 2 or q < 2:
        raise ValueError(f"generators must be at least 2, got ({p}, {q})")
    if math.gcd(p, q) != 1:
        raise ValueError(f"generators {p} and {q} are not coprime")


def frobenius(p: int, q: int) -> int:
    """Largest integer not of the form ``a p + b q`` with ``a, b >= 0``."""
    _check_pair(p, q)
    return p * q - p - q


def represent(M: int, p: int, q: int) -> tuple[int, int] | None:
    """Nonnegative ``(a, b)`` with ``a p + b q = M`` and ``a`` least, or ``None``."""
    if p < 1 or q < 1:
        raise ValueError("generators must be positive")
    if M < 0:
        return None
    g = math.gcd(p, q)
    if M % g:
        return None
    p_, q_, M_ = p // g, q // g, M // g
    a = (M_ * pow(p_, -1, q_)) % q_ if q_ > 1 else 0
    if a * p_ > M_:
        return None
    return a, (M_ - a * p_) // q_


@dataclass(frozen=True)
class EmbedWitness:
    """Coefficient pairs for each target summand; every pair satisfies its equation."""

    target: str
    generators: tuple[int, int]
    pairs: tuple[tuple[int, int, int], ...]  # (value, a, b)
    threshold: int
    notes: tuple[str, ...] = field(default=())

    def __post_init__(self):
        p, q = self.generators
        for value, a, b in self.pairs:
            if a < 0 or b < 0 or a * p + b * q != value:
                raise ValueError(f"pair ({a}, {b}) does not represent {value}")

    def to_json(self) -> dict[str, Any]:
        if len(self.pairs) == 1:
            _, a, b = self.pairs[0]
            witness: Any = {"a": a, "b": b}
        else:
            witness = [{"k": v, "a": a, "b": b} for v, a, b in self.pairs]
        return {
            "target": self.target,
            "generators": list(self.generators),
            "threshold": self.threshold,
            "witness": witness,
        }


def _half_dim(dim_x: int) -> int:
    return -(-dim_x // 2)


def homembed_witness(rank_p: int, dim_x: int, N: int) -> EmbedWitness | None:
    """``rank_p = a N + b (N+1)`` with ``a, b >= ceil(dim_x / 2)``, least ``a``."""
    if N < 1:
        raise ValueError("N must be at least 1")
    if dim_x < 0:
        raise ValueError("dimension must be nonnegative")
    t = _half_dim(dim_x)
    rest = represent(rank_p - t * (2 * N + 1), N, N + 1)
    if rest is None:
        return None
    a, b = rest[0] + t, rest[1] + t
    return EmbedWitness(f"M_{N} + M_{N + 1}", (N, N + 1), ((rank_p, a, b),), t)


def homembed_min_rank(N: int, dim_x: int) -> int:
    """Least rank admitting a witness: ``ceil(dim_x/2) (2N + 1)``."""
    if N < 1 or dim_x < 0:
        raise ValueError("need N >= 1 and dim_x >= 0")
    return _half_dim(dim_x) * (2 * N + 1)


def homembed_threshold(N: int, dim_x: int) -> int:
    """Least ``R`` such that every rank ``>= R`` admits a witness."""
    base = homembed_min_rank(N, dim_x)
    if N == 1:
        return base  # generators 1 and 2 represent everything
    return base + frobenius(N, N + 1) + 1


def dimdrop_schedule(p: int, q: int, sizes: list[int]) -> EmbedWitness:
    """``(a_k, b_k)`` with ``a_k p + b_k q = k`` for each matrix size ``k``.

    Sizes above ``pq - p - q`` always work; a size that cannot be written
    raises :class:`NotRepresentable` naming it.
    """
    f = frobenius(p, q)
    pairs = []
    for k in sizes:
        rep = represent(k, p, q)
        if rep is None:
            raise NotRepresentable(k, p, q)
        pairs.append((k, *rep))
    return EmbedWitness(f"I[{p}, {p * q}, {q}]", (p, q), tuple(pairs), f + 1)


def lochom_exponent(max_dim: int, min_rank: int, epsilon: float | Fraction) -> int:
    """Least ``k`` with ``k * max_dim / min_rank^k < epsilon``."""
    if min_rank < 2:
        raise ValueError("min_rank must be at least 2")
    if max_dim < 0:
        raise ValueError("max_dim must be nonnegative")
    epsilon = Fraction(epsilon)
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    k = 1
    while Fraction(k * max_dim, min_rank**k) >= epsilon:
        k += 1
    return k
