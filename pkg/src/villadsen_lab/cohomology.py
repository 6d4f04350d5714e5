"""Square-free monomial arithmetic in H*((S^2)^m; Z).

The even cohomology of a product of ``m`` two-spheres is the exterior-like
ring ``Z[x_1, ..., x_m] / (x_1^2, ..., x_m^2)`` with every generator in
degree 2.  A class is stored as a sparse map from subsets of ``{1..m}`` to
nonzero integer coefficients.  Subsets are encoded as Python ints used as
bitmasks (bit ``s - 1`` stands for ``x_s``), which gives the fast path for
every ``m`` since Python ints are unbounded.
"""

from __future__ import annotations

from collections.abc import Iterable, Mapping
from typing import Any


def subset_to_mask(subset: Iterable[int]) -> int:
    mask = 0
    for s in subset:
        if s < 1:
            raise ValueError(f"coordinate indices start at 1, got {s}")
        mask |= 1 << (s - 1)
    return mask


def mask_to_subset(mask: int) -> tuple[int, ...]:
    out = []
    s = 1
    while mask:
        if mask & 1:
            out.append(s)
        mask >>= 1
        s += 1
    return tuple(out)


class AmbientMismatch(ValueError):
    """Raised when combining classes that live on different sphere products."""


class CohomologyClass:
    """An integer combination of square-free monomials in ``x_1, ..., x_m``.

    Instances are immutable.  ``terms`` maps bitmasks to nonzero ints;
    construct through the classmethods rather than passing masks directly
    unless you already have them.
    """

    __slots__ = ("_ambient", "_terms", "_hash")

    def __init__(self, ambient: int, terms: Mapping[int, int] | None = None):
        if ambient < 0:
            raise ValueError(f"ambient must be nonnegative, got {ambient}")
        limit = 1 << ambient
        clean: dict[int, int] = {}
        for mask, coeff in (terms or {}).items():
            if mask < 0 or mask >= limit:
                raise ValueError(
                    f"subset {mask_to_subset(mask)} not contained in 1..{ambient}"
                )
            coeff = int(coeff)
            if coeff:
                clean[mask] = coeff
        self._ambient = ambient
        self._terms = clean
        self._hash: int | None = None

    # -- construction -----------------------------------------------------

    @classmethod
    def zero(cls, ambient: int) -> CohomologyClass:
        return cls(ambient)

    @classmethod
    def one(cls, ambient: int) -> CohomologyClass:
        return cls(ambient, {0: 1})

    @classmethod
    def generator(cls, ambient: int, s: int) -> CohomologyClass:
        """The degree-2 class ``x_s``."""
        return cls.monomial(ambient, (s,))

    @classmethod
    def monomial(cls, ambient: int, subset: Iterable[int], coeff: int = 1) -> CohomologyClass:
        return cls(ambient, {subset_to_mask(subset): coeff})

    @classmethod
    def linear(cls, ambient: int, weights: Mapping[int, int]) -> CohomologyClass:
        """``sum_s weights[s] * x_s``."""
        return cls(ambient, {1 << (s - 1): w for s, w in weights.items()})

    @classmethod
    def from_subsets(cls, ambient: int, terms: Mapping[Iterable[int], int]) -> CohomologyClass:
        acc: dict[int, int] = {}
        for subset, coeff in terms.items():
            mask = subset_to_mask(subset)
            acc[mask] = acc.get(mask, 0) + coeff
        return cls(ambient, acc)

    # -- accessors --------------------------------------------------------

    @property
    def ambient(self) -> int:
        return self._ambient

    @property
    def terms(self) -> dict[int, int]:
        """A copy of the bitmask -> coefficient map."""
        return dict(self._terms)

    def coefficient(self, subset: Iterable[int]) -> int:
        return self._terms.get(subset_to_mask(subset), 0)

    def subset_terms(self) -> list[tuple[tuple[int, ...], int]]:
        """Terms as ``(sorted subset, coeff)`` in canonical order."""
        items = [(mask_to_subset(mask), c) for mask, c in self._terms.items()]
        items.sort(key=lambda t: (len(t[0]), t[0]))
        return items

    def degrees(self) -> set[int]:
        """Cohomological degrees (``2 * |subset|``) carrying a nonzero term."""
        return {2 * bin(mask).count("1") for mask in self._terms}

    def is_zero(self) -> bool:
        return not self._terms

    def __bool__(self) -> bool:
        return bool(self._terms)

    def __len__(self) -> int:
        return len(self._terms)

    # -- arithmetic -------------------------------------------------------

    def _check(self, other: CohomologyClass) -> None:
        if not isinstance(other, CohomologyClass):
            raise TypeError(f"expected CohomologyClass, got {type(other).__name__}")
        if other._ambient != self._ambient:
            raise AmbientMismatch(
                f"ambient mismatch: (S^2)^{self._ambient} vs (S^2)^{other._ambient}"
            )

    def __add__(self, other: CohomologyClass) -> CohomologyClass:
        self._check(other)
        acc = dict(self._terms)
        for mask, c in other._terms.items():
            acc[mask] = acc.get(mask, 0) + c
        return CohomologyClass(self._ambient, acc)

    def __neg__(self) -> CohomologyClass:
        return CohomologyClass(self._ambient, {m: -c for m, c in self._terms.items()})

    def __sub__(self, other: CohomologyClass) -> CohomologyClass:
        return self + (-other)

    def scale(self, k: int) -> CohomologyClass:
        return CohomologyClass(self._ambient, {m: k * c for m, c in self._terms.items()})

    def __mul__(self, other: CohomologyClass) -> CohomologyClass:
        self._check(other)
        acc: dict[int, int] = {}
        for ma, ca in self._terms.items():
            for mb, cb in other._terms.items():
                if ma & mb:
                    continue
                key = ma | mb
                acc[key] = acc.get(key, 0) + ca * cb
        return CohomologyClass(self._ambient, acc)

    def top_term(self, k: int) -> CohomologyClass:
        """The component in H^{2k}: terms whose subset has exactly ``k`` elements."""
        return CohomologyClass(
            self._ambient,
            {m: c for m, c in self._terms.items() if bin(m).count("1") == k},
        )

    def kills(self, subset: Iterable[int]) -> CohomologyClass:
        """Cup with the monomial on ``subset``."""
        return self * CohomologyClass.monomial(self._ambient, subset)

    def reindex(self, mapping: Mapping[int, int], ambient: int) -> CohomologyClass:
        """Pull back along a coordinate reindexing ``s -> mapping[s]``."""
        acc: dict[int, int] = {}
        for mask, c in self._terms.items():
            new = subset_to_mask(mapping[s] for s in mask_to_subset(mask))
            acc[new] = acc.get(new, 0) + c
        return CohomologyClass(ambient, acc)

    # -- comparison / display --------------------------------------------

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, CohomologyClass):
            return NotImplemented
        return self._ambient == other._ambient and self._terms == other._terms

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash((self._ambient, frozenset(self._terms.items())))
        return self._hash

    def __repr__(self) -> str:
        return f"CohomologyClass({self._ambient}, {self})"

    def __str__(self) -> str:
        if not self._terms:
            return "0"
        parts = []
        for subset, c in self.subset_terms():
            mono = "*".join(f"x{s}" for s in subset)
            if not mono:
                parts.append(str(c))
            elif c == 1:
                parts.append(mono)
            elif c == -1:
                parts.append(f"-{mono}")
            else:
                parts.append(f"{c}{mono}")
        return " + ".join(parts).replace("+ -", "- ")

    # -- serialization ----------------------------------------------------

    def to_json(self) -> dict[str, Any]:
        terms = sorted(
            ({"subset": list(s), "coeff": c} for s, c in self.subset_terms()),
            key=lambda t: t["subset"],
        )
        return {"ambient": self._ambient, "terms": terms}

    @classmethod
    def from_json(cls, data: Mapping[str, Any]) -> CohomologyClass:
        ambient = int(data["ambient"])
        acc: dict[int, int] = {}
        for term in data.get("terms", []):
            mask = subset_to_mask(term["subset"])
            acc[mask] = acc.get(mask, 0) + int(term["coeff"])
        return cls(ambient, acc)


def add(a: CohomologyClass, b: CohomologyClass) -> CohomologyClass:
    return a + b


def cup(a: CohomologyClass, b: CohomologyClass) -> CohomologyClass:
    return a * b


def is_zero(a: CohomologyClass) -> bool:
    return a.is_zero()


def top_term(a: CohomologyClass, k: int) -> CohomologyClass:
    return a.top_term(k)


def product(factors: Iterable[CohomologyClass], ambient: int) -> CohomologyClass:
    """Cup product of ``factors`` taken left to right; the empty product is 1."""
    acc = CohomologyClass.one(ambient)
    for f in factors:
        acc = acc * f
        if acc.is_zero():
            break
    return acc
