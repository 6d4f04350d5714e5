"""Line bundles over (S^2)^m, their Whitney sums, and K^0 classes.

``xi_s`` is the pullback of a line bundle on S^2 with Euler class the
generator, along the s-th coordinate projection; ``xi_I`` is the tensor
product of the ``xi_s`` for ``s`` in ``I``.  Tensor products of such lines
add index multiplicities, so a :class:`LineBundle` carries a map
``coordinate -> multiplicity`` and its first Chern class is
``sum_s mult(s) * x_s``.

Everything here is a value object; operations return new instances.
"""

from __future__ import annotations

from collections import Counter
from collections.abc import Callable, Iterable, Mapping, Sequence
from dataclasses import dataclass, field
from typing import Any

from .cohomology import AmbientMismatch, CohomologyClass, product
from .matching import HallResult, hall_check


class ReindexError(ValueError):
    """A coordinate reindexing is not injective or leaves the target ambient."""


@dataclass(frozen=True, order=True)
class LineBundle:
    ambient: int
    indices: tuple[tuple[int, int], ...]

    def __post_init__(self):
        seen = set()
        for s, mult in self.indices:
            if not 1 <= s <= self.ambient:
                raise ValueError(f"coordinate {s} outside 1..{self.ambient}")
            if mult < 1:
                raise ValueError(f"multiplicity of coordinate {s} must be >= 1, got {mult}")
            if s in seen:
                raise ValueError(f"coordinate {s} repeated")
            seen.add(s)
        if list(self.indices) != sorted(self.indices):
            object.__setattr__(self, "indices", tuple(sorted(self.indices)))

    @classmethod
    def from_mapping(cls, ambient: int, indices: Mapping[int, int]) -> LineBundle:
        return cls(ambient, tuple(sorted((int(s), int(m)) for s, m in indices.items())))

    @classmethod
    def xi(cls, ambient: int, subset: Iterable[int]) -> LineBundle:
        """``xi_I`` with multiplicity one on each coordinate of ``subset``."""
        return cls(ambient, tuple((s, 1) for s in sorted(set(subset))))

    @property
    def support(self) -> tuple[int, ...]:
        return tuple(s for s, _ in self.indices)

    @property
    def is_trivial(self) -> bool:
        return not self.indices

    def multiplicity(self, s: int) -> int:
        for t, m in self.indices:
            if t == s:
                return m
        return 0

    def c1(self) -> CohomologyClass:
        return CohomologyClass.linear(self.ambient, dict(self.indices))

    def tensor(self, other: LineBundle) -> LineBundle:
        if other.ambient != self.ambient:
            raise AmbientMismatch(f"ambient mismatch: {self.ambient} vs {other.ambient}")
        acc = Counter(dict(self.indices))
        acc.update(dict(other.indices))
        return LineBundle(self.ambient, tuple(sorted(acc.items())))

    def reindex(self, mapping: Callable[[int], int], ambient: int) -> LineBundle:
        return LineBundle(ambient, tuple(sorted((mapping(s), m) for s, m in self.indices)))

    def to_json(self) -> dict[str, Any]:
        return {"indices": {str(s): m for s, m in self.indices}}

    @classmethod
    def from_json(cls, data: Mapping[str, Any], ambient: int) -> LineBundle:
        return cls.from_mapping(ambient, {int(s): int(m) for s, m in data["indices"].items()})

    def __str__(self) -> str:
        if not self.indices:
            return "theta_1"
        inner = ",".join(str(s) if m == 1 else f"{s}^{m}" for s, m in self.indices)
        return f"xi_{{{inner}}}"


def _as_reindex(mapping: Mapping[int, int] | Callable[[int], int] | int, old_ambient: int, ambient: int):
    if isinstance(mapping, int):
        shift = mapping
        fn = lambda s: s + shift  # noqa: E731
    elif isinstance(mapping, Mapping):
        fn = mapping.__getitem__
    else:
        fn = mapping
    images = [fn(s) for s in range(1, old_ambient + 1)]
    if len(set(images)) != len(images):
        raise ReindexError("coordinate reindexing is not injective")
    if any(not 1 <= t <= ambient for t in images):
        raise ReindexError(f"reindexing leaves 1..{ambient}")
    return fn


@dataclass(frozen=True)
class VectorBundle:
    """``theta_t`` plus a Whitney sum of line bundles, all over ``(S^2)^ambient``."""

    ambient: int
    trivial_rank: int = 0
    lines: tuple[LineBundle, ...] = ()

    def __post_init__(self):
        if self.trivial_rank < 0:
            raise ValueError("trivial rank must be nonnegative")
        for line in self.lines:
            if line.ambient != self.ambient:
                raise AmbientMismatch(
                    f"line over (S^2)^{line.ambient} in bundle over (S^2)^{self.ambient}"
                )
        # lines with empty support are trivial summands
        trivial = sum(1 for line in self.lines if line.is_trivial)
        lines = tuple(sorted(line for line in self.lines if not line.is_trivial))
        if trivial or lines != self.lines:
            object.__setattr__(self, "trivial_rank", self.trivial_rank + trivial)
            object.__setattr__(self, "lines", lines)

    # -- constructors -----------------------------------------------------

    @classmethod
    def trivial(cls, ambient: int, rank: int) -> VectorBundle:
        return cls(ambient, rank)

    @classmethod
    def of_lines(cls, lines: Sequence[LineBundle], ambient: int | None = None) -> VectorBundle:
        if ambient is None:
            if not lines:
                raise ValueError("ambient required for an empty sum")
            ambient = lines[0].ambient
        return cls(ambient, 0, tuple(lines))

    @classmethod
    def xi_sum(cls, ambient: int, subsets: Iterable[Iterable[int]], trivial: int = 0) -> VectorBundle:
        """``theta_trivial + xi_{I_1} + ... + xi_{I_k}``."""
        return cls(ambient, trivial, tuple(LineBundle.xi(ambient, s) for s in subsets))

    # -- structure --------------------------------------------------------

    @property
    def rank(self) -> int:
        return self.trivial_rank + len(self.lines)

    def supports(self) -> list[tuple[int, ...]]:
        return [line.support for line in self.lines]

    def line_counts(self) -> Counter[LineBundle]:
        return Counter(self.lines)

    def whitney(self, other: VectorBundle) -> VectorBundle:
        if other.ambient != self.ambient:
            raise AmbientMismatch(f"ambient mismatch: {self.ambient} vs {other.ambient}")
        return VectorBundle(self.ambient, self.trivial_rank + other.trivial_rank, self.lines + other.lines)

    __add__ = whitney

    def copies(self, k: int) -> VectorBundle:
        if k < 0:
            raise ValueError("number of copies must be nonnegative")
        return VectorBundle(self.ambient, k * self.trivial_rank, self.lines * k)

    def __rmul__(self, k: int) -> VectorBundle:
        return self.copies(k)

    def tensor(self, other: VectorBundle) -> VectorBundle:
        if other.ambient != self.ambient:
            raise AmbientMismatch(f"ambient mismatch: {self.ambient} vs {other.ambient}")
        lines: list[LineBundle] = []
        lines.extend(self.lines * other.trivial_rank)
        lines.extend(other.lines * self.trivial_rank)
        mine = Counter(self.lines)
        theirs = Counter(other.lines)
        for a, ka in mine.items():
            for b, kb in theirs.items():
                lines.extend([a.tensor(b)] * (ka * kb))
        return VectorBundle(self.ambient, self.trivial_rank * other.trivial_rank, tuple(lines))

    __matmul__ = tensor

    def pullback(
        self,
        mapping: Mapping[int, int] | Callable[[int], int] | int,
        ambient: int,
    ) -> VectorBundle:
        """Relabel coordinates ``s -> mapping(s)`` into ``(S^2)^ambient``.

        ``mapping`` may be a dict, a callable, or an int shift.
        """
        fn = _as_reindex(mapping, self.ambient, ambient)
        return VectorBundle(
            ambient, self.trivial_rank, tuple(line.reindex(fn, ambient) for line in self.lines)
        )

    # -- characteristic classes ------------------------------------------

    def euler_class(self) -> CohomologyClass:
        if self.trivial_rank:
            return CohomologyClass.zero(self.ambient)
        return product((line.c1() for line in self.lines), self.ambient)

    def chern_class(self) -> CohomologyClass:
        one = CohomologyClass.one(self.ambient)
        return product((one + line.c1() for line in self.lines), self.ambient)

    def hall(self) -> HallResult:
        """Hall check on the line supports (requires no trivial line summands)."""
        return hall_check(self.supports())

    def euler_nonzero(self) -> bool:
        if self.trivial_rank:
            return False
        if not self.lines:
            return True  # empty sum: e = 1
        return self.hall().ok

    # -- serialization ----------------------------------------------------

    def to_json(self) -> dict[str, Any]:
        return {
            "ambient": self.ambient,
            "trivial": self.trivial_rank,
            "lines": [line.to_json() for line in self.lines],
        }

    @classmethod
    def from_json(cls, data: Mapping[str, Any]) -> VectorBundle:
        ambient = int(data["ambient"])
        lines = tuple(LineBundle.from_json(d, ambient) for d in data.get("lines", []))
        return cls(ambient, int(data.get("trivial", 0)), lines)

    def __str__(self) -> str:
        parts = [f"theta_{self.trivial_rank}"] if self.trivial_rank else []
        for line, k in sorted(Counter(self.lines).items()):
            parts.append(str(line) if k == 1 else f"{k}{line}")
        return " + ".join(parts) or "0"


def euler_class(v: VectorBundle) -> CohomologyClass:
    return v.euler_class()


def chern_class(v: VectorBundle) -> CohomologyClass:
    return v.chern_class()


def euler_nonzero(v: VectorBundle) -> bool:
    return v.euler_nonzero()


def tensor(a: VectorBundle, b: VectorBundle) -> VectorBundle:
    return a.tensor(b)


def external_tensor(a: VectorBundle, b: VectorBundle) -> VectorBundle:
    """``pi_1^* a (x) pi_2^* b`` over ``(S^2)^(m1 + m2)``."""
    ambient = a.ambient + b.ambient
    return a.pullback(0, ambient).tensor(b.pullback(a.ambient, ambient))


def pullback(v: VectorBundle, mapping, ambient: int) -> VectorBundle:
    return v.pullback(mapping, ambient)


@dataclass(frozen=True)
class KClass:
    """A formal difference in K^0((S^2)^m): ``trivial_part * [theta_1] + sum mult * [line]``."""

    ambient: int
    trivial_part: int = 0
    lines: tuple[tuple[LineBundle, int], ...] = ()

    def __post_init__(self):
        acc: Counter[LineBundle] = Counter()
        for line, k in self.lines:
            if line.ambient != self.ambient:
                raise AmbientMismatch("line bundle ambient differs from class ambient")
            acc[line] += k
        canon = tuple(sorted((line, k) for line, k in acc.items() if k))
        object.__setattr__(self, "lines", canon)

    @classmethod
    def of_bundle(cls, v: VectorBundle) -> KClass:
        return cls(v.ambient, v.trivial_rank, tuple(Counter(v.lines).items()))

    @classmethod
    def difference(cls, plus: VectorBundle, minus: VectorBundle) -> KClass:
        return cls.of_bundle(plus) - cls.of_bundle(minus)

    @property
    def virtual_rank(self) -> int:
        return self.trivial_part + sum(k for _, k in self.lines)

    def __add__(self, other: KClass) -> KClass:
        if other.ambient != self.ambient:
            raise AmbientMismatch("ambient mismatch")
        return KClass(self.ambient, self.trivial_part + other.trivial_part, self.lines + other.lines)

    def __neg__(self) -> KClass:
        return KClass(self.ambient, -self.trivial_part, tuple((line, -k) for line, k in self.lines))

    def __sub__(self, other: KClass) -> KClass:
        return self + (-other)

    def scale(self, k: int) -> KClass:
        return KClass(self.ambient, k * self.trivial_part, tuple((line, k * m) for line, m in self.lines))

    def to_json(self) -> dict[str, Any]:
        return {
            "ambient": self.ambient,
            "trivial": self.trivial_part,
            "lines": [{**line.to_json(), "mult": k} for line, k in self.lines],
            "virtual_rank": self.virtual_rank,
        }

    def __str__(self) -> str:
        parts = []
        for line, k in self.lines:
            parts.append(f"{k}[{line}]" if k != 1 else f"[{line}]")
        if self.trivial_part:
            parts.append(f"{self.trivial_part}[theta_1]")
        return " + ".join(parts).replace("+ -", "- ") or "0"


def certified_positive(x: KClass, real_dim: int) -> bool:
    """Sufficient test for ``x`` lying in the positive cone of K^0.

    Applies only to an honest bundle minus a trivial bundle (all line
    multiplicities nonnegative); then virtual rank at least half the real
    dimension of the base certifies positivity.  ``False`` means "not
    certified", never "not positive".
    """
    if real_dim < 0:
        raise ValueError("real dimension must be nonnegative")
    if any(k < 0 for _, k in x.lines):
        return False
    return x.virtual_rank >= 0 and 2 * x.virtual_rank >= real_dim


@dataclass(frozen=True)
class VilCertificate:
    """``[eta_1 + ... + eta_k] - [theta_l]`` is not in the positive cone.

    Valid because ``l < k`` and the Euler class of the sum is nonzero, the
    latter witnessed by a system of distinct representatives of the supports.
    """

    lines: tuple[LineBundle, ...]
    l: int
    matching: dict[int, int] = field(default_factory=dict)

    @property
    def k(self) -> int:
        return len(self.lines)

    @property
    def claim(self) -> KClass:
        ambient = self.lines[0].ambient
        return KClass(ambient, -self.l, tuple((line, 1) for line in self.lines))

    def verify(self) -> bool:
        supports = [line.support for line in self.lines]
        if not self.l < self.k:
            return False
        if sorted(self.matching) != list(range(self.k)):
            return False
        if len(set(self.matching.values())) != self.k:
            return False
        return all(self.matching[j] in supports[j] for j in range(self.k))

    def to_json(self, include_lines: bool = True) -> dict[str, Any]:
        out: dict[str, Any] = {
            "k": self.k,
            "l": self.l,
            "claim": "not in K^0(X)^+",
            "matching": {str(j): s for j, s in sorted(self.matching.items())},
        }
        if include_lines:
            out["lines"] = [line.to_json() for line in self.lines]
        return out


def vil_obstruction(lines: Sequence[LineBundle], l: int) -> VilCertificate | None:
    """Certificate that ``[sum lines] - [theta_l]`` is not positive, or ``None``.

    ``None`` makes no claim either way.
    """
    if l < 0:
        raise ValueError("l must be nonnegative")
    lines = tuple(lines)
    if not lines or len({line.ambient for line in lines}) != 1:
        if lines:
            raise AmbientMismatch("line bundles over different ambients")
        return None
    if not l < len(lines):
        return None
    if any(line.is_trivial for line in lines):
        return None
    result = hall_check(line.support for line in lines)
    if not result.ok:
        return None
    return VilCertificate(lines, l, result.matching)
