"""Growth-rank and dimension-growth arithmetic on descriptors.

Growth ranks live in ``{1, 2, ...} | {inf}``; ``math.inf`` stands for an
unbounded rank.  The permanence rules for Z-stability are encoded as
inequalities between the bounds of related algebras and propagated to a
fixpoint.  The remaining helpers are exact integer or rational formulas.
"""

from __future__ import annotations

import csv
import math
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any

INF = math.inf

RELATION_KINDS = (
    "hereditary",  # target is a hereditary subalgebra of the source
    "quotient",  # target is a quotient of the source
    "stabilization",  # target is source (x) M_k or source (x) K
    "tensor",  # target is the tensor product of the sources
    "direct_sum",  # target is the direct sum of the sources
    "hereditary_sum",  # target is a direct sum of hereditary subalgebras of the source
    "inductive_limit",  # target is an inductive limit of the sources
    "extension",  # sources = (ideal, quotient)
)


class GrowthRankConflict(ValueError):
    """Propagation drove a lower bound above an upper bound."""

    def __init__(self, node: str, lower, upper, chain: list[str]):
        super().__init__(f"{node}: lower bound {lower} exceeds upper bound {upper}")
        self.node = node
        self.lower = lower
        self.upper = upper
        self.chain = chain


def _fmt(x) -> str:
    return "inf" if x == INF else str(int(x))


def parse_bound(x) -> float | int:
    if x is None or x == "inf" or x == INF:
        return INF
    x = int(x)
    if x < 1:
        raise ValueError(f"growth rank bounds start at 1, got {x}")
    return x


@dataclass
class AlgebraDescriptor:
    name: str
    lower: int = 1
    upper: float | int = INF

    def __post_init__(self):
        self.lower = parse_bound(self.lower)
        self.upper = parse_bound(self.upper)
        if self.lower == INF:
            self.upper = INF

    @property
    def exact(self) -> float | int | None:
        return self.lower if self.lower == self.upper else None


@dataclass(frozen=True)
class Relation:
    kind: str
    target: str
    sources: tuple[str, ...]

    def __post_init__(self):
        if self.kind not in RELATION_KINDS:
            raise ValueError(f"unknown relation kind {self.kind!r}")
        if self.kind == "extension" and len(self.sources) != 2:
            raise ValueError("extension needs (ideal, quotient)")
        if self.kind in ("hereditary", "quotient", "stabilization", "hereditary_sum") and len(self.sources) != 1:
            raise ValueError(f"{self.kind} relates one source to the target")
        if not self.sources:
            raise ValueError("relation without sources")


@dataclass
class DescriptorGraph:
    """Algebras with growth-rank bounds and the structural relations among them.

    Bounds only ever tighten.  ``derivation`` records, per ``(node, side)``,
    which relation produced the current value and from which nodes.
    """

    nodes: dict[str, AlgebraDescriptor] = field(default_factory=dict)
    relations: list[Relation] = field(default_factory=list)
    derivation: dict[tuple[str, str], tuple[str, tuple[str, ...]]] = field(default_factory=dict)

    def add(self, name: str, lower=1, upper=INF) -> AlgebraDescriptor:
        if name in self.nodes:
            raise ValueError(f"duplicate node {name!r}")
        node = AlgebraDescriptor(name, lower, upper)
        self.nodes[name] = node
        return node

    def relate(self, kind: str, target: str, *sources: str) -> Relation:
        for n in (target, *sources):
            if n not in self.nodes:
                raise KeyError(f"unknown node {n!r}")
        rel = Relation(kind, target, tuple(sources))
        self.relations.append(rel)
        return rel

    def bounds(self) -> dict[str, tuple]:
        return {n: (d.lower, d.upper) for n, d in sorted(self.nodes.items())}

    # -- propagation ------------------------------------------------------------

    def _tighten_upper(self, name: str, value, why: str, sources: tuple[str, ...]) -> bool:
        node = self.nodes[name]
        if value < node.upper:
            node.upper = value
            self.derivation[(name, "upper")] = (why, sources)
            return True
        return False

    def _tighten_lower(self, name: str, value, why: str, sources: tuple[str, ...]) -> bool:
        node = self.nodes[name]
        if value > node.lower:
            node.lower = value
            self.derivation[(name, "lower")] = (why, sources)
            return True
        return False

    def _apply(self, rel: Relation) -> bool:
        n = self.nodes
        t, srcs = rel.target, rel.sources
        changed = False
        if rel.kind in ("hereditary", "quotient", "hereditary_sum"):
            (a,) = srcs
            changed |= self._tighten_upper(t, n[a].upper, f"{rel.kind} of {a}", (a,))
            changed |= self._tighten_lower(a, n[t].lower, f"contains {rel.kind} {t}", (t,))
        elif rel.kind == "stabilization":
            (a,) = srcs
            changed |= self._tighten_upper(t, n[a].upper, f"stabilization of {a}", (a,))
            changed |= self._tighten_upper(a, n[t].upper, f"stabilizes to {t}", (t,))
            changed |= self._tighten_lower(t, n[a].lower, f"stabilization of {a}", (a,))
            changed |= self._tighten_lower(a, n[t].lower, f"stabilizes to {t}", (t,))
        elif rel.kind == "tensor":
            best = min(srcs, key=lambda s: n[s].upper)
            changed |= self._tighten_upper(t, n[best].upper, f"tensor factor {best}", (best,))
            for a in srcs:
                changed |= self._tighten_lower(a, n[t].lower, f"factor of tensor {t}", (t,))
        elif rel.kind == "direct_sum":
            total = sum(n[a].upper for a in srcs)
            changed |= self._tighten_upper(t, total, "sum of summand bounds", srcs)
            for a in srcs:
                others = sum(n[b].upper for b in srcs if b is not a)
                if others != INF:
                    changed |= self._tighten_lower(
                        a, n[t].lower - others, f"summand of {t}", (t, *(b for b in srcs if b is not a))
                    )
        elif rel.kind == "inductive_limit":
            top = max(n[a].upper for a in srcs)
            changed |= self._tighten_upper(t, top, "limit of stages", srcs)
        elif rel.kind == "extension":
            ideal, quot = srcs
            if n[ideal].upper == 1 and n[quot].upper == 1:
                changed |= self._tighten_upper(t, 1, f"extension of {quot} by {ideal}", srcs)
        return changed

    def _chain(self, name: str, side: str, depth: int = 0, seen=None) -> list[str]:
        seen = set() if seen is None else seen
        key = (name, side)
        node = self.nodes[name]
        value = node.lower if side == "lower" else node.upper
        pad = "  " * depth
        if key not in self.derivation or key in seen:
            return [f"{pad}{side}({name}) = {_fmt(value)} [given]"]
        seen.add(key)
        why, sources = self.derivation[key]
        out = [f"{pad}{side}({name}) = {_fmt(value)} [{why}]"]
        for s in sources:
            out.extend(self._chain(s, side if "summand" not in why or s == sources[0] else "upper", depth + 1, seen))
        return out

    def propagate(self, max_rounds: int | None = None) -> int:
        """Apply every rule until nothing changes; returns the number of rounds.

        Raises :class:`GrowthRankConflict` with the derivation chains of both
        bounds when they cross.
        """
        if max_rounds is None:
            finite = [b for d in self.nodes.values() for b in (d.lower, d.upper) if b != INF]
            max_rounds = (len(self.relations) + 1) * (int(sum(finite)) + 2) + 2
        self._check()
        rounds = 0
        while True:
            rounds += 1
            changed = False
            for rel in self.relations:
                changed |= self._apply(rel)
            self._check()
            if not changed:
                return rounds
            if rounds > max_rounds:
                raise RuntimeError("propagation did not reach a fixpoint")

    def _check(self) -> None:
        for name, d in sorted(self.nodes.items()):
            if d.lower > d.upper:
                chain = self._chain(name, "lower") + self._chain(name, "upper")
                raise GrowthRankConflict(name, _fmt(d.lower), _fmt(d.upper), chain)

    # -- serialization ------------------------------------------------------------

    def to_json(self) -> dict[str, Any]:
        return {
            "nodes": [
                {"name": n, "lower": _fmt(d.lower), "upper": _fmt(d.upper)}
                for n, d in sorted(self.nodes.items())
            ],
            "relations": [
                {"kind": r.kind, "target": r.target, "sources": list(r.sources)} for r in self.relations
            ],
        }

    @classmethod
    def from_json(cls, data: dict[str, Any]) -> DescriptorGraph:
        g = cls()
        unknown = set(data) - {"nodes", "relations"}
        if unknown:
            raise ValueError(f"unknown keys in descriptor graph: {sorted(unknown)}")
        for node in data.get("nodes", []):
            g.add(node["name"], node.get("lower", 1), node.get("upper", "inf"))
        for rel in data.get("relations", []):
            g.relate(rel["kind"], rel["target"], *rel["sources"])
        return g


def propagate_gr(graph: DescriptorGraph) -> DescriptorGraph:
    graph.propagate()
    return graph


# -- binomial decomposition -----------------------------------------------------


def binomial_decompose(k: int) -> list[tuple[int, int]]:
    """``(A + B)^{(x) k}`` as summands ``A^{(x) i} (x) B^{(x) k-i}`` with multiplicity ``C(k, i)``."""
    if k < 1:
        raise ValueError("k must be at least 1")
    return [(i, math.comb(k, i)) for i in range(k + 1)]


def sum_dichotomy(gr_a: int, gr_b: int) -> list[tuple[int, str]]:
    """For ``k = gr_a + gr_b``, which factor power absorbs in each summand.

    Every summand has ``i >= gr_a`` (tag ``"A"``) or ``k - i >= gr_b``
    (tag ``"B"``); raises if one does not.
    """
    k = gr_a + gr_b
    out = []
    for i, _ in binomial_decompose(k):
        if i >= gr_a:
            out.append((i, "A"))
        elif k - i >= gr_b:
            out.append((i, "B"))
        else:
            raise AssertionError(f"summand i={i} escapes both bounds")
    return out


# -- topological dimension growth -------------------------------------------------


@dataclass(frozen=True)
class GrowthProfile:
    """Spectrum dimensions and unit ranks along an inductive system.

    Either ``entries`` (tabulated ``(dim, rank)`` pairs) or a closed form
    ``dim = c * rank^power``.
    """

    entries: tuple[tuple[int, int], ...] = ()
    c: int | None = None
    power: int | None = None

    def __post_init__(self):
        if self.c is None:
            if not self.entries:
                raise ValueError("empty growth profile")
            prev = 0
            for dim, rank in self.entries:
                if dim < 0 or rank < 1:
                    raise ValueError(f"bad entry (dim={dim}, rank={rank})")
                if rank < prev:
                    raise ValueError("ranks must be nondecreasing")
                prev = rank
        else:
            if self.c < 0 or self.power is None or self.power < 0:
                raise ValueError("closed form needs c >= 0 and power >= 0")

    @classmethod
    def closed_form(cls, c: int, power: int) -> GrowthProfile:
        return cls((), c, power)

    @property
    def is_closed_form(self) -> bool:
        return self.c is not None

    @classmethod
    def from_csv(cls, path) -> GrowthProfile:
        with open(path, newline="") as fh:
            rows = list(csv.DictReader(fh))
        rows.sort(key=lambda r: int(r["i"]))
        return cls(tuple((int(r["dim"]), int(r["rank"])) for r in rows))

    def to_json(self) -> dict[str, Any]:
        if self.is_closed_form:
            return {"c": self.c, "k": self.power}
        return {"entries": [list(e) for e in self.entries]}


@dataclass(frozen=True)
class TdgEstimate:
    """Result of :func:`tdg_estimate`.

    ``status`` is ``"exact"`` (closed form), ``"judged"`` (tabulated tail),
    ``"exceeds"`` (no ``k <= n_max`` has a decreasing tail) or
    ``"inconclusive"``; ``value`` is set for the first two.
    """

    value: int | None
    status: str
    window: tuple[int, int] | None = None
    ratios: tuple[Fraction, ...] = ()
    note: str = ""

    def to_json(self) -> dict[str, Any]:
        out: dict[str, Any] = {"status": self.status, "tdg": self.value}
        if self.window:
            out["window"] = list(self.window)
        if self.ratios:
            out["ratios"] = [str(r) for r in self.ratios]
        if self.note:
            out["note"] = self.note
        return out


def tdg_estimate(profile: GrowthProfile, n_max: int = 10, tol: float = 1e-3) -> TdgEstimate:
    """Least ``k`` with ``k * dim_i / rank_i^k -> 0``.

    Closed form ``dim = c * rank^m`` with ``rank -> inf`` gives ``m + 1``
    (``1`` when ``c = 0``).  A table is judged on its last quarter: ``k`` is
    accepted once its ratios there are non-increasing and below ``tol``; a
    strictly decreasing tail still above ``tol`` makes the answer
    inconclusive, and a flat or rising one rules ``k`` out.
    """
    if n_max < 1:
        raise ValueError("n_max must be at least 1")
    if profile.is_closed_form:
        k = 1 if profile.c == 0 else profile.power + 1
        if k > n_max:
            return TdgEstimate(None, "exceeds", note=f"tdg = {k} > n_max")
        return TdgEstimate(k, "exact")
    entries = profile.entries
    width = max(2, math.ceil(len(entries) / 4))
    if len(entries) < width:
        return TdgEstimate(None, "inconclusive", (0, len(entries)), note="table shorter than two entries")
    lo = len(entries) - width
    window = (lo + 1, len(entries))  # 1-based inclusive stage numbers
    for k in range(1, n_max + 1):
        ratios = tuple(Fraction(k * dim, rank**k) for dim, rank in entries[lo:])
        steps = list(zip(ratios, ratios[1:]))
        if all(b <= a for a, b in steps) and all(r < Fraction(tol) for r in ratios):
            return TdgEstimate(k, "judged", window, ratios)
        if all(b < a for a, b in steps):
            return TdgEstimate(
                None, "inconclusive", window, ratios,
                note=f"k={k} ratios decrease but stay above tolerance {tol}",
            )
        # flat or rising above tolerance: this k does not give slow growth
    return TdgEstimate(None, "exceeds", window, note=f"no k <= {n_max} has a decreasing tail")


# -- stable rank / real rank -------------------------------------------------------


def nistor_sr(dim_x: int, rank_p: int) -> int:
    """Stable rank of ``p (C(X) (x) K) p``: ``ceil(floor(dim/2) / rank) + 1``."""
    if rank_p < 1:
        raise ValueError("rank must be at least 1")
    if dim_x < 0:
        raise ValueError("dimension must be nonnegative")
    return -(-(dim_x // 2) // rank_p) + 1


def rr_upper(sr: int) -> int:
    """Real rank is at most ``2 sr - 1``."""
    if sr < 1:
        raise ValueError("stable rank is at least 1")
    return 2 * sr - 1


def sr_profile(entries: Iterable[tuple[int, int]]) -> list[int]:
    return [nistor_sr(dim, rank) for dim, rank in entries]


# -- one-dimensional representation pruning -------------------------------------------


@dataclass(frozen=True)
class PruneVerdict:
    """``"clean"``: stage ``stage`` has no rank-one summand, so its ``B_j`` is zero.
    ``"surviving"``: ``chain`` is a longest path of nonzero maps between
    rank-one summands ending at the last stage (indices per stage, 0-based).
    """

    status: str
    stage: int | None = None
    chain: tuple[int, ...] = ()
    start: int | None = None

    def to_json(self) -> dict[str, Any]:
        out: dict[str, Any] = {"status": self.status}
        if self.stage is not None:
            out["stage"] = self.stage
        if self.chain:
            out["chain"] = list(self.chain)
            out["start"] = self.start
            out["length"] = len(self.chain)
        return out


def prune_rank_one(ranks: Sequence[Sequence[int]], maps: Sequence[Sequence[Sequence[bool]]]) -> PruneVerdict:
    """Follow rank-one summands through the connecting maps.

    ``ranks[t]`` lists summand ranks at stage ``t + 1``; ``maps[t][a][b]`` is
    true when the partial map from summand ``a`` of stage ``t + 1`` to summand
    ``b`` of stage ``t + 2`` is nonzero.
    """
    if not ranks:
        raise ValueError("no stages")
    if len(maps) != len(ranks) - 1:
        raise ValueError(f"need {len(ranks) - 1} connecting maps, got {len(maps)}")
    for t, m in enumerate(maps):
        if len(m) != len(ranks[t]) or any(len(row) != len(ranks[t + 1]) for row in m):
            raise ValueError(f"map {t + 1} has the wrong shape")
    for t, rs in enumerate(ranks):
        if any(r < 1 for r in rs):
            raise ValueError(f"stage {t + 1} has a summand of rank < 1")
        if 1 not in rs:
            return PruneVerdict("clean", stage=t + 1)
    # longest chain ending at each rank-one summand
    best: list[dict[int, tuple[int, ...]]] = [{a: (a,) for a, r in enumerate(ranks[0]) if r == 1}]
    starts: list[dict[int, int]] = [{a: 1 for a in best[0]}]
    for t in range(1, len(ranks)):
        cur: dict[int, tuple[int, ...]] = {}
        st: dict[int, int] = {}
        for b, r in enumerate(ranks[t]):
            if r != 1:
                continue
            cur[b], st[b] = (b,), t + 1
            for a, chain in best[t - 1].items():
                if maps[t - 1][a][b] and len(chain) + 1 > len(cur[b]):
                    cur[b], st[b] = chain + (b,), starts[t - 1][a]
        best.append(cur)
        starts.append(st)
    end = max(sorted(best[-1]), key=lambda b: len(best[-1][b]))
    return PruneVerdict("surviving", chain=best[-1][end], start=starts[-1][end])


# -- very slow dimension growth exponent ------------------------------------------


def very_slow_exponent(n: int, k: int, eps: float | Fraction, floor: int = 1) -> int:
    """Least ``r >= floor`` with ``(k r)^3 / n^r < eps``.

    ``n`` is the minimum unit rank and ``k`` the maximum spectrum dimension
    at the stage; ``floor`` lets a sequence of exponents stay nondecreasing.
    """
    if n <= 1:
        raise ValueError("n must be at least 2 for an exponent to exist")
    if k < 1:
        raise ValueError("k must be at least 1")
    eps = Fraction(eps)
    if eps <= 0:
        raise ValueError("eps must be positive")
    r = max(1, floor)
    while Fraction((k * r) ** 3, n**r) >= eps:
        r += 1
    return r
