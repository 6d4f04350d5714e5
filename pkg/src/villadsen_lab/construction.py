"""Stage engine for the Villadsen-type algebras of prescribed growth rank.

Stage ``i`` lives over ``X_i = (S^2)^{N_i}`` with ``N_i = n_1 * ... * n_i``.
The unit projection ``p_i`` is a Whitney sum of one trivial line and line
bundles ``xi_{I}`` where ``I`` is one of the coordinate blocks added at an
earlier stage::

    p_1     = theta_1 + 2 xi_{I_1^1}
    p_{i+1} = omega^*(p_i) + (m_{i+1} * d_i) xi_{I_1^{i+1}}

``omega`` is projection onto the first factor of ``X_{i+1} = X_i^{n_{i+1}}``,
so ``omega^*`` keeps coordinate labels and the new block is
``{N_i + 1, ..., N_{i+1}}``.

The perforation target at stage ``i`` with ``k`` tensor factors is the class
``2[phi_{1i}(xi_{I_1^1}) (x) p_i^2 (x) ... (x) p_i^k] - [theta_1]`` over
``X_i^k``, where block ``l`` of ``X_i^k`` occupies global coordinates
``(l-1)N_i + 1 .. l N_i``.

Coordinates are grouped into *atoms* ``(l, j)``: the part of block ``l``
introduced at stage ``j``.  Every summand of the expanded target has support
equal to a union of atoms, one per block at most, which is what lets the
Hall condition be decided at any stage without listing coordinates.
"""

from __future__ import annotations

import itertools
import os
from collections import Counter
from dataclasses import dataclass, field, replace
from fractions import Fraction
from functools import cached_property
from typing import Any, Protocol

from .bundles import LineBundle, VectorBundle, vil_obstruction
from .matching import GroupedHallResult, grouped_hall_check, verify_allocation

DEFAULT_CAP = 10_000
DEFAULT_ENTRY_CAP = 2_000_000
CAP_ENV = "VILLADSEN_LAB_CAP"


def expansion_cap() -> int:
    """Summand cap for explicit expansions, from ``VILLADSEN_LAB_CAP`` if set."""
    raw = os.environ.get(CAP_ENV)
    if raw is None:
        return DEFAULT_CAP
    try:
        cap = int(raw)
    except ValueError:
        raise ValueError(f"{CAP_ENV} must be an integer, got {raw!r}") from None
    if cap < 0:
        raise ValueError(f"{CAP_ENV} must be nonnegative")
    return cap


class ConstructionError(ValueError):
    pass


class PolicyError(ConstructionError):
    pass


class NoCertificate(ConstructionError):
    """A perforation certificate could not be produced.

    ``reason`` is a short machine-friendly tag; ``details`` carries the
    numbers behind it.
    """

    def __init__(self, reason: str, message: str, details: dict | None = None):
        super().__init__(message)
        self.reason = reason
        self.details = details or {}


class ExpansionTooLarge(NoCertificate):
    def __init__(self, summands: int, cap: int, entries: int | None = None, entry_cap: int | None = None):
        if entries is not None and entry_cap is not None and entries > entry_cap:
            msg = f"expansion has ~{entries} index entries, guard is {entry_cap}"
        else:
            msg = f"expansion has {summands} summands, cap is {cap}"
        super().__init__(
            "expansion too large",
            msg,
            {"summands": summands, "cap": cap, "entries": entries, "entry_cap": entry_cap},
        )


# -- m-policies ---------------------------------------------------------------


class MPolicy(Protocol):
    name: str

    def choose_m(self, stage: StageState) -> int: ...

    def to_json(self) -> dict[str, Any]: ...


@dataclass(frozen=True)
class GeometricPolicy:
    """Least ``m >= 1`` with ``(d_i (1 + m))^(n+1) >= base^(i+1) * 2 N_i``.

    Makes ``2 N_i / d_{i+1}^(n+1)`` at most ``base^-(i+1)``, a summable tail.
    """

    base: int = 2
    name: str = field(default="geometric", init=False)

    def choose_m(self, stage: StageState) -> int:
        k = stage.target_n + 1
        bound = self.base ** (stage.i + 1) * 2 * stage.N
        m = 1
        while (stage.d * (1 + m)) ** k < bound:
            m += 1
        return m

    def to_json(self) -> dict[str, Any]:
        return {"name": self.name, "base": self.base}


@dataclass(frozen=True)
class FixedPolicy:
    """The same ``m`` at every stage."""

    m: int = 1
    name: str = field(default="fixed", init=False)

    def choose_m(self, stage: StageState) -> int:
        return self.m

    def to_json(self) -> dict[str, Any]:
        return {"name": self.name, "m": self.m}


def policy_from_json(data: dict[str, Any] | None) -> MPolicy:
    if not data:
        return GeometricPolicy()
    data = dict(data)
    name = data.pop("name", "geometric")
    try:
        if name == "geometric":
            return GeometricPolicy(**data)
        if name == "fixed":
            return FixedPolicy(**data)
    except TypeError as exc:
        raise PolicyError(f"bad policy parameters for {name!r}: {exc}") from None
    raise PolicyError(f"unknown policy {name!r}")


# -- stage state ----------------------------------------------------------------


@dataclass(frozen=True)
class StageState:
    """Parameters of one stage; bundles are built lazily from ``history``.

    ``history[j-1] = (n_j, m_j)`` for ``j = 1..i`` with ``m_1 = 0``.
    ``exponent`` is the number of tensor factors the perforation targets:
    ``target_n`` in the finite construction, ``i * target_n`` in the
    infinite-growth-rank variant.
    """

    target_n: int
    history: tuple[tuple[int, int], ...]
    infinite: bool = False
    discs: bool = False
    canonical: bool = True
    policy: dict[str, Any] = field(default_factory=dict, compare=False)

    # -- parameters -----------------------------------------------------

    @property
    def i(self) -> int:
        return len(self.history)

    @property
    def n_i(self) -> int:
        return self.history[-1][0]

    @property
    def m_i(self) -> int:
        return self.history[-1][1]

    @cached_property
    def Ns(self) -> tuple[int, ...]:
        """``(N_0, N_1, ..., N_i)`` with ``N_0 = 1``."""
        out = [1]
        for n, _ in self.history:
            out.append(out[-1] * n)
        return tuple(out)

    @property
    def N(self) -> int:
        return self.Ns[-1]

    @property
    def N_prev(self) -> int:
        return self.Ns[-2]

    @cached_property
    def ds(self) -> tuple[int, ...]:
        """``(d_1, ..., d_i)``."""
        out = [3]
        for _, m in self.history[1:]:
            out.append(out[-1] * (1 + m))
        return tuple(out)

    @property
    def d(self) -> int:
        return self.ds[-1]

    @property
    def exponent(self) -> int:
        return self.i * self.target_n if self.infinite else self.target_n

    def atom_offset(self, j: int) -> int:
        """Local offset of the stage-``j`` block inside ``X_i``; zero for ``j = 1``."""
        return 0 if j == 1 else self.Ns[j - 1]

    def atom_size(self, j: int) -> int:
        return self.Ns[j] - self.atom_offset(j)

    @property
    def block_size(self) -> int:
        """``|I_l^i|``."""
        return self.atom_size(self.i)

    def atom_range(self, l: int, j: int) -> range:
        """Global coordinates of atom ``(l, j)`` inside ``X_i^k``."""
        start = (l - 1) * self.N + self.atom_offset(j)
        return range(start + 1, start + self.atom_size(j) + 1)

    def blocks(self, exponent: int | None = None) -> list[range]:
        """``I_l^i`` for ``l = 1..exponent``."""
        k = self.exponent if exponent is None else exponent
        return [self.atom_range(l, self.i) for l in range(1, k + 1)]

    @property
    def disc_factors(self) -> int:
        """Number of closed-disc factors, ``i * d_i^2``; zero without discs."""
        return self.i * self.d**2 if self.discs else 0

    @property
    def real_dim(self) -> int:
        return 2 * self.N + 2 * self.disc_factors

    @property
    def complex_dim(self) -> int:
        return self.N + self.disc_factors

    def previous(self) -> StageState:
        if self.i == 1:
            raise ConstructionError("stage 1 has no predecessor")
        return replace(self, history=self.history[:-1])

    # -- line-count bookkeeping ---------------------------------------------

    @cached_property
    def phi_counts(self) -> dict[int, int]:
        """Copies of ``xi_{I_1^j}`` in ``phi_{1i}(xi_{I_1^1})``, by stage ``j``."""
        counts = {1: 1}
        rank = 1
        for j, (_, m) in enumerate(self.history[1:], start=2):
            counts[j] = m * rank
            rank += counts[j]
        return counts

    @cached_property
    def p_counts(self) -> dict[int, int]:
        """Copies of ``xi_{I_1^j}`` in ``p_i``, by stage ``j``; ``0`` keys the trivial line."""
        counts = {0: 1, 1: 2}
        for j, (_, m) in enumerate(self.history[1:], start=2):
            counts[j] = m * self.ds[j - 2]
        return counts

    # -- bundles ------------------------------------------------------------

    def _line(self, j: int) -> LineBundle:
        off = self.atom_offset(j)
        return LineBundle.xi(self.N, range(off + 1, off + self.atom_size(j) + 1))

    def _from_counts(self, counts: dict[int, int], trivial: int) -> VectorBundle:
        lines: list[LineBundle] = []
        for j, c in sorted(counts.items()):
            if j:
                lines.extend([self._line(j)] * c)
        return VectorBundle(self.N, trivial, tuple(lines))

    @cached_property
    def projection(self) -> VectorBundle:
        """``p_i`` as a bundle over ``X_i``, built by the stage recursion."""
        bundle = VectorBundle.xi_sum(self.Ns[1], [range(1, self.Ns[1] + 1)] * 2, trivial=1)
        for j, (_, m) in enumerate(self.history[1:], start=2):
            N_j = self.Ns[j]
            grown = bundle.pullback(0, N_j)  # omega^*: projection onto the first factor
            new = LineBundle.xi(N_j, range(self.Ns[j - 1] + 1, N_j + 1))
            bundle = grown + VectorBundle(N_j, 0, (new,) * (m * bundle.rank))
        return bundle

    def phi_image(self, trivial_start: bool = False) -> VectorBundle:
        """``phi_{1i}`` applied to ``xi_{I_1^1}`` (or to ``theta_1``)."""
        N1 = self.Ns[1]
        if trivial_start:
            bundle = VectorBundle(N1, 1)
        else:
            bundle = VectorBundle.xi_sum(N1, [range(1, N1 + 1)])
        for j, (_, m) in enumerate(self.history[1:], start=2):
            N_j = self.Ns[j]
            new = LineBundle.xi(N_j, range(self.Ns[j - 1] + 1, N_j + 1))
            bundle = bundle.pullback(0, N_j) + VectorBundle(N_j, 0, (new,) * (m * bundle.rank))
        return bundle

    # -- invariants ---------------------------------------------------------

    def check_invariants(self) -> list[str]:
        """Return the list of violated invariants (empty when all hold)."""
        bad = []
        Ns = self.Ns
        for j in range(1, self.i + 1):
            if Ns[j] != Ns[j - 1] * self.history[j - 1][0]:
                bad.append(f"N_{j} != N_{j-1} * n_{j}")
        for j in range(2, self.i + 1):
            if self.history[j - 1][1] < 1:
                bad.append(f"m_{j} < 1")
            if self.ds[j - 1] != self.ds[j - 2] * (1 + self.history[j - 1][1]):
                bad.append(f"d_{j} != d_{j-1} (1 + m_{j})")
        blocks = self.blocks()
        k = len(blocks)
        seen: set[int] = set()
        for l, block in enumerate(blocks, start=1):
            if len(block) != self.block_size:
                bad.append(f"|I_{l}^{self.i}| != N_i - N_(i-1)")
            if block.start < 1 or block.stop - 1 > k * self.N:
                bad.append(f"I_{l}^{self.i} not inside 1..{k * self.N}")
            if block.start <= (l - 1) * self.N or block.stop - 1 > l * self.N:
                bad.append(f"I_{l}^{self.i} leaves block {l}")
            if seen.intersection(block):
                bad.append("blocks overlap")
            seen.update(block)
        if self.i <= 6 and self.d <= 10_000:
            p = self.projection
            if p.rank != self.d:
                bad.append("rank(p_i) != d_i")
            if p.trivial_rank != 1:
                bad.append("p_i does not carry exactly one trivial line")
        if self.i >= 2:
            need = self.d**self.exponent
            if self.block_size < need:
                bad.append("N_i - N_(i-1) < d_i^k")
            if self.history[-1][0] > 1 and (self.history[-1][0] - 2) * self.N_prev >= need:
                bad.append("n_i is not minimal")
        return bad

    def minimality(self) -> dict[str, Any]:
        """Evidence that ``n_i`` is the least admissible choice."""
        if self.i == 1:
            return {"applies": False}
        need = self.d**self.exponent
        n = self.n_i
        return {
            "applies": True,
            "required_block": need,
            "block": (n - 1) * self.N_prev,
            "block_with_n_minus_1": (n - 2) * self.N_prev,
            "holds": (n - 1) * self.N_prev >= need,
            "fails_with_n_minus_1": (n - 2) * self.N_prev < need,
            "upper_bound_holds": self.N <= need + 2 * self.N_prev,
        }

    def to_json(self) -> dict[str, Any]:
        out: dict[str, Any] = {
            "i": self.i,
            "n_i": self.n_i,
            "m_i": self.m_i if self.i > 1 else None,
            "N_i": self.N,
            "d_i": self.d,
            "exponent": self.exponent,
            "block_size": self.block_size,
            "blocks": [[b.start, b.stop - 1] for b in self.blocks()],
        }
        if self.discs:
            out["disc_factors"] = self.disc_factors
        out["real_dim"] = self.real_dim
        return out


def init_stage(
    target_n: int,
    n1: int | None = None,
    *,
    discs: bool = False,
    infinite: bool = False,
    policy: MPolicy | None = None,
) -> StageState:
    """Stage 1 with ``n_1 = 3^target_n`` unless overridden."""
    if target_n < 1:
        raise ConstructionError("target_n must be at least 1")
    canonical_n1 = 3**target_n
    if n1 is None:
        n1 = canonical_n1
    if n1 < 1:
        raise ConstructionError("n_1 must be at least 1")
    policy = policy or GeometricPolicy()
    return StageState(
        target_n,
        ((n1, 0),),
        infinite=infinite,
        discs=discs,
        canonical=n1 == canonical_n1,
        policy=policy.to_json(),
    )


def minimal_n(N_prev: int, d: int, exponent: int) -> int:
    """Least ``n`` with ``(n - 1) * N_prev >= d^exponent``."""
    need = d**exponent
    return 1 + -(-need // N_prev)


def advance_stage(s: StageState, policy: MPolicy | None = None) -> StageState:
    policy = policy or policy_from_json(s.policy)
    m = policy.choose_m(s)
    if not isinstance(m, int) or m < 1:
        raise PolicyError(f"policy {policy.name!r} chose m_{s.i + 1} = {m!r}; need m >= 1")
    d_next = s.d * (1 + m)
    i_next = s.i + 1
    exponent = i_next * s.target_n if s.infinite else s.target_n
    n_next = minimal_n(s.N, d_next, exponent)
    return replace(s, history=s.history + ((n_next, m),), policy=policy.to_json())


def infinite_variant_blocks(s: StageState) -> dict[str, Any]:
    """Parameters the infinite-growth-rank variant demands at stage ``s.i``."""
    k = s.i * s.target_n
    need = s.d**k
    out = {
        "i": s.i,
        "exponent": k,
        "required_block": need,
        "blocks": [[b.start, b.stop - 1] for b in s.blocks(k)],
    }
    if s.i > 1:
        out["n_i"] = minimal_n(s.N_prev, s.d, k)
        out["enforced"] = s.block_size >= need
    return out


def run_stages(
    target_n: int,
    stages: int,
    *,
    n1: int | None = None,
    policy: MPolicy | None = None,
    discs: bool = False,
    infinite: bool = False,
) -> list[StageState]:
    if stages < 1:
        raise ConstructionError("need at least one stage")
    policy = policy or GeometricPolicy()
    s = init_stage(target_n, n1, discs=discs, infinite=infinite, policy=policy)
    out = [s]
    for _ in range(stages - 1):
        s = advance_stage(s, policy)
        out.append(s)
    return out


# -- the perforation target -----------------------------------------------------


def expansion_rank(s: StageState, exponent: int | None = None) -> int:
    """``2 (d_i / 3) d_i^(k-1)``, the rank of the expanded target."""
    k = s.exponent if exponent is None else exponent
    return 2 * (s.d // 3) * s.d ** (k - 1)


def atomic_expansion(s: StageState, exponent: int | None = None) -> dict[tuple[int, ...], int]:
    """The expanded target as ``{type: copies}``.

    A type ``t`` has ``t[0]`` the stage of the atom used in block 1 and
    ``t[l-1]`` the stage of the atom used in block ``l`` (``0`` where the
    trivial line of ``p_i^l`` was taken).
    """
    k = s.exponent if exponent is None else exponent
    phi, p = s.phi_counts, s.p_counts
    out: dict[tuple[int, ...], int] = {}
    for head in sorted(phi):
        for rest in itertools.product(sorted(p), repeat=k - 1):
            count = 2 * phi[head]
            for j in rest:
                count *= p[j]
            if count:
                out[(head, *rest)] = count
    return out


def type_atoms(t: tuple[int, ...]) -> tuple[tuple[int, int], ...]:
    return tuple((l, j) for l, j in enumerate(t, start=1) if j)


def atom_capacities(s: StageState, exponent: int | None = None) -> dict[tuple[int, int], int]:
    k = s.exponent if exponent is None else exponent
    return {(l, j): s.atom_size(j) for l in range(1, k + 1) for j in range(1, s.i + 1)}


def perforation_expand(
    s: StageState,
    exponent: int | None = None,
    cap: int | None = None,
    entry_cap: int = DEFAULT_ENTRY_CAP,
) -> VectorBundle:
    """``2 phi_{1i}(xi_{I_1^1}) (x) p_i^2 (x) ... (x) p_i^k`` as explicit line bundles.

    Built from the bundles themselves: block pullbacks of ``p_i`` and tensor
    distribution.  Raises :class:`ExpansionTooLarge` past ``cap`` summands
    or ``entry_cap`` total support entries.
    """
    k = s.exponent if exponent is None else exponent
    cap = expansion_cap() if cap is None else cap
    summands = expansion_rank(s, k)
    entries = sum(
        c * sum(s.atom_size(j) for j in t if j) for t, c in atomic_expansion(s, k).items()
    )
    if summands > cap or entries > entry_cap:
        raise ExpansionTooLarge(summands, cap, entries, entry_cap)
    ambient = k * s.N
    head = s.phi_image().copies(2).pullback(0, ambient)
    for l in range(2, k + 1):
        head = head.tensor(s.projection.pullback((l - 1) * s.N, ambient))
    return head


def theta_summand_rank(s: StageState, exponent: int | None = None) -> int:
    """Trivial rank of ``phi_{1i}(theta_1) (x) p_i^2 (x) ... (x) p_i^k``.

    The reduction from the K_0 statement to the sufficient one needs this to
    be at least one.
    """
    k = s.exponent if exponent is None else exponent
    return s.phi_image(trivial_start=True).trivial_rank * s.projection.trivial_rank ** (k - 1)


def stepone_family(n1: int, exponent: int) -> list[tuple[frozenset[int], int]]:
    """Stage-1 target written by subsets ``J`` of ``{2..k}``.

    ``2 xi_{I_1} + sum_{J nonempty} 2^(|J|+1) xi_{I_1 u I_J}`` with
    ``I_l = {(l-1) n1 + 1 .. l n1}``; returned as ``(support, copies)``.
    """
    block = lambda l: frozenset(range((l - 1) * n1 + 1, l * n1 + 1))  # noqa: E731
    family = [(block(1), 2)]
    others = range(2, exponent + 1)
    for size in range(1, exponent):
        for J in itertools.combinations(others, size):
            support = block(1).union(*(block(l) for l in J))
            family.append((support, 2 ** (len(J) + 1)))
    return family


# -- certificates -------------------------------------------------------------


@dataclass(frozen=True)
class PerforationCertificate:
    """Non-positivity of ``2[phi (x) p^2 (x) ... (x) p^k] - [theta_1]`` at one stage.

    ``witness`` is JSON-ready: an explicit matching for ``"direct"``, an atom
    allocation for ``"atomic"`` and ``"recursive"``.
    """

    stage: int
    exponent: int
    method: str
    rank: int
    witness: dict[str, Any]
    details: dict[str, Any] = field(default_factory=dict)

    @property
    def claim(self) -> str:
        k = self.exponent
        tail = " (x) ".join(f"p_{self.stage}^{l}" for l in range(2, k + 1))
        lhs = f"phi_1{self.stage}(xi_I11)" + (f" (x) {tail}" if tail else "")
        return f"2[{lhs}] - [theta_1] not in K^0(X_{self.stage}^{k})^+"

    def to_json(self) -> dict[str, Any]:
        return {
            "stage": self.stage,
            "exponent": self.exponent,
            "method": self.method,
            "rank": self.rank,
            "claim": self.claim,
            "witness": self.witness,
            "details": self.details,
        }


def _alloc_json(allocation: dict) -> list[dict[str, Any]]:
    out = []
    for t in sorted(allocation):
        for (l, j), c in sorted(allocation[t].items()):
            out.append({"type": list(t), "atom": [l, j], "count": c})
    return out


def _types_for_check(s: StageState, k: int) -> dict:
    return {t: (c, type_atoms(t)) for t, c in atomic_expansion(s, k).items()}


def certify_direct(s: StageState, exponent: int | None = None, cap: int | None = None) -> PerforationCertificate:
    """Hopcroft-Karp on the explicit expansion, then the line-bundle obstruction with ``l = 1``."""
    k = s.exponent if exponent is None else exponent
    bundle = perforation_expand(s, k, cap)
    if bundle.trivial_rank:
        raise NoCertificate("trivial summand", "expansion has a trivial summand; Euler class vanishes")
    cert = vil_obstruction(bundle.lines, 1)
    if cert is None:
        if len(bundle.lines) <= 1:
            raise NoCertificate("rank too small", "need rank > 1 for the obstruction", {"rank": len(bundle.lines)})
        hall = bundle.hall()
        raise NoCertificate(
            "Hall violated",
            f"stage {s.i}: {len(hall.violator)} summands see only {len(hall.union)} coordinates",
            {"family_size": len(hall.violator), "union_size": len(hall.union)},
        )
    return PerforationCertificate(
        s.i,
        k,
        "direct",
        bundle.rank,
        {"matching": {str(j): c for j, c in sorted(cert.matching.items())}},
        {"theta_summand_rank": theta_summand_rank(s, k)},
    )


def certify_atomic(s: StageState, exponent: int | None = None) -> PerforationCertificate:
    """Hall condition on the expansion in atom form, decided by max flow."""
    k = s.exponent if exponent is None else exponent
    types = _types_for_check(s, k)
    caps = atom_capacities(s, k)
    result = grouped_hall_check(types, caps)
    rank = expansion_rank(s, k)
    if not result.ok:
        raise NoCertificate(
            "Hall violated",
            f"stage {s.i}: {result.family_size} summands see only {result.union_size} coordinates",
            {"family_size": result.family_size, "union_size": result.union_size,
             "violator_types": [list(t) for t in result.violator]},
        )
    if rank <= 1:
        raise NoCertificate("rank too small", "need rank > 1 for the obstruction", {"rank": rank})
    return PerforationCertificate(
        s.i, k, "atomic", rank, {"allocation": _alloc_json(result.allocation)},
        {"theta_summand_rank": 1},
    )


def _stage_one_allocation(s: StageState, k: int) -> GroupedHallResult:
    n1 = s.Ns[1]
    types: dict = {}
    for support, copies in stepone_family(n1, k):
        blocks = sorted({(c - 1) // n1 + 1 for c in support})
        key = (1,) + tuple(1 if l in blocks else 0 for l in range(2, k + 1))
        types[key] = (copies, tuple((l, 1) for l in blocks))
    caps = {(l, 1): n1 for l in range(1, k + 1)}
    return grouped_hall_check(types, caps)


def recursive_allocation(s: StageState, exponent: int | None = None) -> tuple[dict, list[dict[str, Any]]]:
    """Assemble a grouped SDR stage by stage, following the induction.

    Stage 1 is settled by a Hall check on the family written through subsets
    ``J``.  At stage ``j > 1`` the summands avoiding every new block ``I_l^j``
    are the pullback of the stage ``j - 1`` target and keep their allocation;
    the rest (``B``) each contain some ``I_l^j`` and are placed there, which
    needs only ``|I_l^j| >= dim(B)``; the stage parameters guarantee
    ``|I_l^j| >= d_j^k > dim(B)``.

    Returns ``(allocation, trail)``; raises :class:`NoCertificate`.
    """
    k = s.exponent if exponent is None else exponent
    chain = [s]
    while chain[-1].i > 1:
        chain.append(chain[-1].previous())
    chain.reverse()
    base = _stage_one_allocation(chain[0], k)
    trail: list[dict[str, Any]] = []
    if not base.ok:
        raise NoCertificate(
            "Hall violated",
            f"stage 1: {base.family_size} summands see only {base.union_size} coordinates",
            {"stage": 1, "family_size": base.family_size, "union_size": base.union_size},
        )
    allocation = {t: dict(a) for t, a in base.allocation.items()}
    trail.append({"stage": 1, "base": "Hall on stage-1 family", "summands": expansion_rank(chain[0], k)})
    for st in chain[1:]:
        j = st.i
        need = st.d**k
        dim_total = expansion_rank(st, k)
        dim_old = expansion_rank(st.previous(), k)
        dim_B = dim_total - dim_old
        step = {
            "stage": j,
            "block_size": st.block_size,
            "required_block": need,
            "dim_B": dim_B,
            "dim_total": dim_total,
            "holds": st.block_size >= need,
        }
        trail.append(step)
        if st.block_size < need:
            raise NoCertificate(
                "block size inequality",
                f"stage {j}: |I_l^{j}| = {st.block_size} < d_{j}^{k} = {need}",
                step,
            )
        used = {l: 0 for l in range(1, k + 1)}
        for t, c in sorted(atomic_expansion(st, k).items()):
            if j not in t:
                if t not in allocation:
                    raise ConstructionError(f"pulled-back type {t} missing from stage {j - 1}")
                continue
            l = t.index(j) + 1
            used[l] += c
            allocation[t] = {(l, j): c}
        if max(used.values()) > st.block_size:
            raise ConstructionError("B placement overflowed a block despite the size inequality")
    return allocation, trail


def certify_recursive(s: StageState, exponent: int | None = None) -> PerforationCertificate:
    k = s.exponent if exponent is None else exponent
    allocation, trail = recursive_allocation(s, k)
    types = _types_for_check(s, k)
    if not verify_allocation(types, atom_capacities(s, k), allocation):
        raise ConstructionError(f"stage {s.i}: assembled allocation does not verify")
    rank = expansion_rank(s, k)
    if rank <= 1:
        raise NoCertificate("rank too small", "need rank > 1 for the obstruction", {"rank": rank})
    return PerforationCertificate(
        s.i, k, "recursive", rank, {"allocation": _alloc_json(allocation)}, {"trail": trail}
    )


METHODS = {"direct": certify_direct, "recursive": certify_recursive, "atomic": certify_atomic}


def certify_perforation(s: StageState, method: str = "recursive", exponent: int | None = None, **kw) -> PerforationCertificate:
    try:
        fn = METHODS[method]
    except KeyError:
        raise ValueError(f"unknown method {method!r}; expected one of {sorted(METHODS)}") from None
    return fn(s, exponent, **kw)


def allocation_to_matching(s: StageState, allocation: dict, exponent: int | None = None) -> dict[tuple[int, ...], list[int]]:
    """Expand an atom allocation into explicit coordinates per type."""
    k = s.exponent if exponent is None else exponent
    nxt = {a: s.atom_range(*a).start for a in atom_capacities(s, k)}
    out: dict[tuple[int, ...], list[int]] = {}
    for t in sorted(allocation):
        coords: list[int] = []
        for a, c in sorted(allocation[t].items()):
            coords.extend(range(nxt[a], nxt[a] + c))
            nxt[a] += c
        out[t] = coords
    return out


# -- dimension-growth ratios -----------------------------------------------------


def ratio_trace(stages: list[StageState], k: int, convention: str = "real") -> list[Fraction]:
    """``k * dim(X_i) / d_i^k`` per stage, exactly.

    ``convention="real"`` uses the real dimension ``2 N_i`` (plus
    ``2 i d_i^2`` with discs); ``"complex"`` halves it.
    """
    if k < 1:
        raise ValueError("k must be at least 1")
    if convention not in ("real", "complex"):
        raise ValueError(f"unknown convention {convention!r}")
    out = []
    for s in stages:
        dim = s.real_dim if convention == "real" else s.complex_dim
        out.append(Fraction(k * dim, s.d**k))
    return out


def ratio_bound(s: StageState) -> Fraction | None:
    """Upper bound on ``(n+1) N_i / d_i^(n+1)`` from the minimality of ``n_i``.

    ``(n+1)(d_i^n + 2 N_{i-1}) / d_i^(n+1)``; ``None`` at stage 1.
    """
    if s.i == 1:
        return None
    n = s.target_n
    return Fraction((n + 1) * (s.d**n + 2 * s.N_prev), s.d ** (n + 1))


def strictly_decreasing(values: list[Fraction]) -> bool:
    return all(b < a for a, b in zip(values, values[1:]))


def growth_entries(stages: list[StageState]) -> list[tuple[int, int]]:
    """``(real dim of X_i, d_i)`` per stage, for the tdg calculus."""
    return [(s.real_dim, s.d) for s in stages]


# -- campaigns ---------------------------------------------------------------------


@dataclass
class StageReport:
    state: StageState
    certificates: dict[str, PerforationCertificate] = field(default_factory=dict)
    failures: dict[str, dict[str, Any]] = field(default_factory=dict)
    theta_summand: int | None = None
    partition_ok: bool | None = None

    def agree(self) -> bool:
        """All attempted methods reached the same verdict (skips size refusals)."""
        verdicts = {m: True for m in self.certificates}
        for m, f in self.failures.items():
            if f["reason"] != "expansion too large":
                verdicts[m] = False
        return len(set(verdicts.values())) <= 1


def check_partition(s: StageState, exponent: int | None = None, cap: int | None = None) -> bool:
    """Explicit check that the stage-``i`` expansion splits as pulled-back old part plus ``B``.

    Summands avoiding all new blocks must equal the stage ``i - 1`` expansion
    relabelled block by block; every other summand must contain some
    ``I_l^i``.
    """
    k = s.exponent if exponent is None else exponent
    now = perforation_expand(s, k, cap)
    if s.i == 1:
        return all(line.support for line in now.lines)
    prev = perforation_expand(s.previous(), k, cap)
    Np, N = s.N_prev, s.N
    new_blocks = [set(b) for b in s.blocks(k)]
    old: Counter = Counter()
    for line in now.lines:
        sup = set(line.support)
        if any(b <= sup for b in new_blocks):
            continue
        if any(b & sup for b in new_blocks):
            return False
        old[line.support] += 1
    relabel = lambda c: ((c - 1) // Np) * N + (c - 1) % Np + 1  # noqa: E731
    pulled = Counter(tuple(sorted(relabel(c) for c in line.support)) for line in prev.lines)
    return old == pulled


def run_campaign(
    target_n: int,
    stages: int,
    *,
    n1: int | None = None,
    policy: MPolicy | None = None,
    discs: bool = False,
    infinite: bool = False,
    methods: tuple[str, ...] = ("direct", "recursive", "atomic"),
    cap: int | None = None,
) -> list[StageReport]:
    states = run_stages(target_n, stages, n1=n1, policy=policy, discs=discs, infinite=infinite)
    reports = []
    for s in states:
        rep = StageReport(s)
        for method in methods:
            try:
                kw = {"cap": cap} if method == "direct" else {}
                rep.certificates[method] = certify_perforation(s, method, **kw)
            except NoCertificate as exc:
                rep.failures[method] = {"reason": exc.reason, "message": str(exc), "details": exc.details}
        if s.d <= 10_000 and s.i <= 6:
            rep.theta_summand = theta_summand_rank(s)
        reports.append(rep)
    return reports

