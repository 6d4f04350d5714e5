"""Maximum bipartite matching and Hall-condition witnesses.

Left vertices are summand positions ``0..k-1``; right vertices are the
coordinates appearing in their supports.  A perfect matching of the left
side is a system of distinct representatives.  When none exists the
failure witness is the set of left vertices reachable from unmatched ones
by alternating paths; its neighbourhood is strictly smaller than itself.
"""

from __future__ import annotations

from collections import deque
from collections.abc import Hashable, Iterable, Sequence
from dataclasses import dataclass, field

_INF = float("inf")


def hopcroft_karp(adjacency: Sequence[Sequence[Hashable]]) -> dict[int, Hashable]:
    """Maximum matching for left vertices ``0..len(adjacency)-1``.

    Returns ``{left: right}`` for matched left vertices.  Neighbour lists are
    scanned in the given order, so results are deterministic.
    """
    n = len(adjacency)
    pair_left: list[Hashable | None] = [None] * n
    pair_right: dict[Hashable, int] = {}
    dist: list[float] = [0.0] * n

    def bfs() -> bool:
        queue: deque[int] = deque()
        for u in range(n):
            if pair_left[u] is None:
                dist[u] = 0
                queue.append(u)
            else:
                dist[u] = _INF
        found = False
        while queue:
            u = queue.popleft()
            for v in adjacency[u]:
                w = pair_right.get(v)
                if w is None:
                    found = True
                elif dist[w] == _INF:
                    dist[w] = dist[u] + 1
                    queue.append(w)
        return found

    def dfs(root: int) -> bool:
        # iterative layered DFS; stack holds (left vertex, next neighbour index)
        stack = [(root, 0)]
        path: list[tuple[int, Hashable]] = []
        while stack:
            u, idx = stack[-1]
            nbrs = adjacency[u]
            advanced = False
            while idx < len(nbrs):
                v = nbrs[idx]
                idx += 1
                w = pair_right.get(v)
                if w is None:
                    stack[-1] = (u, idx)
                    path.append((u, v))
                    for a, b in path:
                        pair_left[a] = b
                        pair_right[b] = a
                    return True
                if dist[w] == dist[u] + 1:
                    stack[-1] = (u, idx)
                    path.append((u, v))
                    stack.append((w, 0))
                    advanced = True
                    break
            if not advanced:
                dist[u] = _INF
                stack.pop()
                if path:
                    path.pop()
        return False

    while bfs():
        for u in range(n):
            if pair_left[u] is None:
                dfs(u)
    return {u: v for u, v in enumerate(pair_left) if v is not None}


def hall_violator(
    adjacency: Sequence[Sequence[Hashable]], matching: dict[int, Hashable]
) -> tuple[list[int], list[Hashable]]:
    """Left set reachable by alternating paths from unmatched left vertices.

    For a maximum ``matching`` the returned family ``F`` satisfies
    ``|N(F)| = |F| - (number of unmatched vertices in F) < |F|``.
    """
    pair_right = {v: u for u, v in matching.items()}
    seen_left = {u for u in range(len(adjacency)) if u not in matching}
    seen_right: set[Hashable] = set()
    queue = deque(sorted(seen_left))
    while queue:
        u = queue.popleft()
        for v in adjacency[u]:
            if v in seen_right:
                continue
            seen_right.add(v)
            w = pair_right.get(v)
            if w is not None and w not in seen_left:
                seen_left.add(w)
                queue.append(w)
    return sorted(seen_left), sorted(seen_right)


@dataclass(frozen=True)
class HallResult:
    """Outcome of a Hall-condition check.

    ``matching`` maps summand position to its representative coordinate when
    ``ok``; otherwise ``violator`` lists summand positions whose union of
    supports (``union``) is smaller than the family.
    """

    ok: bool
    matching: dict[int, int] = field(default_factory=dict)
    violator: tuple[int, ...] = ()
    union: tuple[int, ...] = ()

    def __bool__(self) -> bool:
        return self.ok

    def to_json(self) -> dict:
        if self.ok:
            return {"hall": True, "matching": {str(k): v for k, v in sorted(self.matching.items())}}
        return {"hall": False, "violator": list(self.violator), "union": list(self.union)}


def hall_check(sets: Iterable[Iterable[int]]) -> HallResult:
    """Decide whether the family ``sets`` has a system of distinct representatives.

    Raises ``ValueError`` on an empty support.
    """
    adjacency = []
    for j, s in enumerate(sets):
        support = sorted(set(s))
        if not support:
            raise ValueError(f"summand {j} has empty support")
        adjacency.append(support)
    matching = hopcroft_karp(adjacency)
    if len(matching) == len(adjacency):
        return HallResult(True, matching=dict(sorted(matching.items())))
    family, union = hall_violator(adjacency, matching)
    return HallResult(False, violator=tuple(family), union=tuple(union))


def is_sdr(sets: Sequence[Iterable[int]], matching: dict[int, int]) -> bool:
    """Check that ``matching`` picks distinct members, one from each set."""
    if set(matching) != set(range(len(sets))):
        return False
    if len(set(matching.values())) != len(matching):
        return False
    return all(matching[j] in set(s) for j, s in enumerate(sets))


def _dinic(n: int, edges: list[tuple[int, int, int]], source: int, sink: int):
    """Max flow on a small graph; returns (value, flow per edge, residual-reachable set)."""
    graph: list[list[int]] = [[] for _ in range(n)]
    to: list[int] = []
    cap: list[int] = []
    for u, v, c in edges:
        graph[u].append(len(to))
        to.append(v)
        cap.append(c)
        graph[v].append(len(to))
        to.append(u)
        cap.append(0)
    original = list(cap)
    value = 0
    while True:
        level = [-1] * n
        level[source] = 0
        queue = deque([source])
        while queue:
            u = queue.popleft()
            for e in graph[u]:
                if cap[e] > 0 and level[to[e]] < 0:
                    level[to[e]] = level[u] + 1
                    queue.append(to[e])
        if level[sink] < 0:
            break
        it = [0] * n

        def push(u: int, limit: int) -> int:
            if u == sink:
                return limit
            while it[u] < len(graph[u]):
                e = graph[u][it[u]]
                v = to[e]
                if cap[e] > 0 and level[v] == level[u] + 1:
                    got = push(v, min(limit, cap[e]))
                    if got:
                        cap[e] -= got
                        cap[e ^ 1] += got
                        return got
                it[u] += 1
            return 0

        while True:
            got = push(source, sum(original))
            if not got:
                break
            value += got
    flows = [original[2 * k] - cap[2 * k] for k in range(len(edges))]
    reach = {source}
    queue = deque([source])
    while queue:
        u = queue.popleft()
        for e in graph[u]:
            if cap[e] > 0 and to[e] not in reach:
                reach.add(to[e])
                queue.append(to[e])
    return value, flows, reach


@dataclass(frozen=True)
class GroupedHallResult:
    """Hall check for a family given as ``count`` copies of each support type.

    Supports are sets of *atoms*, disjoint coordinate blocks of known size.
    ``allocation[type][atom]`` says how many copies of ``type`` take their
    representative inside ``atom``; distinct coordinates can then be handed out
    consecutively within each atom.  On failure ``violator`` lists the types
    whose copies together see too few coordinates.
    """

    ok: bool
    allocation: dict = field(default_factory=dict)
    violator: tuple = ()
    family_size: int = 0
    union_size: int = 0

    def __bool__(self) -> bool:
        return self.ok


def grouped_hall_check(types: dict, capacity: dict) -> GroupedHallResult:
    """``types`` maps a key to ``(count, atoms)``; ``capacity`` maps atom -> size."""
    type_keys = sorted(types)
    atom_keys = sorted(capacity)
    atom_index = {a: 2 + len(type_keys) + k for k, a in enumerate(atom_keys)}
    source, sink = 0, 1
    total = sum(types[t][0] for t in type_keys)
    edges: list[tuple[int, int, int]] = []
    arc_owner: list[tuple] = []
    for k, t in enumerate(type_keys):
        count, atoms = types[t]
        edges.append((source, 2 + k, count))
        arc_owner.append(())
        for a in sorted(set(atoms)):
            if a not in atom_index:
                raise KeyError(f"atom {a!r} has no capacity")
            edges.append((2 + k, atom_index[a], total + 1))
            arc_owner.append((t, a))
    for a in atom_keys:
        edges.append((atom_index[a], sink, capacity[a]))
        arc_owner.append(())
    value, flows, reach = _dinic(2 + len(type_keys) + len(atom_keys), edges, source, sink)
    if value == total:
        allocation: dict = {t: {} for t in type_keys}
        for owner, f in zip(arc_owner, flows):
            if owner and f:
                allocation[owner[0]][owner[1]] = f
        return GroupedHallResult(True, allocation=allocation, family_size=total)
    bad = tuple(t for k, t in enumerate(type_keys) if 2 + k in reach)
    seen = {a for t in bad for a in types[t][1]}
    return GroupedHallResult(
        False,
        violator=bad,
        family_size=sum(types[t][0] for t in bad),
        union_size=sum(capacity[a] for a in seen),
    )


def verify_allocation(types: dict, capacity: dict, allocation: dict) -> bool:
    """Check that ``allocation`` is a valid grouped SDR for ``types``."""
    used: dict = {}
    if set(allocation) != set(types):
        return False
    for t, (count, atoms) in types.items():
        alloc = allocation[t]
        if sum(alloc.values()) != count:
            return False
        for a, c in alloc.items():
            if a not in atoms or c < 0:
                return False
            used[a] = used.get(a, 0) + c
    return all(used[a] <= capacity.get(a, 0) for a in used)
