"""Balanced bipartite matching.

Left nodes are codewords and right nodes are channel outputs, both indexed
``0 .. M-1``. A perfect matching is stored as ``sigma`` with ``sigma[i]`` the
right node matched to left node ``i``.
"""

from __future__ import annotations

import heapq
from collections import deque
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Sequence

from .errors import MalformedInput, NotAMatching, PreconditionBreach


@dataclass(frozen=True)
class BipartiteGraph:
    M: int
    adjacency: tuple[tuple[int, ...], ...]
    costs: tuple[tuple[int, ...], ...] | None = None

    def __post_init__(self):
        if len(self.adjacency) != self.M:
            raise MalformedInput("adjacency must have one list per left node")
        for row in self.adjacency:
            if any(not 0 <= j < self.M for j in row):
                raise MalformedInput("right index out of range")
            if any(a >= b for a, b in zip(row, row[1:])):
                raise MalformedInput("adjacency lists must be sorted without duplicates")
        if self.costs is not None:
            if len(self.costs) != self.M or any(
                len(c) != len(a) for c, a in zip(self.costs, self.adjacency)
            ):
                raise MalformedInput("costs must align with adjacency")
            if any(x < 0 for row in self.costs for x in row):
                raise MalformedInput("costs must be non-negative")

    @classmethod
    def from_edges(cls, M: int, edges: Iterable[Sequence[int]]) -> "BipartiteGraph":
        """Build from ``(i, j)`` or ``(i, j, cost)`` tuples."""
        rows: list[dict[int, int | None]] = [{} for _ in range(M)]
        weighted = None
        for e in edges:
            if weighted is None:
                weighted = len(e) == 3
            if (len(e) == 3) != weighted:
                raise MalformedInput("mix of weighted and unweighted edges")
            i, j = e[0], e[1]
            if not (0 <= i < M and 0 <= j < M):
                raise MalformedInput(f"edge ({i}, {j}) out of range")
            if j in rows[i]:
                raise MalformedInput(f"duplicate edge ({i}, {j})")
            rows[i][j] = e[2] if weighted else None
        adjacency = tuple(tuple(sorted(r)) for r in rows)
        costs = None
        if weighted:
            costs = tuple(tuple(int(r[j]) for j in sorted(r)) for r in rows)
        return cls(M, adjacency, costs)

    @classmethod
    def complete(cls, cost_matrix) -> "BipartiteGraph":
        rows = [list(map(int, r)) for r in cost_matrix]
        M = len(rows)
        return cls(M, tuple(tuple(range(M)) for _ in range(M)), tuple(tuple(r) for r in rows))

    @property
    def num_edges(self) -> int:
        return sum(len(a) for a in self.adjacency)

    @cached_property
    def right_adjacency(self) -> tuple[tuple[int, ...], ...]:
        rows: list[list[int]] = [[] for _ in range(self.M)]
        for i, adj in enumerate(self.adjacency):
            for j in adj:
                rows[j].append(i)
        return tuple(tuple(r) for r in rows)

    def has_edge(self, i: int, j: int) -> bool:
        adj = self.adjacency[i]
        lo, hi = 0, len(adj)
        while lo < hi:
            mid = (lo + hi) // 2
            if adj[mid] < j:
                lo = mid + 1
            else:
                hi = mid
        return lo < len(adj) and adj[lo] == j

    def cost(self, i: int, j: int) -> int:
        return self.costs[i][self.adjacency[i].index(j)]

    def edges(self) -> list[tuple[int, int]]:
        return [(i, j) for i, adj in enumerate(self.adjacency) for j in adj]

    def to_json(self) -> dict:
        doc = {"M": self.M, "adjacency": [list(a) for a in self.adjacency]}
        if self.costs is not None:
            doc["costs"] = [list(c) for c in self.costs]
        return doc


@dataclass(frozen=True)
class Assignment:
    sigma: tuple[int, ...]
    total_cost: int | None = None

    def __post_init__(self):
        if sorted(self.sigma) != list(range(len(self.sigma))):
            raise MalformedInput(f"not a permutation: {self.sigma}")

    def __len__(self):
        return len(self.sigma)

    def inverse(self) -> tuple[int, ...]:
        inv = [0] * len(self.sigma)
        for i, j in enumerate(self.sigma):
            inv[j] = i
        return tuple(inv)


@dataclass(frozen=True)
class NoPerfectMatching:
    """A maximum matching that does not cover every node.

    ``matching[i]`` is the right node of left ``i`` or -1.
    """

    size: int
    matching: tuple[int, ...]


Infeasible = NoPerfectMatching


@dataclass(frozen=True)
class PeelResult:
    unique: bool
    assignment: Assignment | None
    order: tuple[tuple[int, int], ...]
    residual: tuple[tuple[int, int], ...]
    edge_visits: int


# ---------------------------------------------------------------------------
# peeling
# ---------------------------------------------------------------------------

def pma(g: BipartiteGraph) -> PeelResult:
    """Peel degree-one nodes until the graph is empty or every node has degree >= 2.

    Schedule: FIFO queue seeded with degree-one left nodes by index, then
    degree-one right nodes by index; a node is appended when its degree drops
    to one; dequeued nodes already removed are skipped.

    Raises PreconditionBreach if peeling strands an unmatched node of degree
    zero, which means ``g`` has no perfect matching.
    """
    M = g.M
    # node u < M is left u, node M + j is right j
    nbrs = [list(a) for a in g.adjacency]
    nbrs += [[i for i in r] for r in g.right_adjacency]
    for u in range(M):
        nbrs[u] = [M + j for j in nbrs[u]]
    deg = [len(a) for a in nbrs]
    if 0 in deg:
        raise PreconditionBreach("isolated node: no perfect matching exists")
    removed = [False] * (2 * M)
    queue = deque(u for u in range(2 * M) if deg[u] == 1)
    order = []
    sigma = [-1] * M
    visits = 0

    while queue:
        u = queue.popleft()
        if removed[u]:
            continue
        v = -1
        for w in nbrs[u]:
            visits += 1
            if not removed[w]:
                v = w
                break
        if v < 0:
            raise PreconditionBreach(f"node {u} stranded with degree zero")
        removed[u] = removed[v] = True
        left, right = (u, v - M) if u < M else (v, u - M)
        sigma[left] = right
        order.append((left, right))
        for w in nbrs[v]:
            visits += 1
            if removed[w]:
                continue
            deg[w] -= 1
            if deg[w] == 1:
                queue.append(w)
            elif deg[w] == 0:
                raise PreconditionBreach(f"node {w} stranded with degree zero")

    if len(order) == M:
        return PeelResult(True, Assignment(tuple(sigma)), tuple(order), (), visits)
    residual = tuple(
        (i, j) for i in range(M) if not removed[i] for j in g.adjacency[i] if not removed[M + j]
    )
    return PeelResult(False, None, tuple(order), residual, visits)


# ---------------------------------------------------------------------------
# Hopcroft-Karp
# ---------------------------------------------------------------------------

def maximum_matching(g: BipartiteGraph) -> tuple[int, list[int]]:
    """Hopcroft-Karp; returns ``(size, match_left)`` with -1 for unmatched."""
    M = g.M
    adj = g.adjacency
    match_l = [-1] * M
    match_r = [-1] * M
    while True:
        dist = [-1] * M
        q = deque(i for i in range(M) if match_l[i] == -1)
        for i in q:
            dist[i] = 0
        found = False
        while q:
            i = q.popleft()
            for j in adj[i]:
                i2 = match_r[j]
                if i2 == -1:
                    found = True
                elif dist[i2] == -1:
                    dist[i2] = dist[i] + 1
                    q.append(i2)
        if not found:
            break
        it = [0] * M
        for s in range(M):
            if match_l[s] != -1:
                continue
            stack = [s]
            path = []
            while stack:
                i = stack[-1]
                if it[i] < len(adj[i]):
                    j = adj[i][it[i]]
                    it[i] += 1
                    i2 = match_r[j]
                    if i2 == -1:
                        path.append(j)
                        for a, b in zip(stack, path):
                            match_l[a] = b
                            match_r[b] = a
                        break
                    if dist[i2] == dist[i] + 1:
                        path.append(j)
                        stack.append(i2)
                else:
                    dist[i] = -1
                    stack.pop()
                    if path:
                        path.pop()
    return sum(1 for j in match_l if j != -1), match_l


def hopcroft_karp(g: BipartiteGraph) -> Assignment | NoPerfectMatching:
    size, match_l = maximum_matching(g)
    if size == g.M:
        return Assignment(tuple(match_l))
    return NoPerfectMatching(size, tuple(match_l))


# ---------------------------------------------------------------------------
# uniqueness
# ---------------------------------------------------------------------------

def _has_directed_cycle(succ: Sequence[Sequence[int]]) -> bool:
    n = len(succ)
    color = [0] * n  # 0 new, 1 on stack, 2 done
    for root in range(n):
        if color[root]:
            continue
        color[root] = 1
        stack = [(root, iter(succ[root]))]
        while stack:
            node, it = stack[-1]
            for w in it:
                if color[w] == 1:
                    return True
                if color[w] == 0:
                    color[w] = 1
                    stack.append((w, iter(succ[w])))
                    break
            else:
                color[node] = 2
                stack.pop()
    return False


def is_unique_matching(g: BipartiteGraph, m: Assignment) -> bool:
    """True iff ``m`` admits no alternating cycle in ``g``.

    Unmatched edges are oriented left -> right and matched edges right -> left;
    an alternating cycle is exactly a directed cycle.
    """
    M = g.M
    if len(m.sigma) != M:
        raise NotAMatching("assignment size differs from graph order")
    for i, j in enumerate(m.sigma):
        if not g.has_edge(i, j):
            raise NotAMatching(f"edge ({i}, {j}) is not in the graph")
    succ: list[list[int]] = [[] for _ in range(2 * M)]
    for i, adj in enumerate(g.adjacency):
        for j in adj:
            if m.sigma[i] == j:
                succ[M + j].append(i)
            else:
                succ[i].append(M + j)
    return not _has_directed_cycle(succ)


# ---------------------------------------------------------------------------
# minimum-cost matching
# ---------------------------------------------------------------------------

def hungarian(costs) -> Assignment:
    """Minimum-cost assignment for a square non-negative integer matrix.

    Row-by-row shortest augmenting paths with dual potentials, O(M^3). Ties
    are broken by the scan order (lowest column index reaching the minimum).
    """
    C = [list(map(int, row)) for row in costs]
    n = len(C)
    if any(len(row) != n for row in C):
        raise MalformedInput("cost matrix must be square")
    if n == 0:
        return Assignment((), 0)
    INF = float("inf")
    u = [0] * (n + 1)
    v = [0] * (n + 1)
    p = [0] * (n + 1)  # p[j]: row matched to column j (1-based, 0 = free)
    way = [0] * (n + 1)
    for i in range(1, n + 1):
        p[0] = i
        j0 = 0
        minv = [INF] * (n + 1)
        used = [False] * (n + 1)
        while True:
            used[j0] = True
            i0 = p[j0]
            row = C[i0 - 1]
            ui0 = u[i0]
            delta = INF
            j1 = 0
            for j in range(1, n + 1):
                if not used[j]:
                    cur = row[j - 1] - ui0 - v[j]
                    if cur < minv[j]:
                        minv[j] = cur
                        way[j] = j0
                    if minv[j] < delta:
                        delta = minv[j]
                        j1 = j
            for j in range(n + 1):
                if used[j]:
                    u[p[j]] += delta
                    v[j] -= delta
                else:
                    minv[j] -= delta
            j0 = j1
            if p[j0] == 0:
                break
        while j0:
            j1 = way[j0]
            p[j0] = p[j1]
            j0 = j1
    sigma = [0] * n
    for j in range(1, n + 1):
        sigma[p[j] - 1] = j - 1
    total = sum(C[i][sigma[i]] for i in range(n))
    return Assignment(tuple(sigma), total)


def sparse_min_cost_matching(g: BipartiteGraph) -> Assignment | NoPerfectMatching:
    """Minimum-cost perfect matching on a sparse weighted graph.

    Successive shortest augmenting paths (Dijkstra) from each left node in
    index order, with node potentials keeping reduced costs non-negative.
    """
    if g.costs is None:
        raise MalformedInput("sparse_min_cost_matching needs edge costs")
    M = g.M
    adj, cst = g.adjacency, g.costs
    pot_l = [0] * M
    pot_r = [0] * M
    match_l = [-1] * M
    match_r = [-1] * M
    for s in range(M):
        dist_l = {s: 0}
        dist_r: dict[int, int] = {}
        prev = {}
        done_l = set()
        done_r = set()
        heap = [(0, 0, s)]  # (dist, side, node); side 0 = left, 1 = right
        target = -1
        while heap:
            d, side, x = heapq.heappop(heap)
            if side == 0:
                if x in done_l:
                    continue
                done_l.add(x)
                base = d + pot_l[x]
                for j, c in zip(adj[x], cst[x]):
                    if j == match_l[x] or j in done_r:
                        continue
                    nd = base + c - pot_r[j]
                    if nd < dist_r.get(j, nd + 1):
                        dist_r[j] = nd
                        prev[j] = x
                        heapq.heappush(heap, (nd, 1, j))
            else:
                if x in done_r:
                    continue
                done_r.add(x)
                i = match_r[x]
                if i == -1:
                    target = x
                    break
                # the matched arc has zero reduced cost
                if i not in done_l and d < dist_l.get(i, d + 1):
                    dist_l[i] = d
                    heapq.heappush(heap, (d, 0, i))
        if target == -1:
            size, partial = maximum_matching(g)
            return NoPerfectMatching(size, tuple(partial))
        D = dist_r[target]
        for i in done_l:
            pot_l[i] += dist_l[i] - D
        for j in done_r:
            pot_r[j] += dist_r[j] - D
        j = target
        while True:
            i = prev[j]
            nxt = match_l[i]
            match_l[i] = j
            match_r[j] = i
            if i == s:
                break
            j = nxt
    total = sum(cst[i][adj[i].index(match_l[i])] for i in range(M))
    return Assignment(tuple(match_l), total)
