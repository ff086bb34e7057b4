"""Coding hypergraph enumeration and exact minimum covers.

Vertices are dense realisation indices and hyperedges are Python ints used
as bitsets over them. Valid fibers form a downward-closed family, so the
maximal ones are listed with a Bron-Kerbosch style recursion that carries
candidate (P) and already-explored (X) vertex lists.
"""

from __future__ import annotations

import logging
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from math import ceil

from .bounds import best_fiber_cap, best_t_lower
from .decodability import FiberState, codebook_from_assignment, forced_masks, geometry
from .model import InputError, ProblemInstance, VPCodebook, check_size, rate_of, realisation

log = logging.getLogger(__name__)

DEFAULT_EDGE_CAP = 2_000_000


class _EdgeCapExceeded(Exception):
    pass


def _bits(mask: int) -> tuple[int, ...]:
    out = []
    while mask:
        low = mask & -mask
        out.append(low.bit_length() - 1)
        mask ^= low
    return tuple(out)


def _maximal_extensions(state: FiberState, P: list[int], X: list[int], emit) -> None:
    if not P:
        if not X:
            emit(sum(1 << v for v in state.members))
        return
    X = list(X)
    for pos, v in enumerate(P):
        state.push(v)
        P2 = [w for w in P[pos + 1:] if state.can_add(w)]
        X2 = [w for w in X if state.can_add(w)]
        _maximal_extensions(state, P2, X2, emit)
        state.pop()
        X.append(v)


@dataclass
class CodingHypergraph:
    """Maximal valid fibers over [0:k-1]^m.

    When ``complete`` is False the edge list was abandoned at the edge cap
    and :meth:`edges_containing` enumerates per vertex on demand.
    """

    instance: ProblemInstance
    k: int
    edges: list[int]
    complete: bool = True
    choice: dict | None = None
    _by_vertex: dict = field(default_factory=dict, repr=False)

    @property
    def vertex_count(self) -> int:
        return self.k ** self.instance.m

    @property
    def maximal_edges(self) -> list[tuple[int, ...]]:
        return [_bits(e) for e in self.edges]

    def members(self, edge: int) -> list[tuple[int, ...]]:
        return [realisation(v, self.k, self.instance.m) for v in _bits(edge)]

    @property
    def max_edge_size(self) -> int:
        if self.complete:
            return max(e.bit_count() for e in self.edges)
        # Relabelling values coordinate-wise preserves validity and maps any
        # vertex to vertex 0, so its edges attain the global maximum size.
        return max(e.bit_count() for e in self.edges_containing(0))

    def edges_containing(self, v: int) -> list[int]:
        cached = self._by_vertex.get(v)
        if cached is not None:
            return cached
        if self.complete:
            if not self._by_vertex:
                index: dict[int, list[int]] = {u: [] for u in range(self.vertex_count)}
                for e in self.edges:
                    for u in _bits(e):
                        index[u].append(e)
                self._by_vertex.update(index)
            return self._by_vertex[v]
        found: list[int] = []
        state = FiberState(geometry(self.instance, self.k), forced_masks(self.instance, self.choice))
        state.push(v)
        P = [w for w in range(self.vertex_count) if w != v and state.can_add(w)]
        _maximal_extensions(state, P, [], found.append)
        found.sort(key=_bits)
        self._by_vertex[v] = found
        return found


def enumerate_maximal_edges(
    inst: ProblemInstance, k: int, choice=None, edge_cap: int | None = DEFAULT_EDGE_CAP
) -> CodingHypergraph:
    """List every maximal valid fiber, sorted by member index tuples.

    With ``choice`` each receiver is restricted to one decoded index, which
    gives the hypergraph of a fixed-choice (pliable) code. If more than
    ``edge_cap`` edges turn up the hypergraph falls back to lazy per-vertex
    enumeration.
    """
    n = check_size(inst.m, k)
    state = FiberState(geometry(inst, k), forced_masks(inst, choice))
    edges: list[int] = []

    def emit(e: int) -> None:
        edges.append(e)
        if edge_cap is not None and len(edges) > edge_cap:
            raise _EdgeCapExceeded

    limit = sys.getrecursionlimit()
    sys.setrecursionlimit(max(limit, 4 * best_fiber_cap(inst, k) + 200))
    try:
        _maximal_extensions(state, list(range(n)), [], emit)
    except _EdgeCapExceeded:
        log.info("edge cap %d exceeded; switching to per-vertex enumeration", edge_cap)
        return CodingHypergraph(inst, k, [], complete=False, choice=choice)
    finally:
        sys.setrecursionlimit(limit)
    edges.sort(key=_bits)
    return CodingHypergraph(inst, k, edges, complete=True, choice=choice)


@dataclass
class CoverSolution:
    edges: list[int]
    optimal: bool
    nodes: int = 0
    lower_bound: int = 1

    @property
    def t(self) -> int:
        return len(self.edges)


class _Budget:
    def __init__(self, time_limit: float | None, node_limit: int | None, deadline: float | None = None):
        self.deadline = deadline if deadline is not None else (
            None if time_limit is None else time.monotonic() + time_limit
        )
        self.node_limit = node_limit
        self.nodes = 0

    def spend(self) -> bool:
        self.nodes += 1
        if self.node_limit is not None and self.nodes > self.node_limit:
            return False
        if self.deadline is not None and self.nodes & 1023 == 0 and time.monotonic() > self.deadline:
            return False
        return True


class _BudgetExhausted(Exception):
    pass


class _CoverSearch:
    """Depth-first search for a cover with at most ``target`` edges.

    Branches on the first uncovered vertex in a fixed order (fewest edges
    first). Pruned by the size bound ``remaining * smax >= uncovered`` and by
    a greedy packing of uncovered vertices no two of which share an edge.
    """

    def __init__(self, hg: CodingHypergraph):
        self.hg = hg
        self.n = hg.vertex_count
        self.full = (1 << self.n) - 1
        self.smax = hg.max_edge_size
        if hg.complete:
            counts = [len(hg.edges_containing(v)) for v in range(self.n)]
            self.order = sorted(range(self.n), key=lambda v: (counts[v], v))
            self.reach = []
            for v in range(self.n):
                acc = 0
                for e in hg.edges_containing(v):
                    acc |= e
                self.reach.append(acc)
        else:
            self.order = list(range(self.n))
            self.reach = None

    def packing_bound(self, unc: int) -> int:
        if self.reach is None:
            return 0
        picks, blocked = 0, 0
        for v in self.order:
            if unc >> v & 1 and not blocked >> v & 1:
                picks += 1
                blocked |= self.reach[v]
        return picks

    def lower_bound(self, unc: int) -> int:
        return max(ceil(unc.bit_count() / self.smax), self.packing_bound(unc))

    def pivot(self, unc: int) -> int:
        for v in self.order:
            if unc >> v & 1:
                return v
        raise AssertionError("no uncovered vertex")

    def candidates(self, unc: int, slack: int) -> list[int]:
        """Distinct restrictions of the pivot's edges, largest first, within the waste slack."""
        v = self.pivot(unc)
        seen = set()
        ranked = []
        for pos, e in enumerate(self.hg.edges_containing(v)):
            r = e & unc
            if r in seen:
                continue
            seen.add(r)
            size = r.bit_count()
            if self.smax - size <= slack:
                ranked.append((-size, pos, e))
        ranked.sort()
        return [e for _, _, e in ranked]

    def greedy(self) -> list[int]:
        unc, chosen = self.full, []
        while unc:
            best = self.candidates(unc, self.smax)[0]
            chosen.append(best)
            unc &= ~best
        return chosen

    def search(self, unc: int, chosen: list[int], target: int, budget: _Budget):
        if not unc:
            return list(chosen)
        if not budget.spend():
            raise _BudgetExhausted
        rem = target - len(chosen)
        if rem <= 0 or len(chosen) + self.lower_bound(unc) > target:
            return None
        slack = rem * self.smax - unc.bit_count()
        for e in self.candidates(unc, slack):
            chosen.append(e)
            found = self.search(unc & ~e, chosen, target, budget)
            chosen.pop()
            if found is not None:
                return found
        return None


def _subtree(search: _CoverSearch, first: int, target: int, deadline, node_limit):
    budget = _Budget(None, node_limit, deadline)
    try:
        return search.search(search.full & ~first, [first], target, budget), budget.nodes, False
    except _BudgetExhausted:
        return None, budget.nodes, True


def min_cover(
    hg: CodingHypergraph,
    time_limit: float | None = None,
    node_limit: int | None = None,
    workers: int = 1,
) -> CoverSolution:
    """Minimum number of hyperedges covering every vertex.

    Targets are tried in increasing order from the root lower bound, so the
    first cover found is certified minimum. If the budget runs out the greedy
    incumbent is returned with ``optimal=False``. With ``workers > 1`` the
    root branches of each target run in separate processes and the first
    successful branch in canonical order is kept, so the answer does not
    depend on scheduling.
    """
    if hg.complete and not hg.edges:
        raise InputError("hypergraph has no edges")
    search = _CoverSearch(hg)
    incumbent = search.greedy()
    lb = max(search.lower_bound(search.full), best_t_lower(hg.instance, hg.k))
    deadline = None if time_limit is None else time.monotonic() + time_limit
    nodes = 0
    for target in range(lb, len(incumbent)):
        budget = _Budget(None, node_limit, deadline)
        try:
            if workers > 1:
                found, used, exhausted = _parallel_target(search, target, deadline, node_limit, workers)
                nodes += used
                if exhausted:
                    raise _BudgetExhausted
            else:
                found = search.search(search.full, [], target, budget)
                nodes += budget.nodes
        except _BudgetExhausted:
            nodes += budget.nodes
            log.info("cover budget exhausted at target %d; returning incumbent t=%d", target, len(incumbent))
            return CoverSolution(incumbent, False, nodes, target)
        if found is not None:
            return CoverSolution(found, True, nodes, lb)
        log.debug("no cover with %d edges (%d nodes)", target, nodes)
    return CoverSolution(incumbent, True, nodes, lb)


def _parallel_target(search: _CoverSearch, target: int, deadline, node_limit, workers: int):
    slack = target * search.smax - search.full.bit_count()
    if search.lower_bound(search.full) > target:
        return None, 0, False
    firsts = search.candidates(search.full, slack)
    used = 0
    with ProcessPoolExecutor(max_workers=workers) as pool:
        futures = [pool.submit(_subtree, search, e, target, deadline, node_limit) for e in firsts]
        try:
            for fut in futures:
                found, n, exhausted = fut.result()
                used += n
                if exhausted:
                    return None, used, True
                if found is not None:
                    return found, used, False
        finally:
            for fut in futures:
                fut.cancel()
    return None, used, False


def build_codebook(sol: CoverSolution, inst: ProblemInstance, k: int, choice=None) -> VPCodebook:
    """Assign each realisation to the first cover edge containing it.

    Codeword ids follow the cover order; edges left empty by earlier edges
    are dropped. Decoders come from the smallest-index slice witnesses, or
    from ``choice`` when given.
    """
    n = k ** inst.m
    assignment = [-1] * n
    for c, e in enumerate(sol.edges):
        for v in _bits(e):
            if assignment[v] == -1:
                assignment[v] = c
    if -1 in assignment:
        raise InputError(f"cover misses realisation {realisation(assignment.index(-1), k, inst.m)}")
    return codebook_from_assignment(inst, k, assignment, choice)


@dataclass
class SolveResult:
    codebook: VPCodebook
    rate: float
    certified: bool
    edge_count: int
    max_edge_size: int
    nodes: int

    @property
    def t(self) -> int:
        return self.codebook.t


def solve(
    inst: ProblemInstance,
    k: int,
    edge_cap: int | None = DEFAULT_EDGE_CAP,
    time_limit: float | None = None,
    node_limit: int | None = None,
    workers: int = 1,
    choice=None,
) -> SolveResult:
    """Rate-optimal code: enumerate maximal fibers, cover, assign, derive decoders."""
    hg = enumerate_maximal_edges(inst, k, choice=choice, edge_cap=edge_cap)
    sol = min_cover(hg, time_limit=time_limit, node_limit=node_limit, workers=workers)
    cb = build_codebook(sol, inst, k, choice)
    return SolveResult(cb, rate_of(cb.t, k), sol.optimal, len(hg.edges), hg.max_edge_size, sol.nodes)


__all__ = [
    "CodingHypergraph",
    "CoverSolution",
    "SolveResult",
    "build_codebook",
    "enumerate_maximal_edges",
    "min_cover",
    "solve",
]
