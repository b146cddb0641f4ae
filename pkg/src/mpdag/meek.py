"""Orientation machinery: the four Meek rules, maximal orientation with
background knowledge, CPDAGs of DAGs, and enumeration of represented DAGs.

The rules, phrased as "orient u -- v into u -> v when ...":

* R1: some parent of u is nonadjacent to v.
* R2: there is a two-chain u -> w -> v.
* R3: two nonadjacent undirected neighbours of u are both parents of v.
* R4: u has undirected neighbours a and b with a -> b -> v and a nonadjacent
  to v.

Applying them to a fixpoint turns a valid PDAG into a maximally oriented one;
orienting an undirected edge of an MPDAG and re-closing implements the
background-knowledge construction.  Rule application order is fixed (R1..R4,
edges scanned in node order) so intermediate traces are reproducible; the
fixpoint itself is order-independent.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Sequence

from .graphs import (
    GraphError,
    InternalInconsistencyError,
    PartiallyDirectedGraph,
)


class OrientationConflictError(GraphError):
    """A background-knowledge request contradicts the current graph (FAIL)."""

    def __init__(self, request: tuple[str, str], reason: str) -> None:
        tail, head = request
        super().__init__(f"cannot orient {tail} -> {head}: {reason}")
        self.request = request
        self.reason = reason


@dataclass(frozen=True)
class Mpdag:
    """A partially directed graph certified closed under the Meek rules."""

    graph: PartiallyDirectedGraph
    meek_closed: bool = True

    @property
    def nodes(self) -> tuple[str, ...]:
        return self.graph.nodes

    def key(self) -> tuple:
        """Canonical sort/equality key."""
        return (
            self.graph.nodes,
            tuple(self.graph.sorted_directed()),
            tuple(self.graph.sorted_undirected()),
        )


class _Builder:
    """Mutable adjacency view used while running the rules."""

    def __init__(self, g: PartiallyDirectedGraph) -> None:
        self.nodes = g.nodes
        self.parents: dict[str, set[str]] = {n: set(g.parents(n)) for n in g.nodes}
        self.children: dict[str, set[str]] = {n: set(g.children(n)) for n in g.nodes}
        self.und: dict[str, set[str]] = {
            n: set(g.undirected_neighbours(n)) for n in g.nodes
        }

    def adjacent(self, u: str, v: str) -> bool:
        return v in self.parents[u] or v in self.children[u] or v in self.und[u]

    def orient(self, tail: str, head: str) -> None:
        self.und[tail].discard(head)
        self.und[head].discard(tail)
        self.children[tail].add(head)
        self.parents[head].add(tail)

    def undirected_edges(self) -> list[tuple[str, str]]:
        return sorted(
            (u, v) for u in self.nodes for v in self.und[u] if u < v
        )

    def snapshot(self) -> PartiallyDirectedGraph:
        directed = {(t, h) for t in self.nodes for h in self.children[t]}
        undirected = {(u, v) for u in self.nodes for v in self.und[u] if u < v}
        return PartiallyDirectedGraph(self.nodes, directed, undirected)

    # -- rule predicates: orient u -- v as u -> v? ---------------------------

    def _r1(self, u: str, v: str) -> bool:
        return any(not self.adjacent(w, v) for w in self.parents[u])

    def _r2(self, u: str, v: str) -> bool:
        return bool(self.children[u] & self.parents[v])

    def _r3(self, u: str, v: str) -> bool:
        shared = sorted(self.und[u] & self.parents[v])
        return any(
            not self.adjacent(w1, w2) for w1, w2 in itertools.combinations(shared, 2)
        )

    def _r4(self, u: str, v: str) -> bool:
        for b in sorted(self.und[u] & self.parents[v]):
            for a in sorted(self.und[u] & self.parents[b]):
                if not self.adjacent(a, v):
                    return True
        return False

    def close(self) -> None:
        """Apply R1-R4 until no rule fires anywhere."""
        rules = (self._r1, self._r2, self._r3, self._r4)
        changed = True
        while changed:
            changed = False
            for rule in rules:
                for u, v in self.undirected_edges():
                    for tail, head in ((u, v), (v, u)):
                        if rule(tail, head):
                            self.orient(tail, head)
                            changed = True
                            break
                    if changed:
                        break
                if changed:
                    break


def _snapshot_or_raise(builder: "_Builder", context: str) -> PartiallyDirectedGraph:
    # A class-empty PDAG (one representing no DAG at all) can drive the rules
    # into a directed cycle; surface that as an internal inconsistency rather
    # than a plain invalid-graph error.
    try:
        return builder.snapshot()
    except GraphError as exc:
        raise InternalInconsistencyError(f"{context}: {exc}") from exc


def _closed_graph(g: PartiallyDirectedGraph) -> PartiallyDirectedGraph:
    builder = _Builder(g)
    builder.close()
    return _snapshot_or_raise(builder, "rule closure produced an invalid graph")


def meek_closure(g: PartiallyDirectedGraph) -> Mpdag:
    """Close a valid PDAG under R1-R4.

    Idempotent and monotone: the skeleton is unchanged and the directed edge
    set only grows.  Soundness of the rules means no directed cycle can
    appear; if one does, an internal-inconsistency error is raised.
    """
    return Mpdag(_closed_graph(g))


def construct_mpdag(h: Mpdag, requests: Sequence[tuple[str, str]]) -> Mpdag:
    """Add background-knowledge orientations to an MPDAG, re-closing each time.

    Requests are processed in the given order.  A request whose edge is
    currently undirected is oriented and the rules are iterated to a fixpoint;
    one that already holds is a no-op; one that contradicts the graph (edge
    missing or directed the other way) raises :class:`OrientationConflictError`
    -- the FAIL outcome.

    After the final closure every request is re-verified, so a closure-induced
    contradiction with an earlier request is also reported as a conflict.
    """
    builder = _Builder(h.graph)
    for tail, head in requests:
        if head in builder.und[tail]:
            builder.orient(tail, head)
            builder.close()
        elif head in builder.children[tail]:
            pass
        elif head in builder.parents[tail]:
            raise OrientationConflictError((tail, head), f"graph has {head} -> {tail}")
        else:
            raise OrientationConflictError((tail, head), "no such edge")
    for tail, head in requests:
        if head not in builder.children[tail]:
            raise OrientationConflictError((tail, head), "lost after closure")
    return Mpdag(_snapshot_or_raise(builder, "orientation produced an invalid graph"))


def cpdag_of_dag(d: PartiallyDirectedGraph) -> Mpdag:
    """The CPDAG of a DAG: skeleton plus unshielded colliders, then closure."""
    if not d.is_directed:
        raise GraphError("input must be a DAG (fully directed)")
    d.topological_order()  # raises if cyclic
    directed: set[tuple[str, str]] = set()
    for a, b, c in d.unshielded_colliders():
        directed.add((a, b))
        directed.add((c, b))
    undirected = {
        pair for pair in d.skeleton
        if pair not in {tuple(sorted(e)) for e in directed}
    }
    cpdag = meek_closure(PartiallyDirectedGraph(d.nodes, directed, undirected))
    if not is_represented(d, cpdag):
        raise InternalInconsistencyError("DAG not represented by its own CPDAG")
    return cpdag


def is_represented(d: PartiallyDirectedGraph, h: Mpdag) -> bool:
    """Is DAG ``d`` in the class of ``h``: same skeleton, same unshielded
    colliders, and every directed edge of ``h`` kept with its orientation."""
    if set(d.nodes) != set(h.graph.nodes):
        raise GraphError("node sets differ")
    if not d.is_directed:
        raise GraphError("first argument must be a DAG (fully directed)")
    return (
        d.skeleton == h.graph.skeleton
        and d.unshielded_colliders() == h.graph.unshielded_colliders()
        and h.graph.directed <= d.directed
    )


def enumerate_dags(h: Mpdag) -> list[PartiallyDirectedGraph]:
    """All DAGs represented by an MPDAG.

    Branches on the first undirected edge in node order, orients it both ways
    through the background-knowledge construction, and collects the fully
    directed leaves.  Output is deduplicated and sorted canonically; every
    member passes :func:`is_represented`.
    """
    leaves: dict[tuple, PartiallyDirectedGraph] = {}
    stack = [h]
    while stack:
        current = stack.pop()
        und = current.graph.sorted_undirected()
        if not und:
            leaves[current.key()] = current.graph
            continue
        u, v = und[0]
        for request in ((u, v), (v, u)):
            try:
                stack.append(construct_mpdag(current, [request]))
            except OrientationConflictError:
                continue
    return [leaves[k] for k in sorted(leaves)]


def consistent_extension(h: Mpdag) -> PartiallyDirectedGraph:
    """One DAG represented by the MPDAG: the first leaf of the branch tree,
    orienting each branch edge from its smaller endpoint first."""
    current = h
    while True:
        und = current.graph.sorted_undirected()
        if not und:
            return current.graph
        u, v = und[0]
        try:
            current = construct_mpdag(current, [(u, v)])
            continue
        except OrientationConflictError:
            pass
        try:
            current = construct_mpdag(current, [(v, u)])
        except OrientationConflictError as exc:
            raise InternalInconsistencyError(
                f"MPDAG admits no consistent extension at edge {u} -- {v}"
            ) from exc
