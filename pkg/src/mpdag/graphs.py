"""Partially directed graphs and the path machinery built on them.

A single immutable representation covers DAGs, CPDAGs, MPDAGs and general
PDAGs.  Node names are plain strings; the canonical node order (used for every
tie-break in the package) is lexicographic, so results never depend on the
order in which edges were supplied.

Path-based queries (possibly causal paths, definite-status paths, possible
descendants) are implemented by exhaustive depth-first enumeration with
visited-set pruning.  A "possibly causal" verdict requires checking *all*
ordered node pairs of a path for a backward edge, not only consecutive ones,
which rules out the usual transitive-closure shortcuts.  The exhaustive search
is exponential in the worst case and intended for desk-scale graphs (roughly
p <= 15); there is no silent truncation.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from enum import Enum
from functools import cached_property
from typing import Iterable, Optional, Sequence

DIRECTED_MARK = "->"
REVERSED_MARK = "<-"
UNDIRECTED_MARK = "--"


class GraphError(ValueError):
    """Structurally invalid graph input (unknown node, bad edge, ...)."""


class NotAPathError(ValueError):
    """A node sequence that is not a path of the host graph."""


class InternalInconsistencyError(RuntimeError):
    """An invariant the algorithms guarantee by construction was violated."""


@dataclass(frozen=True)
class Validation:
    """Verdict of :func:`validate_pdag`."""

    ok: bool
    violation: Optional[str] = None
    witness: Optional[tuple[str, ...]] = None

    def __bool__(self) -> bool:
        return self.ok


def validate_pdag(
    nodes: Iterable[str],
    directed: Iterable[tuple[str, str]] = (),
    undirected: Iterable[tuple[str, str]] = (),
) -> Validation:
    """Check the PDAG invariants, reporting the first violation with a witness.

    Total function: never raises, always returns a verdict.  Checks, in order:
    unknown endpoints, self loops, duplicate adjacencies (a pair carrying both
    a directed and an undirected edge, or two undirected copies), and a
    directed cycle in the directed part (a two-cycle ``A->B, B->A`` is
    reported as a cycle, not a duplicate).
    """
    node_list = list(nodes)
    node_set = set(node_list)
    if len(node_list) != len(node_set):
        dup = next(n for n in node_list if node_list.count(n) > 1)
        return Validation(False, "duplicate node", (dup,))
    directed = [tuple(e) for e in directed]
    undirected = [tuple(e) for e in undirected]
    for tail, head in itertools.chain(directed, undirected):
        if tail not in node_set or head not in node_set:
            missing = tail if tail not in node_set else head
            return Validation(False, "unknown node", (missing,))
        if tail == head:
            return Validation(False, "self loop", (tail,))
    und_pairs = {frozenset(e) for e in undirected}
    dir_pairs = {frozenset(e) for e in directed}
    clash = und_pairs & dir_pairs
    if clash:
        pair = tuple(sorted(next(iter(clash))))
        return Validation(False, "duplicate adjacency", pair)
    if len(und_pairs) < len(set(undirected)):
        for u, v in undirected:
            if (v, u) in set(undirected):
                return Validation(False, "duplicate adjacency", tuple(sorted((u, v))))
    cycle = _find_directed_cycle(node_list, directed)
    if cycle is not None:
        return Validation(False, "directed cycle", cycle)
    return Validation(True)


def _find_directed_cycle(
    nodes: Sequence[str], directed: Iterable[tuple[str, str]]
) -> Optional[tuple[str, ...]]:
    children: dict[str, list[str]] = {n: [] for n in nodes}
    for tail, head in directed:
        children[tail].append(head)
    state: dict[str, int] = {}  # 0 on stack, 1 done
    stack_path: list[str] = []

    def visit(v: str) -> Optional[tuple[str, ...]]:
        state[v] = 0
        stack_path.append(v)
        for w in sorted(children[v]):
            if w not in state:
                found = visit(w)
                if found is not None:
                    return found
            elif state[w] == 0:
                i = stack_path.index(w)
                return tuple(stack_path[i:]) + (w,)
        stack_path.pop()
        state[v] = 1
        return None

    for n in sorted(nodes):
        if n not in state:
            found = visit(n)
            if found is not None:
                return found
    return None


@dataclass(frozen=True)
class PartiallyDirectedGraph:
    """Immutable partially directed graph without directed cycles.

    ``nodes`` is kept sorted; ``undirected`` pairs are stored with the smaller
    endpoint first.  The constructor normalises its input and raises
    :class:`GraphError` on any invariant violation, so instances are always
    valid PDAGs.  All queries are read-only and safe to share across threads.
    """

    nodes: tuple[str, ...]
    directed: frozenset[tuple[str, str]]
    undirected: frozenset[tuple[str, str]]

    def __init__(
        self,
        nodes: Iterable[str],
        directed: Iterable[tuple[str, str]] = (),
        undirected: Iterable[tuple[str, str]] = (),
    ) -> None:
        node_tuple = tuple(sorted(set(nodes)))
        dir_set = frozenset((str(t), str(h)) for t, h in directed)
        und_set = frozenset(tuple(sorted((str(u), str(v)))) for u, v in undirected)
        verdict = validate_pdag(node_tuple, dir_set, und_set)
        if not verdict.ok:
            raise GraphError(f"{verdict.violation}: {verdict.witness}")
        object.__setattr__(self, "nodes", node_tuple)
        object.__setattr__(self, "directed", dir_set)
        object.__setattr__(self, "undirected", und_set)

    # -- adjacency -----------------------------------------------------------

    @cached_property
    def _parents(self) -> dict[str, frozenset[str]]:
        out: dict[str, set[str]] = {n: set() for n in self.nodes}
        for tail, head in self.directed:
            out[head].add(tail)
        return {n: frozenset(s) for n, s in out.items()}

    @cached_property
    def _children(self) -> dict[str, frozenset[str]]:
        out: dict[str, set[str]] = {n: set() for n in self.nodes}
        for tail, head in self.directed:
            out[tail].add(head)
        return {n: frozenset(s) for n, s in out.items()}

    @cached_property
    def _und_neighbours(self) -> dict[str, frozenset[str]]:
        out: dict[str, set[str]] = {n: set() for n in self.nodes}
        for u, v in self.undirected:
            out[u].add(v)
            out[v].add(u)
        return {n: frozenset(s) for n, s in out.items()}

    def parents(self, v: str) -> frozenset[str]:
        return self._parents[v]

    def children(self, v: str) -> frozenset[str]:
        return self._children[v]

    def undirected_neighbours(self, v: str) -> frozenset[str]:
        return self._und_neighbours[v]

    def neighbours(self, v: str) -> frozenset[str]:
        return self._parents[v] | self._children[v] | self._und_neighbours[v]

    def adjacent(self, u: str, v: str) -> bool:
        return v in self.neighbours(u)

    def mark(self, u: str, v: str) -> Optional[str]:
        """Edge mark between ``u`` and ``v`` seen from ``u`` (or None)."""
        if v in self._children[u]:
            return DIRECTED_MARK
        if v in self._parents[u]:
            return REVERSED_MARK
        if v in self._und_neighbours[u]:
            return UNDIRECTED_MARK
        return None

    @property
    def skeleton(self) -> frozenset[tuple[str, str]]:
        pairs = {tuple(sorted(e)) for e in self.directed}
        return frozenset(pairs | set(self.undirected))

    @property
    def is_directed(self) -> bool:
        """True iff every edge is directed (the graph is then a DAG)."""
        return not self.undirected

    def sorted_directed(self) -> list[tuple[str, str]]:
        return sorted(self.directed)

    def sorted_undirected(self) -> list[tuple[str, str]]:
        return sorted(self.undirected)

    def edge_lines(self) -> tuple[str, ...]:
        """Canonical text lines: directed edges first, then undirected."""
        lines = [f"{t} -> {h}" for t, h in self.sorted_directed()]
        lines += [f"{u} -- {v}" for u, v in self.sorted_undirected()]
        return tuple(lines)

    # -- derived graphs ------------------------------------------------------

    def induced_subgraph(self, keep: Iterable[str]) -> "PartiallyDirectedGraph":
        """Subgraph on ``keep`` with exactly the edges between kept nodes."""
        keep_set = set(keep)
        unknown = keep_set - set(self.nodes)
        if unknown:
            raise GraphError(f"unknown node: {sorted(unknown)}")
        return PartiallyDirectedGraph(
            keep_set,
            (e for e in self.directed if e[0] in keep_set and e[1] in keep_set),
            (e for e in self.undirected if e[0] in keep_set and e[1] in keep_set),
        )

    def orient(self, tail: str, head: str) -> "PartiallyDirectedGraph":
        """Turn the undirected edge ``tail -- head`` into ``tail -> head``."""
        pair = tuple(sorted((tail, head)))
        if pair not in self.undirected:
            raise GraphError(f"no undirected edge {tail} -- {head}")
        return PartiallyDirectedGraph(
            self.nodes,
            set(self.directed) | {(tail, head)},
            set(self.undirected) - {pair},
        )

    # -- orders --------------------------------------------------------------

    def topological_order(self) -> tuple[str, ...]:
        """Topological order of a fully directed graph, ties by node order."""
        if not self.is_directed:
            raise GraphError("topological order requires a fully directed graph")
        indeg = {n: len(self._parents[n]) for n in self.nodes}
        ready = sorted(n for n in self.nodes if indeg[n] == 0)
        order: list[str] = []
        while ready:
            v = ready.pop(0)
            order.append(v)
            changed = False
            for w in sorted(self._children[v]):
                indeg[w] -= 1
                if indeg[w] == 0:
                    ready.append(w)
                    changed = True
            if changed:
                ready.sort()
        if len(order) != len(self.nodes):
            raise InternalInconsistencyError("directed part is cyclic")
        return tuple(order)

    def unshielded_colliders(self) -> frozenset[tuple[str, str, str]]:
        """Triples ``(a, b, c)`` with ``a -> b <- c``, ``a`` and ``c`` nonadjacent.

        Canonicalised so that ``a < c``.
        """
        out: set[tuple[str, str, str]] = set()
        for b in self.nodes:
            pa = sorted(self._parents[b])
            for a, c in itertools.combinations(pa, 2):
                if not self.adjacent(a, c):
                    out.add((a, b, c))
        return frozenset(out)


class PathKind(Enum):
    CAUSAL = "causal"
    POSSIBLY_CAUSAL = "possibly_causal"
    NON_CAUSAL = "non_causal"


@dataclass(frozen=True)
class NodePath:
    """A path of a host graph: distinct nodes plus the realised edge marks.

    ``marks[i]`` is the mark between ``nodes[i]`` and ``nodes[i+1]`` seen from
    ``nodes[i]``, one of ``->``, ``<-`` or ``--``.
    """

    nodes: tuple[str, ...]
    marks: tuple[str, ...]

    def __len__(self) -> int:
        return len(self.nodes)

    def __str__(self) -> str:
        parts = [self.nodes[0]]
        for mark, node in zip(self.marks, self.nodes[1:]):
            parts.append(f" {mark} {node}")
        return "".join(parts)


@dataclass(frozen=True)
class PathClassification:
    kind: PathKind
    definite_status: bool


def path_in(g: PartiallyDirectedGraph, nodes: Sequence[str]) -> NodePath:
    """Build a :class:`NodePath`, verifying it really is a path of ``g``."""
    seq = tuple(nodes)
    if len(seq) < 2:
        raise NotAPathError("a path needs at least two nodes")
    if len(set(seq)) != len(seq):
        raise NotAPathError(f"repeated node in {seq}")
    marks = []
    for u, v in zip(seq, seq[1:]):
        mark = g.mark(u, v) if u in g._parents and v in g._parents else None
        if mark is None:
            raise NotAPathError(f"{u} and {v} are not adjacent")
        marks.append(mark)
    return NodePath(seq, tuple(marks))


def _is_definite_status(g: PartiallyDirectedGraph, path: NodePath) -> bool:
    for i in range(1, len(path.nodes) - 1):
        left, right = path.marks[i - 1], path.marks[i]
        is_collider = left == DIRECTED_MARK and right == REVERSED_MARK
        is_definite_noncollider = (
            left == REVERSED_MARK
            or right == DIRECTED_MARK
            or (
                left == UNDIRECTED_MARK
                and right == UNDIRECTED_MARK
                and not g.adjacent(path.nodes[i - 1], path.nodes[i + 1])
            )
        )
        if not (is_collider or is_definite_noncollider):
            return False
    return True


def classify_path(
    g: PartiallyDirectedGraph, path: NodePath | Sequence[str]
) -> PathClassification:
    """Classify a path as causal / possibly causal / non-causal.

    The possibly-causal check scans *every* ordered pair ``i < j`` on the path
    for a backward edge ``nodes[j] -> nodes[i]``, not just consecutive pairs.
    """
    if not isinstance(path, NodePath):
        path = path_in(g, path)
    else:
        path_in(g, path.nodes)  # re-verify against this host graph
    kind = PathKind.POSSIBLY_CAUSAL
    seq = path.nodes
    for i, j in itertools.combinations(range(len(seq)), 2):
        if (seq[j], seq[i]) in g.directed:
            kind = PathKind.NON_CAUSAL
            break
    if kind is PathKind.POSSIBLY_CAUSAL and all(m == DIRECTED_MARK for m in path.marks):
        kind = PathKind.CAUSAL
    return PathClassification(kind, _is_definite_status(g, path))


def _check_disjoint(name_a: str, a: set[str], name_b: str, b: set[str]) -> None:
    overlap = a & b
    if overlap:
        raise GraphError(f"{name_a} and {name_b} overlap: {sorted(overlap)}")


def proper_possibly_causal_paths(
    g: PartiallyDirectedGraph,
    treatments: Iterable[str],
    outcomes: Iterable[str],
    start_undirected_only: bool = False,
) -> list[NodePath]:
    """All proper possibly causal paths from ``treatments`` to ``outcomes``.

    Proper means only the first node lies in the treatment set; nodes of the
    outcome set may appear in the interior (the path is recorded once per
    outcome node it reaches).  With ``start_undirected_only`` the first edge
    must be undirected.  Output is sorted by length, then by node sequence.
    """
    a_set, y_set = set(treatments), set(outcomes)
    if not a_set or not y_set:
        raise GraphError("treatment and outcome sets must be nonempty")
    _check_disjoint("treatments", a_set, "outcomes", y_set)
    for n in sorted(a_set | y_set):
        if n not in g._parents:
            raise GraphError(f"unknown node: [{n!r}]")

    found: list[tuple[str, ...]] = []

    def extend(seq: list[str], members: set[str]) -> None:
        tip = seq[-1]
        for w in sorted(g.neighbours(tip)):
            if w in members or w in a_set:
                continue
            # a backward edge w -> seq[i] would make the extension non-causal
            if g._children[w] & members:
                continue
            if len(seq) == 1 and start_undirected_only:
                if g.mark(seq[0], w) != UNDIRECTED_MARK:
                    continue
            seq.append(w)
            members.add(w)
            if w in y_set:
                found.append(tuple(seq))
            extend(seq, members)
            members.remove(w)
            seq.pop()

    for a in sorted(a_set):
        extend([a], {a})
    found.sort(key=lambda seq: (len(seq), seq))
    return [path_in(g, seq) for seq in found]


def possible_descendants(g: PartiallyDirectedGraph, start: str) -> frozenset[str]:
    """Nodes reachable from ``start`` by a possibly causal path (reflexive)."""
    if start not in g._parents:
        raise GraphError(f"unknown node: [{start!r}]")
    out: set[str] = {start}

    def extend(seq: list[str], members: set[str]) -> None:
        tip = seq[-1]
        for w in sorted(g.neighbours(tip)):
            if w in members or g._children[w] & members:
                continue
            out.add(w)
            seq.append(w)
            members.add(w)
            extend(seq, members)
            members.remove(w)
            seq.pop()

    extend([start], {start})
    return frozenset(out)


def possible_ancestors(g: PartiallyDirectedGraph, targets: Iterable[str]) -> frozenset[str]:
    """Nodes with a possibly causal path into ``targets`` (reflexive)."""
    t_set = set(targets)
    for n in t_set:
        if n not in g._parents:
            raise GraphError(f"unknown node: [{n!r}]")
    return frozenset(
        w for w in g.nodes if possible_descendants(g, w) & t_set
    )


def _directed_closure(
    step: dict[str, frozenset[str]], seeds: Iterable[str]
) -> frozenset[str]:
    out = set(seeds)
    frontier = list(out)
    while frontier:
        v = frontier.pop()
        for w in step[v]:
            if w not in out:
                out.add(w)
                frontier.append(w)
    return frozenset(out)


def ancestors(g: PartiallyDirectedGraph, targets: Iterable[str]) -> frozenset[str]:
    """Nodes with a causal (all-directed) path into ``targets`` (reflexive)."""
    return _directed_closure(g._parents, targets)


def descendants(g: PartiallyDirectedGraph, sources: Iterable[str]) -> frozenset[str]:
    """Nodes reachable from ``sources`` along directed edges (reflexive)."""
    return _directed_closure(g._children, sources)


def parents_of_set(g: PartiallyDirectedGraph, nodes: Iterable[str]) -> frozenset[str]:
    """Union of parents of the members, minus the set itself."""
    node_set = set(nodes)
    out: set[str] = set()
    for v in node_set:
        out |= g._parents[v]
    return frozenset(out - node_set)


@dataclass(frozen=True)
class AncestralSets:
    parents: frozenset[str]
    ancestors: frozenset[str]
    descendants: frozenset[str]
    possible_descendants: frozenset[str]


def ancestral_sets(g: PartiallyDirectedGraph, nodes: Iterable[str]) -> AncestralSets:
    """Parent/ancestor/descendant/possible-descendant sets of a node set.

    Ancestors, descendants and possible descendants use the reflexive
    convention; parents follow the set convention (union minus the set).
    """
    node_set = set(nodes)
    unknown = node_set - set(g.nodes)
    if unknown:
        raise GraphError(f"unknown node: {sorted(unknown)}")
    poss = set()
    for v in node_set:
        poss |= possible_descendants(g, v)
    return AncestralSets(
        parents=parents_of_set(g, node_set),
        ancestors=ancestors(g, node_set),
        descendants=descendants(g, node_set),
        possible_descendants=frozenset(poss),
    )


def bucket_decomposition(
    g: PartiallyDirectedGraph, nodes: Iterable[str]
) -> tuple[frozenset[str], ...]:
    """Partition ``nodes`` into buckets: maximal undirected-connected subsets.

    Connectivity uses only undirected edges between members of the set.
    Buckets are ordered by their smallest member.
    """
    node_set = set(nodes)
    unknown = node_set - set(g.nodes)
    if unknown:
        raise GraphError(f"unknown node: {sorted(unknown)}")
    remaining = set(node_set)
    buckets: list[frozenset[str]] = []
    for seed in sorted(node_set):
        if seed not in remaining:
            continue
        component = {seed}
        frontier = [seed]
        while frontier:
            v = frontier.pop()
            for w in g._und_neighbours[v]:
                if w in remaining and w not in component:
                    component.add(w)
                    frontier.append(w)
        remaining -= component
        buckets.append(frozenset(component))
    return tuple(buckets)


def d_separated(
    g: PartiallyDirectedGraph,
    first: Iterable[str],
    second: Iterable[str],
    given: Iterable[str] = (),
) -> bool:
    """Whether ``given`` blocks every definite-status path between the sets.

    A definite-status path is d-connecting when none of its definite
    non-colliders is in the conditioning set and every collider has a
    descendant in it.  Collider openness uses directed-path descendants.
    """
    a_set, y_set, z_set = set(first), set(second), set(given)
    _check_disjoint("first", a_set, "second", y_set)
    _check_disjoint("first", a_set, "given", z_set)
    _check_disjoint("second", y_set, "given", z_set)
    for n in sorted(a_set | y_set | z_set):
        if n not in g._parents:
            raise GraphError(f"unknown node: [{n!r}]")

    de_cache: dict[str, frozenset[str]] = {}

    def opens(collider: str) -> bool:
        if collider not in de_cache:
            de_cache[collider] = descendants(g, [collider])
        return bool(de_cache[collider] & z_set)

    # DFS over definite-status paths; prune as soon as a prefix is blocked.
    def connected(seq: list[str], members: set[str]) -> bool:
        tip = seq[-1]
        for w in sorted(g.neighbours(tip)):
            if w in members:
                continue
            if len(seq) >= 2:
                u, v = seq[-2], seq[-1]
                left, right = g.mark(u, v), g.mark(v, w)
                if left == DIRECTED_MARK and right == REVERSED_MARK:
                    if not opens(v):
                        continue
                elif (
                    left == REVERSED_MARK
                    or right == DIRECTED_MARK
                    or (
                        left == UNDIRECTED_MARK
                        and right == UNDIRECTED_MARK
                        and not g.adjacent(u, w)
                    )
                ):
                    if v in z_set:
                        continue
                else:
                    continue  # not of definite status
            if w in y_set:
                return True
            seq.append(w)
            members.add(w)
            if connected(seq, members):
                return True
            members.remove(w)
            seq.pop()
        return False

    for a in sorted(a_set):
        if connected([a], {a}):
            return False
    return True


def unshielded_subsequence(g: PartiallyDirectedGraph, path: NodePath) -> NodePath:
    """Shrink a possibly causal path to an unshielded possibly causal one.

    Repeatedly drops the middle node of the leftmost shielded triple.  The
    result keeps the original endpoints and is again possibly causal, since a
    subsequence of a possibly causal path only removes node pairs.
    """
    verdict = classify_path(g, path)
    if verdict.kind is PathKind.NON_CAUSAL:
        raise GraphError(f"path is not possibly causal: {path}")
    seq = list(path.nodes)
    changed = True
    while changed:
        changed = False
        for i in range(1, len(seq) - 1):
            if g.adjacent(seq[i - 1], seq[i + 1]):
                del seq[i]
                changed = True
                break
    return path_in(g, seq)
