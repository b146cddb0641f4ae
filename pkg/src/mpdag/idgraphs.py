"""Minimal enumeration of sub-MPDAGs with distinct identified effects.

The recursive enumeration branches, while the effect is unidentified, on the
first edge of a *shortest* proper possibly causal path that starts with an
undirected edge; orienting that edge both ways and re-closing splits the class
of represented DAGs into two.  The recursion terminates in a list of MPDAGs in
each of which the effect is identified, and the list is a partition of the
represented DAGs with pairwise distinct identification formulas.  Branching on
a shortest violating path first is what makes the output minimal: the
orientation order matters.

Also provided are the coarser baseline enumerations used for count
comparisons: listing every represented DAG (method 1), orienting every
undirected edge at the treatments (method 2), and orienting only treatment
edges whose far endpoint lies on a proper possibly causal path to the
outcomes (method 3).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable

from .graphs import (
    GraphError,
    InternalInconsistencyError,
    proper_possibly_causal_paths,
)
from .identify import GFormula, g_formula, is_identified, violating_paths
from .meek import Mpdag, OrientationConflictError, construct_mpdag, enumerate_dags


@dataclass(frozen=True)
class BranchRecord:
    """One recursion node: the graph, the edge oriented, and the shortest
    violating path that selected it."""

    graph: tuple[str, ...]  # canonical edge lines of the branching graph
    edge: tuple[str, str]
    path: tuple[str, ...]
    violating: int

    def to_json(self) -> dict:
        return {
            "graph": list(self.graph),
            "edge": list(self.edge),
            "path": list(self.path),
            "violating_paths": self.violating,
        }


@dataclass(frozen=True)
class EnumerationResult:
    """Output of the minimal enumeration plus its audit trail.

    ``m`` counts the violating paths of the root graph; the output size never
    exceeds 2**m.
    """

    graphs: tuple[Mpdag, ...]
    audit: tuple[BranchRecord, ...]
    m: int

    @property
    def n(self) -> int:
        return len(self.graphs)


def select_branch_edge(
    h: Mpdag, treatments: Iterable[str], outcomes: Iterable[str]
) -> tuple[str, str]:
    """First edge of a shortest violating path (ties broken by node sequence).

    Only meaningful while the effect is unidentified; calling this on an
    identified input is an error.
    """
    bad = violating_paths(h, treatments, outcomes)
    if not bad:
        raise GraphError("effect already identified; no branch edge")
    shortest = bad[0]
    return shortest.nodes[0], shortest.nodes[1]


def id_graphs(
    h: Mpdag, treatments: Iterable[str], outcomes: Iterable[str]
) -> EnumerationResult:
    """Enumerate the sub-MPDAGs with distinct identified effects.

    Base case: an identified graph is returned as is.  Otherwise the selected
    branch edge is oriented both ways (both orientations of an undirected
    MPDAG edge are realizable; a failure here is an internal error) and the
    recursion results are merged.  Output is canonically sorted; the audit
    trail records each branch in depth-first order.
    """
    a_list = tuple(sorted(set(treatments)))
    y_list = tuple(sorted(set(outcomes)))
    root_bad = violating_paths(h, a_list, y_list)
    audit: list[BranchRecord] = []
    leaves: dict[tuple, Mpdag] = {}

    def recurse(current: Mpdag) -> None:
        bad = violating_paths(current, a_list, y_list)
        if not bad:
            leaves[current.key()] = current
            return
        shortest = bad[0]
        a1, v1 = shortest.nodes[0], shortest.nodes[1]
        audit.append(
            BranchRecord(
                graph=current.graph.edge_lines(),
                edge=(a1, v1),
                path=shortest.nodes,
                violating=len(bad),
            )
        )
        for request in ((a1, v1), (v1, a1)):
            try:
                child = construct_mpdag(current, [request])
            except OrientationConflictError as exc:
                raise InternalInconsistencyError(
                    f"branch orientation {request} failed on a valid MPDAG"
                ) from exc
            recurse(child)

    recurse(h)
    graphs = tuple(leaves[k] for k in sorted(leaves))
    result = EnumerationResult(graphs=graphs, audit=tuple(audit), m=len(root_bad))
    if result.n > 2 ** result.m:
        raise InternalInconsistencyError(
            f"enumeration produced {result.n} graphs with m={result.m}"
        )
    return result


def _treatment_edge_combos(h: Mpdag, edges: list[tuple[str, str]]) -> list[Mpdag]:
    out: dict[tuple, Mpdag] = {}
    for choice in itertools.product((0, 1), repeat=len(edges)):
        requests = [
            (u, v) if bit == 0 else (v, u)
            for (u, v), bit in zip(edges, choice)
        ]
        try:
            oriented = construct_mpdag(h, requests)
        except OrientationConflictError:
            continue
        out[oriented.key()] = oriented
    return [out[k] for k in sorted(out)]


def method2_graphs(
    h: Mpdag, treatments: Iterable[str], outcomes: Iterable[str]
) -> list[Mpdag]:
    """All valid orientation combinations of the undirected edges at the
    treatment nodes.  Valid means the background-knowledge construction
    succeeds for the combination; results are deduplicated and sorted."""
    a_set = set(treatments)
    g = h.graph
    edges = sorted(
        pair for pair in g.undirected if pair[0] in a_set or pair[1] in a_set
    )
    return _treatment_edge_combos(h, edges)


def method3_graphs(
    h: Mpdag, treatments: Iterable[str], outcomes: Iterable[str]
) -> list[Mpdag]:
    """Like method 2 but restricted to treatment edges whose far endpoint lies
    on a proper possibly causal path from the treatments to the outcomes.

    Every treatment edge into a node off all such paths is left undirected, so
    the output is a coarsening of method 2's: the classes of represented DAGs
    still partition the input class and the effect is identified in each.
    """
    a_set = set(treatments)
    g = h.graph
    on_path: set[str] = set()
    for path in proper_possibly_causal_paths(g, a_set, set(outcomes)):
        on_path.update(path.nodes)
    on_path -= a_set
    edges = sorted(
        pair
        for pair in g.undirected
        if (pair[0] in a_set and pair[1] in on_path)
        or (pair[1] in a_set and pair[0] in on_path)
    )
    return _treatment_edge_combos(h, edges)


@dataclass(frozen=True)
class PartitionReport:
    ok: bool
    violations: tuple[str, ...] = ()
    dag_counts: tuple[int, ...] = ()

    def __bool__(self) -> bool:
        return self.ok


def verify_partition(
    result: EnumerationResult,
    root: Mpdag,
    treatments: Iterable[str],
    outcomes: Iterable[str],
) -> PartitionReport:
    """Audit an enumeration result against its root graph.

    Checks, via DAG enumeration: the members' DAG classes cover exactly the
    root's class and are pairwise disjoint; every member is identified; and no
    two members share an identification formula.  Violations are reported with
    witnesses.
    """
    a_list = sorted(set(treatments))
    y_list = sorted(set(outcomes))
    violations: list[str] = []
    root_dags = {d.edge_lines(): d for d in enumerate_dags(root)}
    member_dags: list[set[tuple[str, ...]]] = []
    for member in result.graphs:
        member_dags.append({d.edge_lines() for d in enumerate_dags(member)})
    covered: set[tuple[str, ...]] = set()
    for dags in member_dags:
        covered |= dags
    missing = set(root_dags) - covered
    extra = covered - set(root_dags)
    if missing:
        violations.append(f"missing DAGs: {sorted(missing)[0]}")
    if extra:
        violations.append(f"foreign DAGs: {sorted(extra)[0]}")
    for (i, left), (j, right) in itertools.combinations(enumerate(member_dags), 2):
        common = left & right
        if common:
            violations.append(
                f"members {i} and {j} overlap on DAG {sorted(common)[0]}"
            )
    formulas: list[GFormula] = []
    for i, member in enumerate(result.graphs):
        verdict = is_identified(member, a_list, y_list)
        if not verdict:
            violations.append(f"member {i} not identified; witness {verdict.witness}")
            continue
        formulas.append(g_formula(member, a_list, y_list))
    for (i, left_f), (j, right_f) in itertools.combinations(enumerate(formulas), 2):
        if left_f == right_f:
            violations.append(f"members {i} and {j} share the formula {left_f}")
    return PartitionReport(
        ok=not violations,
        violations=tuple(violations),
        dag_counts=tuple(len(d) for d in member_dags),
    )
