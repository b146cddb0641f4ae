"""Identification of total effects given an MPDAG.

Covers the graphical identifiability test (every proper possibly causal path
from the treatments to the outcomes must start with a directed edge), the
bucket factorisation of the interventional density for identified effects,
the forbidden set, and the generalized adjustment criterion with a search for
a valid adjustment set.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, Optional

from .graphs import (
    DIRECTED_MARK,
    REVERSED_MARK,
    UNDIRECTED_MARK,
    GraphError,
    InternalInconsistencyError,
    NodePath,
    PartiallyDirectedGraph,
    PathKind,
    ancestors,
    bucket_decomposition,
    classify_path,
    descendants,
    parents_of_set,
    path_in,
    possible_ancestors,
    possible_descendants,
    proper_possibly_causal_paths,
)
from .meek import Mpdag

EXHAUSTIVE_SEARCH_NODE_CAP = 20


class NotIdentifiedError(GraphError):
    """Operation requires the effect to be identified, but it is not."""

    def __init__(self, witness: NodePath) -> None:
        super().__init__(f"effect not identified; witness path {witness}")
        self.witness = witness


class SearchBudgetError(GraphError):
    """Exhaustive subset search refused: too many nodes."""


@dataclass(frozen=True)
class Identifiability:
    identified: bool
    witness: Optional[NodePath] = None

    def __bool__(self) -> bool:
        return self.identified


def violating_paths(
    h: Mpdag, treatments: Iterable[str], outcomes: Iterable[str]
) -> list[NodePath]:
    """Proper possibly causal paths that start with an undirected edge,
    sorted by length then node sequence.  Their count is the diagnostic m(g)."""
    return proper_possibly_causal_paths(
        h.graph, treatments, outcomes, start_undirected_only=True
    )


def is_identified(
    h: Mpdag, treatments: Iterable[str], outcomes: Iterable[str]
) -> Identifiability:
    """Graphical identifiability of the total effect, with a shortest witness
    path when the answer is no."""
    bad = violating_paths(h, treatments, outcomes)
    if bad:
        return Identifiability(False, bad[0])
    return Identifiability(True)


@dataclass(frozen=True)
class GFormula:
    """Bucket factorisation of the interventional density of an identified
    effect: outcome-side nodes split into buckets, each conditioned on its
    parent set, with the non-outcome bucket nodes integrated out.

    Equality is structural, so two graphs share the identification formula
    exactly when their GFormula objects compare equal.
    """

    treatments: tuple[str, ...]
    outcomes: tuple[str, ...]
    buckets: tuple[tuple[tuple[str, ...], tuple[str, ...]], ...]
    marginalize: tuple[str, ...]

    def __str__(self) -> str:
        factors = []
        for nodes, parents in self.buckets:
            left = ",".join(nodes)
            if parents:
                factors.append(f"f({left} | {','.join(parents)})")
            else:
                factors.append(f"f({left})")
        product = " ".join(factors)
        if self.marginalize:
            return f"∫ {product} d({','.join(self.marginalize)})"
        return product

    def to_json(self) -> dict:
        return {
            "A": list(self.treatments),
            "Y": list(self.outcomes),
            "buckets": [
                {"nodes": list(nodes), "parents": list(parents)}
                for nodes, parents in self.buckets
            ],
            "marginalize": list(self.marginalize),
        }


def _checked_sets(
    h: Mpdag, treatments: Iterable[str], outcomes: Iterable[str]
) -> tuple[set[str], set[str]]:
    a_set, y_set = set(treatments), set(outcomes)
    unknown = (a_set | y_set) - set(h.graph.nodes)
    if unknown:
        raise GraphError(f"unknown node: {sorted(unknown)}")
    if a_set & y_set:
        raise GraphError(f"treatments and outcomes overlap: {sorted(a_set & y_set)}")
    if not a_set or not y_set:
        raise GraphError("treatment and outcome sets must be nonempty")
    return a_set, y_set


def g_formula(
    h: Mpdag, treatments: Iterable[str], outcomes: Iterable[str]
) -> GFormula:
    """Identification formula for an identified effect.

    The marginalisation set consists of the ancestors of the outcomes in the
    graph with the treatments removed (outcomes excluded); it is joined with
    the outcomes and split into buckets, whose parent sets are taken in the
    full graph.  Buckets are ordered by smallest member; the product itself is
    order-free.
    """
    a_set, y_set = _checked_sets(h, treatments, outcomes)
    verdict = is_identified(h, a_set, y_set)
    if not verdict:
        raise NotIdentifiedError(verdict.witness)
    g = h.graph
    without_a = g.induced_subgraph(set(g.nodes) - a_set)
    b_set = set(ancestors(without_a, y_set)) - y_set
    buckets = bucket_decomposition(g, b_set | y_set)
    return GFormula(
        treatments=tuple(sorted(a_set)),
        outcomes=tuple(sorted(y_set)),
        buckets=tuple(
            (tuple(sorted(bucket)), tuple(sorted(parents_of_set(g, bucket))))
            for bucket in buckets
        ),
        marginalize=tuple(sorted(b_set)),
    )


def forbidden_set(
    h: Mpdag, treatments: Iterable[str], outcomes: Iterable[str]
) -> frozenset[str]:
    """Possible descendants of every non-treatment node lying on some proper
    possibly causal path from the treatments to the outcomes."""
    a_set, y_set = _checked_sets(h, treatments, outcomes)
    g = h.graph
    on_path: set[str] = set()
    for path in proper_possibly_causal_paths(g, a_set, y_set):
        on_path.update(path.nodes)
    on_path -= a_set
    out: set[str] = set()
    for w in sorted(on_path):
        out |= possible_descendants(g, w)
    return frozenset(out)


@dataclass(frozen=True)
class AdjustmentVerdict:
    valid: bool
    reason: Optional[str] = None  # "forbidden" | "open_path"
    witness_node: Optional[str] = None
    witness_path: Optional[NodePath] = None

    def __bool__(self) -> bool:
        return self.valid


def _proper_definite_status_paths(
    g: PartiallyDirectedGraph, a_set: set[str], y_set: set[str]
) -> list[NodePath]:
    """Proper definite-status paths from ``a_set`` to ``y_set``."""
    found: list[tuple[str, ...]] = []

    def extend(seq: list[str], members: set[str]) -> None:
        tip = seq[-1]
        for w in sorted(g.neighbours(tip)):
            if w in members or w in a_set:
                continue
            if len(seq) >= 2:
                u, v = seq[-2], seq[-1]
                left, right = g.mark(u, v), g.mark(v, w)
                is_collider = left == DIRECTED_MARK and right == REVERSED_MARK
                is_noncollider = (
                    left == REVERSED_MARK
                    or right == DIRECTED_MARK
                    or (
                        left == UNDIRECTED_MARK
                        and right == UNDIRECTED_MARK
                        and not g.adjacent(u, w)
                    )
                )
                if not (is_collider or is_noncollider):
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


def _blocked(g: PartiallyDirectedGraph, path: NodePath, z_set: set[str]) -> bool:
    for i in range(1, len(path.nodes) - 1):
        left, right = path.marks[i - 1], path.marks[i]
        node = path.nodes[i]
        if left == DIRECTED_MARK and right == REVERSED_MARK:
            if not descendants(g, [node]) & z_set:
                return True
        elif node in z_set:
            return True
    return False


def is_adjustment_set(
    h: Mpdag,
    treatments: Iterable[str],
    outcomes: Iterable[str],
    adjust: Iterable[str],
) -> AdjustmentVerdict:
    """Generalized adjustment criterion.

    Valid exactly when the candidate avoids the forbidden set and blocks every
    proper non-causal definite-status path from the treatments to the
    outcomes.  Stated only under the identifiability premise, so an
    unidentified effect raises :class:`NotIdentifiedError`.
    """
    a_set, y_set = _checked_sets(h, treatments, outcomes)
    z_set = set(adjust)
    unknown = z_set - set(h.graph.nodes)
    if unknown:
        raise GraphError(f"unknown node: {sorted(unknown)}")
    overlap = z_set & (a_set | y_set)
    if overlap:
        raise GraphError(f"adjustment set overlaps A or Y: {sorted(overlap)}")
    verdict = is_identified(h, a_set, y_set)
    if not verdict:
        raise NotIdentifiedError(verdict.witness)
    g = h.graph
    hit = z_set & forbidden_set(h, a_set, y_set)
    if hit:
        return AdjustmentVerdict(False, "forbidden", witness_node=min(hit))
    for path in _proper_definite_status_paths(g, a_set, y_set):
        if classify_path(g, path).kind is not PathKind.NON_CAUSAL:
            continue
        if not _blocked(g, path, z_set):
            return AdjustmentVerdict(False, "open_path", witness_path=path)
    return AdjustmentVerdict(True)


def find_adjustment_set(
    h: Mpdag, treatments: Iterable[str], outcomes: Iterable[str]
) -> Optional[frozenset[str]]:
    """A valid adjustment set, or None when none exists.

    Tries the canonical candidate first: the possible ancestors of the
    treatments and outcomes, minus the forbidden set and the two sets
    themselves.  Falls back to exhaustive subset search in increasing size
    (first valid set in lexicographic order), which is refused above
    EXHAUSTIVE_SEARCH_NODE_CAP nodes.

    For a singleton treatment and outcome joined by some proper possibly
    causal path, a set is guaranteed to exist and failing to find one is an
    internal error.  Without such a path the effect is identified as the
    plain marginal, and no conditional of the form f(y | a, z) can reproduce
    it when the outcome is a definite cause of the treatment, so None is a
    legitimate answer there too.
    """
    a_set, y_set = _checked_sets(h, treatments, outcomes)
    verdict = is_identified(h, a_set, y_set)
    if not verdict:
        raise NotIdentifiedError(verdict.witness)
    g = h.graph
    forb = forbidden_set(h, a_set, y_set)
    candidate = frozenset(
        possible_ancestors(g, a_set | y_set) - forb - a_set - y_set
    )
    if is_adjustment_set(h, a_set, y_set, candidate):
        return candidate
    pool = sorted(set(g.nodes) - a_set - y_set - forb)
    if len(g.nodes) > EXHAUSTIVE_SEARCH_NODE_CAP:
        raise SearchBudgetError(
            f"exhaustive adjustment search capped at "
            f"{EXHAUSTIVE_SEARCH_NODE_CAP} nodes, graph has {len(g.nodes)}"
        )
    for size in range(len(pool) + 1):
        for combo in itertools.combinations(pool, size):
            z = frozenset(combo)
            if z == candidate:
                continue
            if is_adjustment_set(h, a_set, y_set, z):
                return z
    if (
        len(a_set) == 1
        and len(y_set) == 1
        and proper_possibly_causal_paths(g, a_set, y_set)
    ):
        raise InternalInconsistencyError(
            "no adjustment set found for singleton treatment and outcome"
        )
    return None
