"""Shared fixtures data and independent oracles for the test suite.

The oracles here re-derive results straight from definitions (exhaustive
orientation enumeration, pairwise path scans, covariance algebra) and must
stay independent of the code paths they check.
"""

from __future__ import annotations

import itertools
from pathlib import Path

import numpy as np

import mpdag as M

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"


def load_fixture(name: str) -> M.PartiallyDirectedGraph:
    return M.load_graph(FIXTURES / name)


def fixture_mpdag(name: str) -> M.Mpdag:
    return M.meek_closure(load_fixture(name))


def lines(g) -> tuple[str, ...]:
    graph = g.graph if isinstance(g, M.Mpdag) else g
    return graph.edge_lines()


# Expected outputs on the four-node example (MPDAG: A -> Y known, rest
# undirected), treatments {A}, outcome {Y}.  Derived by hand from the
# definitions and double-checked by the exhaustive oracles below.
FOUR_NODE_MINIMAL = [
    ("A -> V1", "A -> V2", "A -> Y", "V1 -- V2", "V1 -- Y"),
    ("A -> V1", "A -> Y", "V1 -> Y", "V2 -> A", "V2 -> V1"),
    ("A -> Y", "V1 -> A", "V1 -> Y", "A -- V2", "V1 -- V2"),
]

FOUR_NODE_TREATMENT_ORIENTATIONS = [
    ("A -> V1", "A -> V2", "A -> Y", "V1 -- V2", "V1 -- Y"),
    ("A -> V1", "A -> Y", "V1 -> Y", "V2 -> A", "V2 -> V1"),
    ("A -> V2", "A -> Y", "V1 -> A", "V1 -> V2", "V1 -> Y"),
    ("A -> Y", "V1 -> A", "V1 -> Y", "V2 -> A", "V1 -- V2"),
]

FOUR_NODE_DAGS = [
    ("A -> V1", "A -> V2", "A -> Y", "V1 -> V2", "V1 -> Y"),
    ("A -> V1", "A -> V2", "A -> Y", "V1 -> V2", "Y -> V1"),
    ("A -> V1", "A -> V2", "A -> Y", "V1 -> Y", "V2 -> V1"),
    ("A -> V1", "A -> Y", "V1 -> Y", "V2 -> A", "V2 -> V1"),
    ("A -> V2", "A -> Y", "V1 -> A", "V1 -> V2", "V1 -> Y"),
    ("A -> Y", "V1 -> A", "V1 -> V2", "V1 -> Y", "V2 -> A"),
    ("A -> Y", "V1 -> A", "V1 -> Y", "V2 -> A", "V2 -> V1"),
]

# Minimal enumeration on the complete undirected four-node graph with the
# joint treatment {A1, A2} and outcome Y: nine graphs partitioning the 24
# represented DAGs into classes of sizes 1,3,1,4,1,2,3,1,8.
COMPLETE4_MINIMAL = [
    ("A1 -> A2", "A1 -> V1", "A1 -> Y", "A2 -> Y", "V1 -> A2", "V1 -> Y"),
    ("A1 -> A2", "A1 -> V1", "A1 -> Y", "Y -> A2", "A2 -- V1", "V1 -- Y"),
    ("A1 -> A2", "A1 -> Y", "V1 -> A1", "V1 -> A2", "V1 -> Y", "Y -> A2"),
    ("A1 -> V1", "A1 -> Y", "A2 -> V1", "A2 -> Y", "A1 -- A2", "V1 -- Y"),
    ("A1 -> Y", "A2 -> A1", "A2 -> V1", "A2 -> Y", "V1 -> A1", "V1 -> Y"),
    ("A1 -> Y", "A2 -> Y", "V1 -> A1", "V1 -> A2", "V1 -> Y", "A1 -- A2"),
    ("A2 -> A1", "A2 -> V1", "A2 -> Y", "Y -> A1", "A1 -- V1", "V1 -- Y"),
    ("A2 -> A1", "A2 -> Y", "V1 -> A1", "V1 -> A2", "V1 -> Y", "Y -> A1"),
    ("Y -> A1", "Y -> A2", "A1 -- A2", "A1 -- V1", "A2 -- V1", "V1 -- Y"),
]

# Simulation example: per-graph identified effects (exact covariance).
SIM_POINT_EFFECTS = {
    ("A1 -> A2", "A1 -> V", "A1 -> Y", "A2 -- V", "A2 -- Y"): (3.0,),
    ("A1 -> A2", "A1 -> Y", "A2 -> Y", "V -> A1", "V -> A2"): (1.8,),
    ("A1 -> V", "A2 -> V", "Y -> A1", "A1 -- A2", "A2 -- Y"): (0.0,),
    ("A1 -> Y", "A2 -> A1", "A2 -> Y", "A1 -- V", "A2 -- V"): (2.0,),
}

SIM_JOINT_EFFECTS = {
    ("A1 -> A2", "A1 -> V", "A1 -> Y", "A2 -> V", "Y -> A2"): (3.0, 0.0),
    ("A1 -> V", "A2 -> A1", "A2 -> V", "A2 -> Y", "Y -> A1"): (0.0, 2.0),
    ("A1 -> V", "A2 -> V", "Y -> A1", "Y -> A2", "A1 -- A2"): (0.0, 0.0),
    ("A1 -> Y", "A2 -> Y", "A1 -- A2", "A1 -- V", "A2 -- V"): (2.0, 1.0),
}


def sim_scm() -> M.LinearScm:
    dag = M.PartiallyDirectedGraph(
        ["A1", "A2", "V", "Y"],
        [("A1", "A2"), ("A1", "V"), ("A1", "Y"), ("A2", "V"), ("A2", "Y")],
    )
    coefs = {
        ("A1", "A2"): 1.0,
        ("A1", "V"): 1.0,
        ("A1", "Y"): 2.0,
        ("A2", "V"): 2.0,
        ("A2", "Y"): 1.0,
    }
    return M.LinearScm(dag, coefs, {n: 1.0 for n in dag.nodes})


# -- independent oracles ------------------------------------------------------


def brute_force_class(dag: M.PartiallyDirectedGraph) -> list[M.PartiallyDirectedGraph]:
    """Every acyclic orientation of the skeleton with the same unshielded
    colliders as ``dag``: the Markov equivalence class, from the definition."""
    skeleton = sorted(dag.skeleton)
    reference = dag.unshielded_colliders()
    out = []
    for bits in itertools.product((0, 1), repeat=len(skeleton)):
        directed = [
            (u, v) if bit == 0 else (v, u) for (u, v), bit in zip(skeleton, bits)
        ]
        try:
            candidate = M.PartiallyDirectedGraph(dag.nodes, directed, ())
        except M.GraphError:
            continue
        if candidate.unshielded_colliders() == reference:
            out.append(candidate)
    return sorted(out, key=lines)


def random_dag(rng: np.random.Generator, p: int, edge_prob: float) -> M.PartiallyDirectedGraph:
    names = [f"n{i}" for i in range(p)]
    order = list(rng.permutation(p))
    rank = {names[i]: pos for pos, i in enumerate(order)}
    edges = []
    for i in range(p):
        for j in range(i + 1, p):
            if rng.random() < edge_prob:
                u, v = names[i], names[j]
                edges.append((u, v) if rank[u] < rank[v] else (v, u))
    return M.PartiallyDirectedGraph(names, edges, ())


def random_scm(rng: np.random.Generator, dag: M.PartiallyDirectedGraph) -> M.LinearScm:
    coefs = {}
    for edge in sorted(dag.directed):
        magnitude = rng.uniform(0.5, 1.5)
        coefs[edge] = magnitude if rng.random() < 0.5 else -magnitude
    return M.LinearScm(dag, coefs, {n: 1.0 for n in dag.nodes})


def partial_correlation(
    sigma: np.ndarray, nodes: tuple[str, ...], a: str, y: str, given: list[str]
) -> float:
    idx = {n: i for i, n in enumerate(nodes)}
    pick = [idx[a], idx[y]]
    if given:
        z = [idx[n] for n in given]
        szz = sigma[np.ix_(z, z)]
        szp = sigma[np.ix_(z, pick)]
        conditional = sigma[np.ix_(pick, pick)] - szp.T @ np.linalg.solve(szz, szp)
    else:
        conditional = sigma[np.ix_(pick, pick)]
    return float(
        conditional[0, 1] / np.sqrt(conditional[0, 0] * conditional[1, 1])
    )


def adjustment_functional(
    cov: M.ExactCovariance, treatments: list[str], outcome: str, adjust: list[str]
) -> np.ndarray:
    """Population regression of the outcome on treatments plus adjustment set,
    returning the treatment coefficients."""
    idx = {n: i for i, n in enumerate(cov.columns)}
    cols = [idx[a] for a in treatments] + [idx[z] for z in adjust]
    gram = cov.matrix[np.ix_(cols, cols)]
    rhs = cov.matrix[cols, idx[outcome]]
    beta = np.linalg.solve(gram, rhs)
    return beta[: len(treatments)]


def formula_effect(
    cov: M.ExactCovariance, formula: M.GFormula, outcome: str
) -> np.ndarray:
    """Evaluate a bucket factorisation on a Gaussian population directly.

    Walks the buckets in dependency order, replacing each bucket by the
    conditional mean of its nodes given its parent set (taken straight from
    the observational covariance), and returns the linear coefficients of the
    outcome's do-expectation in the treatment values.  Completely independent
    of the consistent-extension estimator.
    """
    idx = {n: i for i, n in enumerate(cov.columns)}
    treatments = list(formula.treatments)
    rows: dict[str, np.ndarray] = {
        a: np.eye(len(treatments))[k] for k, a in enumerate(treatments)
    }
    remaining = list(formula.buckets)
    while remaining:
        ready = [
            b for b in remaining if all(p in rows for p in b[1])
        ]
        assert ready, f"unresolvable bucket parents in {formula}"
        for nodes, parents in ready:
            if parents:
                rows_p = [idx[p] for p in parents]
                rows_b = [idx[b] for b in nodes]
                gain = cov.matrix[np.ix_(rows_b, rows_p)] @ np.linalg.inv(
                    cov.matrix[np.ix_(rows_p, rows_p)]
                )
                for i, b in enumerate(nodes):
                    rows[b] = sum(
                        gain[i, j] * rows[p] for j, p in enumerate(parents)
                    )
            else:
                for b in nodes:
                    rows[b] = np.zeros(len(treatments))
            remaining.remove((nodes, parents))
    return rows[outcome]
