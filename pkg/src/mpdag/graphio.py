"""Reading and writing the shared edge-list text format, plus DOT export.

The format is one edge per line, UTF-8: ``X -> Y`` for a directed edge,
``X -- Y`` for an undirected one.  ``#`` starts a comment, blank lines are
ignored, node names are arbitrary non-whitespace tokens.  A node appearing in
no edge can be declared on a line of its own.  Duplicate edge lines (any two
lines touching the same node pair) are an error.

Rendering is canonical: directed edges first, then undirected, each block
sorted lexicographically.  ``parse_graph(render_edge_list(g)) == g`` holds for
every valid graph.
"""

from __future__ import annotations

import json
from pathlib import Path
from .graphs import GraphError, PartiallyDirectedGraph


class GraphParseError(GraphError):
    """Malformed graph text; carries the offending line number."""

    def __init__(self, message: str, line_no: int) -> None:
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no


def parse_graph(text: str) -> PartiallyDirectedGraph:
    nodes: set[str] = set()
    directed: list[tuple[str, str]] = []
    undirected: list[tuple[str, str]] = []
    seen_pairs: dict[frozenset[str], int] = {}
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tokens = line.split()
        if len(tokens) == 1:
            nodes.add(tokens[0])
            continue
        if len(tokens) != 3 or tokens[1] not in ("->", "--"):
            raise GraphParseError(f"expected 'X -> Y' or 'X -- Y', got {line!r}", line_no)
        tail, op, head = tokens
        if tail == head:
            raise GraphParseError(f"self loop on {tail!r}", line_no)
        pair = frozenset((tail, head))
        if pair in seen_pairs:
            raise GraphParseError(
                f"duplicate edge between {tail!r} and {head!r}"
                f" (first on line {seen_pairs[pair]})",
                line_no,
            )
        seen_pairs[pair] = line_no
        nodes.update((tail, head))
        if op == "->":
            directed.append((tail, head))
        else:
            undirected.append((tail, head))
    return PartiallyDirectedGraph(nodes, directed, undirected)


def load_graph(path: str | Path) -> PartiallyDirectedGraph:
    return parse_graph(Path(path).read_text(encoding="utf-8"))


def render_edge_list(g: PartiallyDirectedGraph) -> str:
    lines = [f"{t} -> {h}" for t, h in g.sorted_directed()]
    lines += [f"{u} -- {v}" for u, v in g.sorted_undirected()]
    connected = {n for e in g.directed | g.undirected for n in e}
    lines += [n for n in g.nodes if n not in connected]
    return "\n".join(lines) + ("\n" if lines else "")


def render_dot(g: PartiallyDirectedGraph, name: str = "g") -> str:
    lines = [f"digraph {name} {{"]
    connected = {n for e in g.directed | g.undirected for n in e}
    for n in g.nodes:
        if n not in connected:
            lines.append(f'  "{n}";')
    for t, h in g.sorted_directed():
        lines.append(f'  "{t}" -> "{h}";')
    for u, v in g.sorted_undirected():
        lines.append(f'  "{u}" -- "{v}";')
    lines.append("}")
    return "\n".join(lines) + "\n"


def parse_orientations(text: str) -> list[tuple[str, str]]:
    """Background-knowledge file: one ``X -> Y`` request per line, in order."""
    requests: list[tuple[str, str]] = []
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tokens = line.split()
        if len(tokens) != 3 or tokens[1] != "->":
            raise GraphParseError(f"expected 'X -> Y', got {line!r}", line_no)
        request = (tokens[0], tokens[2])
        if request in requests:
            raise GraphParseError(f"duplicate request {line!r}", line_no)
        requests.append(request)
    return requests


def graph_to_json(g: PartiallyDirectedGraph) -> dict:
    return {
        "nodes": list(g.nodes),
        "directed": [list(e) for e in g.sorted_directed()],
        "undirected": [list(e) for e in g.sorted_undirected()],
    }


def load_scm_file(path: str | Path) -> dict:
    """Load a linear-SCM JSON file: {"edges": {"A->B": coef}, "noise": {...}}."""
    data = json.loads(Path(path).read_text(encoding="utf-8"))
    if "edges" not in data:
        raise GraphError("SCM file needs an 'edges' mapping")
    return data
