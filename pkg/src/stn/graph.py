"""Extended and compact causal graphs over the estimated coefficients.

The extended graph has a contemporaneous node and a lag-1 copy ("-L1"
suffix) per variable; a nonzero psi_ij draws X_j -> X_i and a nonzero
phi_ij draws X_j-L1 -> X_i, so edges always point into contemporaneous
nodes. The compact graph collapses the lag copies onto the p variables,
keeping direction; an own-lag effect phi_jj becomes a self-loop, read as
persistence rather than a cycle.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from enum import Enum
from typing import Sequence

import numpy as np

from .model import CoefficientSet

__all__ = [
    "GraphKind",
    "StnNode",
    "StnGraph",
    "extended_graph",
    "compact_graph",
    "neighborhoods",
    "is_acyclic",
    "risk_out_edges",
    "export_dot",
    "export_adjacency",
    "export_json",
]

LAG_SUFFIX = "-L1"


class GraphKind(Enum):
    EXTENDED = "extended"
    COMPACT = "compact"


@dataclass(frozen=True)
class StnNode:
    variable_index: int
    lag: int
    label: str

    def __post_init__(self):
        if self.lag not in (0, 1):
            raise ValueError("lag must be 0 or 1")


@dataclass(frozen=True)
class StnGraph:
    """Directed graph with nodes in fixed order and a 0/1 adjacency matrix.

    ``edges`` holds (source, target) positions into ``nodes``;
    ``adjacency[i][j]`` is True iff the edge i -> j is present.
    """

    kind: GraphKind
    nodes: tuple[StnNode, ...]
    edges: frozenset[tuple[int, int]]
    adjacency: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "nodes", tuple(self.nodes))
        object.__setattr__(self, "edges", frozenset((int(a), int(b)) for a, b in self.edges))
        adj = np.array(self.adjacency, dtype=bool)
        adj.setflags(write=False)
        object.__setattr__(self, "adjacency", adj)
        n = len(self.nodes)
        if adj.shape != (n, n):
            raise ValueError("adjacency must be square over the nodes")
        for a, b in self.edges:
            if not (0 <= a < n and 0 <= b < n):
                raise ValueError(f"edge ({a}, {b}) references a missing node")
        rebuilt = np.zeros((n, n), dtype=bool)
        for a, b in self.edges:
            rebuilt[a, b] = True
        if not np.array_equal(rebuilt, adj):
            raise ValueError("adjacency matrix and edge set disagree")
        if self.kind is GraphKind.EXTENDED:
            if any(self.nodes[b].lag != 0 for _, b in self.edges):
                raise ValueError("extended-graph edges must target lag-0 nodes")
        else:
            if any(node.lag != 0 for node in self.nodes):
                raise ValueError("compact graph carries only lag-0 nodes")

    @property
    def n_nodes(self) -> int:
        return len(self.nodes)

    @classmethod
    def from_edges(cls, kind, nodes, edges) -> "StnGraph":
        n = len(nodes)
        adjacency = np.zeros((n, n), dtype=bool)
        for a, b in edges:
            adjacency[a, b] = True
        return cls(kind=kind, nodes=tuple(nodes), edges=frozenset(edges), adjacency=adjacency)


def _nodes_for(names: Sequence[str], lags: bool) -> tuple[StnNode, ...]:
    base = tuple(StnNode(variable_index=i, lag=0, label=n) for i, n in enumerate(names))
    if not lags:
        return base
    lagged = tuple(
        StnNode(variable_index=i, lag=1, label=n + LAG_SUFFIX) for i, n in enumerate(names)
    )
    return base + lagged


def extended_graph(coeffs: CoefficientSet, names: Sequence[str], threshold: float = 0.0) -> StnGraph:
    """Nodes are the p variables plus their lag-1 copies; |coef| > threshold draws an edge.

    The default threshold 0 keeps the solver's exact-zero semantics; a
    positive value prunes small refit coefficients.
    """
    if len(names) != coeffs.p:
        raise ValueError(f"{len(names)} names for p={coeffs.p} coefficients")
    if threshold < 0:
        raise ValueError("threshold must be nonnegative")
    p = coeffs.p
    edges = set()
    for i in range(p):
        for j in range(p):
            if abs(coeffs.psi[i, j]) > threshold:
                edges.add((j, i))
            if abs(coeffs.phi[i, j]) > threshold:
                edges.add((p + j, i))
    return StnGraph.from_edges(GraphKind.EXTENDED, _nodes_for(names, lags=True), edges)


def compact_graph(extended: StnGraph) -> StnGraph:
    """Collapse lag copies onto the p variables, keeping edge direction."""
    if extended.kind is not GraphKind.EXTENDED:
        raise ValueError("compact_graph expects an extended graph")
    p = extended.n_nodes // 2
    names = [node.label for node in extended.nodes[:p]]
    edges = set()
    for a, b in extended.edges:
        edges.add((extended.nodes[a].variable_index, extended.nodes[b].variable_index))
    return StnGraph.from_edges(GraphKind.COMPACT, _nodes_for(names, lags=False), edges)


def neighborhoods(
    graph: StnGraph, node: int
) -> tuple[frozenset[int], frozenset[int], frozenset[int], frozenset[int]]:
    """(incoming, outgoing, their union, union plus the node); self-loops excluded."""
    if not (0 <= node < graph.n_nodes):
        raise ValueError(f"node {node} outside 0..{graph.n_nodes - 1}")
    n_in = frozenset(a for a, b in graph.edges if b == node and a != node)
    n_out = frozenset(b for a, b in graph.edges if a == node and b != node)
    ne = n_in | n_out
    return n_in, n_out, ne, ne | {node}


def is_acyclic(graph: StnGraph, ignore_self_loops: bool = True) -> tuple[bool, list[int] | None]:
    """Depth-first cycle check; a witness cycle [v0, ..., v0] is returned if found.

    Self-loops read as own-lag persistence and are skipped by default.
    """
    n = graph.n_nodes
    succ = [[] for _ in range(n)]
    for a, b in sorted(graph.edges):
        if ignore_self_loops and a == b:
            continue
        succ[a].append(b)
    color = [0] * n  # 0 unvisited, 1 on stack, 2 done
    parent: dict[int, int] = {}
    for root in range(n):
        if color[root]:
            continue
        stack = [(root, iter(succ[root]))]
        color[root] = 1
        while stack:
            v, it = stack[-1]
            advanced = False
            for w in it:
                if color[w] == 0:
                    color[w] = 1
                    parent[w] = v
                    stack.append((w, iter(succ[w])))
                    advanced = True
                    break
                if color[w] == 1:
                    cycle = [v]
                    u = v
                    while u != w:
                        u = parent[u]
                        cycle.append(u)
                    cycle.reverse()
                    cycle.append(cycle[0])
                    return False, cycle
            if not advanced:
                color[v] = 2
                stack.pop()
    return True, None


def risk_out_edges(graph: StnGraph) -> tuple[tuple[int, int], ...]:
    """Edges leaving the risk-parameter node (self-loops excluded).

    Nonempty output flags a violation of the no-risk-output property; it can
    only occur when the structural mask was relaxed or thresholding was
    applied to externally built coefficients.
    """
    out = [
        (a, b)
        for a, b in sorted(graph.edges)
        if graph.nodes[a].variable_index == 0 and a != b and graph.nodes[b].variable_index != 0
    ]
    return tuple(out)


def _dot_quote(label: str) -> str:
    return '"' + label.replace("\\", "\\\\").replace('"', '\\"') + '"'


def export_dot(graph: StnGraph) -> str:
    """Deterministic DOT text; the risk-parameter nodes are drawn as boxes."""
    lines = [f"digraph {graph.kind.value} {{", "  rankdir=LR;"]
    for node in graph.nodes:
        shape = "box" if node.variable_index == 0 else "ellipse"
        lines.append(f"  {_dot_quote(node.label)} [shape={shape}];")
    for a, b in sorted(graph.edges):
        lines.append(f"  {_dot_quote(graph.nodes[a].label)} -> {_dot_quote(graph.nodes[b].label)};")
    lines.append("}")
    return "\n".join(lines) + "\n"


def export_adjacency(graph: StnGraph) -> tuple[np.ndarray, str]:
    """0/1 adjacency in node order plus CSV text with label headers."""
    matrix = graph.adjacency.astype(int)
    labels = [node.label for node in graph.nodes]
    lines = ["," + ",".join(labels)]
    for i, label in enumerate(labels):
        lines.append(label + "," + ",".join(str(int(v)) for v in matrix[i]))
    return matrix, "\n".join(lines) + "\n"


def export_json(graph: StnGraph) -> str:
    payload = {
        "kind": graph.kind.value,
        "nodes": [
            {"variable_index": n.variable_index, "lag": n.lag, "label": n.label}
            for n in graph.nodes
        ],
        "edges": [list(e) for e in sorted(graph.edges)],
    }
    return json.dumps(payload, sort_keys=True, indent=2) + "\n"
