"""Dependency graph construction, PageRank, and top-fraction selection."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import EmptySelection
from .events import DependencySnapshot

logger = logging.getLogger(__name__)


@dataclass
class DependencyGraph:
    nodes: list[str]                     # sorted library names
    edges: list[tuple[str, str]]         # dependent -> dependency, deduplicated
    pagerank: dict[str, float] = field(default_factory=dict)
    converged: bool = True
    iterations: int = 0


@dataclass
class SelectionResult:
    selected: list[tuple[str, str, float]]   # (library, repo_id, pagerank), rank order
    fraction: float
    excluded_no_repo: int


def build_dependency_graph(snapshot: DependencySnapshot, reverse_edges: bool = False) -> DependencyGraph:
    """Nodes are every endpoint name; edge direction is dependent -> dependency.

    ``reverse_edges`` flips the walk so importance accumulates at dependents
    instead of widely depended-upon libraries.
    """
    nodes = sorted(snapshot.libraries)
    seen = set()
    edges = []
    for a, b in snapshot.edges:
        e = (b, a) if reverse_edges else (a, b)
        if e not in seen and e[0] != e[1]:
            seen.add(e)
            edges.append(e)
    return DependencyGraph(nodes=nodes, edges=edges)


def pagerank(graph: DependencyGraph, damping: float = 0.85, tol: float = 1e-8,
             max_iter: int = 100) -> DependencyGraph:
    """Power iteration with uniform teleportation and dangling redistribution.

    Stops when the L1 change drops below ``tol``; on non-convergence the last
    iterate is kept and a warning logged. The result is normalized to sum 1.
    """
    if not 0.0 < damping < 1.0:
        raise ValueError("damping must lie in (0, 1)")
    if tol <= 0.0:
        raise ValueError("tol must be positive")
    n = len(graph.nodes)
    if n == 0:
        graph.pagerank = {}
        return graph

    index = {name: i for i, name in enumerate(graph.nodes)}
    src = np.array([index[a] for a, _ in graph.edges], dtype=np.int64)
    dst = np.array([index[b] for _, b in graph.edges], dtype=np.int64)
    out_degree = np.zeros(n, dtype=np.float64)
    np.add.at(out_degree, src, 1.0)
    dangling = out_degree == 0.0

    x = np.full(n, 1.0 / n)
    converged = False
    iterations = 0
    for iterations in range(1, max_iter + 1):
        contrib = np.zeros(n)
        if len(src):
            np.add.at(contrib, dst, x[src] / out_degree[src])
        dangling_mass = x[dangling].sum()
        x_next = damping * (contrib + dangling_mass / n) + (1.0 - damping) / n
        if np.abs(x_next - x).sum() < tol:
            x = x_next
            converged = True
            break
        x = x_next
    if not converged:
        logger.warning("pagerank did not converge in %d iterations (returning last iterate)", max_iter)

    x = x / x.sum()
    graph.pagerank = {name: float(x[index[name]]) for name in graph.nodes}
    graph.converged = converged
    graph.iterations = iterations
    return graph


def select_top_fraction(graph: DependencyGraph, snapshot: DependencySnapshot,
                        fraction: float) -> SelectionResult:
    """Keep the highest-ranked libraries that carry a repository link.

    The cutoff counts only libraries with a repo link; ties at the cutoff
    break toward the lexicographically smaller name.
    """
    if not 0.0 < fraction <= 1.0:
        raise ValueError("fraction must lie in (0, 1]")
    if not graph.pagerank:
        raise ValueError("pagerank has not been computed")
    with_repo = [lib for lib in graph.nodes if snapshot.library_to_repo.get(lib)]
    if not with_repo:
        raise EmptySelection()
    keep = math.ceil(fraction * len(with_repo))
    ranked = sorted(with_repo, key=lambda lib: (-graph.pagerank[lib], lib))
    selected = [(lib, snapshot.library_to_repo[lib], graph.pagerank[lib]) for lib in ranked[:keep]]
    excluded = len(graph.nodes) - len(with_repo)
    return SelectionResult(selected=selected, fraction=fraction, excluded_no_repo=excluded)


def dense_pagerank_oracle(nodes: list[str], edges: list[tuple[str, str]], damping: float = 0.85,
                          iterations: int = 200) -> dict[str, float]:
    """Independent dense-matrix power iteration used as a test oracle."""
    n = len(nodes)
    if n == 0:
        return {}
    index = {name: i for i, name in enumerate(nodes)}
    m = np.zeros((n, n))
    for a, b in edges:
        m[index[b], index[a]] = 1.0
    col_sums = m.sum(axis=0)
    for j in range(n):
        if col_sums[j] > 0:
            m[:, j] /= col_sums[j]
        else:
            m[:, j] = 1.0 / n
    full = damping * m + (1.0 - damping) / n
    x = np.full(n, 1.0 / n)
    for _ in range(iterations):
        x = full @ x
    x = x / x.sum()
    return {name: float(x[index[name]]) for name in nodes}


def write_selection(result: SelectionResult, path: str, graph: Optional[DependencyGraph] = None) -> None:
    """Delimited export: rank,library,repo,pagerank."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("rank,library,repo,pagerank\n")
        for rank, (lib, repo, pr) in enumerate(result.selected, start=1):
            fh.write(f"{rank},{lib},{repo},{pr!r}\n")
