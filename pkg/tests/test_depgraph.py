import numpy as np
import pytest

from maintcast import depgraph
from maintcast.errors import EmptySelection
from maintcast.events import DependencySnapshot
from maintcast.labels import make_rng


def snap(edges, repo_map=None):
    mapping = dict(repo_map or {})
    for a, b in edges:
        mapping.setdefault(a, None)
        mapping.setdefault(b, None)
    return DependencySnapshot(edges=list(edges), library_to_repo=mapping)


def test_build_graph_simple():
    g = depgraph.build_dependency_graph(snap([("a", "b")]))
    assert g.nodes == ["a", "b"]
    assert g.edges == [("a", "b")]


def test_build_graph_triangle():
    g = depgraph.build_dependency_graph(snap([("a", "b"), ("b", "c"), ("a", "c")]))
    assert len(g.nodes) == 3 and len(g.edges) == 3


def test_build_graph_empty():
    g = depgraph.build_dependency_graph(snap([]))
    assert g.nodes == [] and g.edges == []
    g = depgraph.pagerank(g)
    assert g.pagerank == {}


def test_reverse_edges_flag():
    g = depgraph.build_dependency_graph(snap([("a", "b")]), reverse_edges=True)
    assert g.edges == [("b", "a")]


def test_two_node_cycle_symmetric():
    g = depgraph.pagerank(depgraph.build_dependency_graph(snap([("a", "b"), ("b", "a")])))
    assert g.pagerank["a"] == pytest.approx(0.5, abs=1e-12)
    assert g.pagerank["b"] == pytest.approx(0.5, abs=1e-12)


def test_single_node_no_edges():
    s = DependencySnapshot(edges=[], library_to_repo={"x": None})
    g = depgraph.pagerank(depgraph.build_dependency_graph(s))
    assert g.pagerank == {"x": 1.0}


def test_three_node_graph_matches_dense_oracle():
    edges = [("a", "b"), ("a", "c"), ("b", "c")]
    g = depgraph.pagerank(depgraph.build_dependency_graph(snap(edges)), tol=1e-14, max_iter=500)
    oracle = depgraph.dense_pagerank_oracle(g.nodes, edges, iterations=500)
    for name in g.nodes:
        assert g.pagerank[name] == pytest.approx(oracle[name], abs=1e-10)


def test_pagerank_sums_to_one_and_positive():
    rng = make_rng(7)
    names = [f"lib{i}" for i in range(20)]
    edges = []
    for _ in range(60):
        i, j = rng.integers(0, 20, size=2)
        if i != j:
            edges.append((names[i], names[j]))
    g = depgraph.pagerank(depgraph.build_dependency_graph(snap(edges)))
    total = sum(g.pagerank.values())
    assert total == pytest.approx(1.0, abs=1e-9)
    floor = (1 - 0.85) / len(g.nodes) - 1e-12
    assert all(v >= floor for v in g.pagerank.values())


def test_pagerank_input_order_invariance():
    edges = [("a", "b"), ("c", "a"), ("b", "c"), ("d", "a")]
    g1 = depgraph.pagerank(depgraph.build_dependency_graph(snap(edges)), tol=1e-13)
    g2 = depgraph.pagerank(depgraph.build_dependency_graph(snap(list(reversed(edges)))), tol=1e-13)
    for name in g1.nodes:
        assert g1.pagerank[name] == pytest.approx(g2.pagerank[name], abs=1e-12)


def test_nonconvergence_returns_last_iterate(caplog):
    edges = [("a", "b"), ("b", "a"), ("b", "c"), ("c", "a")]
    with caplog.at_level("WARNING"):
        g = depgraph.pagerank(depgraph.build_dependency_graph(snap(edges)), tol=1e-16, max_iter=2)
    assert not g.converged
    assert sum(g.pagerank.values()) == pytest.approx(1.0, abs=1e-9)


def test_select_top_fraction_picks_max():
    edges = [(f"l{i}", "hub") for i in range(99)]
    repo_map = {name: f"org/{name}" for name in ["hub"] + [f"l{i}" for i in range(99)]}
    g = depgraph.pagerank(depgraph.build_dependency_graph(snap(edges, repo_map)))
    sel = depgraph.select_top_fraction(g, snap(edges, repo_map), 0.01)
    assert len(sel.selected) == 1
    assert sel.selected[0][0] == "hub"


def test_select_tie_breaks_lexicographically():
    edges = [("a", "b"), ("b", "a")]  # symmetric, equal pagerank
    repo_map = {"a": "org/a", "b": "org/b"}
    g = depgraph.pagerank(depgraph.build_dependency_graph(snap(edges, repo_map)))
    sel = depgraph.select_top_fraction(g, snap(edges, repo_map), 0.5)
    assert sel.selected[0][0] == "a"


def test_select_fraction_one_keeps_all_with_repo():
    edges = [("a", "b"), ("b", "c")]
    repo_map = {"a": "org/a", "b": None, "c": "org/c"}
    g = depgraph.pagerank(depgraph.build_dependency_graph(snap(edges, repo_map)))
    sel = depgraph.select_top_fraction(g, snap(edges, repo_map), 1.0)
    assert {lib for lib, _, _ in sel.selected} == {"a", "c"}
    assert sel.excluded_no_repo == 1


def test_select_empty_selection():
    edges = [("a", "b")]
    g = depgraph.pagerank(depgraph.build_dependency_graph(snap(edges)))
    with pytest.raises(EmptySelection):
        depgraph.select_top_fraction(g, snap(edges), 0.5)


def test_selection_size_formula():
    rng = make_rng(3)
    names = [f"lib{i:02d}" for i in range(30)]
    edges = [(names[int(i)], names[int(j)]) for i, j in rng.integers(0, 30, size=(80, 2)) if i != j]
    repo_map = {n: (f"org/{n}" if int(n[3:]) % 3 else None) for n in names}
    g = depgraph.pagerank(depgraph.build_dependency_graph(snap(edges, repo_map)))
    with_repo = sum(1 for n in g.nodes if repo_map.get(n))
    for fraction in (0.1, 0.34, 0.5, 1.0):
        sel = depgraph.select_top_fraction(g, snap(edges, repo_map), fraction)
        assert len(sel.selected) == int(np.ceil(fraction * with_repo))


def test_write_selection(tmp_path):
    edges = [("a", "b")]
    repo_map = {"a": "org/a", "b": "org/b"}
    g = depgraph.pagerank(depgraph.build_dependency_graph(snap(edges, repo_map)))
    sel = depgraph.select_top_fraction(g, snap(edges, repo_map), 1.0)
    out = tmp_path / "selection.csv"
    depgraph.write_selection(sel, out)
    lines = out.read_text().splitlines()
    assert lines[0] == "rank,library,repo,pagerank"
    assert lines[1].startswith("1,b,org/b,")  # b absorbs a's rank
