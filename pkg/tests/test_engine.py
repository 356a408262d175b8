import json
import random
from pathlib import Path

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from ismkit.engine import (
    LevelPartition,
    Origin,
    ReachabilityMatrix,
    ReferenceMatrix,
    build_digraph,
    compare_matrices,
    conical_matrix,
    dependence_power,
    driving_power,
    is_closed,
    load_reference,
    partition_levels,
    rank_powers,
    run_ism,
    transitive_closure,
)
from ismkit.errors import StructuralError, ValidationError
from ismkit.factors import data_path
from ismkit.ssim import Relation, SsimMatrix

GOLDEN = Path(__file__).parent / "golden"


def ids_for(n):
    return tuple(f"F{k}" for k in range(n))


def chain(*names):
    n = len(names)
    cells = np.zeros((n, n), dtype=bool)
    for k in range(n - 1):
        cells[k, k + 1] = True
    return ReachabilityMatrix.from_cells(names, cells)


@st.composite
def relations(draw, max_n=10):
    n = draw(st.integers(1, max_n))
    flat = draw(st.lists(st.booleans(), min_size=n * n, max_size=n * n))
    cells = np.array(flat, dtype=bool).reshape(n, n)
    np.fill_diagonal(cells, False)
    return ReachabilityMatrix.from_cells(ids_for(n), cells)


def as_lists(m):
    return [[bool(v) for v in row] for row in m.cells]


# --- closure ----------------------------------------------------------------


def test_identity_closure():
    m = ReachabilityMatrix.identity(ids_for(5))
    c = transitive_closure(m)
    assert c == m
    assert not c.has_transitive()


def test_paper_transitive_cell(report):
    assert report.initial.origin_of("P4", "P5") is Origin.DIRECT
    assert report.initial.origin_of("P5", "P14") is Origin.DIRECT
    assert report.closed.origin_of("P4", "P14") is Origin.TRANSITIVE
    assert report.closed.display()[3][13] == "1*"


def test_closure_matches_squaring_oracle_200_seeded():
    rng = random.Random(1234)
    for _ in range(200):
        n = rng.randint(1, 10)
        rel = oracles.random_relation(rng, n, rng.choice([0.1, 0.2, 0.35]))
        m = ReachabilityMatrix.from_cells(ids_for(n), rel)
        assert as_lists(transitive_closure(m)) == oracles.closure_by_squaring(rel)


@given(relations())
def test_closure_sound_against_path_search(m):
    edges = {(i, j) for i, j in zip(*np.nonzero(m.origin == Origin.DIRECT))}
    assert as_lists(transitive_closure(m)) == oracles.closure_by_search(edges, m.n)


@given(relations())
def test_closure_idempotent_and_monotone(m):
    c = transitive_closure(m)
    assert transitive_closure(c) == c
    assert is_closed(c)
    assert np.all(c.cells >= m.cells)
    kept = m.origin != Origin.ZERO
    assert np.array_equal(c.origin[kept], m.origin[kept])
    new = c.cells & ~m.cells
    assert np.all(c.origin[new] == Origin.TRANSITIVE)


def test_matrix_invariants():
    with pytest.raises(StructuralError):
        ReachabilityMatrix(("a", "b"), np.zeros((2, 2)))
    with pytest.raises(StructuralError):
        ReachabilityMatrix(("a",), np.ones((2, 2)))
    m = ReachabilityMatrix.identity(("a", "b"))
    with pytest.raises(ValueError):
        m.origin[0, 1] = 2


# --- powers and ranks -------------------------------------------------------


def test_identity_powers():
    m = ReachabilityMatrix.identity(ids_for(4))
    assert list(driving_power(m)) == [1, 1, 1, 1]
    assert list(dependence_power(m)) == [1, 1, 1, 1]


def test_chain_dependence():
    c = transitive_closure(chain("A", "B"))
    assert list(dependence_power(c)) == [1, 2]
    assert list(driving_power(c)) == [2, 1]


def test_paper_direct_row_p1(report):
    # P1 row before closure: P1, P5, P7, P10, P12, P13
    row = report.initial.cells[0]
    assert [report.initial.factor_ids[j] for j in np.flatnonzero(row)] == ["P1", "P5", "P7", "P10", "P12", "P13"]
    assert driving_power(report.initial)[0] == 6


def test_paper_closed_powers_match_path_oracle(report, ssim):
    edges = set()
    for (i, j), sym in ssim.cells.items():
        if sym in (Relation.V, Relation.X):
            edges.add((i, j))
        if sym in (Relation.A, Relation.X):
            edges.add((j, i))
    closed = oracles.closure_by_search(edges, 17)
    assert list(driving_power(report.closed)) == [sum(r) for r in closed]
    assert list(dependence_power(report.closed)) == [sum(col) for col in zip(*closed)]


@given(relations())
def test_power_sums_agree(m):
    c = transitive_closure(m)
    assert driving_power(c).sum() == dependence_power(c).sum() == c.cells.sum()
    assert driving_power(c).min() >= 1 and driving_power(c).max() <= c.n


@pytest.mark.parametrize(
    "powers, ranks",
    [([3, 1, 1], [1, 2, 2]), ([4, 4, 4], [1, 1, 1]), ([6, 8, 6, 10], [3, 2, 3, 1]), ([5], [1])],
)
def test_rank_powers(powers, ranks):
    assert list(rank_powers(powers)) == ranks


@given(st.lists(st.integers(1, 20), min_size=1, max_size=30))
def test_ranks_dense(powers):
    r = rank_powers(powers)
    assert sorted(set(r)) == list(range(1, len(set(powers)) + 1))
    for a, ra in zip(powers, r):
        for b, rb in zip(powers, r):
            assert (a > b) == (ra < rb)


# --- level partitioning -----------------------------------------------------


def test_no_relations_single_level():
    p = partition_levels(ReachabilityMatrix.identity(ids_for(4)))
    assert p.levels == (ids_for(4),)


def test_chain_levels():
    p = partition_levels(transitive_closure(chain("A", "B")))
    assert p.levels == (("B",), ("A",))


def test_unclosed_input_is_structural_error():
    # a 2-cycle plus an exit, left unclosed: a->b, b->a, b->c ... c is a sink so progress is made;
    # build a matrix where every factor reaches something that does not reach back.
    cells = np.zeros((3, 3), dtype=bool)
    cells[0, 1] = cells[1, 2] = cells[2, 0] = True
    cells[0, 2] = False
    m = ReachabilityMatrix.from_cells(("a", "b", "c"), cells)
    with pytest.raises(StructuralError, match="no progress"):
        partition_levels(m)


def test_paper_partition_matches_golden(report):
    golden = json.loads((GOLDEN / "paper_partition.json").read_text())
    assert report.partition.to_list() == golden["levels"]


@settings(max_examples=100)
@given(relations())
def test_partition_matches_definition_oracle(m):
    c = transitive_closure(m)
    p = partition_levels(c)
    assert p.to_list() == oracles.levels_by_definition(list(c.factor_ids), as_lists(c))
    flat = p.order
    assert len(flat) == len(set(flat)) == c.n


@given(relations())
def test_level_ordering(m):
    c = transitive_closure(m)
    level = partition_levels(c).level_of()
    ids = m.factor_ids
    for i, j in zip(*np.nonzero(m.origin == Origin.DIRECT)):
        if not c.cells[j, i]:
            assert level[ids[j]] < level[ids[i]]


# --- conical matrix ---------------------------------------------------------


def test_conical_chain():
    c = transitive_closure(chain("A", "B"))
    con = conical_matrix(c, LevelPartition((("B",), ("A",))))
    assert con.factor_ids == ("B", "A")
    assert con.cell("A", "B") and not con.cell("B", "A")


def test_conical_identity_unchanged():
    m = ReachabilityMatrix.identity(ids_for(3))
    assert conical_matrix(m, LevelPartition((ids_for(3),))) == m


def test_conical_partition_mismatch():
    m = ReachabilityMatrix.identity(ids_for(3))
    with pytest.raises(ValidationError):
        conical_matrix(m, LevelPartition((("F0", "F1"),)))


def test_paper_conical_is_permutation(report):
    con, closed = report.conical, report.closed
    assert con.factor_ids == report.partition.order
    assert sorted(con.origin.ravel()) == sorted(closed.origin.ravel())
    for a in closed.factor_ids:
        for b in closed.factor_ids:
            assert con.origin_of(a, b) is closed.origin_of(a, b)


# --- digraph ----------------------------------------------------------------


def test_digraph_chain():
    d = chain("A", "B")
    c = transitive_closure(d)
    g = build_digraph(d, c, partition_levels(c))
    assert g.nodes == (("A", 2), ("B", 1))
    assert g.edges == (("A", "B"),)


def test_digraph_triangle():
    cells = np.zeros((3, 3), dtype=bool)
    cells[0, 1] = cells[1, 2] = cells[0, 2] = True
    d = ReachabilityMatrix.from_cells(("A", "B", "C"), cells)
    c = transitive_closure(d)
    g = build_digraph(d, c, partition_levels(c))
    assert g.edges == (("A", "B"), ("B", "C"))


def test_digraph_rejects_wrong_closure():
    d = chain("A", "B", "C")
    with pytest.raises(ValidationError, match="not the closure"):
        build_digraph(d, d, LevelPartition((("C",), ("B",), ("A",))))


def test_paper_digraph_matches_oracle(report):
    golden = json.loads((GOLDEN / "paper_digraph_edges.json").read_text())
    assert [list(e) for e in report.digraph.edges] == golden["edges"]
    assert len(report.digraph.nodes) == 17


def _edge_index(m, edges):
    ids = m.factor_ids
    return {(ids.index(a), ids.index(b)) for a, b in edges}


@settings(max_examples=150)
@given(relations())
def test_digraph_soundness(m):
    c = transitive_closure(m)
    g = build_digraph(m, c, partition_levels(c))
    kept = _edge_index(m, g.edges)
    direct = {(i, j) for i, j in zip(*np.nonzero(m.origin == Origin.DIRECT))}
    assert kept <= direct
    assert oracles.closure_by_search(kept, m.n) == oracles.closure_by_search(direct, m.n)
    for e in kept:
        assert oracles.closure_by_search(kept - {e}, m.n) != oracles.closure_by_search(kept, m.n)
    assert kept == oracles.reduction_by_closure(sorted(direct), m.n)


@given(relations())
def test_digraph_dag_unique_reduction(m):
    # upper-triangular part only: a DAG, whose transitive reduction is unique
    upper = np.triu(m.cells, 1)
    d = ReachabilityMatrix.from_cells(m.factor_ids, upper)
    c = transitive_closure(d)
    g = build_digraph(d, c, partition_levels(c))
    direct = {(i, j) for i, j in zip(*np.nonzero(upper))}
    assert _edge_index(d, g.edges) == oracles.dag_reduction(direct, d.n)


def test_dot_groups_levels(report):
    dot = report.digraph.to_dot()
    assert dot.startswith("digraph ism {")
    assert dot.count("subgraph cluster_level") == len(report.partition.levels)
    assert dot.count("rank=same;") == len(report.partition.levels)
    assert dot.count(" -> ") == len(report.digraph.edges)


# --- pipeline ---------------------------------------------------------------


def test_single_factor_pipeline():
    r = run_ism(SsimMatrix(("F",), {}))
    assert r.closed.n == 1
    assert list(r.profile.driving_power) == [1]
    assert r.partition.levels == (("F",),)
    assert r.digraph.edges == ()


def test_all_o_pipeline():
    ids = ids_for(4)
    r = run_ism(SsimMatrix(ids, {(i, j): Relation.O for i in range(4) for j in range(i + 1, 4)}))
    assert r.closed == ReachabilityMatrix.identity(ids)
    assert list(r.profile.driving_power) == [1] * 4
    assert len(r.partition.levels) == 1
    assert r.digraph.edges == ()


def test_report_sections(report):
    doc = report.to_dict()
    for key in ("matrix", "powers", "ranks", "levels", "edges"):
        assert key in doc
    assert doc["matrix"]["cells"][3][13] == "1*"


def test_pipeline_deterministic(ssim):
    assert run_ism(ssim).to_json() == run_ism(ssim).to_json()
    assert run_ism(ssim).digraph.to_dot() == run_ism(ssim).digraph.to_dot()


# --- audit ------------------------------------------------------------------


def test_compare_self_is_empty(report):
    diff = compare_matrices(report.closed, ReferenceMatrix.from_matrix(report.closed, with_powers=True))
    assert diff.is_empty()


def test_compare_without_powers(report):
    diff = compare_matrices(report.closed, ReferenceMatrix.from_matrix(report.closed))
    assert diff.to_dict()["powers"] == "absent"


def test_compare_dimension_mismatch(report):
    with pytest.raises(ValidationError, match="dimension"):
        compare_matrices(report.closed, ReferenceMatrix.from_matrix(ReachabilityMatrix.identity(ids_for(3))))


def test_compare_paper_table(report):
    ref = load_reference(data_path("paper_reachability.json"))
    d = compare_matrices(report.closed, ref).to_dict()
    cells = {(c["row"], c["column"]) for c in d["cell_mismatches"]}
    assert ("P2", "P13") in cells
    flags = d["powers"]["reference_arithmetic"]
    assert {"quantity": "driving_power", "factor": "P4", "printed": 9, "recount": 10} in flags
    assert not any(f["factor"] == "P1" and f["quantity"] == "driving_power" for f in flags)
    # equal printed DIV 6 for P1 and P9 printed as ranks 4 and 5
    ranks = {(f["factor"], f["quantity"]): f for f in flags if "rank" in f["quantity"]}
    assert ("P9", "driving_rank") in ranks or ("P1", "driving_rank") in ranks


def test_compare_initial_vs_printed_spot_cells(report):
    ref = load_reference(data_path("paper_reachability.json"))
    d = compare_matrices(report.initial, ref)
    cells = {(c["row"], c["column"]) for c in d.cell_mismatches}
    for cell in [("P1", "P13"), ("P13", "P1"), ("P1", "P17"), ("P4", "P5")]:
        assert cell not in cells
