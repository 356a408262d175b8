"""Reference implementations the engine is checked against.

Deliberately naive: plain Python sets and lists, no numpy, no shared code
with ismkit.engine.
"""

import random
from itertools import product


def random_relation(rng: random.Random, n: int, density: float) -> list[list[bool]]:
    """Off-diagonal random boolean relation (diagonal left False)."""
    return [[i != j and rng.random() < density for j in range(n)] for i in range(n)]


def closure_by_squaring(rel: list[list[bool]]) -> list[list[bool]]:
    """Reflexive-transitive closure: square the relation until it stops changing."""
    n = len(rel)
    r = [[rel[i][j] or i == j for j in range(n)] for i in range(n)]
    while True:
        sq = [[any(r[i][k] and r[k][j] for k in range(n)) for j in range(n)] for i in range(n)]
        if sq == r:
            return r
        r = sq


def reachable(edges: set, n: int, src: int) -> set:
    seen, todo = {src}, [src]
    while todo:
        k = todo.pop()
        for a, b in edges:
            if a == k and b not in seen:
                seen.add(b)
                todo.append(b)
    return seen


def closure_by_search(edges: set, n: int) -> list[list[bool]]:
    sets = [reachable(edges, n, i) for i in range(n)]
    return [[j in sets[i] for j in range(n)] for i in range(n)]


def levels_by_definition(ids: list[str], closed: list[list[bool]]) -> list[list[str]]:
    """Warfield extraction straight from the reachability/antecedent set definitions."""
    n = len(ids)
    left = set(range(n))
    levels = []
    while left:
        reach = {i: {j for j in left if closed[i][j]} for i in left}
        ante = {i: {j for j in left if closed[j][i]} for i in left}
        top = sorted(i for i in left if reach[i] & ante[i] == reach[i])
        assert top, "no progress"
        levels.append([ids[i] for i in top])
        left -= set(top)
    return levels


def reduction_by_closure(edges: list[tuple[int, int]], n: int) -> set:
    """Greedy minimal equivalent graph: drop each edge (row-major) whose removal keeps the closure."""
    kept = set(edges)
    target = closure_by_search(kept, n)
    for e in sorted(edges):
        trial = kept - {e}
        if closure_by_search(trial, n) == target:
            kept = trial
    return kept


def dag_reduction(edges: set, n: int) -> set:
    """Unique transitive reduction of a DAG: (i, j) survives iff no k strictly between."""
    c = closure_by_search(edges, n)
    return {
        (i, j)
        for i, j in edges
        if not any(k not in (i, j) and c[i][k] and c[k][j] for k in range(n))
    }


def quadrant_grid(n: int):
    return product(range(1, n + 1), repeat=2)
