"""ISM steps after the SSIM: closure, powers, level partitioning, conical
matrix and the reduced digraph.

Matrices are numpy ``uint8`` arrays of :class:`Origin` codes; a cell is "on"
iff its origin is not ``ZERO``. Arrays are frozen (``writeable=False``) so a
``ReachabilityMatrix`` can be shared freely.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import IntEnum
from typing import Iterable, Optional, Sequence

import numpy as np

from ismkit.errors import ParseError, StructuralError, ValidationError


class Origin(IntEnum):
    ZERO = 0
    DIAGONAL = 1
    DIRECT = 2
    TRANSITIVE = 3


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=np.uint8, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class ReachabilityMatrix:
    factor_ids: tuple[str, ...]
    origin: np.ndarray

    def __post_init__(self):
        ids = tuple(self.factor_ids)
        object.__setattr__(self, "factor_ids", ids)
        origin = _frozen(self.origin)
        n = len(ids)
        if origin.shape != (n, n):
            raise StructuralError(f"matrix shape {origin.shape} does not match {n} factor ids")
        if len(set(ids)) != n:
            raise StructuralError("duplicate factor ids")
        if n and origin.max() > Origin.TRANSITIVE:
            raise StructuralError("unknown origin code")
        if n and not np.all(np.diag(origin) != Origin.ZERO):
            raise StructuralError("diagonal cells must all be 1")
        object.__setattr__(self, "origin", origin)

    @classmethod
    def from_cells(cls, factor_ids: Sequence[str], cells) -> "ReachabilityMatrix":
        """Build from a boolean matrix: diagonal becomes DIAGONAL, other 1s DIRECT."""
        cells = np.asarray(cells, dtype=bool)
        origin = np.where(cells, Origin.DIRECT, Origin.ZERO).astype(np.uint8)
        np.fill_diagonal(origin, Origin.DIAGONAL)
        return cls(tuple(factor_ids), origin)

    @classmethod
    def identity(cls, factor_ids: Sequence[str]) -> "ReachabilityMatrix":
        n = len(factor_ids)
        return cls.from_cells(factor_ids, np.zeros((n, n), dtype=bool))

    @property
    def n(self) -> int:
        return len(self.factor_ids)

    @property
    def cells(self) -> np.ndarray:
        return self.origin != Origin.ZERO

    def index_of(self, factor_id: str) -> int:
        return self.factor_ids.index(factor_id)

    def cell(self, src: str, dst: str) -> bool:
        return bool(self.cells[self.index_of(src), self.index_of(dst)])

    def origin_of(self, src: str, dst: str) -> Origin:
        return Origin(int(self.origin[self.index_of(src), self.index_of(dst)]))

    def has_transitive(self) -> bool:
        return bool(np.any(self.origin == Origin.TRANSITIVE))

    def display(self) -> list[list]:
        """Cells as printed in ISM tables: 0, 1, or the string "1*" for closure cells."""
        table = {0: 0, 1: 1, 2: 1, 3: "1*"}
        return [[table[int(v)] for v in row] for row in self.origin]

    def to_dict(self) -> dict:
        return {"factor_ids": list(self.factor_ids), "cells": self.display()}

    def __eq__(self, other):
        if not isinstance(other, ReachabilityMatrix):
            return NotImplemented
        return self.factor_ids == other.factor_ids and np.array_equal(self.origin, other.origin)

    def __hash__(self):
        return hash((self.factor_ids, self.origin.tobytes()))


# --- closure and powers -----------------------------------------------------


def transitive_closure(m: ReachabilityMatrix) -> ReachabilityMatrix:
    """Reflexive-transitive closure (Warshall); cells it switches on are TRANSITIVE.

    Existing origins are kept, so applying it to an already closed matrix is
    a no-op.
    """
    reach = m.cells.copy()
    for k in range(m.n):
        reach |= np.outer(reach[:, k], reach[k, :])
    origin = np.array(m.origin)
    origin[reach & (origin == Origin.ZERO)] = Origin.TRANSITIVE
    return ReachabilityMatrix(m.factor_ids, origin)


def is_closed(m: ReachabilityMatrix) -> bool:
    c = m.cells.astype(np.int64)
    return bool(np.array_equal((c @ c) > 0, m.cells))


def driving_power(m: ReachabilityMatrix) -> np.ndarray:
    """Row sums of the matrix, diagonal and closure cells included."""
    return m.cells.sum(axis=1).astype(int)


def dependence_power(m: ReachabilityMatrix) -> np.ndarray:
    """Column sums of the matrix, diagonal and closure cells included."""
    return m.cells.sum(axis=0).astype(int)


def rank_powers(powers: Iterable[int]) -> np.ndarray:
    """Dense descending ranks: highest power is rank 1, ties share, no gaps."""
    powers = np.asarray(list(powers))
    distinct = np.unique(powers)[::-1]
    rank_of = {int(p): r for r, p in enumerate(distinct, start=1)}
    return np.array([rank_of[int(p)] for p in powers], dtype=int)


@dataclass(frozen=True, eq=False)
class PowerProfile:
    factor_ids: tuple[str, ...]
    driving_power: np.ndarray
    dependence_power: np.ndarray
    driving_rank: np.ndarray
    dependence_rank: np.ndarray

    @property
    def n(self) -> int:
        return len(self.factor_ids)

    def to_dict(self) -> dict:
        return {
            "powers": {
                "driving": _int_map(self.factor_ids, self.driving_power),
                "dependence": _int_map(self.factor_ids, self.dependence_power),
            },
            "ranks": {
                "driving": _int_map(self.factor_ids, self.driving_rank),
                "dependence": _int_map(self.factor_ids, self.dependence_rank),
            },
        }


def _int_map(ids, values) -> dict:
    return {i: int(v) for i, v in zip(ids, values)}


def power_profile(m: ReachabilityMatrix) -> PowerProfile:
    drv, dep = driving_power(m), dependence_power(m)
    return PowerProfile(m.factor_ids, drv, dep, rank_powers(drv), rank_powers(dep))


# --- level partitioning -----------------------------------------------------


@dataclass(frozen=True)
class LevelPartition:
    levels: tuple[tuple[str, ...], ...]

    def __post_init__(self):
        object.__setattr__(self, "levels", tuple(tuple(lv) for lv in self.levels))

    def level_of(self) -> dict[str, int]:
        return {f: k for k, lv in enumerate(self.levels, start=1) for f in lv}

    @property
    def order(self) -> tuple[str, ...]:
        return tuple(f for lv in self.levels for f in lv)

    def to_list(self) -> list[list[str]]:
        return [list(lv) for lv in self.levels]


def partition_levels(m: ReachabilityMatrix) -> LevelPartition:
    """Warfield level extraction on a closed matrix, top level first.

    In each round, over the factors not yet assigned, a factor whose
    reachability set is contained in its antecedent set joins the level.
    Factors within a level keep the matrix order.
    """
    cells = m.cells
    remaining = list(range(m.n))
    levels = []
    while remaining:
        sub = cells[np.ix_(remaining, remaining)]
        # R(i) subset of A(i)  <=>  for all j: sub[i, j] implies sub[j, i]
        top = [remaining[k] for k in range(len(remaining)) if not np.any(sub[k] & ~sub[:, k])]
        if not top:
            raise StructuralError(
                f"level partitioning made no progress with {len(remaining)} factors left; matrix is not closed"
            )
        levels.append(tuple(m.factor_ids[i] for i in top))
        taken = set(top)
        remaining = [i for i in remaining if i not in taken]
    return LevelPartition(tuple(levels))


def _check_partition(m: ReachabilityMatrix, p: LevelPartition):
    order = p.order
    if len(order) != len(set(order)) or set(order) != set(m.factor_ids):
        raise ValidationError("level partition does not partition the matrix factors")


def conical_matrix(m: ReachabilityMatrix, p: LevelPartition) -> ReachabilityMatrix:
    """Rows and columns reordered by level (level 1 first); matrix order within a level."""
    _check_partition(m, p)
    level = p.level_of()
    perm = sorted(range(m.n), key=lambda i: (level[m.factor_ids[i]], i))
    return ReachabilityMatrix(tuple(m.factor_ids[i] for i in perm), m.origin[np.ix_(perm, perm)])


# --- digraph ----------------------------------------------------------------


@dataclass(frozen=True)
class Digraph:
    nodes: tuple[tuple[str, int], ...]
    edges: tuple[tuple[str, str], ...]

    def __post_init__(self):
        names = {n for n, _ in self.nodes}
        for s, t in self.edges:
            if s == t:
                raise StructuralError(f"self-loop on {s}")
            if s not in names or t not in names:
                raise StructuralError(f"edge {s}->{t} has an unknown endpoint")

    def to_dot(self, name: str = "ism") -> str:
        by_level: dict[int, list[str]] = {}
        for node, lv in self.nodes:
            by_level.setdefault(lv, []).append(node)
        lines = [f"digraph {name} {{", "  rankdir=BT;", '  node [shape=box, fontname="Helvetica"];']
        for lv in sorted(by_level):
            lines.append(f"  subgraph cluster_level{lv} {{")
            lines.append(f'    label="Level {lv}";')
            lines.append("    rank=same;")
            for node in by_level[lv]:
                lines.append(f'    "{node}";')
            lines.append("  }")
        # Bottom-to-top layout puts level 1 (the factors others lead to) on top.
        for s, t in self.edges:
            lines.append(f'  "{s}" -> "{t}";')
        lines.append("}")
        return "\n".join(lines) + "\n"


def _reaches_without(adj: np.ndarray, src: int, dst: int) -> bool:
    """True if dst is reachable from src along adj without the edge src->dst."""
    n = len(adj)
    seen = np.zeros(n, dtype=bool)
    seen[src] = True
    stack = [k for k in np.flatnonzero(adj[src]) if k != dst and k != src]
    for k in stack:
        seen[k] = True
    while stack:
        k = stack.pop()
        for nxt in np.flatnonzero(adj[k]):
            if nxt == dst:
                return True
            if not seen[nxt]:
                seen[nxt] = True
                stack.append(nxt)
    return False


def build_digraph(direct: ReachabilityMatrix, closed: ReachabilityMatrix, p: LevelPartition) -> Digraph:
    """Direct relations with redundant edges pruned, nodes tagged with their level.

    Candidates are visited in row-major order; an edge is dropped when its
    endpoints stay connected through the edges still present. The surviving
    set therefore has the same closure as the direct relation and no edge is
    implied by a longer path. Within a cycle the lowest-index edges that
    still close it are the ones kept.
    """
    if direct.factor_ids != closed.factor_ids:
        raise ValidationError("direct and closed matrices have different factor ids")
    if direct.has_transitive():
        raise ValidationError("direct matrix already contains closure cells")
    if not np.array_equal(transitive_closure(direct).cells, closed.cells):
        raise ValidationError("closed matrix is not the closure of the direct matrix")
    _check_partition(direct, p)

    adj = direct.origin == Origin.DIRECT
    for i in range(direct.n):
        for j in range(direct.n):
            if adj[i, j] and _reaches_without(adj, i, j):
                adj[i, j] = False
    level = p.level_of()
    ids = direct.factor_ids
    nodes = tuple((f, level[f]) for f in ids)
    edges = tuple((ids[i], ids[j]) for i, j in zip(*np.nonzero(adj)))
    return Digraph(nodes, edges)


# --- full pipeline ----------------------------------------------------------


@dataclass(frozen=True, eq=False)
class ISMReport:
    initial: ReachabilityMatrix
    closed: ReachabilityMatrix
    profile: PowerProfile
    partition: LevelPartition
    conical: ReachabilityMatrix
    digraph: Digraph

    def to_dict(self) -> dict:
        prof = self.profile.to_dict()
        return {
            "factor_ids": list(self.closed.factor_ids),
            "matrix": {"cells": self.closed.display()},
            "powers": prof["powers"],
            "ranks": prof["ranks"],
            "levels": self.partition.to_list(),
            "edges": [list(e) for e in self.digraph.edges],
            "conical": self.conical.to_dict(),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, ensure_ascii=False) + "\n"

    def level_table(self) -> str:
        rows = [f"{'level':<6} factors"]
        for k, lv in enumerate(self.partition.levels, start=1):
            rows.append(f"{k:<6} {', '.join(lv)}")
        return "\n".join(rows) + "\n"


def run_ism(ssim) -> ISMReport:
    """SSIM -> initial matrix -> closure -> powers -> levels -> conical matrix -> digraph."""
    from ismkit.ssim import to_initial_reachability

    initial = to_initial_reachability(ssim)
    closed = transitive_closure(initial)
    partition = partition_levels(closed)
    return ISMReport(
        initial=initial,
        closed=closed,
        profile=power_profile(closed),
        partition=partition,
        conical=conical_matrix(closed, partition),
        digraph=build_digraph(initial, closed, partition),
    )


# --- audit against a printed reference --------------------------------------


@dataclass(frozen=True, eq=False)
class ReferenceMatrix:
    """A transcribed matrix, possibly with printed powers and ranks.

    Unlike :class:`ReachabilityMatrix` nothing about it is trusted: the
    diagonal may be wrong and the printed sums need not match the cells.
    """

    factor_ids: tuple[str, ...]
    origin: np.ndarray
    driving_power: Optional[tuple[int, ...]] = None
    driving_rank: Optional[tuple[int, ...]] = None
    dependence_power: Optional[tuple[int, ...]] = None
    dependence_rank: Optional[tuple[int, ...]] = None

    @classmethod
    def from_matrix(cls, m: ReachabilityMatrix, with_powers: bool = False) -> "ReferenceMatrix":
        if not with_powers:
            return cls(m.factor_ids, m.origin)
        prof = power_profile(m)
        return cls(
            m.factor_ids,
            m.origin,
            tuple(int(v) for v in prof.driving_power),
            tuple(int(v) for v in prof.driving_rank),
            tuple(int(v) for v in prof.dependence_power),
            tuple(int(v) for v in prof.dependence_rank),
        )

    @property
    def cells(self) -> np.ndarray:
        return np.asarray(self.origin) != Origin.ZERO


_OPTIONAL_VECTORS = ("driving_power", "driving_rank", "dependence_power", "dependence_rank")


def _parse_cell(value, i: int, j: int, where: str) -> Origin:
    token = str(value).strip()
    if token == "0":
        return Origin.ZERO
    if token == "1":
        return Origin.DIAGONAL if i == j else Origin.DIRECT
    if token == "1*":
        return Origin.TRANSITIVE
    raise ParseError(f"{where}: cell ({i + 1}, {j + 1}) has illegal value {value!r}; expected 0, 1 or 1*")


def reference_from_dict(doc: dict, where: str = "reference") -> ReferenceMatrix:
    if not isinstance(doc, dict):
        raise ParseError(f"{where}: top level must be an object")
    extra = sorted(set(doc) - {"factor_ids", "cells", *_OPTIONAL_VECTORS})
    if extra:
        raise ParseError(f"{where}: unknown field(s) {', '.join(extra)}")
    if "factor_ids" not in doc or "cells" not in doc:
        raise ParseError(f"{where}: 'factor_ids' and 'cells' are required")
    ids = tuple(str(x) for x in doc["factor_ids"])
    rows = doc["cells"]
    n = len(ids)
    if len(rows) != n or any(len(r) != n for r in rows):
        raise ValidationError(f"{where}: cells must be {n}x{n} to match factor_ids")
    origin = np.array([[_parse_cell(v, i, j, where) for j, v in enumerate(row)] for i, row in enumerate(rows)])
    vectors = {}
    for key in _OPTIONAL_VECTORS:
        if doc.get(key) is not None:
            vec = tuple(int(v) for v in doc[key])
            if len(vec) != n:
                raise ValidationError(f"{where}: '{key}' has {len(vec)} entries, expected {n}")
            vectors[key] = vec
    return ReferenceMatrix(ids, origin.reshape(n, n).astype(np.uint8), **vectors)


def load_reference(path) -> ReferenceMatrix:
    from pathlib import Path

    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ParseError(f"{path}: cannot read file ({exc.strerror})") from None
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    return reference_from_dict(doc, where=str(path))


@dataclass
class MatrixDiff:
    cell_mismatches: list[dict] = field(default_factory=list)
    origin_mismatches: list[dict] = field(default_factory=list)
    power_mismatches: Optional[list[dict]] = None
    arithmetic_flags: Optional[list[dict]] = None
    recomputed_ranks: Optional[dict] = None

    def is_empty(self) -> bool:
        return not (self.cell_mismatches or self.origin_mismatches or self.power_mismatches or self.arithmetic_flags)

    def to_dict(self) -> dict:
        out = {
            "identical": self.is_empty(),
            "cell_mismatches": self.cell_mismatches,
            "origin_mismatches": self.origin_mismatches,
        }
        if self.power_mismatches is None:
            out["powers"] = "absent"
        else:
            out["powers"] = {
                "mismatches": self.power_mismatches,
                "reference_arithmetic": self.arithmetic_flags,
                "recomputed_ranks": self.recomputed_ranks,
            }
        return out


_DISPLAY = {Origin.ZERO: "0", Origin.DIAGONAL: "1", Origin.DIRECT: "1", Origin.TRANSITIVE: "1*"}


def compare_matrices(computed: ReachabilityMatrix, reference: ReferenceMatrix) -> MatrixDiff:
    """Cell, origin (1 vs 1*) and power/rank differences against a reference.

    Besides comparing printed powers with the recomputed ones, each printed
    power is checked against a recount of the reference's own row or column,
    which is what exposes arithmetic slips in a transcribed table.
    """
    if tuple(reference.factor_ids) != computed.factor_ids:
        if len(reference.factor_ids) != computed.n:
            raise ValidationError(f"dimension mismatch: computed {computed.n}x{computed.n}, "
                                  f"reference {len(reference.factor_ids)}x{len(reference.factor_ids)}")
        raise ValidationError("computed and reference matrices list different factor ids")
    ids = computed.factor_ids
    diff = MatrixDiff()
    ref_origin = np.asarray(reference.origin)
    for i in range(computed.n):
        for j in range(computed.n):
            c, r = Origin(int(computed.origin[i, j])), Origin(int(ref_origin[i, j]))
            c_on, r_on = c is not Origin.ZERO, r is not Origin.ZERO
            if c_on != r_on:
                diff.cell_mismatches.append(
                    {"row": ids[i], "column": ids[j], "computed": _DISPLAY[c], "reference": _DISPLAY[r]}
                )
            elif c_on and (c is Origin.TRANSITIVE) != (r is Origin.TRANSITIVE):
                diff.origin_mismatches.append(
                    {"row": ids[i], "column": ids[j], "computed": _DISPLAY[c], "reference": _DISPLAY[r]}
                )

    if not any(getattr(reference, k) is not None for k in _OPTIONAL_VECTORS):
        return diff

    prof = power_profile(computed)
    computed_vectors = {
        "driving_power": prof.driving_power,
        "driving_rank": prof.driving_rank,
        "dependence_power": prof.dependence_power,
        "dependence_rank": prof.dependence_rank,
    }
    diff.power_mismatches = []
    for key in _OPTIONAL_VECTORS:
        printed = getattr(reference, key)
        if printed is None:
            continue
        for f, c, r in zip(ids, computed_vectors[key], printed):
            if int(c) != int(r):
                diff.power_mismatches.append({"quantity": key, "factor": f, "computed": int(c), "reference": int(r)})

    diff.arithmetic_flags = []
    recount = {"driving_power": reference.cells.sum(axis=1), "dependence_power": reference.cells.sum(axis=0)}
    for key, counts in recount.items():
        printed = getattr(reference, key)
        if printed is None:
            continue
        for f, cnt, r in zip(ids, counts, printed):
            if int(cnt) != int(r):
                diff.arithmetic_flags.append({"quantity": key, "factor": f, "printed": int(r), "recount": int(cnt)})
        rank_key = key.replace("power", "rank")
        printed_rank = getattr(reference, rank_key)
        if printed_rank is not None:
            expected = rank_powers(printed)
            for f, want, got in zip(ids, expected, printed_rank):
                if int(want) != int(got):
                    diff.arithmetic_flags.append(
                        {"quantity": rank_key, "factor": f, "printed": int(got), "dense_rank_of_printed_power": int(want)}
                    )
    diff.recomputed_ranks = {
        "driving": _int_map(ids, prof.driving_rank),
        "dependence": _int_map(ids, prof.dependence_rank),
    }
    return diff
