"""Structural Self-Interaction Matrix: parsing, serialization, pair order and
conversion to the initial reachability matrix.

File layout (comma separated, UTF-8)::

    ,P1,P2,P3
    P1,*,V,O
    P2,*,*,A
    P3,*,*,*

Row ``k`` either spans all ``n`` columns (cells on or below the diagonal
blank or ``*``) or lists only the ``n - k`` symbols right of the diagonal.
Symbols are case-insensitive.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from ismkit.engine import Origin, ReachabilityMatrix
from ismkit.errors import ParseError, ValidationError


class Relation(str, Enum):
    V = "V"  # row factor leads to column factor
    A = "A"  # column factor leads to row factor
    X = "X"  # both directions
    O = "O"  # noqa: E741  no relation

    def flipped(self) -> "Relation":
        return {Relation.V: Relation.A, Relation.A: Relation.V}.get(self, self)


_FILLER = {"", "*"}


def parse_symbol(token: str) -> Relation:
    try:
        return Relation(token.strip().upper())
    except ValueError:
        raise ParseError(f"illegal symbol {token.strip()!r}; expected one of V, A, X, O") from None


@dataclass(frozen=True)
class SsimMatrix:
    factor_ids: tuple[str, ...]
    cells: Mapping[tuple[int, int], Relation]

    def __post_init__(self):
        ids = tuple(self.factor_ids)
        object.__setattr__(self, "factor_ids", ids)
        if len(set(ids)) != len(ids):
            raise ParseError(f"duplicate factor ids: {_dupes(ids)}")
        n = len(ids)
        cells = {}
        for (i, j), sym in self.cells.items():
            if i == j or not (0 <= i < n and 0 <= j < n):
                raise ParseError(f"invalid SSIM pair ({i}, {j})")
            sym = sym if isinstance(sym, Relation) else parse_symbol(sym)
            key, sym = ((i, j), sym) if i < j else ((j, i), sym.flipped())
            if key in cells and cells[key] is not sym:
                raise ParseError(f"contradictory entries for {ids[key[0]]}/{ids[key[1]]}")
            cells[key] = sym
        missing = [(i, j) for i in range(n) for j in range(i + 1, n) if (i, j) not in cells]
        if missing:
            i, j = missing[0]
            raise ParseError(f"missing cell (row {ids[i]}, column {ids[j]}); {len(missing)} pair(s) unset")
        object.__setattr__(self, "cells", dict(sorted(cells.items())))

    @property
    def n(self) -> int:
        return len(self.factor_ids)

    def relation(self, m: str, n: str) -> Relation:
        """Symbol read as "m relative to n", whichever triangle stores it."""
        i, j = self.factor_ids.index(m), self.factor_ids.index(n)
        if i < j:
            return self.cells[(i, j)]
        if i > j:
            return self.cells[(j, i)].flipped()
        raise KeyError("the SSIM has no diagonal entries")

    def dumps(self) -> str:
        return format_ssim(self.factor_ids, self.cells)


def _dupes(ids) -> str:
    seen, dup = set(), []
    for i in ids:
        if i in seen and i not in dup:
            dup.append(i)
        seen.add(i)
    return ", ".join(dup)


def format_ssim(factor_ids: Sequence[str], answers: Mapping[tuple[int, int], Relation]) -> str:
    """Serialize a full or partial SSIM; unanswered upper cells are left blank."""
    n = len(factor_ids)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["", *factor_ids])
    for i, fid in enumerate(factor_ids):
        row = [fid]
        for j in range(n):
            if j <= i:
                row.append("*")
            else:
                sym = answers.get((i, j))
                row.append(sym.value if sym is not None else "")
        w.writerow(row)
    return buf.getvalue()


def read_answers(text: str, where: str = "ssim") -> tuple[tuple[str, ...], dict[tuple[int, int], Relation]]:
    """Parse an SSIM table that may have blank upper cells (an unfinished elicitation)."""
    rows = [r for r in csv.reader(io.StringIO(text)) if any(c.strip() for c in r)]
    if not rows:
        raise ParseError(f"{where}: empty SSIM file")
    header = [c.strip() for c in rows[0]]
    # The corner cell is optional: without it the header starts with the first row's id.
    if len(rows) > 1 and header[0] and header[0] == rows[1][0].strip():
        ids = header
    else:
        ids = header[1:]
    while ids and ids[-1] == "":
        ids.pop()
    if any(not c for c in ids):
        raise ParseError(f"{where}: row 1: blank factor id in header")
    if len(set(ids)) != len(ids):
        raise ParseError(f"{where}: row 1: duplicate factor ids: {_dupes(ids)}")
    n = len(ids)
    body = rows[1:]
    if len(body) != n:
        raise ParseError(f"{where}: header lists {n} factors but body has {len(body)} rows")
    answers: dict[tuple[int, int], Relation] = {}
    for k, row in enumerate(body):
        lineno = k + 2
        row = [c.strip() for c in row]
        rid, cells = row[0], row[1:]
        if rid != ids[k]:
            raise ParseError(f"{where}: row {lineno}: expected factor {ids[k]!r}, found {rid!r}")
        while len(cells) > n and cells[-1] == "":
            cells.pop()
        if len(cells) == n:
            lower, upper = cells[: k + 1], cells[k + 1:]
        elif len(cells) <= n - k - 1:
            lower, upper = [], cells + [""] * (n - k - 1 - len(cells))
        else:
            raise ParseError(f"{where}: row {lineno} ({rid}): expected {n} or {n - k - 1} cells, found {len(cells)}")
        for j, tok in enumerate(lower):
            if tok not in _FILLER:
                raise ParseError(
                    f"{where}: row {lineno} ({rid}), column {ids[j]}: lower-triangle cell must be blank or '*', "
                    f"found {tok!r}"
                )
        for off, tok in enumerate(upper):
            j = k + 1 + off
            if tok == "":
                continue
            try:
                answers[(k, j)] = parse_symbol(tok)
            except ParseError as exc:
                raise ParseError(f"{where}: row {lineno} ({rid}), column {ids[j]}: {exc}") from None
    return tuple(ids), answers


def parse_ssim(text: str, catalog=None, where: str = "ssim") -> SsimMatrix:
    """Parse a complete SSIM table, optionally checking ids against a catalog."""
    ids, answers = read_answers(text, where)
    n = len(ids)
    for i in range(n):
        for j in range(i + 1, n):
            if (i, j) not in answers:
                raise ParseError(f"{where}: row {i + 2} ({ids[i]}), column {ids[j]}: missing cell")
    if catalog is not None:
        unknown = [f for f in ids if f not in catalog]
        if unknown:
            raise ValidationError(f"{where}: factor id(s) not in catalog: {', '.join(unknown)}")
    return SsimMatrix(ids, answers)


def load_ssim(path, catalog=None) -> SsimMatrix:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ParseError(f"{path}: cannot read file ({exc.strerror})") from None
    return parse_ssim(text, catalog, where=str(path))


def elicit_pairs(factor_ids: Sequence[str]) -> list[tuple[str, str]]:
    """All unordered pairs in row-major upper-triangular order."""
    if len(set(factor_ids)) != len(factor_ids):
        raise ParseError(f"duplicate factor ids: {_dupes(factor_ids)}")
    ids = list(factor_ids)
    return [(ids[i], ids[j]) for i in range(len(ids)) for j in range(i + 1, len(ids))]


def to_initial_reachability(ssim: SsimMatrix) -> ReachabilityMatrix:
    n = ssim.n
    origin = np.zeros((n, n), dtype=np.uint8)
    np.fill_diagonal(origin, Origin.DIAGONAL)
    for (i, j), sym in ssim.cells.items():
        if sym in (Relation.V, Relation.X):
            origin[i, j] = Origin.DIRECT
        if sym in (Relation.A, Relation.X):
            origin[j, i] = Origin.DIRECT
    return ReachabilityMatrix(ssim.factor_ids, origin)


def paper_ssim(catalog=None) -> SsimMatrix:
    """The 17-principle expert SSIM bundled with the package."""
    from ismkit.factors import data_path

    return load_ssim(data_path("paper_ssim.csv"), catalog)
