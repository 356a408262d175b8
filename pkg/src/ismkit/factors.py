"""Factors, factor catalogs and the motivator/demotivator -> principle taxonomy.

Catalog order is the row/column order of every matrix built downstream, so
a catalog is an ordered, immutable tuple of factors rather than a mapping.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from enum import Enum
from importlib import resources
from pathlib import Path
from typing import Iterable, Iterator, Optional, Union

from ismkit.errors import ParseError

PathLike = Union[str, Path]


class FactorKind(str, Enum):
    MOTIVATOR = "Motivator"
    DEMOTIVATOR = "Demotivator"
    PRINCIPLE = "Principle"


class Polarity(str, Enum):
    SUPPORTS = "Supports"
    HINDERS = "Hinders"


# DM must be tried before M.
_ID_PREFIX = re.compile(r"^(DM|M|P)(?=[0-9A-Za-z_.-]*$)")
_PREFIX_KIND = {"DM": FactorKind.DEMOTIVATOR, "M": FactorKind.MOTIVATOR, "P": FactorKind.PRINCIPLE}
_KIND_POLARITY = {FactorKind.MOTIVATOR: Polarity.SUPPORTS, FactorKind.DEMOTIVATOR: Polarity.HINDERS}


def kind_for_id(factor_id: str) -> Optional[FactorKind]:
    """Return the kind implied by an id prefix, or None if it has no known prefix."""
    m = _ID_PREFIX.match(factor_id)
    return _PREFIX_KIND[m.group(1)] if m else None


@dataclass(frozen=True)
class Factor:
    id: str
    kind: FactorKind
    short_name: str
    description: str = ""

    def __post_init__(self):
        if not self.id:
            raise ParseError("factor id must be non-empty")
        if not isinstance(self.kind, FactorKind):
            try:
                object.__setattr__(self, "kind", FactorKind(self.kind))
            except ValueError:
                raise ParseError(f"factor {self.id}: malformed kind {self.kind!r}") from None
        implied = kind_for_id(self.id)
        if implied is not self.kind:
            raise ParseError(
                f"factor {self.id}: id prefix implies {implied.value if implied else 'no kind'}, "
                f"but kind is {self.kind.value}"
            )

    def to_dict(self) -> dict:
        return {"id": self.id, "kind": self.kind.value, "short_name": self.short_name, "description": self.description}


@dataclass(frozen=True)
class FactorCatalog:
    factors: tuple[Factor, ...] = ()
    version: str = ""
    _index: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "factors", tuple(self.factors))
        index = {}
        for pos, f in enumerate(self.factors):
            if f.id in index:
                raise ParseError(f"duplicate factor id {f.id!r} at entries {index[f.id]} and {pos}")
            index[f.id] = pos
        object.__setattr__(self, "_index", index)

    def __len__(self) -> int:
        return len(self.factors)

    def __iter__(self) -> Iterator[Factor]:
        return iter(self.factors)

    def __contains__(self, factor_id: object) -> bool:
        return factor_id in self._index

    @property
    def ids(self) -> tuple[str, ...]:
        return tuple(f.id for f in self.factors)

    def lookup(self, factor_id: str) -> Optional[Factor]:
        pos = self._index.get(factor_id)
        return None if pos is None else self.factors[pos]

    def index_of(self, factor_id: str) -> int:
        return self._index[factor_id]

    def of_kind(self, kind: FactorKind) -> tuple[Factor, ...]:
        return tuple(f for f in self.factors if f.kind is kind)

    def counts(self) -> dict[FactorKind, int]:
        return {k: len(self.of_kind(k)) for k in FactorKind}

    def to_dict(self) -> dict:
        return {"version": self.version, "factors": [f.to_dict() for f in self.factors]}

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), indent=2, ensure_ascii=False) + "\n"


def lookup(catalog: FactorCatalog, factor_id: str) -> Optional[Factor]:
    return catalog.lookup(factor_id)


def _reject_unknown(obj: dict, allowed: set, where: str):
    extra = sorted(set(obj) - allowed)
    if extra:
        raise ParseError(f"{where}: unknown field(s) {', '.join(extra)}")


def catalog_from_dict(doc: dict, where: str = "catalog") -> FactorCatalog:
    if not isinstance(doc, dict):
        raise ParseError(f"{where}: top level must be an object")
    _reject_unknown(doc, {"version", "factors"}, where)
    entries = doc.get("factors", [])
    if not isinstance(entries, list):
        raise ParseError(f"{where}: 'factors' must be a list")
    factors = []
    for pos, entry in enumerate(entries):
        loc = f"{where}: factors[{pos}]"
        if not isinstance(entry, dict):
            raise ParseError(f"{loc}: entry must be an object")
        _reject_unknown(entry, {"id", "kind", "short_name", "description"}, loc)
        missing = [k for k in ("id", "kind", "short_name") if k not in entry]
        if missing:
            raise ParseError(f"{loc}: missing field(s) {', '.join(missing)}")
        try:
            factors.append(Factor(entry["id"], entry["kind"], entry["short_name"], entry.get("description", "")))
        except ParseError as exc:
            raise ParseError(f"{loc}: {exc}") from None
    try:
        return FactorCatalog(tuple(factors), str(doc.get("version", "")))
    except ParseError as exc:
        raise ParseError(f"{where}: {exc}") from None


def parse_catalog(text: str, where: str = "catalog") -> FactorCatalog:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{where}: invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    return catalog_from_dict(doc, where)


def _read_text(path: PathLike) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ParseError(f"{path}: cannot read file ({exc.strerror})") from None


def load_catalog(path: PathLike) -> FactorCatalog:
    return parse_catalog(_read_text(path), where=str(path))


def data_path(name: str) -> Path:
    """Location of a bundled corpus file."""
    return Path(str(resources.files("ismkit") / "data" / name))


def paper_catalog() -> FactorCatalog:
    """The 14 motivators, 12 demotivators and 17 principles shipped with the package."""
    return load_catalog(data_path("paper_catalog.json"))


# --- taxonomy ---------------------------------------------------------------


@dataclass(frozen=True, order=True)
class TaxonomyEdge:
    source: str
    target: str
    polarity: Polarity

    def to_dict(self) -> dict:
        return {"source": self.source, "target": self.target, "polarity": self.polarity.value}


@dataclass(frozen=True)
class TaxonomyMapping:
    edges: frozenset[TaxonomyEdge] = frozenset()

    def __post_init__(self):
        object.__setattr__(self, "edges", frozenset(self.edges))

    def sorted_edges(self, catalog: Optional[FactorCatalog] = None) -> list[TaxonomyEdge]:
        if catalog is None:
            return sorted(self.edges)
        big = len(catalog)

        def key(e):
            s = catalog.index_of(e.source) if e.source in catalog else big
            t = catalog.index_of(e.target) if e.target in catalog else big
            return (s, t, e.source, e.target, e.polarity.value)

        return sorted(self.edges, key=key)

    def to_dict(self) -> dict:
        return {"edges": [e.to_dict() for e in self.sorted_edges()]}


def mapping_from_dict(doc: dict, where: str = "mapping") -> TaxonomyMapping:
    if not isinstance(doc, dict):
        raise ParseError(f"{where}: top level must be an object")
    _reject_unknown(doc, {"edges"}, where)
    edges = []
    for pos, entry in enumerate(doc.get("edges", [])):
        loc = f"{where}: edges[{pos}]"
        if not isinstance(entry, dict):
            raise ParseError(f"{loc}: entry must be an object")
        _reject_unknown(entry, {"source", "target", "polarity"}, loc)
        missing = [k for k in ("source", "target", "polarity") if k not in entry]
        if missing:
            raise ParseError(f"{loc}: missing field(s) {', '.join(missing)}")
        try:
            polarity = Polarity(entry["polarity"])
        except ValueError:
            raise ParseError(f"{loc}: malformed polarity {entry['polarity']!r}") from None
        edges.append(TaxonomyEdge(str(entry["source"]), str(entry["target"]), polarity))
    return TaxonomyMapping(frozenset(edges))


def load_mapping(path: PathLike) -> TaxonomyMapping:
    text = _read_text(path)
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    return mapping_from_dict(doc, where=str(path))


@dataclass(frozen=True)
class MappingIssue:
    edge: TaxonomyEdge
    problem: str

    def __str__(self):
        e = self.edge
        return f"{e.source} -> {e.target} ({e.polarity.value}): {self.problem}"


def validate_mapping(mapping: TaxonomyMapping, catalog: FactorCatalog) -> list[MappingIssue]:
    """Every dangling id, kind violation and polarity violation in the mapping.

    An empty list means the mapping is consistent with the catalog.
    """
    issues = []
    for edge in mapping.sorted_edges(catalog):
        src = catalog.lookup(edge.source)
        dst = catalog.lookup(edge.target)
        if src is None:
            issues.append(MappingIssue(edge, f"source {edge.source} not in catalog"))
        elif src.kind is FactorKind.PRINCIPLE:
            issues.append(MappingIssue(edge, "source not a Motivator or Demotivator"))
        elif _KIND_POLARITY[src.kind] is not edge.polarity:
            want = _KIND_POLARITY[src.kind].value
            issues.append(MappingIssue(edge, f"polarity violation: {src.kind.value} edges must be {want}"))
        if dst is None:
            issues.append(MappingIssue(edge, f"target {edge.target} not in catalog"))
        elif dst.kind is not FactorKind.PRINCIPLE:
            issues.append(MappingIssue(edge, "target not a Principle"))
    return issues


def iter_kind_ids(catalog: FactorCatalog, kinds: Iterable[FactorKind]) -> list[str]:
    wanted = set(kinds)
    return [f.id for f in catalog if f.kind in wanted]
