"""MICMAC classification of factors by driving and dependence power.

A power is "strong" when it is strictly greater than its axis cutoff; a
point lying exactly on a cutoff counts as weak. Without explicit cutoffs
both axes use n/2.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from enum import Enum
from typing import Mapping, Optional
from xml.sax.saxutils import escape

from ismkit.engine import PowerProfile
from ismkit.errors import ParameterError, ValidationError


class Cluster(str, Enum):
    AUTONOMOUS = "Autonomous"
    DEPENDENT = "Dependent"
    LINKAGE = "Linkage"
    INDEPENDENT = "Independent"


@dataclass(frozen=True)
class MicmacThresholds:
    driving_cutoff: float
    dependence_cutoff: float

    def __post_init__(self):
        for name in ("driving_cutoff", "dependence_cutoff"):
            value = getattr(self, name)
            if not value > 0:
                raise ParameterError(f"{name} must be positive, got {value}")

    @classmethod
    def auto(cls, n: int) -> "MicmacThresholds":
        return cls(n / 2, n / 2)


def quadrant(driving: float, dependence: float, thresholds: MicmacThresholds) -> Cluster:
    strong_drv = driving > thresholds.driving_cutoff
    strong_dep = dependence > thresholds.dependence_cutoff
    if strong_drv:
        return Cluster.LINKAGE if strong_dep else Cluster.INDEPENDENT
    return Cluster.DEPENDENT if strong_dep else Cluster.AUTONOMOUS


@dataclass(frozen=True)
class MicmacPoint:
    factor_id: str
    driving: int
    dependence: int
    cluster: Cluster


@dataclass(frozen=True)
class MicmacClassification:
    points: tuple[MicmacPoint, ...]
    thresholds: Optional[MicmacThresholds]
    n: int

    @property
    def factor_ids(self) -> tuple[str, ...]:
        return tuple(p.factor_id for p in self.points)

    def cluster_of(self) -> dict[str, Cluster]:
        return {p.factor_id: p.cluster for p in self.points}

    def members(self, cluster: Cluster | str) -> list[str]:
        cluster = Cluster(cluster)
        return [p.factor_id for p in self.points if p.cluster is cluster]

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "boundary_rule": "power strictly greater than cutoff is strong; equal is weak",
            "cutoffs": _cutoffs(self.thresholds),
            "points": [
                {"id": p.factor_id, "driving": p.driving, "dependence": p.dependence, "cluster": p.cluster.value}
                for p in self.points
            ],
            "clusters": {c.value: self.members(c) for c in Cluster},
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, ensure_ascii=False) + "\n"


def _cutoffs(t: Optional[MicmacThresholds]) -> dict:
    if t is None:
        return {"driving": None, "dependence": None}
    return {"driving": t.driving_cutoff, "dependence": t.dependence_cutoff}


def classify(profile: PowerProfile, thresholds: Optional[MicmacThresholds] = None) -> MicmacClassification:
    n = profile.n
    if thresholds is None and n > 0:
        thresholds = MicmacThresholds.auto(n)
    points = tuple(
        MicmacPoint(f, int(d), int(e), quadrant(d, e, thresholds))
        for f, d, e in zip(profile.factor_ids, profile.driving_power, profile.dependence_power)
    )
    return MicmacClassification(points, thresholds, n)


def chart_data(c: MicmacClassification) -> dict:
    """Quadrant chart: dependence on x, driving on y, both axes spanning [0, n]."""
    return {
        "x_axis": {"label": "Dependence power", "range": [0, c.n]},
        "y_axis": {"label": "Driving power", "range": [0, c.n]},
        "cutoffs": _cutoffs(c.thresholds),
        "quadrants": {
            "Autonomous": "weak driving, weak dependence",
            "Dependent": "weak driving, strong dependence",
            "Linkage": "strong driving, strong dependence",
            "Independent": "strong driving, weak dependence",
        },
        "points": [
            {"label": p.factor_id, "x": p.dependence, "y": p.driving, "cluster": p.cluster.value} for p in c.points
        ],
    }


def render_svg(c: MicmacClassification, size: int = 480) -> str:
    """Static SVG scatter of :func:`chart_data` with cutoff lines and quadrant labels."""
    data = chart_data(c)
    pad = 48
    span = max(c.n, 1)
    inner = size - 2 * pad

    def sx(v):
        return pad + inner * v / span

    def sy(v):
        return size - pad - inner * v / span

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" viewBox="0 0 {size} {size}">',
        f'<rect x="{pad}" y="{pad}" width="{inner}" height="{inner}" fill="none" stroke="black"/>',
    ]
    cut = data["cutoffs"]
    if cut["dependence"] is not None:
        x = sx(cut["dependence"])
        y = sy(cut["driving"])
        out.append(f'<line x1="{x:.2f}" y1="{pad}" x2="{x:.2f}" y2="{size - pad}" stroke="gray" stroke-dasharray="4"/>')
        out.append(f'<line x1="{pad}" y1="{y:.2f}" x2="{size - pad}" y2="{y:.2f}" stroke="gray" stroke-dasharray="4"/>')
    corners = {
        "Independent": (pad + 6, pad + 16, "start"),
        "Linkage": (size - pad - 6, pad + 16, "end"),
        "Autonomous": (pad + 6, size - pad - 8, "start"),
        "Dependent": (size - pad - 6, size - pad - 8, "end"),
    }
    for name, (x, y, anchor) in corners.items():
        out.append(f'<text x="{x}" y="{y}" text-anchor="{anchor}" font-size="12" fill="gray">{name}</text>')
    out.append(f'<text x="{size / 2}" y="{size - 12}" text-anchor="middle" font-size="12">Dependence power</text>')
    out.append(
        f'<text x="14" y="{size / 2}" text-anchor="middle" font-size="12" '
        f'transform="rotate(-90 14 {size / 2})">Driving power</text>'
    )
    for p in data["points"]:
        x, y = sx(p["x"]), sy(p["y"])
        out.append(f'<circle cx="{x:.2f}" cy="{y:.2f}" r="3"/>')
        out.append(f'<text x="{x + 5:.2f}" y="{y - 5:.2f}" font-size="10">{escape(p["label"])}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


@dataclass(frozen=True)
class ClusterDiff:
    rows: tuple[dict, ...]

    @property
    def agreements(self) -> int:
        return sum(r["match"] for r in self.rows)

    @property
    def mismatches(self) -> list[dict]:
        return [r for r in self.rows if not r["match"]]

    def to_dict(self) -> dict:
        return {
            "agreement": f"{self.agreements}/{len(self.rows)}",
            "agreements": self.agreements,
            "total": len(self.rows),
            "factors": list(self.rows),
        }


def compare_clusters(computed: MicmacClassification, reference: Mapping[str, Cluster | str]) -> ClusterDiff:
    ref = {f: Cluster(c) for f, c in reference.items()}
    ids = computed.factor_ids
    if set(ref) != set(ids):
        missing = sorted(set(ids) - set(ref))
        extra = sorted(set(ref) - set(ids))
        raise ValidationError(f"cluster reference ids differ: missing {missing}, unknown {extra}")
    rows = []
    for p in computed.points:
        want = ref[p.factor_id]
        rows.append(
            {
                "id": p.factor_id,
                "computed": p.cluster.value,
                "reference": want.value,
                "match": p.cluster is want,
                "driving": p.driving,
                "dependence": p.dependence,
            }
        )
    return ClusterDiff(tuple(rows))


def load_cluster_reference(path) -> dict[str, Cluster]:
    from pathlib import Path

    from ismkit.errors import ParseError

    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise ParseError(f"{path}: cannot read file ({exc.strerror})") from None
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: invalid JSON at line {exc.lineno}: {exc.msg}") from None
    if not isinstance(doc, dict):
        raise ParseError(f"{path}: expected an object mapping factor id to cluster")
    out = {}
    for f, c in doc.items():
        try:
            out[f] = Cluster(c)
        except ValueError:
            raise ParseError(f"{path}: factor {f}: unknown cluster {c!r}") from None
    return out
