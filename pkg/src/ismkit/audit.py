"""Compare a computed ISM run with transcribed reference tables.

Differences are findings. Only unreadable or ill-shaped inputs raise.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Optional

from ismkit.engine import ReachabilityMatrix, compare_matrices, load_reference, power_profile, run_ism
from ismkit.errors import ParseError, ValidationError
from ismkit.factors import data_path
from ismkit.micmac import MicmacThresholds, classify, compare_clusters, load_cluster_reference


def load_level_claims(path) -> list[dict]:
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise ParseError(f"{path}: cannot read file ({exc.strerror})") from None
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: invalid JSON at line {exc.lineno}: {exc.msg}") from None
    if not isinstance(doc, dict) or not isinstance(doc.get("claims"), list):
        raise ParseError(f"{path}: expected an object with a 'claims' list")
    for k, claim in enumerate(doc["claims"]):
        if not isinstance(claim, dict) or not isinstance(claim.get("level"), int):
            raise ParseError(f"{path}: claims[{k}] needs an integer 'level'")
    return doc["claims"]


def compare_levels(levels: list[list[str]], claims: list[dict]) -> dict:
    """Check each claimed (factor, level) pair and whether the claimed top level matches ours.

    A factor may be claimed at more than one level; each claim is checked
    on its own.
    """
    level_of = {f: k for k, lv in enumerate(levels, start=1) for f in lv}
    rows = []
    for claim in claims:
        for f in claim.get("factors", []):
            if f not in level_of:
                raise ValidationError(f"level claim names unknown factor {f}")
            rows.append(
                {"id": f, "claimed_level": claim["level"], "computed_level": level_of[f],
                 "match": level_of[f] == claim["level"]}
            )
    out = {"claims": rows, "agreements": sum(r["match"] for r in rows), "total": len(rows)}
    first = next((c for c in claims if c["level"] == 1), None)
    if first is not None:
        claimed = list(first.get("factors", []))
        computed_top = list(levels[0]) if levels else []
        out["top_level"] = {
            "claimed": claimed,
            "computed": computed_top,
            "claimed_factors_together_at_computed_top": bool(claimed) and set(claimed) <= set(computed_top),
            "claimed_factors_share_a_level": bool(claimed) and len({level_of[f] for f in claimed}) == 1,
        }
    return out


def run_audit(
    closed: ReachabilityMatrix,
    levels: list[list[str]],
    reference=None,
    clusters=None,
    level_claims=None,
    thresholds: Optional[MicmacThresholds] = None,
) -> dict:
    """Audit report with a section per reference given (paths or loaded objects)."""
    out: dict = {"factor_ids": list(closed.factor_ids)}
    if reference is not None:
        ref = load_reference(reference) if isinstance(reference, (str, Path)) else reference
        out["matrix"] = compare_matrices(closed, ref).to_dict()
    if clusters is not None:
        ref_clusters = load_cluster_reference(clusters) if isinstance(clusters, (str, Path)) else clusters
        thresholds = thresholds or MicmacThresholds.auto(closed.n)
        diff = compare_clusters(classify(power_profile(closed), thresholds), ref_clusters)
        out["clusters"] = {
            "cutoffs": {"driving": thresholds.driving_cutoff, "dependence": thresholds.dependence_cutoff},
            **diff.to_dict(),
        }
    if level_claims is not None:
        claims = load_level_claims(level_claims) if isinstance(level_claims, (str, Path)) else level_claims
        out["levels"] = compare_levels(levels, claims)
    return out


def paper_audit() -> dict:
    """Audit of the bundled SSIM against the bundled reference matrix, clusters and level claims."""
    from ismkit.ssim import paper_ssim

    report = run_ism(paper_ssim())
    return run_audit(
        report.closed,
        report.partition.to_list(),
        data_path("paper_reachability.json"),
        data_path("paper_clusters.json"),
        data_path("paper_levels.json"),
    )
