"""Regenerate the committed golden files under tests/golden/.

The level partition and digraph edges come from the naive oracles in
tests/oracles.py, not from ismkit.engine, so the goldens stay an
independent check. The audit and cluster-agreement files are snapshots of
the audit output and only change when the corpus or the rules change.

    python scripts/make_goldens.py
"""

import json
import sys
from pathlib import Path

ROOT = Path(__file__).resolve().parents[1]
sys.path.insert(0, str(ROOT / "tests"))

import oracles  # noqa: E402

from ismkit.audit import paper_audit  # noqa: E402
from ismkit.ssim import Relation, paper_ssim  # noqa: E402

GOLDEN = ROOT / "tests" / "golden"


def dump(name, obj):
    (GOLDEN / name).write_text(json.dumps(obj, indent=2) + "\n", encoding="utf-8")


def direct_edges(ssim):
    edges = set()
    for (i, j), sym in ssim.cells.items():
        if sym in (Relation.V, Relation.X):
            edges.add((i, j))
        if sym in (Relation.A, Relation.X):
            edges.add((j, i))
    return edges


def main():
    GOLDEN.mkdir(parents=True, exist_ok=True)
    ssim = paper_ssim()
    ids = list(ssim.factor_ids)
    n = len(ids)
    edges = direct_edges(ssim)
    closed = oracles.closure_by_search(edges, n)
    dump("paper_partition.json", {"factor_ids": ids, "levels": oracles.levels_by_definition(ids, closed)})
    reduced = oracles.reduction_by_closure(sorted(edges), n)
    dump("paper_digraph_edges.json", {"edges": [[ids[a], ids[b]] for a, b in sorted(reduced)]})

    audit = paper_audit()
    dump("paper_audit.json", audit)
    agreement = {r["id"]: r["match"] for r in audit["clusters"]["factors"]}
    dump("paper_micmac_agreement.json", {"cutoffs": audit["clusters"]["cutoffs"], "agreement": agreement})


if __name__ == "__main__":
    main()
