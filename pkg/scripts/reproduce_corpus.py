"""Run the whole pipeline on the bundled 17-principle corpus.

    python3 scripts/reproduce_corpus.py [OUT_DIR]

Writes the ISM report, digraph, MICMAC chart and audit to OUT_DIR
(default: ./corpus_run) and prints a short summary.
"""

import sys

from click.testing import CliRunner

from ismkit.cli import main


def run(out: str) -> int:
    runner = CliRunner()
    for cmd in ("ism", "micmac", "audit"):
        res = runner.invoke(main, [cmd, "--paper-corpus", "--out", out])
        print(f"$ ismkit {cmd} --paper-corpus --out {out}")
        print(res.output, end="")
        if res.exit_code:
            return res.exit_code
    return 0


if __name__ == "__main__":
    sys.exit(run(sys.argv[1] if len(sys.argv) > 1 else "corpus_run"))
