"""``ismkit`` command line.

Exit codes: 0 ok, 1 elicitation interrupted (progress saved), 2 parse or
I/O error, 3 validation error, 4 bad parameter.
"""

from __future__ import annotations

import json
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import click

from ismkit.audit import run_audit
from ismkit.engine import ISMReport, run_ism
from ismkit.errors import ParameterError, ParseError, ToolkitError, ValidationError
from ismkit.factors import (
    FactorCatalog,
    FactorKind,
    TaxonomyMapping,
    data_path,
    load_catalog,
    load_mapping,
    paper_catalog,
    validate_mapping,
)
from ismkit.micmac import MicmacThresholds, chart_data, classify, render_svg
from ismkit.ssim import elicit_pairs, format_ssim, load_ssim, parse_symbol, read_answers
from ismkit.survey import aggregate_frequencies, breakdown_by, group_average, load_responses

OUT_ENV = "ISMKIT_OUT"

PAPER_SSIM = "paper_ssim.csv"
PAPER_REFERENCE = "paper_reachability.json"
PAPER_CLUSTERS = "paper_clusters.json"
PAPER_LEVELS = "paper_levels.json"

KIND_GROUPS = {
    "motivators": FactorKind.MOTIVATOR,
    "demotivators": FactorKind.DEMOTIVATOR,
    "principles": FactorKind.PRINCIPLE,
}


@dataclass
class RunConfig:
    command: str
    inputs: dict = field(default_factory=dict)
    out_dir: Path = Path(".")
    driving_cutoff: Optional[float] = None
    dependence_cutoff: Optional[float] = None
    formats: tuple[str, ...] = ()


def dump_json(obj) -> str:
    return json.dumps(obj, indent=2, ensure_ascii=False) + "\n"


def _write(path: Path, text: str) -> Path:
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text, encoding="utf-8")
    except OSError as exc:
        raise ParseError(f"{path}: cannot write ({exc.strerror})") from None
    return path


def _fail(exc: ToolkitError):
    click.echo(f"error: {exc}", err=True)
    sys.exit(exc.exit_code)


def _resolve_out(ctx: click.Context, out: Optional[str]) -> Path:
    if out:
        return Path(out)
    root = ctx.find_root().obj or {}
    if root.get("out"):
        return Path(root["out"])
    return Path(os.environ.get(OUT_ENV, "."))


def _resolve_catalog(ctx: click.Context, catalog: Optional[str], default_paper: bool = False) -> Optional[FactorCatalog]:
    root = ctx.find_root().obj or {}
    path = catalog or root.get("catalog")
    if path:
        return load_catalog(path)
    return paper_catalog() if default_paper else None


def _ssim_source(ssim_file: Optional[str], paper: bool) -> Path:
    if paper:
        return data_path(PAPER_SSIM)
    if not ssim_file:
        raise ParseError("no SSIM file given (pass a path or --paper-corpus)")
    return Path(ssim_file)


def _formats(ctx: click.Context, fmt: tuple[str, ...], allowed: tuple[str, ...]) -> tuple[str, ...]:
    """Formats to write: the subcommand's --format, else the applicable global ones, else all."""
    if fmt:
        return tuple(dict.fromkeys(fmt))
    root = ctx.find_root().obj or {}
    applicable = tuple(f for f in dict.fromkeys(root.get("format") or ()) if f in allowed)
    return applicable or allowed


out_option = click.option("--out", "out", type=click.Path(file_okay=False), help=f"Output directory (default ${OUT_ENV} or .).")
catalog_option = click.option("--catalog", type=click.Path(dir_okay=False), help="Factor catalog JSON.")
paper_option = click.option("--paper-corpus", "paper", is_flag=True, help="Use the bundled 17-principle corpus.")


def format_option(choices):
    return click.option(
        "--format",
        "fmt",
        multiple=True,
        type=click.Choice(choices),
        help="Output format(s) to write; repeatable. Default: all.",
    )


@click.group()
@click.option("--out", "out", type=click.Path(file_okay=False), help="Default output directory for subcommands.")
@click.option("--format", "fmt", multiple=True, type=click.Choice(["json", "dot", "svg"]), help="Default format(s).")
@click.option("--catalog", type=click.Path(dir_okay=False), help="Default factor catalog JSON.")
@click.version_option(package_name="artifact")
@click.pass_context
def main(ctx, out, fmt, catalog):
    """Interpretive structural modeling and MICMAC toolkit."""
    ctx.obj = {"out": out, "format": fmt, "catalog": catalog}


# --- ism --------------------------------------------------------------------


def _run_from_ssim(ctx, ssim_file, paper, catalog) -> ISMReport:
    cat = _resolve_catalog(ctx, catalog)
    ssim = load_ssim(_ssim_source(ssim_file, paper), cat)
    return run_ism(ssim)


def cmd_ism(config: RunConfig, report: ISMReport) -> list[Path]:
    written = []
    if "json" in config.formats:
        written.append(_write(config.out_dir / "ism_report.json", report.to_json()))
    if "dot" in config.formats:
        written.append(_write(config.out_dir / "ism_digraph.dot", report.digraph.to_dot()))
    written.append(_write(config.out_dir / "ism_levels.txt", report.level_table()))
    return written


@main.command()
@click.argument("ssim_file", required=False)
@paper_option
@catalog_option
@out_option
@format_option(["json", "dot"])
@click.pass_context
def ism(ctx, ssim_file, paper, catalog, out, fmt):
    """Run the ISM pipeline on an SSIM file.

    Writes ism_report.json (matrix, powers, ranks, levels, edges), the
    level-clustered digraph ism_digraph.dot and the level table
    ism_levels.txt, which is also printed.
    """
    try:
        config = RunConfig("ism", {"ssim": ssim_file}, _resolve_out(ctx, out), formats=_formats(ctx, fmt, ("json", "dot")))
        report = _run_from_ssim(ctx, ssim_file, paper, catalog)
        cmd_ism(config, report)
    except ToolkitError as exc:
        _fail(exc)
    click.echo(report.level_table(), nl=False)


# --- micmac -----------------------------------------------------------------


@main.command()
@click.argument("ssim_file", required=False)
@paper_option
@catalog_option
@out_option
@format_option(["json", "svg"])
@click.option("--driving-cutoff", type=float, help="Driving power above this is strong (default n/2).")
@click.option("--dependence-cutoff", type=float, help="Dependence power above this is strong (default n/2).")
@click.pass_context
def micmac(ctx, ssim_file, paper, catalog, out, fmt, driving_cutoff, dependence_cutoff):
    """Classify factors into MICMAC clusters.

    Writes micmac.json (points, cutoffs, clusters) and micmac.svg.
    """
    try:
        config = RunConfig(
            "micmac",
            {"ssim": ssim_file},
            _resolve_out(ctx, out),
            driving_cutoff,
            dependence_cutoff,
            _formats(ctx, fmt, ("json", "svg")),
        )
        for name, value in (("--driving-cutoff", driving_cutoff), ("--dependence-cutoff", dependence_cutoff)):
            if value is not None and not value > 0:
                raise ParameterError(f"{name} must be positive, got {value}")
        report = _run_from_ssim(ctx, ssim_file, paper, catalog)
        n = report.profile.n
        thresholds = MicmacThresholds(
            driving_cutoff if driving_cutoff is not None else n / 2,
            dependence_cutoff if dependence_cutoff is not None else n / 2,
        )
        result = classify(report.profile, thresholds)
        if n < 2:
            click.echo(f"warning: quadrant analysis is degenerate with {n} factor(s)", err=True)
        if "json" in config.formats:
            doc = result.to_dict()
            doc["chart"] = chart_data(result)
            _write(config.out_dir / "micmac.json", dump_json(doc))
        if "svg" in config.formats:
            _write(config.out_dir / "micmac.svg", render_svg(result))
    except ToolkitError as exc:
        _fail(exc)
    for p in result.points:
        click.echo(f"{p.factor_id:<8} driving={p.driving:<3} dependence={p.dependence:<3} {p.cluster.value}")


# --- audit ------------------------------------------------------------------


def cmd_audit(config: RunConfig, closed, levels) -> dict:
    thresholds = None
    if config.driving_cutoff is not None or config.dependence_cutoff is not None:
        half = closed.n / 2
        thresholds = MicmacThresholds(
            config.driving_cutoff if config.driving_cutoff is not None else half,
            config.dependence_cutoff if config.dependence_cutoff is not None else half,
        )
    return run_audit(
        closed,
        levels,
        config.inputs.get("reference"),
        config.inputs.get("clusters"),
        config.inputs.get("levels"),
        thresholds,
    )


def _load_computed(path: str):
    from ismkit.engine import ReachabilityMatrix, reference_from_dict

    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise ParseError(f"{path}: cannot read file ({exc.strerror})") from None
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: invalid JSON at line {exc.lineno}: {exc.msg}") from None
    try:
        ref = reference_from_dict({"factor_ids": doc["factor_ids"], "cells": doc["matrix"]["cells"]}, path)
        levels = doc["levels"]
    except (KeyError, TypeError) as exc:
        raise ParseError(f"{path}: not an ism report (missing {exc})") from None
    return ReachabilityMatrix(ref.factor_ids, ref.origin), levels


@main.command()
@click.argument("ssim_file", required=False)
@paper_option
@catalog_option
@out_option
@click.option("--computed", type=click.Path(dir_okay=False), help="Use an ism_report.json instead of an SSIM.")
@click.option("--reference", type=click.Path(dir_okay=False), help="Transcribed reachability matrix JSON.")
@click.option("--clusters", type=click.Path(dir_okay=False), help="Reference MICMAC clusters JSON (id -> cluster).")
@click.option("--levels", type=click.Path(dir_okay=False), help="Reference level claims JSON.")
@click.option("--driving-cutoff", type=float, help="MICMAC driving cutoff (default n/2).")
@click.option("--dependence-cutoff", type=float, help="MICMAC dependence cutoff (default n/2).")
@click.pass_context
def audit(ctx, ssim_file, paper, catalog, out, computed, reference, clusters, levels, driving_cutoff, dependence_cutoff):
    """Diff a computed run against reference tables; writes audit.json.

    Differences are findings, not failures: the exit status is 0 unless an
    input cannot be read or does not fit its schema. --paper-corpus uses the
    bundled SSIM and the bundled reference matrix, clusters and level claims.
    """
    try:
        for name, value in (("--driving-cutoff", driving_cutoff), ("--dependence-cutoff", dependence_cutoff)):
            if value is not None and not value > 0:
                raise ParameterError(f"{name} must be positive, got {value}")
        if paper:
            reference = reference or str(data_path(PAPER_REFERENCE))
            clusters = clusters or str(data_path(PAPER_CLUSTERS))
            levels = levels or str(data_path(PAPER_LEVELS))
        if not (reference or clusters or levels):
            raise ParseError("nothing to audit: give --reference, --clusters, --levels or --paper-corpus")
        config = RunConfig(
            "audit",
            {"ssim": ssim_file, "computed": computed, "reference": reference, "clusters": clusters, "levels": levels},
            _resolve_out(ctx, out),
            driving_cutoff,
            dependence_cutoff,
        )
        if computed:
            closed, partition = _load_computed(computed)
        else:
            report = _run_from_ssim(ctx, ssim_file, paper, catalog)
            closed, partition = report.closed, report.partition.to_list()
        result = cmd_audit(config, closed, partition)
        path = _write(config.out_dir / "audit.json", dump_json(result))
    except ToolkitError as exc:
        _fail(exc)
    m = result.get("matrix")
    if m is not None:
        click.echo(f"matrix: {len(m['cell_mismatches'])} cell, {len(m['origin_mismatches'])} origin mismatch(es)")
    if "clusters" in result:
        click.echo(f"clusters: {result['clusters']['agreement']} agree")
    if "levels" in result:
        click.echo(f"levels: {result['levels']['agreements']}/{result['levels']['total']} claims agree")
    click.echo(f"wrote {path}")


# --- elicit -----------------------------------------------------------------


def cmd_elicit(factor_ids: list[str], path: Path, stdin=None, echo=click.echo) -> int:
    """Prompt for every unanswered pair, saving after each answer. Returns the exit status."""
    stdin = stdin or click.get_text_stream("stdin")
    ids = tuple(factor_ids)
    answers = {}
    if path.exists():
        text = path.read_text(encoding="utf-8")
        if text.strip():
            found_ids, answers = read_answers(text, str(path))
            if found_ids != ids:
                raise ValidationError(f"{path}: existing file lists factors {', '.join(found_ids)}, expected {', '.join(ids)}")
    pairs = elicit_pairs(ids)
    index = {f: k for k, f in enumerate(ids)}
    todo = [(a, b) for a, b in pairs if (index[a], index[b]) not in answers]
    if answers:
        echo(f"resuming: {len(pairs) - len(todo)} of {len(pairs)} pairs answered")
    _write(path, format_ssim(ids, answers))
    for a, b in todo:
        while True:
            echo(f"{a} vs {b} [V: {a} leads to {b}, A: {b} leads to {a}, X: both, O: none]: ", nl=False)
            line = stdin.readline()
            if not line:
                echo("")
                echo(f"input ended; saved {len(answers)} of {len(pairs)} answers to {path}", err=True)
                return 1
            try:
                sym = parse_symbol(line)
            except ParseError:
                echo(f"'{line.strip()}' is not one of V, A, X, O")
                continue
            break
        answers[(index[a], index[b])] = sym
        _write(path, format_ssim(ids, answers))
    echo(f"wrote complete SSIM ({len(pairs)} pairs) to {path}")
    return 0


@main.command()
@click.option("--factors", help="Comma-separated factor ids, in matrix order.")
@catalog_option
@click.option("--kind", type=click.Choice([k.value for k in FactorKind]), help="Only catalog factors of this kind.")
@click.option("--output", "-o", type=click.Path(dir_okay=False), required=True, help="SSIM file to write or resume.")
@click.pass_context
def elicit(ctx, factors, catalog, kind, output):
    """Interactively fill in an SSIM, one factor pair at a time.

    Answers are V, A, X or O (any case). The file is rewritten after every
    answer, so an interrupted session resumes where it stopped when run
    again with the same --output.
    """
    try:
        if factors:
            ids = [f.strip() for f in factors.split(",") if f.strip()]
        else:
            cat = _resolve_catalog(ctx, catalog, default_paper=True)
            ids = [f.id for f in cat if kind is None or f.kind.value == kind]
        if not ids:
            raise ParameterError("no factors to elicit")
        status = cmd_elicit(ids, Path(output))
    except ToolkitError as exc:
        _fail(exc)
    sys.exit(status)


# --- survey -----------------------------------------------------------------


def _group_ids(spec: str, catalog: FactorCatalog) -> list[str]:
    kind = KIND_GROUPS.get(spec.lower())
    if kind is not None:
        return [f.id for f in catalog.of_kind(kind)]
    return [g.strip() for g in spec.split(",") if g.strip()]


@main.command()
@click.argument("responses_file")
@catalog_option
@out_option
@click.option("--group", "groups", multiple=True,
              help="Average over motivators, demotivators, principles or a comma-separated id list; repeatable.")
@click.option("--by", "by", multiple=True, help="Demographic column to break respondents down by; repeatable.")
@click.pass_context
def survey(ctx, responses_file, catalog, out, groups, by):
    """Likert frequency table (agree / neutral / disagree) per item.

    Writes survey.json with exact percentages; the printed table rounds
    half-up to whole percents.
    """
    import warnings

    try:
        data = load_responses(responses_file)
        cat = _resolve_catalog(ctx, catalog, default_paper=True)
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            rows = aggregate_frequencies(data.responses)
        doc = {"items": [r.to_dict() for r in rows.values()], "warnings": [str(w.message) for w in caught]}
        if groups:
            doc["groups"] = {g: group_average(rows, _group_ids(g, cat)).to_dict() for g in groups}
        if by:
            doc["breakdowns"] = {col: breakdown_by(data, col) for col in by}
        _write(_resolve_out(ctx, out) / "survey.json", dump_json(doc))
    except ToolkitError as exc:
        _fail(exc)
    for w in doc["warnings"]:
        click.echo(f"warning: {w}", err=True)
    click.echo(f"{'item':<8} {'n':>4} {'agree':>6} {'neutral':>8} {'disagree':>9}")
    for r in rows.values():
        a, m, d = r.display()
        click.echo(f"{r.item_id:<8} {r.n:>4} {a:>5}% {m:>7}% {d:>8}%")
    for g, avg in doc.get("groups", {}).items():
        a, m, d = avg["display"]["agree"], avg["display"]["neutral"], avg["display"]["disagree"]
        click.echo(f"group {g} ({len(avg['items'])} items): {a}% agree, {m}% neutral, {d}% disagree")
    for col, cats in doc.get("breakdowns", {}).items():
        click.echo(f"{col}: " + ", ".join(f"{c} {v['display']}%" for c, v in cats.items()))


# --- taxonomy ---------------------------------------------------------------


def mapping_dot(mapping: TaxonomyMapping, catalog: FactorCatalog) -> str:
    edges = mapping.sorted_edges(catalog)
    used = {e.source for e in edges} | {e.target for e in edges}
    lines = ["digraph taxonomy {", "  rankdir=LR;", "  node [shape=box];"]
    for name, kinds in (("sources", (FactorKind.MOTIVATOR, FactorKind.DEMOTIVATOR)), ("principles", (FactorKind.PRINCIPLE,))):
        lines.append(f"  subgraph cluster_{name} {{")
        lines.append("    rank=same;")
        for f in catalog:
            if f.kind in kinds and f.id in used:
                lines.append(f'    "{f.id}" [label="{f.id}\\n{f.short_name}"];')
        lines.append("  }")
    for e in edges:
        style = "solid" if e.polarity.value == "Supports" else "dashed"
        lines.append(f'  "{e.source}" -> "{e.target}" [style={style}, label="{e.polarity.value}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"


@main.command()
@catalog_option
@click.option("--mapping", type=click.Path(dir_okay=False), help="Taxonomy mapping JSON (edges).")
@click.option("--dot", "dot", is_flag=True, help="Also write taxonomy.dot.")
@out_option
@click.pass_context
def taxonomy(ctx, catalog, mapping, dot, out):
    """Summarize a factor catalog and validate a motivator/demotivator mapping."""
    try:
        cat = _resolve_catalog(ctx, catalog, default_paper=True)
        counts = cat.counts()
        click.echo(
            f"{counts[FactorKind.MOTIVATOR]} motivators, {counts[FactorKind.DEMOTIVATOR]} demotivators, "
            f"{counts[FactorKind.PRINCIPLE]} principles"
        )
        m = load_mapping(mapping) if mapping else TaxonomyMapping()
        issues = validate_mapping(m, cat)
        if issues:
            for issue in issues:
                click.echo(f"invalid edge {issue}", err=True)
            raise ValidationError(f"{mapping}: {len(issues)} mapping violation(s)")
        for e in m.sorted_edges(cat):
            click.echo(f"{e.source} -> {e.target} ({e.polarity.value})")
        if dot:
            path = _write(_resolve_out(ctx, out) / "taxonomy.dot", mapping_dot(m, cat))
            click.echo(f"wrote {path}")
    except ToolkitError as exc:
        _fail(exc)


if __name__ == "__main__":
    main()
