import json

import pytest
from hypothesis import given
from hypothesis import strategies as st

from ismkit.errors import ParseError
from ismkit.factors import (
    Factor,
    FactorCatalog,
    FactorKind,
    Polarity,
    TaxonomyEdge,
    TaxonomyMapping,
    catalog_from_dict,
    load_mapping,
    lookup,
    parse_catalog,
    validate_mapping,
)


def test_paper_catalog_counts(catalog):
    assert len(catalog) == 43
    counts = catalog.counts()
    assert counts[FactorKind.MOTIVATOR] == 14
    assert counts[FactorKind.DEMOTIVATOR] == 12
    assert counts[FactorKind.PRINCIPLE] == 17
    assert catalog.ids[:3] == ("M1", "M2", "M3")
    assert [f.id for f in catalog.of_kind(FactorKind.PRINCIPLE)] == [f"P{k}" for k in range(1, 18)]


@pytest.mark.parametrize(
    "fid, kind, name",
    [
        ("P1", FactorKind.PRINCIPLE, "Bias"),
        ("DM10", FactorKind.DEMOTIVATOR, "Misalignment Conflicts"),
        ("M9", FactorKind.MOTIVATOR, "Summarize code"),
        ("P17", FactorKind.PRINCIPLE, "Ethical implications of automation"),
    ],
)
def test_lookup_known(catalog, fid, kind, name):
    f = lookup(catalog, fid)
    assert f.kind is kind
    assert f.short_name == name
    assert f.description


def test_lookup_absent(catalog):
    assert lookup(catalog, "P99") is None


def test_duplicate_id_rejected():
    doc = {"factors": [{"id": "P1", "kind": "Principle", "short_name": "a"},
                       {"id": "P1", "kind": "Principle", "short_name": "b"}]}
    with pytest.raises(ParseError, match="duplicate factor id 'P1'"):
        catalog_from_dict(doc)


def test_empty_catalog_is_valid():
    cat = parse_catalog('{"version": "x", "factors": []}')
    assert len(cat) == 0


@pytest.mark.parametrize(
    "entry, msg",
    [
        ({"id": "P1", "kind": "Rule", "short_name": "a"}, "malformed kind"),
        ({"id": "M1", "kind": "Principle", "short_name": "a"}, "prefix implies Motivator"),
        ({"id": "Q1", "kind": "Principle", "short_name": "a"}, "prefix implies no kind"),
        ({"id": "DM1", "kind": "Motivator", "short_name": "a"}, "prefix implies Demotivator"),
        ({"id": "P1", "kind": "Principle"}, "missing field"),
        ({"id": "P1", "kind": "Principle", "short_name": "a", "level": 2}, "unknown field"),
    ],
)
def test_bad_entries_are_located(entry, msg):
    doc = {"factors": [{"id": "P2", "kind": "Principle", "short_name": "ok"}, entry]}
    with pytest.raises(ParseError, match=msg) as exc:
        catalog_from_dict(doc)
    assert "factors[1]" in str(exc.value)


def test_unknown_top_level_field():
    with pytest.raises(ParseError, match="unknown field"):
        parse_catalog('{"factors": [], "extra": 1}')


def test_invalid_json_reports_position():
    with pytest.raises(ParseError, match="line 1"):
        parse_catalog("{")


def test_paper_catalog_round_trip(catalog):
    assert parse_catalog(catalog.dumps()) == catalog


ids = st.builds(
    lambda prefix, k: f"{prefix}{k}", st.sampled_from(["M", "DM", "P"]), st.integers(1, 999)
)
entries = st.lists(ids, unique=True, max_size=20).flatmap(
    lambda xs: st.tuples(*[
        st.builds(
            lambda fid=fid, name="", desc="": {
                "id": fid,
                "kind": {"M": "Motivator", "D": "Demotivator", "P": "Principle"}[fid[0]],
                "short_name": name,
                "description": desc,
            },
            name=st.text(max_size=20),
            desc=st.text(max_size=40),
        )
        for fid in xs
    ])
)


@given(entries, st.text(max_size=10))
def test_round_trip_property(factors, version):
    cat = catalog_from_dict({"version": version, "factors": list(factors)})
    again = parse_catalog(cat.dumps())
    assert again == cat
    # index order is total and injective
    assert sorted(again.index_of(f.id) for f in again) == list(range(len(again)))


def test_factor_is_immutable():
    f = Factor("P1", FactorKind.PRINCIPLE, "Bias")
    with pytest.raises(AttributeError):
        f.id = "P2"


# --- taxonomy ---------------------------------------------------------------


def _mapping(*edges):
    return TaxonomyMapping(frozenset(TaxonomyEdge(s, t, Polarity(p)) for s, t, p in edges))


def test_valid_edge_has_empty_report(catalog):
    assert validate_mapping(_mapping(("M9", "P4", "Supports")), catalog) == []


def test_target_must_be_principle(catalog):
    issues = validate_mapping(_mapping(("M9", "M1", "Supports")), catalog)
    assert [i.problem for i in issues] == ["target not a Principle"]


def test_demotivator_must_hinder(catalog):
    issues = validate_mapping(_mapping(("DM6", "P14", "Supports")), catalog)
    assert len(issues) == 1
    assert "polarity violation" in issues[0].problem


def test_all_violations_listed(catalog):
    m = _mapping(("M99", "P1", "Supports"), ("M1", "P98", "Supports"), ("P1", "P2", "Hinders"), ("M2", "P3", "Hinders"))
    problems = sorted(str(i) for i in validate_mapping(m, catalog))
    assert len(problems) == 4
    assert any("M99 not in catalog" in p for p in problems)
    assert any("P98 not in catalog" in p for p in problems)
    assert any("source not a Motivator" in p for p in problems)
    assert any("Motivator edges must be Supports" in p for p in problems)


def test_bundled_default_mapping_is_empty(catalog):
    from ismkit.factors import data_path

    m = load_mapping(data_path("empty_mapping.json"))
    assert m.edges == frozenset()
    assert validate_mapping(m, catalog) == []


def test_mapping_file_rejects_unknown_fields(tmp_path):
    p = tmp_path / "m.json"
    p.write_text(json.dumps({"edges": [{"source": "M1", "target": "P1", "polarity": "Supports", "w": 1}]}))
    with pytest.raises(ParseError, match=r"edges\[0\].*unknown field"):
        load_mapping(p)


def test_mapping_bad_polarity(tmp_path):
    p = tmp_path / "m.json"
    p.write_text(json.dumps({"edges": [{"source": "M1", "target": "P1", "polarity": "Helps"}]}))
    with pytest.raises(ParseError, match="malformed polarity"):
        load_mapping(p)


def test_catalog_equality():
    a = FactorCatalog((Factor("P1", "Principle", "x"),), "v")
    b = FactorCatalog((Factor("P1", "Principle", "x"),), "v")
    assert a == b
