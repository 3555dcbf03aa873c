"""Tests for the SPARQL fragment: parsing, printing, substitution, evaluation."""

from __future__ import annotations

import random

import pytest

from helpers import bgp_oracle, random_bgp, small_graph, solutions_as_sets
from kgaudit.rdf import Graph, Iri, Literal, Triple, parse_ntriples
from kgaudit.sparql import (
    Bgp,
    Placeholder,
    PlaceholderError,
    Query,
    SeqPattern,
    Solution,
    SparqlError,
    TriplePattern,
    UnionPattern,
    UnsupportedSparqlFeature,
    Variable,
    eval_ask,
    eval_bgp,
    eval_select,
    format_query,
    parse_query,
    parse_triple_patterns,
    substitute,
)

DCT = "http://purl.org/dc/terms/"

PUBLISHER_ASK = (
    "PREFIX dct: <http://purl.org/dc/terms/>\n"
    "ASK { ?kg dct:publisher ?publisher . }\n"
)

DISCOVERY_SELECT = """
PREFIX dcat: <http://www.w3.org/ns/dcat#>
PREFIX void: <http://rdfs.org/ns/void#>
PREFIX dcmitype: <http://purl.org/dc/dcmitype/>
PREFIX schema: <http://schema.org/>
PREFIX sd: <http://www.w3.org/ns/sparql-service-description#>
PREFIX dataid: <http://dataid.dbpedia.org/ns/core#>
SELECT ?kg WHERE {
  ?kg ?endpointLink $rawEndpointUrl .
  { ?kg a dcat:Dataset } UNION { ?kg a void:Dataset } UNION { ?kg a dcmitype:Dataset }
  UNION { ?kg a schema:Dataset } UNION { ?kg a sd:Dataset } UNION { ?kg a dataid:Dataset }
}
"""


# ---------------------------------------------------------------------------
# Parsing


def test_parse_simple_ask() -> None:
    q = parse_query(PUBLISHER_ASK)
    assert q.form == "ask"
    assert q.projection is None
    assert q.pattern == Bgp(
        (TriplePattern(Variable("kg"), Iri(DCT + "publisher"), Variable("publisher")),)
    )
    assert q.prefixes == {"dct": DCT}


def test_parse_discovery_shape() -> None:
    q = parse_query(DISCOVERY_SELECT)
    assert q.form == "select"
    assert q.projection == ("kg",)
    assert isinstance(q.pattern, SeqPattern)
    first, alternatives = q.pattern.parts
    assert first == Bgp(
        (TriplePattern(Variable("kg"), Variable("endpointLink"), Placeholder("rawEndpointUrl")),)
    )
    assert isinstance(alternatives, UnionPattern)
    assert len(alternatives.branches) == 6


def test_parse_predicate_object_lists_and_type_shortcut() -> None:
    q = parse_query(
        "PREFIX dcat: <http://www.w3.org/ns/dcat#>\n"
        'ASK { ?kg a dcat:Dataset ; dcat:keyword "a", "b" . }'
    )
    assert isinstance(q.pattern, Bgp)
    assert len(q.pattern.patterns) == 3


def test_parse_empty_ask_and_select_star() -> None:
    assert parse_query("ASK {}").pattern == Bgp(())
    q = parse_query("SELECT * WHERE { ?s ?p ?o }")
    assert q.projection == ()


def test_parse_typed_and_tagged_literals() -> None:
    q = parse_query(
        "PREFIX xsd: <http://www.w3.org/2001/XMLSchema#>\n"
        'ASK { ?s ?p "2021-01-01"^^xsd:date . ?s ?q "hi"@en . }'
    )
    objects = [tp.object for tp in q.pattern.patterns]
    assert Literal("2021-01-01", datatype="http://www.w3.org/2001/XMLSchema#date") in objects
    assert Literal("hi", language="en") in objects


@pytest.mark.parametrize(
    ("text", "feature"),
    [
        ("ASK { ?s ?p ?o . FILTER(?o > 1) }", "FILTER"),
        ("ASK { OPTIONAL { ?s ?p ?o } }", "OPTIONAL"),
        ("PREFIX dct: <http://purl.org/dc/terms/> ASK { ?s dct:a/dct:b ?o }", "property paths"),
        ("SELECT ?s WHERE { ?s ?p ?o } LIMIT 5", "LIMIT"),
        ("ASK { GRAPH ?g { ?s ?p ?o } }", "GRAPH"),
        ("ASK { BIND(1 AS ?x) }", "BIND"),
        ("ASK { VALUES ?x { 1 } }", "VALUES"),
        ("ASK { ?s ?p _:b }", "blank nodes"),
        ("ASK { ?s ?p 42 }", "numeric literals"),
        ("ASK { ?s ?p (1 2) }", "RDF collections"),
        ("ASK { ?s ?p [ ?q ?o ] }", "blank node property lists"),
        ("CONSTRUCT { ?s ?p ?o } WHERE { ?s ?p ?o }", "CONSTRUCT"),
    ],
)
def test_out_of_fragment_constructs_are_named(text: str, feature: str) -> None:
    with pytest.raises(UnsupportedSparqlFeature) as err:
        parse_query(text)
    assert feature in str(err.value)


def test_syntax_errors() -> None:
    with pytest.raises(SparqlError):
        parse_query("ASK {")
    with pytest.raises(SparqlError) as err:
        parse_query("ASK { ?s dct:title ?o }")
    assert "dct:" in str(err.value)
    with pytest.raises(SparqlError) as err2:
        parse_query("SELECT ?nope WHERE { ?s ?p ?o }")
    assert "nope" in str(err2.value)


def test_parse_triple_patterns_for_rules() -> None:
    patterns = parse_triple_patterns(
        "?kg prov:wasGeneratedBy ?activity . ?activity a prov:Publish",
        {"prov": "http://www.w3.org/ns/prov#"},
    )
    assert len(patterns) == 2
    assert patterns[1].predicate == Iri("http://www.w3.org/1999/02/22-rdf-syntax-ns#type")


# ---------------------------------------------------------------------------
# Pretty-printing


@pytest.mark.parametrize(
    "text",
    [
        PUBLISHER_ASK,
        DISCOVERY_SELECT,
        "ASK {}",
        "SELECT * WHERE { ?s ?p ?o }",
        'PREFIX xsd: <http://www.w3.org/2001/XMLSchema#> ASK { ?s ?p "x"^^xsd:date . ?s ?q "y"@fr }',
        "PREFIX dcat: <http://www.w3.org/ns/dcat#> ASK { { ?s a dcat:Dataset } UNION { ?s a dcat:Catalog } }",
        "ASK { { ?s ?p ?o } UNION { { ?s ?p ?o . ?o ?q ?r } UNION { ?s ?p ?r } } }",
    ],
)
def test_print_then_parse_is_identity(text: str) -> None:
    q = parse_query(text)
    assert parse_query(format_query(q)) == q


def test_printer_output_is_plain_sparql() -> None:
    out = format_query(parse_query(PUBLISHER_ASK))
    assert "PREFIX dct: <http://purl.org/dc/terms/>" in out
    assert "?kg dct:publisher ?publisher ." in out


# ---------------------------------------------------------------------------
# Substitution


def test_substitute_fills_kg_variable() -> None:
    q = parse_query(PUBLISHER_ASK)
    bound = substitute(q, {"kg": Iri("http://example.org/kg1")})
    assert bound.pattern == Bgp(
        (
            TriplePattern(
                Iri("http://example.org/kg1"), Iri(DCT + "publisher"), Variable("publisher")
            ),
        )
    )


def test_substitute_with_empty_map_is_identity() -> None:
    q = parse_query(PUBLISHER_ASK)
    assert substitute(q, {}) == q


def test_substitute_requires_placeholder_values() -> None:
    q = parse_query(DISCOVERY_SELECT)
    with pytest.raises(PlaceholderError) as err:
        substitute(q, {})
    assert "rawEndpointUrl" in str(err.value)


def test_substitute_rejects_literal_subject() -> None:
    q = parse_query(PUBLISHER_ASK)
    with pytest.raises(SparqlError):
        substitute(q, {"kg": Literal("not a node")})


def test_evaluating_unsubstituted_placeholder_fails() -> None:
    q = parse_query(DISCOVERY_SELECT)
    with pytest.raises(PlaceholderError):
        eval_select(Graph(), q)


# ---------------------------------------------------------------------------
# Evaluation


def test_eval_bgp_matches_brute_force_oracle() -> None:
    rng = random.Random(2112)
    for _ in range(120):
        g = small_graph(rng)
        patterns = random_bgp(rng, g)
        assert solutions_as_sets(eval_bgp(g, patterns)) == bgp_oracle(g, patterns)


def test_empty_bgp_has_one_empty_solution() -> None:
    assert eval_bgp(Graph(), []) == [Solution({})]
    assert eval_ask(Graph(), parse_query("ASK {}")) is True


def test_ask_monotonicity_under_triple_addition() -> None:
    rng = random.Random(1984)
    for _ in range(60):
        g = small_graph(rng)
        patterns = random_bgp(rng, g)
        query = Query("ask", None, Bgp(tuple(patterns)))
        before = eval_ask(g, query)
        bigger = g.copy()
        subjects = [t for t in bigger.terms() if not isinstance(t, Literal)]
        subjects.append(Iri("http://example.org/x"))
        for _ in range(3):
            bigger.add(Triple(rng.choice(subjects), Iri("http://example.org/p/0"), Literal("v0")))
        if before:
            assert eval_ask(bigger, query) is True


def test_union_is_commutative_and_distinct() -> None:
    rng = random.Random(777)
    for _ in range(40):
        g = small_graph(rng)
        a = Bgp(tuple(random_bgp(rng, g, max_patterns=2)))
        b = Bgp(tuple(random_bgp(rng, g, max_patterns=2)))
        ab = Query("select", (), UnionPattern((a, b)))
        ba = Query("select", (), UnionPattern((b, a)))
        assert solutions_as_sets(eval_select(g, ab)) == solutions_as_sets(eval_select(g, ba))


def test_union_requires_two_branches() -> None:
    with pytest.raises(ValueError):
        UnionPattern((Bgp(()),))


def test_select_projection_and_order() -> None:
    g = parse_ntriples(
        "<http://example.org/a> <http://example.org/p/0> <http://example.org/o> .\n"
        "<http://example.org/b> <http://example.org/p/0> <http://example.org/o> .\n"
        "<http://example.org/b> <http://example.org/p/1> <http://example.org/o> .\n"
    )
    q = parse_query("SELECT ?s WHERE { ?s ?p <http://example.org/o> }")
    rows = eval_select(g, q)
    assert [sol["s"] for sol in rows] == [
        Iri("http://example.org/a"),
        Iri("http://example.org/b"),
    ]


def test_discovery_query_against_small_store() -> None:
    g = parse_ntriples(
        "<http://example.org/kg1> <http://rdfs.org/ns/void#sparqlEndpoint> <http://example.org/sparql> .\n"
        "<http://example.org/kg1> <http://www.w3.org/1999/02/22-rdf-syntax-ns#type> <http://www.w3.org/ns/dcat#Dataset> .\n"
        "<http://example.org/kg2> <http://rdfs.org/ns/void#sparqlEndpoint> <http://example.org/sparql> .\n"
        "<http://example.org/other> <http://www.w3.org/1999/02/22-rdf-syntax-ns#type> <http://www.w3.org/ns/dcat#Dataset> .\n"
    )
    q = substitute(parse_query(DISCOVERY_SELECT), {"rawEndpointUrl": Iri("http://example.org/sparql")})
    rows = eval_select(g, q)
    assert [sol["kg"] for sol in rows] == [Iri("http://example.org/kg1")]


def test_solution_merge() -> None:
    a = Solution({"x": Iri("http://example.org/1")})
    b = Solution({"y": Iri("http://example.org/2")})
    merged = a.merge(b)
    assert merged == Solution({"x": Iri("http://example.org/1"), "y": Iri("http://example.org/2")})
    conflicting = Solution({"x": Iri("http://example.org/3")})
    assert a.merge(conflicting) is None
    assert a.merge(a) == a
