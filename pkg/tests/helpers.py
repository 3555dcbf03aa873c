"""Shared test helpers: fixture paths, random RDF generators, oracles."""

from __future__ import annotations

import itertools
import random
from pathlib import Path

from kgaudit.rdf import BlankNode, Graph, Iri, Literal, Term, Triple, term_sort_key
from kgaudit.sparql import Solution, TriplePattern, Variable

FIXTURES = Path(__file__).parent / "fixtures"

_IRIS = [
    "http://example.org/dataset/a",
    "http://example.org/dataset/b",
    "http://example.org/agent/1",
    "http://example.org/agent/2",
    "http://example.org/place/x",
    "http://purl.org/dc/terms/publisher",
    "http://purl.org/dc/terms/creator",
    "http://purl.org/dc/terms/title",
    "http://xmlns.com/foaf/0.1/name",
    "http://www.w3.org/1999/02/22-rdf-syntax-ns#type",
    "mailto:someone@example.org",
]
_DATATYPES = [
    None,
    "http://www.w3.org/2001/XMLSchema#integer",
    "http://www.w3.org/2001/XMLSchema#date",
]
_LANGS = ["en", "fr", "en-GB"]
_LEXICALS = ["alpha", "beta with space", 'quo"te', "tab\there", "new\nline", "42", "", "\\slash"]


def random_iri(rng: random.Random) -> Iri:
    return Iri(rng.choice(_IRIS))


def random_literal(rng: random.Random) -> Literal:
    lex = rng.choice(_LEXICALS)
    if rng.random() < 0.3:
        return Literal(lex, language=rng.choice(_LANGS))
    return Literal(lex, datatype=rng.choice(_DATATYPES))


def random_term(rng: random.Random, allow_literal: bool = True) -> Term:
    roll = rng.random()
    if roll < 0.6:
        return random_iri(rng)
    if roll < 0.8 or not allow_literal:
        return BlankNode(f"b{rng.randrange(4)}")
    return random_literal(rng)


def random_triple(rng: random.Random) -> Triple:
    return Triple(
        random_term(rng, allow_literal=False),
        random_iri(rng),
        random_term(rng),
    )


def random_graph(rng: random.Random, max_triples: int = 200) -> Graph:
    g = Graph()
    for _ in range(rng.randrange(max_triples + 1)):
        g.add(random_triple(rng))
    return g


# ---------------------------------------------------------------------------
# Small-universe graphs and a brute-force join oracle for pattern matching.
# The oracle enumerates every assignment of pattern variables to terms of
# the graph, so the term universe is kept deliberately tiny.

_SMALL_SUBJECTS = [Iri(f"http://example.org/node/{i}") for i in range(4)] + [
    BlankNode("s0"),
    BlankNode("s1"),
]
_SMALL_PREDICATES = [Iri(f"http://example.org/p/{i}") for i in range(4)] + [
    Iri("http://www.w3.org/1999/02/22-rdf-syntax-ns#type")
]
_SMALL_OBJECTS = _SMALL_SUBJECTS[:4] + [Literal("v0"), Literal("v1"), Literal("5", datatype="http://www.w3.org/2001/XMLSchema#integer")]
_VAR_NAMES = ["x", "y", "z"]


def small_graph(rng: random.Random, max_triples: int = 50) -> Graph:
    g = Graph()
    for _ in range(rng.randrange(max_triples + 1)):
        g.add(
            Triple(
                rng.choice(_SMALL_SUBJECTS),
                rng.choice(_SMALL_PREDICATES),
                rng.choice(_SMALL_OBJECTS),
            )
        )
    return g


def random_bgp(
    rng: random.Random, g: Graph, max_patterns: int = 4
) -> list[TriplePattern]:
    """A random BGP biased towards patterns that can match the graph."""
    triples = list(g)
    patterns: list[TriplePattern] = []
    for _ in range(rng.randrange(1, max_patterns + 1)):
        if triples and rng.random() < 0.7:
            base = rng.choice(triples)
            positions = [base.subject, base.predicate, base.object]
        else:
            positions = [
                rng.choice(_SMALL_SUBJECTS),
                rng.choice(_SMALL_PREDICATES),
                rng.choice(_SMALL_OBJECTS),
            ]
        terms = [
            Variable(rng.choice(_VAR_NAMES)) if rng.random() < 0.45 else pos
            for pos in positions
        ]
        patterns.append(TriplePattern(*terms))
    return patterns


def bgp_oracle(g: Graph, patterns: list[TriplePattern]) -> set[frozenset]:
    """Reference BGP semantics: try every assignment of variables to graph terms."""
    names = sorted(
        {
            pos.name
            for tp in patterns
            for pos in tp.positions()
            if isinstance(pos, Variable)
        }
    )
    facts = {(t.subject, t.predicate, t.object) for t in g}
    universe = sorted(g.terms(), key=term_sort_key)
    found: set[frozenset] = set()
    for combo in itertools.product(universe, repeat=len(names)):
        assignment = dict(zip(names, combo))

        def ground(pos):
            return assignment[pos.name] if isinstance(pos, Variable) else pos

        if all(
            (ground(tp.subject), ground(tp.predicate), ground(tp.object)) in facts
            for tp in patterns
        ):
            found.add(frozenset(assignment.items()))
    return found


def solutions_as_sets(solutions: list[Solution]) -> set[frozenset]:
    return {frozenset(sol.items()) for sol in solutions}


# ---------------------------------------------------------------------------
# Metadata-flavoured graphs: vocabulary drawn from a catalog, so rule and
# query machinery actually has something to chew on.

_KG = Iri("http://example.org/kg/main")
RDF_TYPE_IRI = Iri("http://www.w3.org/1999/02/22-rdf-syntax-ns#type")


def catalog_vocabulary(catalog) -> tuple[list[Iri], list[Iri]]:
    """(predicates, constant objects) mentioned by a catalog's queries and rules."""
    predicates: set[Iri] = set()
    constants: set[Iri] = set()
    for _, cq in catalog.queries():
        for tp in cq.query.pattern.patterns:
            if isinstance(tp.predicate, Iri):
                predicates.add(tp.predicate)
            if isinstance(tp.object, Iri):
                constants.add(tp.object)
    for rule in catalog.rules:
        for tp in rule.source + rule.target:
            if isinstance(tp.predicate, Iri):
                predicates.add(tp.predicate)
            if isinstance(tp.object, Iri):
                constants.add(tp.object)
    key = lambda iri: iri.value
    return sorted(predicates, key=key), sorted(constants, key=key)


def random_metadata_graph(
    rng: random.Random,
    predicates: list[Iri],
    constants: list[Iri],
    max_triples: int = 40,
) -> Graph:
    resources: list = [
        _KG,
        Iri("http://example.org/kg/other"),
        Iri("http://example.org/agent/1"),
        Iri("http://example.org/agent/2"),
        Iri("http://example.org/thing/a"),
        Iri("http://example.org/thing/b"),
        BlankNode("m0"),
        BlankNode("m1"),
    ]
    literals = [
        Literal("Alice"),
        Literal("a knowledge graph"),
        Literal("2023-05-17", datatype="http://www.w3.org/2001/XMLSchema#date"),
        Literal("hello", language="en"),
    ]
    noise = [Iri("http://example.org/unrelated"), RDF_TYPE_IRI]
    g = Graph()
    for _ in range(rng.randrange(max_triples + 1)):
        subject = rng.choice(resources)
        predicate = rng.choice(predicates + noise)
        roll = rng.random()
        if roll < 0.5:
            obj = rng.choice(resources)
        elif roll < 0.75:
            obj = rng.choice(literals)
        elif constants:
            obj = rng.choice(constants)
        else:
            obj = rng.choice(resources)
        g.add(Triple(subject, predicate, obj))
    return g
