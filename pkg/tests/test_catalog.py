"""Catalog loading, validation, round-tripping and query expansion."""

from fractions import Fraction

import pytest
import yaml

from kgaudit.catalog import (
    CatalogError,
    default_catalog,
    dump_catalog,
    expand_extended,
    load_catalog,
    parse_catalog,
    validate,
)
from kgaudit.sparql import Bgp, UnionPattern, pattern_variables


# ---------------------------------------------------------------------------
# Shape of the bundled catalog


def test_default_catalog_counts():
    cat = default_catalog()
    assert len(list(cat.questions())) == 30
    assert len([cq for _, cq in cat.queries()]) == 33
    assert len(list(cat.nodes())) == 17
    assert len(cat.rules) == 78


def test_default_catalog_is_cached():
    assert default_catalog() is default_catalog()


def test_hierarchy_layout():
    cat = default_catalog()
    assert [step.id for step in cat.steps()] == ["collection", "maintenance", "usage"]
    leaves = {step.id: [leaf.id for leaf in step.children] for step in cat.steps()}
    assert leaves["collection"] == [
        "collection.who",
        "collection.when",
        "collection.where",
        "collection.how",
    ]
    assert leaves["usage"][-1] == "usage.what"
    assert len(leaves["usage"]) == 5
    per_step = {
        step.id: sum(len(leaf.questions) for leaf in step.children)
        for step in cat.steps()
    }
    assert per_step == {"collection": 5, "maintenance": 5, "usage": 20}


def test_default_catalog_validates_clean():
    assert validate(default_catalog()) == []


def test_usage_weights():
    cat = default_catalog()
    by_leaf = {
        leaf.id: [(q.id, q.weight) for q in leaf.questions] for leaf in cat.leaves()
    }
    assert by_leaf["usage.who"] == [
        ("publisher", Fraction(1)),
        ("usage-rights", Fraction(1, 2)),
        ("audience", Fraction(1, 2)),
    ]
    assert [w for _, w in by_leaf["usage.when"]] == [Fraction(1)] * 3
    assert [w for _, w in by_leaf["usage.where"]] == [
        Fraction(1, 2),
        Fraction(1, 2),
        Fraction(1),
    ]
    for leaf_id in ("collection.who", "maintenance.who", "usage.how", "usage.what"):
        assert all(w == Fraction(1) for _, w in by_leaf[leaf_id])


def test_follow_up_queries():
    cat = default_catalog()
    assert [cq.id for cq in cat.question("creator").queries] == ["creator.1", "creator.2"]
    assert [cq.id for cq in cat.question("contributor").queries] == [
        "contributor.1",
        "contributor.2",
    ]
    assert len(cat.question("access-url-how").queries) == 2
    # the access point is asked under both "where" and "how"
    assert (
        cat.question("access-url").queries[0].text
        == cat.question("access-url-how").queries[0].text
    )


def test_queries_are_parsed_asks():
    for _, cq in default_catalog().queries():
        assert cq.query.form == "ask"
        assert isinstance(cq.query.pattern, Bgp)
        assert "kg" in pattern_variables(cq.query.pattern)


# ---------------------------------------------------------------------------
# Round-trip


def test_dump_parse_round_trip():
    cat = default_catalog()
    again = parse_catalog(dump_catalog(cat))
    assert again == cat
    assert again.content_hash() == cat.content_hash()


def test_load_catalog_from_file(tmp_path):
    path = tmp_path / "catalog.yaml"
    path.write_text(dump_catalog(default_catalog()), encoding="utf-8")
    assert load_catalog(str(path)) == default_catalog()


def test_content_hash_tracks_changes():
    doc = yaml.safe_load(dump_catalog(default_catalog()))
    for q in doc["questions"]:
        if q["id"] == "audience":
            q["weight"] = "1/4"
    other = parse_catalog(yaml.safe_dump(doc))
    assert other.content_hash() != default_catalog().content_hash()


# ---------------------------------------------------------------------------
# Rejection of malformed catalogs


def _mutated(mutate) -> str:
    """Apply a mutation to the default catalog document; return the error text."""
    doc = yaml.safe_load(dump_catalog(default_catalog()))
    mutate(doc)
    with pytest.raises(CatalogError) as err:
        parse_catalog(yaml.safe_dump(doc))
    return str(err.value)


def test_missing_leaf_is_reported_with_counts():
    def mutate(doc):
        del doc["hierarchy"]["usage.what"]
        doc["questions"] = [q for q in doc["questions"] if q["leaf"] != "usage.what"]

    message = _mutated(mutate)
    assert "usage has 4 children, expected 5" in message


def test_non_positive_weight_rejected():
    def mutate(doc):
        for q in doc["questions"]:
            if q["id"] == "publisher":
                q["weight"] = 0

    message = _mutated(mutate)
    assert "question 'publisher' has non-positive weight" in message


def test_float_weight_rejected_with_hint():
    def mutate(doc):
        doc["questions"][0]["weight"] = 0.5

    message = _mutated(mutate)
    assert '"1/2"' in message


def test_dead_rule_rejected():
    def mutate(doc):
        doc["rules"].append(
            {
                "id": "dead-end",
                "source": "?kg <http://example.org/p> ?v .",
                "target": "?kg <http://example.org/q> ?v .",
            }
        )

    message = _mutated(mutate)
    assert "rule 'dead-end' is dead" in message


def test_chained_rules_rejected():
    def mutate(doc):
        doc["rules"].append(
            {
                "id": "chainy",
                "source": "?kg dct:publisher ?v .",
                "target": "?kg dcat:theme ?v .",
            }
        )

    message = _mutated(mutate)
    assert "rule 'chainy'" in message
    assert "another rule derives" in message


def test_unbound_target_variable_rejected():
    def mutate(doc):
        doc["rules"].append(
            {
                "id": "loose",
                "source": "?kg dce:creator ?creator .",
                "target": "?kg dct:creator ?other .",
            }
        )

    message = _mutated(mutate)
    assert "rule 'loose' target variable ?other is not bound" in message


def test_target_subject_must_come_from_source_subject():
    def mutate(doc):
        doc["rules"].append(
            {
                "id": "flipped",
                "source": "?kg schema:about ?c .",
                "target": "?c dcat:theme ?kg .",
            }
        )

    message = _mutated(mutate)
    assert "rule 'flipped' target subject ?c could bind a literal" in message


def test_non_ask_query_rejected():
    def mutate(doc):
        for q in doc["questions"]:
            if q["id"] == "publisher":
                q["queries"] = ["SELECT ?p WHERE { ?kg dct:publisher ?p . }"]

    message = _mutated(mutate)
    assert "is not an ASK query" in message


def test_query_must_mention_kg():
    def mutate(doc):
        for q in doc["questions"]:
            if q["id"] == "license":
                q["queries"] = ["ASK { ?s dct:license ?license . }"]

    message = _mutated(mutate)
    assert "never mentions ?kg" in message


def test_query_parse_errors_name_the_question():
    def mutate(doc):
        for q in doc["questions"]:
            if q["id"] == "creator":
                q["queries"] = ["ASK { ?kg dct:creator ?c . FILTER (?c) }"]

    message = _mutated(mutate)
    assert "question 'creator' query 1" in message
    assert "FILTER" in message


def test_question_on_undeclared_leaf_rejected():
    def mutate(doc):
        for q in doc["questions"]:
            if q["id"] == "creator":
                q["leaf"] = "collection.extra"

    message = _mutated(mutate)
    assert "collection.extra" in message


def test_duplicate_question_id_rejected():
    def mutate(doc):
        copy = dict(next(q for q in doc["questions"] if q["id"] == "audience"))
        doc["questions"].append(copy)

    message = _mutated(mutate)
    assert "duplicate question id 'audience'" in message


def test_not_yaml_rejected():
    with pytest.raises(CatalogError):
        parse_catalog("questions: [unclosed")
    with pytest.raises(CatalogError):
        parse_catalog("- just\n- a list\n")


# ---------------------------------------------------------------------------
# Extended queries


def test_publisher_expands_to_five_branches():
    cat = default_catalog()
    compact = cat.question("publisher").queries[0].query
    extended = expand_extended(compact, cat.rules)
    assert isinstance(extended.pattern, UnionPattern)
    branches = extended.pattern.branches
    assert len(branches) == 5
    assert branches[0] == compact.pattern
    sizes = sorted(len(b.patterns) for b in branches)
    assert sizes == [1, 1, 1, 1, 3]
    # every branch still talks about the dataset and binds ?publisher
    for branch in branches:
        assert {"kg", "publisher"} <= pattern_variables(branch)


def test_follow_up_expansion_is_a_product():
    cat = default_catalog()
    compact = cat.question("creator").queries[1].query
    extended = expand_extended(compact, cat.rules)
    branches = extended.pattern.branches
    # 8 ways to say "creator" times 3 ways to say "name"
    assert len(branches) == 24
    for branch in branches:
        assert {"kg", "creator", "name"} <= pattern_variables(branch)


def test_expansion_without_applicable_rules_is_identity():
    cat = default_catalog()
    compact = cat.question("creation-method").queries[0].query
    extended = expand_extended(compact, cat.rules)
    assert extended.pattern == compact.pattern


def test_expansion_renames_rule_variables_apart():
    cat = default_catalog()
    compact = cat.question("creation-location").queries[0].query
    extended = expand_extended(compact, cat.rules)
    branches = extended.pattern.branches
    assert len(branches) == 2
    chain = branches[1]
    names = pattern_variables(chain)
    assert "kg" in names and "location" in names
    # the intermediate activity variable must not collide with query variables
    intermediates = names - {"kg", "location"}
    assert len(intermediates) == 1
    assert next(iter(intermediates)).startswith("activity")
