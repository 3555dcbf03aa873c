"""From ASK answers to hierarchical accountability scores.

Scores are exact rationals all the way up: a question is the mean of its
query outcomes, a leaf is the weighted mean of its questions, and every
node above that is the plain mean of its children.  Nothing is rounded
until a score is rendered for people (tenth of a percent).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Iterable, Mapping

from .catalog import Catalog
from .rdf import Graph, Iri
from .saturation import SaturationTrace, saturate_traced
from .sparql import eval_ask, substitute


class FailureKind(Enum):
    """Why a query did not count as satisfied."""

    ANSWER_FALSE = "answer-false"
    REMOTE_ERROR = "remote-error"
    TIMEOUT = "timeout"
    NOT_EVALUATED = "not-evaluated"


@dataclass(frozen=True)
class QueryOutcome:
    """The answer one catalog query produced for one dataset."""

    query_id: str
    success: bool
    failure: FailureKind | None = None

    def __post_init__(self):
        if self.success and self.failure is not None:
            raise ValueError("a successful outcome cannot carry a failure kind")
        if not self.success and self.failure is None:
            raise ValueError("a failed outcome needs a failure kind")


@dataclass(frozen=True)
class DatasetResult:
    """Scores for one dataset: per query, per question, per hierarchy node.

    ``dataset`` is normally the dataset IRI; for an endpoint where nothing
    could be audited it falls back to the endpoint URL so the zero still
    shows up in reports.  ``trace`` records how saturation unfolded when
    the result came from a local graph; it is provenance, so it stays out
    of equality.
    """

    dataset: str
    outcomes: tuple[QueryOutcome, ...]
    question_scores: Mapping[str, Fraction]
    node_scores: Mapping[str, Fraction]
    trace: SaturationTrace | None = field(default=None, compare=False, repr=False)

    @property
    def score(self) -> Fraction:
        return self.node_scores["root"]

    def outcome(self, query_id: str) -> QueryOutcome:
        for outcome in self.outcomes:
            if outcome.query_id == query_id:
                return outcome
        raise KeyError(query_id)


def build_result(
    catalog: Catalog,
    dataset: str,
    outcomes: Iterable[QueryOutcome],
    trace: SaturationTrace | None = None,
) -> DatasetResult:
    """Aggregate outcomes; they must cover the catalog's queries exactly."""
    by_id: dict[str, QueryOutcome] = {}
    for outcome in outcomes:
        if outcome.query_id in by_id:
            raise ValueError(f"duplicate outcome for query '{outcome.query_id}'")
        by_id[outcome.query_id] = outcome
    expected = [cq.id for _, cq in catalog.queries()]
    missing = [qid for qid in expected if qid not in by_id]
    stray = sorted(set(by_id) - set(expected))
    if missing or stray:
        parts = []
        if missing:
            parts.append("missing outcomes: " + ", ".join(missing))
        if stray:
            parts.append("unknown query ids: " + ", ".join(stray))
        raise ValueError("; ".join(parts))

    question_scores: dict[str, Fraction] = {}
    for question in catalog.questions():
        hits = sum(1 for cq in question.queries if by_id[cq.id].success)
        question_scores[question.id] = Fraction(hits, len(question.queries))

    node_scores: dict[str, Fraction] = {}
    for leaf in catalog.leaves():
        total = sum(q.weight for q in leaf.questions)
        weighted = sum(q.weight * question_scores[q.id] for q in leaf.questions)
        node_scores[leaf.id] = weighted / total
    for step in catalog.steps():
        node_scores[step.id] = sum(
            node_scores[leaf.id] for leaf in step.children
        ) / len(step.children)
    node_scores["root"] = sum(
        node_scores[step.id] for step in catalog.steps()
    ) / len(catalog.steps())

    ordered = tuple(by_id[qid] for qid in expected)
    return DatasetResult(dataset, ordered, question_scores, node_scores, trace)


def evaluate_graph(
    catalog: Catalog,
    graph: Graph,
    dataset: Iri,
    *,
    saturated: Graph | None = None,
) -> DatasetResult:
    """Audit one dataset in a local graph: saturate, then run compact queries.

    Pass ``saturated`` to reuse one saturation across several datasets of
    the same graph (the result then carries no trace of its own).
    """
    trace = None
    if saturated is None:
        saturated, trace = saturate_traced(graph, catalog.rules)
    outcomes = []
    for _, cq in catalog.queries():
        ok = eval_ask(saturated, substitute(cq.query, {"kg": dataset}))
        outcomes.append(
            QueryOutcome(cq.id, ok, None if ok else FailureKind.ANSWER_FALSE)
        )
    return build_result(catalog, dataset.value, outcomes, trace)


def not_evaluated_result(
    catalog: Catalog, key: str, failure: FailureKind = FailureKind.NOT_EVALUATED
) -> DatasetResult:
    """An all-zero result for something that could not be audited at all."""
    outcomes = [QueryOutcome(cq.id, False, failure) for _, cq in catalog.queries()]
    return build_result(catalog, key, outcomes)


def format_percent(score: Fraction) -> str:
    """Human rendering, tenth of a percent: Fraction(1, 30) -> '3.3%'."""
    permille = round(score * 1000)
    return f"{permille // 10}.{permille % 10}%"
