"""Auditing endpoints: probing, dataset discovery, fetching, campaigns.

Two evaluation routes exist on purpose and must stay distinct:

* the *fetch* route (campaigns) downloads a neighbourhood of each dataset's
  description, merges what the runs saw, saturates the merged graph with
  the vocabulary rules and answers the compact queries locally;
* the *remote* route sends the expanded UNION form of every query to the
  endpoint and trusts its ASK answers.

Campaigns work endpoint-by-endpoint in parallel, but requests to any
single endpoint are sequential with a politeness delay.  Every run is
appended to a journal file (JSON lines, checksummed), so an interrupted
campaign resumes without repeating completed endpoint/run cells.
"""

from __future__ import annotations

import hashlib
import json
import random
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from datetime import datetime, timezone
from typing import Iterable, Mapping, Sequence

from .catalog import Catalog, default_catalog, expand_extended
from .rdf import BlankNode, Graph, Iri, Literal, Triple, parse_ntriples, serialize_ntriples
from .reporting import Report, RunRecord, build_report
from .scoring import (
    DatasetResult,
    FailureKind,
    QueryOutcome,
    build_result,
    evaluate_graph,
    not_evaluated_result,
)
from .sparql import format_query, parse_query, substitute
from .transport import HttpTransport, Transport, TransportError

# Finds dataset IRIs that an endpoint both describes and links to itself.
# The link predicate is left open: catalogues use void:sparqlEndpoint,
# dcat:endpointURL, sd:endpoint and others, and some state the endpoint
# address as a plain string, which is why discovery runs twice (IRI and
# literal form of the endpoint URL).
DISCOVERY_QUERY = """\
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

DATASET_CLASSES = (
    Iri("http://www.w3.org/ns/dcat#Dataset"),
    Iri("http://rdfs.org/ns/void#Dataset"),
    Iri("http://purl.org/dc/dcmitype/Dataset"),
    Iri("http://schema.org/Dataset"),
    Iri("http://www.w3.org/ns/sparql-service-description#Dataset"),
    Iri("http://dataid.dbpedia.org/ns/core#Dataset"),
)

_RDF_TYPE = Iri("http://www.w3.org/1999/02/22-rdf-syntax-ns#type")

DEFAULT_TIMEOUT = 30.0
DEFAULT_DELAY = 0.5
DEFAULT_DEPTH = 2
DEFAULT_PAGE_SIZE = 10000


def _utcnow() -> str:
    return datetime.now(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


class ThrottledTransport:
    """Wraps a transport; enforces a minimum delay between its requests."""

    def __init__(self, inner: Transport, delay: float):
        self._inner = inner
        self._delay = delay
        self._due = 0.0

    def query(self, url: str, text: str, *, timeout: float, run: int = 0):
        if self._delay > 0:
            now = time.monotonic()
            if now < self._due:
                time.sleep(self._due - now)
            self._due = time.monotonic() + self._delay
        return self._inner.query(url, text, timeout=timeout, run=run)

    def run_timestamp(self, url: str, run: int) -> str | None:
        getter = getattr(self._inner, "run_timestamp", None)
        return getter(url, run) if getter else None


# ---------------------------------------------------------------------------
# Probing and discovery


def probe(
    transport: Transport, url: str, *, timeout: float = DEFAULT_TIMEOUT, run: int = 0
) -> bool:
    """Is there a SPARQL endpoint at this URL right now?"""
    try:
        answer = transport.query(url, "ASK {}", timeout=timeout, run=run)
        if isinstance(answer, bool):
            return True
    except TransportError as exc:
        if exc.kind in ("connection", "timeout"):
            return False
    # some endpoints refuse bare ASK; give SELECT a chance
    try:
        answer = transport.query(url, "SELECT * WHERE {} LIMIT 1", timeout=timeout, run=run)
        return isinstance(answer, list)
    except TransportError:
        return False


def discover_datasets(
    transport: Transport, url: str, *, timeout: float = DEFAULT_TIMEOUT, run: int = 0
) -> list[Iri]:
    """Dataset IRIs the endpoint self-describes, IRI- and literal-linked."""
    template = parse_query(DISCOVERY_QUERY)
    found: set[Iri] = set()
    for endpoint_term in (Iri(url), Literal(url)):
        query = substitute(template, {"rawEndpointUrl": endpoint_term})
        rows = transport.query(url, format_query(query), timeout=timeout, run=run)
        if not isinstance(rows, list):
            raise TransportError("malformed", "discovery expected SELECT results")
        for row in rows:
            kg = row.get("kg")
            if isinstance(kg, Iri):
                found.add(kg)
    return sorted(found, key=lambda iri: iri.value)


def discover_in_graph(graph: Graph) -> list[Iri]:
    """Local-file counterpart of discovery: anything typed as a dataset."""
    found = {
        triple.subject
        for cls in DATASET_CLASSES
        for triple in graph.match(None, _RDF_TYPE, cls)
        if isinstance(triple.subject, Iri)
    }
    return sorted(found, key=lambda iri: iri.value)


# ---------------------------------------------------------------------------
# Metadata fetching


def fetch_metadata(
    transport: Transport,
    url: str,
    dataset: Iri,
    *,
    depth: int = DEFAULT_DEPTH,
    page_size: int = DEFAULT_PAGE_SIZE,
    timeout: float = DEFAULT_TIMEOUT,
    run: int = 0,
) -> Graph:
    """Fetch the dataset's description with a bounded breadth-first walk.

    ``depth`` counts fetched rings: the triples of every node fewer than
    ``depth`` hops from the dataset are read, so depth 0 fetches nothing
    and depth 1 reads the dataset node alone.  Each node is read with paged
    ``SELECT ?p ?o`` queries (ORDER BY keeps pages stable between requests).
    Blank-node objects are kept but renamed apart per response, since blank
    node labels only identify a node within a single result document.

    For the dataset node itself the incoming edges are fetched too: service
    descriptions and similar records point *at* the dataset, so an
    outgoing-only walk would never see them.
    """
    graph = Graph()
    queue: list[tuple[Iri, int]] = [(dataset, 0)]
    visited: set[Iri] = set()
    response_no = 0

    def fetch_pages(pattern: str, order: str) -> list[dict]:
        nonlocal response_no
        collected = []
        offset = 0
        while True:
            text = (
                f"SELECT {order} WHERE {{ {pattern} }} "
                f"ORDER BY {order} LIMIT {page_size} OFFSET {offset}"
            )
            rows = transport.query(url, text, timeout=timeout, run=run)
            if not isinstance(rows, list):
                raise TransportError("malformed", "metadata fetch expected SELECT results")
            response_no += 1
            for row in rows:
                collected.append({**row, "response": response_no})
            if len(rows) < page_size:
                break
            offset += page_size
        return collected

    def relabel(term, response: int):
        if isinstance(term, BlankNode):
            return BlankNode(f"r{response}b{term.label}")
        return term

    while queue:
        node, distance = queue.pop(0)
        if node in visited or distance >= depth:
            continue
        visited.add(node)
        for row in fetch_pages(f"<{node.value}> ?p ?o .", "?p ?o"):
            predicate = row.get("p")
            obj = row.get("o")
            if not isinstance(predicate, Iri) or obj is None:
                continue
            graph.add(Triple(node, predicate, relabel(obj, row["response"])))
            if isinstance(obj, Iri) and obj not in visited:
                queue.append((obj, distance + 1))
        if distance == 0:
            for row in fetch_pages(f"?s ?p <{node.value}> .", "?s ?p"):
                subject = row.get("s")
                predicate = row.get("p")
                if not isinstance(predicate, Iri) or subject is None:
                    continue
                if isinstance(subject, Literal):
                    continue
                graph.add(Triple(relabel(subject, row["response"]), predicate, node))
                if isinstance(subject, Iri) and subject not in visited:
                    queue.append((subject, 1))
    return graph


# ---------------------------------------------------------------------------
# Remote evaluation (extended queries against the endpoint)


def evaluate_remote(
    transport: Transport,
    url: str,
    catalog: Catalog,
    dataset: Iri,
    *,
    timeout: float = DEFAULT_TIMEOUT,
    run: int = 0,
) -> DatasetResult:
    """Score a dataset by asking the endpoint the expanded queries."""
    outcomes = []
    for _, cq in catalog.queries():
        extended = expand_extended(cq.query, catalog.rules)
        text = format_query(substitute(extended, {"kg": dataset}))
        try:
            answer = transport.query(url, text, timeout=timeout, run=run)
            if not isinstance(answer, bool):
                raise TransportError("malformed", "ASK answered with bindings")
            outcomes.append(
                QueryOutcome(cq.id, answer, None if answer else FailureKind.ANSWER_FALSE)
            )
        except TransportError as exc:
            kind = FailureKind.TIMEOUT if exc.kind == "timeout" else FailureKind.REMOTE_ERROR
            outcomes.append(QueryOutcome(cq.id, False, kind))
    return build_result(catalog, dataset.value, outcomes)


# ---------------------------------------------------------------------------
# Campaign runs


@dataclass(frozen=True)
class EndpointRun:
    """Everything one run observed about one endpoint.

    ``errors`` lists (stage, error kind) pairs for requests that failed but
    did not abort the run, such as a discovery query that timed out.
    """

    endpoint: str
    run: int
    timestamp: str
    available: bool
    datasets: Mapping[str, Graph]
    errors: tuple[tuple[str, str], ...] = ()


def audit_run(
    transport: Transport,
    endpoint: str,
    run: int,
    *,
    timeout: float = DEFAULT_TIMEOUT,
    depth: int = DEFAULT_DEPTH,
    page_size: int = DEFAULT_PAGE_SIZE,
) -> EndpointRun:
    """One endpoint, one run: probe, discover, fetch."""
    getter = getattr(transport, "run_timestamp", None)
    timestamp = (getter(endpoint, run) if getter else None) or _utcnow()
    if not probe(transport, endpoint, timeout=timeout, run=run):
        return EndpointRun(endpoint, run, timestamp, False, {})
    errors: list[tuple[str, str]] = []
    try:
        discovered = discover_datasets(transport, endpoint, timeout=timeout, run=run)
    except TransportError as exc:
        discovered = []
        errors.append(("discovery", exc.kind))
    graphs: dict[str, Graph] = {}
    for dataset in discovered:
        try:
            graphs[dataset.value] = fetch_metadata(
                transport,
                endpoint,
                dataset,
                depth=depth,
                page_size=page_size,
                timeout=timeout,
                run=run,
            )
        except TransportError as exc:
            graphs[dataset.value] = Graph()
            errors.append((f"fetch {dataset.value}", exc.kind))
    return EndpointRun(endpoint, run, timestamp, True, graphs, tuple(errors))


def merge_runs(runs: Iterable[EndpointRun]) -> dict[str, dict[str, Graph]]:
    """Union the fetched graphs per endpoint and dataset across runs.

    Unavailable runs contribute nothing, so an endpoint that was down for
    one of three runs scores exactly like one that was always up, as long
    as the up runs served the same data.
    """
    merged: dict[str, dict[str, Graph]] = {}
    for er in runs:
        per_endpoint = merged.setdefault(er.endpoint, {})
        for dataset, graph in er.datasets.items():
            target = per_endpoint.setdefault(dataset, Graph())
            target.update(graph)
    return merged


def evaluate_merged(
    catalog: Catalog,
    merged: Mapping[str, Mapping[str, Graph]],
    endpoints: Sequence[str],
) -> dict[str, list[DatasetResult]]:
    """Score every dataset; endpoints with nothing auditable get a zero row."""
    results: dict[str, list[DatasetResult]] = {}
    for endpoint in endpoints:
        graphs = merged.get(endpoint, {})
        if not graphs:
            results[endpoint] = [not_evaluated_result(catalog, endpoint)]
            continue
        results[endpoint] = [
            evaluate_graph(catalog, graph, Iri(dataset))
            for dataset, graph in sorted(graphs.items())
        ]
    return results


# ---------------------------------------------------------------------------
# Journal


class JournalError(RuntimeError):
    """The journal file cannot be trusted; refuse to resume from it."""


def _checksum(record: dict) -> str:
    canonical = json.dumps(record, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


class Journal:
    """Append-only JSON-lines record of completed endpoint runs.

    The first line pins the catalog hash and run count; every line carries
    a checksum over its record.  Any mismatch means the file was edited or
    truncated mid-write, and resuming would silently skew scores, so the
    journal refuses instead.
    """

    def __init__(self, path: str, catalog: Catalog, runs: int):
        self.path = path
        self._lock = threading.Lock()
        self._header = {"catalog": catalog.content_hash(), "runs": runs}

    def load(self) -> dict[tuple[str, int], EndpointRun]:
        completed: dict[tuple[str, int], EndpointRun] = {}
        try:
            with open(self.path, "r", encoding="utf-8") as handle:
                lines = handle.read().splitlines()
        except FileNotFoundError:
            with open(self.path, "w", encoding="utf-8") as handle:
                handle.write(self._line("header", self._header))
            return completed
        if not lines:
            with open(self.path, "a", encoding="utf-8") as handle:
                handle.write(self._line("header", self._header))
            return completed
        for number, line in enumerate(lines, start=1):
            try:
                doc = json.loads(line)
            except json.JSONDecodeError as exc:
                raise JournalError(f"{self.path}:{number}: not JSON: {exc}") from None
            record = doc.get("record")
            if not isinstance(record, dict) or doc.get("sha256") != _checksum(record):
                raise JournalError(f"{self.path}:{number}: checksum mismatch")
            kind = doc.get("kind")
            if number == 1:
                if kind != "header" or record != self._header:
                    raise JournalError(
                        f"{self.path}: journal belongs to a different campaign "
                        "(catalog or run count changed)"
                    )
                continue
            if kind != "run":
                raise JournalError(f"{self.path}:{number}: unexpected record kind {kind!r}")
            er = _run_from_record(self.path, number, record)
            completed[(er.endpoint, er.run)] = er
        return completed

    def append(self, er: EndpointRun) -> None:
        record = {
            "endpoint": er.endpoint,
            "run": er.run,
            "timestamp": er.timestamp,
            "available": er.available,
            "datasets": {
                dataset: serialize_ntriples(graph)
                for dataset, graph in sorted(er.datasets.items())
            },
            "errors": [list(pair) for pair in er.errors],
        }
        line = self._line("run", record)
        with self._lock:
            with open(self.path, "a", encoding="utf-8") as handle:
                handle.write(line)
                handle.flush()

    def _line(self, kind: str, record: dict) -> str:
        return (
            json.dumps(
                {"kind": kind, "record": record, "sha256": _checksum(record)},
                sort_keys=True,
            )
            + "\n"
        )


def _run_from_record(path: str, number: int, record: dict) -> EndpointRun:
    try:
        datasets = {
            dataset: parse_ntriples(data)
            for dataset, data in record["datasets"].items()
        }
        return EndpointRun(
            endpoint=record["endpoint"],
            run=int(record["run"]),
            timestamp=record["timestamp"],
            available=bool(record["available"]),
            datasets=datasets,
            errors=tuple((str(stage), str(kind)) for stage, kind in record["errors"]),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise JournalError(f"{path}:{number}: malformed run record: {exc}") from None


# ---------------------------------------------------------------------------
# Campaigns


@dataclass
class CampaignConfig:
    endpoints: Sequence[str]
    catalog: Catalog | None = None
    runs: int = 3
    timeout: float = DEFAULT_TIMEOUT
    retries: int = 2
    delay: float = DEFAULT_DELAY
    depth: int = DEFAULT_DEPTH
    page_size: int = DEFAULT_PAGE_SIZE
    workers: int = 4
    journal_path: str | None = None
    transport: Transport | None = None
    seed: int | None = None


def run_campaign(config: CampaignConfig) -> Report:
    """Audit all endpoints and aggregate everything into one report."""
    if config.runs < 1:
        raise ValueError("a campaign needs at least one run")
    if config.timeout <= 0:
        raise ValueError("the timeout must be positive")
    if config.delay < 0:
        raise ValueError("the politeness delay cannot be negative")
    if config.retries < 0:
        raise ValueError("the retry count cannot be negative")
    if config.depth < 0:
        raise ValueError("the fetch depth cannot be negative")
    if config.page_size < 1:
        raise ValueError("the page size must be at least one")
    if config.workers < 1:
        raise ValueError("the worker count must be at least one")
    catalog = config.catalog or default_catalog()
    transport = config.transport or HttpTransport(retries=config.retries)
    endpoints = list(dict.fromkeys(config.endpoints))

    completed: dict[tuple[str, int], EndpointRun] = {}
    journal = None
    if config.journal_path:
        journal = Journal(config.journal_path, catalog, config.runs)
        completed = journal.load()

    order = list(endpoints)
    if config.seed is not None:
        random.Random(config.seed).shuffle(order)

    def job(endpoint: str) -> list[EndpointRun]:
        throttled = ThrottledTransport(transport, config.delay)
        out = []
        for run in range(config.runs):
            if (endpoint, run) in completed:
                continue
            er = audit_run(
                throttled,
                endpoint,
                run,
                timeout=config.timeout,
                depth=config.depth,
                page_size=config.page_size,
            )
            if journal is not None:
                journal.append(er)
            out.append(er)
        return out

    all_runs: list[EndpointRun] = list(completed.values())
    if order:
        with ThreadPoolExecutor(max_workers=config.workers) as pool:
            for runs in pool.map(job, order):
                all_runs.extend(runs)
    all_runs.sort(key=lambda er: (er.endpoint, er.run))

    merged = merge_runs(all_runs)
    results = evaluate_merged(catalog, merged, endpoints)
    timestamps = [er.timestamp for er in all_runs if er.timestamp]
    generated_at = max(timestamps) if timestamps else _utcnow()
    records = tuple(
        RunRecord(
            endpoint=er.endpoint,
            run=er.run,
            timestamp=er.timestamp,
            available=er.available,
            scores=tuple(
                (dataset, evaluate_graph(catalog, graph, Iri(dataset)).score)
                for dataset, graph in sorted(er.datasets.items())
            ),
            errors=er.errors,
        )
        for er in all_runs
    )
    return build_report(catalog, results, generated_at, records)
