"""How queries reach an endpoint: live HTTP or a recorded transcript.

Both transports expose the same ``query`` method: they take a SPARQL text
and return a decoded answer, ``bool`` for ASK and a list of variable
binding rows for SELECT.  Everything that can go wrong surfaces as a
:class:`TransportError` with a coarse kind, so callers can score a timeout
differently from a refused connection without touching HTTP internals.

The transcript transport replays a recorded audit: a YAML file holds, per
endpoint and per run, an availability flag, a timestamp and an N-Triples
snapshot of what the endpoint would serve.  Queries are answered by the
package's own evaluator, which makes campaign runs fully deterministic.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from typing import Protocol

import requests
import yaml

from .rdf import BlankNode, Graph, Iri, Literal, ParseError, Term, parse_ntriples
from .sparql import SparqlError, eval_ask, eval_select, parse_query

ACCEPT = "application/sparql-results+json"
USER_AGENT = "kgaudit/0.1 (+https://example.org/kgaudit)"


class TransportError(RuntimeError):
    """A query could not be answered.

    ``kind`` is one of ``connection``, ``timeout``, ``http`` and
    ``malformed``; ``retryable`` says whether trying again could help.
    """

    def __init__(self, kind: str, message: str, *, retryable: bool = False):
        self.kind = kind
        self.retryable = retryable
        super().__init__(f"{kind}: {message}")


class Transport(Protocol):
    def query(
        self, url: str, text: str, *, timeout: float, run: int = 0
    ) -> bool | list[dict[str, Term]]:
        """Answer one SPARQL query; ``run`` selects the campaign run."""
        ...


# ---------------------------------------------------------------------------
# Live HTTP


class HttpTransport:
    """Talks to a SPARQL endpoint over HTTP.

    Queries go out as GET; endpoints that reject long URLs (414) or GET
    itself (405) are retried once as form-encoded POST.  Connection errors
    and 5xx answers are retried up to ``retries`` extra times; timeouts are
    not, since each one already costs the full timeout budget.
    """

    def __init__(self, *, retries: int = 2, session: requests.Session | None = None):
        self.retries = retries
        self.session = session or requests.Session()

    def query(
        self, url: str, text: str, *, timeout: float, run: int = 0
    ) -> bool | list[dict[str, Term]]:
        last: TransportError | None = None
        for _ in range(self.retries + 1):
            try:
                return self._attempt(url, text, timeout)
            except TransportError as exc:
                if not exc.retryable:
                    raise
                last = exc
        assert last is not None
        raise last

    def _attempt(self, url: str, text: str, timeout: float):
        headers = {"Accept": ACCEPT, "User-Agent": USER_AGENT}
        try:
            response = self.session.get(
                url, params={"query": text}, headers=headers, timeout=timeout
            )
            if response.status_code in (405, 414):
                response = self.session.post(
                    url, data={"query": text}, headers=headers, timeout=timeout
                )
        except requests.Timeout as exc:
            raise TransportError("timeout", str(exc)) from None
        except requests.RequestException as exc:
            raise TransportError("connection", str(exc), retryable=True) from None
        if response.status_code == 429 or response.status_code >= 500:
            raise TransportError(
                "http", f"status {response.status_code}", retryable=True
            )
        if not 200 <= response.status_code < 300:
            raise TransportError("http", f"status {response.status_code}")
        return decode_results(response.text)


def decode_results(body: str) -> bool | list[dict[str, Term]]:
    """Decode a SPARQL JSON results document."""
    try:
        doc = json.loads(body)
    except json.JSONDecodeError as exc:
        raise TransportError("malformed", f"not JSON: {exc}") from None
    if not isinstance(doc, dict):
        raise TransportError("malformed", "result document is not an object")
    if "boolean" in doc:
        value = doc["boolean"]
        if not isinstance(value, bool):
            raise TransportError("malformed", "boolean result is not a boolean")
        return value
    try:
        bindings = doc["results"]["bindings"]
    except (KeyError, TypeError):
        raise TransportError("malformed", "missing results.bindings") from None
    if not isinstance(bindings, list):
        raise TransportError("malformed", "results.bindings is not a list")
    return [_decode_row(row) for row in bindings]


def _decode_row(row: object) -> dict[str, Term]:
    if not isinstance(row, dict):
        raise TransportError("malformed", "binding row is not an object")
    out: dict[str, Term] = {}
    for name, cell in row.items():
        if not isinstance(cell, dict) or "value" not in cell:
            raise TransportError("malformed", f"binding for ?{name} has no value")
        kind = cell.get("type")
        value = cell["value"]
        try:
            if kind == "uri":
                out[name] = Iri(value)
            elif kind == "bnode":
                out[name] = BlankNode(value)
            elif kind in ("literal", "typed-literal"):
                out[name] = Literal(
                    value,
                    datatype=cell.get("datatype"),
                    language=cell.get("xml:lang"),
                )
            else:
                raise TransportError(
                    "malformed", f"unknown term type {kind!r} for ?{name}"
                )
        except ValueError as exc:
            raise TransportError("malformed", f"bad term for ?{name}: {exc}") from None
    return out


# ---------------------------------------------------------------------------
# Recorded transcripts

# solution modifiers accepted (and stripped) at the end of a query
_MODIFIER_RE = re.compile(
    r"(?:\s+ORDER\s+BY(?:\s+(?:ASC|DESC)\s*\(\s*\?\w+\s*\)|\s+\?\w+)+)?"
    r"(?:\s+LIMIT\s+(?P<limit>\d+))?"
    r"(?:\s+OFFSET\s+(?P<offset>\d+))?\s*$",
    re.IGNORECASE,
)


@dataclass(frozen=True)
class TranscriptRun:
    available: bool
    timestamp: str
    graph: Graph


class TranscriptTransport:
    """Replays recorded endpoints from a YAML transcript.

    Transcript shape::

        endpoints:
          "http://example.org/sparql":
            runs:
              - available: true
                timestamp: "2024-05-01T10:00:00Z"
                data: |
                  <s> <p> <o> .
              - available: false
                timestamp: "2024-05-02T10:00:00Z"

    A campaign asking for a run beyond the recorded ones gets the last
    recorded run.  Unavailable runs refuse queries with a connection
    error, exactly like a dead endpoint.
    """

    def __init__(self, path: str):
        with open(path, "r", encoding="utf-8") as handle:
            doc = yaml.safe_load(handle)
        self._endpoints: dict[str, list[TranscriptRun]] = {}
        if not isinstance(doc, dict) or not isinstance(doc.get("endpoints"), dict):
            raise ValueError(f"{path}: transcript needs an 'endpoints' mapping")
        for url, spec in doc["endpoints"].items():
            runs = (spec or {}).get("runs")
            if not isinstance(runs, list) or not runs:
                raise ValueError(f"{path}: endpoint {url} needs a non-empty 'runs' list")
            parsed = []
            for index, entry in enumerate(runs):
                entry = entry or {}
                data = entry.get("data", "")
                try:
                    graph = parse_ntriples(data)
                except ParseError as exc:
                    raise ValueError(
                        f"{path}: endpoint {url} run {index}: {exc}"
                    ) from None
                parsed.append(
                    TranscriptRun(
                        available=bool(entry.get("available", True)),
                        timestamp=str(entry.get("timestamp", "")),
                        graph=graph,
                    )
                )
            self._endpoints[str(url)] = parsed

    def _run(self, url: str, run: int) -> TranscriptRun:
        runs = self._endpoints.get(url)
        if runs is None:
            raise TransportError("connection", f"no transcript for endpoint {url}")
        return runs[max(0, min(run, len(runs) - 1))]

    def run_timestamp(self, url: str, run: int) -> str | None:
        try:
            return self._run(url, run).timestamp or None
        except TransportError:
            return None

    def query(
        self, url: str, text: str, *, timeout: float, run: int = 0
    ) -> bool | list[dict[str, Term]]:
        entry = self._run(url, run)
        if not entry.available:
            raise TransportError("connection", f"endpoint {url} is recorded as down")
        match = _MODIFIER_RE.search(text)
        limit = offset = None
        stripped = text
        if match:
            stripped = text[: match.start()]
            limit = int(match.group("limit")) if match.group("limit") else None
            offset = int(match.group("offset")) if match.group("offset") else None
        try:
            query = parse_query(stripped)
        except SparqlError as exc:
            raise TransportError("malformed", f"transcript cannot answer: {exc}") from None
        if query.form == "ask":
            return eval_ask(entry.graph, query)
        rows = [dict(solution) for solution in eval_select(entry.graph, query)]
        start = offset or 0
        end = start + limit if limit is not None else None
        return rows[start:end]
