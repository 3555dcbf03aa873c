"""Minimal RDF data model with N-Triples and Turtle (subset) support.

The model is deliberately small: IRIs, blank nodes and literals, triples
over them, and an in-memory graph with set semantics plus subject and
predicate indexes.  Graphs are mutated while a single owner loads them and
are treated as read-only afterwards; every helper that combines graphs
builds a new one.

The Turtle reader covers the subset needed for hand-written metadata
fixtures: prefix declarations, prefixed names, ``a``, predicate and object
lists, and quoted literals with an optional datatype or language tag.
Anything outside that subset is rejected by name rather than silently
misread.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable, Iterator, Union

RDF = "http://www.w3.org/1999/02/22-rdf-syntax-ns#"
RDF_TYPE = RDF + "type"
XSD = "http://www.w3.org/2001/XMLSchema#"
XSD_STRING = XSD + "string"

_SCHEME_RE = re.compile(r"^[A-Za-z][A-Za-z0-9+.\-]*:")
_LANGTAG_RE = re.compile(r"^[A-Za-z]+(-[A-Za-z0-9]+)*$")
_BLANK_LABEL_RE = re.compile(r"^[A-Za-z0-9_][A-Za-z0-9_.\-]*$")


class ParseError(ValueError):
    """Raised when RDF input cannot be read; carries the offending line."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


# ---------------------------------------------------------------------------
# Terms


@dataclass(frozen=True, order=False)
class Iri:
    """An absolute IRI."""

    value: str

    def __post_init__(self) -> None:
        if not _SCHEME_RE.match(self.value):
            raise ValueError(f"IRI is not absolute: {self.value!r}")
        if any(c in self.value for c in ' <>"{}|^`') or "\\" in self.value:
            raise ValueError(f"IRI contains a forbidden character: {self.value!r}")

    def __repr__(self) -> str:
        return f"Iri({self.value!r})"


@dataclass(frozen=True)
class BlankNode:
    """A blank node identified by a label unique within its graph."""

    label: str

    def __post_init__(self) -> None:
        if not _BLANK_LABEL_RE.match(self.label) or self.label.endswith("."):
            raise ValueError(f"invalid blank node label: {self.label!r}")


@dataclass(frozen=True)
class Literal:
    """A literal with an optional datatype IRI or language tag, not both.

    A literal typed ``xsd:string`` is normalised to a plain literal so the
    two spellings compare equal, as RDF 1.1 intends.
    """

    lexical: str
    datatype: str | None = None
    language: str | None = None

    def __post_init__(self) -> None:
        if self.datatype is not None and self.language is not None:
            raise ValueError("literal cannot carry both a datatype and a language")
        if self.language is not None and not _LANGTAG_RE.match(self.language):
            raise ValueError(f"invalid language tag: {self.language!r}")
        if self.datatype == XSD_STRING:
            object.__setattr__(self, "datatype", None)


Term = Union[Iri, BlankNode, Literal]


@dataclass(frozen=True)
class Triple:
    """An RDF triple; the predicate is an IRI and the subject is not a literal."""

    subject: Term
    predicate: Term
    object: Term

    def __post_init__(self) -> None:
        if isinstance(self.subject, Literal):
            raise ValueError("triple subject cannot be a literal")
        if not isinstance(self.predicate, Iri):
            raise ValueError("triple predicate must be an IRI")


def format_term(term: Term) -> str:
    """Render a term in N-Triples syntax."""
    if isinstance(term, Iri):
        return f"<{term.value}>"
    if isinstance(term, BlankNode):
        return f"_:{term.label}"
    body = _escape_literal(term.lexical)
    if term.language is not None:
        return f'"{body}"@{term.language}'
    if term.datatype is not None:
        return f'"{body}"^^<{term.datatype}>'
    return f'"{body}"'


def term_sort_key(term: Term) -> tuple[int, str]:
    """Total order over terms: IRIs, then blank nodes, then literals."""
    if isinstance(term, Iri):
        return (0, term.value)
    if isinstance(term, BlankNode):
        return (1, term.label)
    return (2, format_term(term))


# ---------------------------------------------------------------------------
# Graph


class Graph:
    """A set of triples indexed by subject and by predicate.

    Iteration follows insertion order, which keeps downstream output
    deterministic without relying on hash ordering.
    """

    __slots__ = ("_triples", "_by_subject", "_by_predicate")

    def __init__(self, triples: Iterable[Triple] = ()):
        self._triples: dict[Triple, None] = {}
        self._by_subject: dict[Term, list[Triple]] = {}
        self._by_predicate: dict[Term, list[Triple]] = {}
        for t in triples:
            self.add(t)

    def add(self, triple: Triple) -> bool:
        """Add a triple; returns True when it was not already present."""
        if triple in self._triples:
            return False
        self._triples[triple] = None
        self._by_subject.setdefault(triple.subject, []).append(triple)
        self._by_predicate.setdefault(triple.predicate, []).append(triple)
        return True

    def update(self, triples: Iterable[Triple]) -> None:
        for t in triples:
            self.add(t)

    def copy(self) -> "Graph":
        return Graph(self)

    def match(
        self,
        subject: Term | None = None,
        predicate: Term | None = None,
        object: Term | None = None,
    ) -> Iterator[Triple]:
        """Yield triples matching the given positions; None is a wildcard."""
        if subject is not None:
            candidates: Iterable[Triple] = self._by_subject.get(subject, ())
        elif predicate is not None:
            candidates = self._by_predicate.get(predicate, ())
        else:
            candidates = self._triples
        for t in candidates:
            if predicate is not None and t.predicate != predicate:
                continue
            if object is not None and t.object != object:
                continue
            if subject is not None and t.subject != subject:
                continue
            yield t

    def terms(self) -> set[Term]:
        """All terms occurring in any position."""
        out: set[Term] = set()
        for t in self._triples:
            out.add(t.subject)
            out.add(t.predicate)
            out.add(t.object)
        return out

    def __len__(self) -> int:
        return len(self._triples)

    def __iter__(self) -> Iterator[Triple]:
        return iter(self._triples)

    def __contains__(self, triple: Triple) -> bool:
        return triple in self._triples

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Graph):
            return NotImplemented
        return self._triples.keys() == other._triples.keys()

    def __repr__(self) -> str:
        return f"<Graph with {len(self)} triples>"


def union(*graphs: Graph) -> Graph:
    out = Graph()
    for g in graphs:
        out.update(g)
    return out


# ---------------------------------------------------------------------------
# Shared lexing helpers

_ECHAR_DECODE = {
    "t": "\t",
    "b": "\b",
    "n": "\n",
    "r": "\r",
    "f": "\f",
    '"': '"',
    "'": "'",
    "\\": "\\",
}
_ECHAR_ENCODE = {
    "\\": "\\\\",
    '"': '\\"',
    "\n": "\\n",
    "\r": "\\r",
    "\t": "\\t",
    "\b": "\\b",
    "\f": "\\f",
}


def _escape_literal(text: str) -> str:
    return "".join(_ECHAR_ENCODE.get(c, c) for c in text)


class _Scanner:
    """Character cursor over one logical chunk of input."""

    def __init__(self, text: str, line: int):
        self.text = text
        self.pos = 0
        self.line = line

    def error(self, message: str) -> ParseError:
        return ParseError(message, self.line)

    def at_end(self) -> bool:
        return self.pos >= len(self.text)

    def peek(self) -> str:
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def skip_ws(self) -> None:
        while self.pos < len(self.text):
            c = self.text[self.pos]
            if c == "\n":
                self.line += 1
                self.pos += 1
            elif c in " \t\r":
                self.pos += 1
            elif c == "#":
                while self.pos < len(self.text) and self.text[self.pos] != "\n":
                    self.pos += 1
            else:
                break

    def expect(self, char: str) -> None:
        if self.peek() != char:
            raise self.error(f"expected {char!r}, found {self.peek()!r}")
        self.pos += 1

    def read_iriref(self) -> Iri:
        self.expect("<")
        out: list[str] = []
        while True:
            if self.at_end():
                raise self.error("unterminated IRI")
            c = self.text[self.pos]
            self.pos += 1
            if c == ">":
                break
            if c == "\\":
                out.append(self._read_uchar(allow_echar=False))
            else:
                out.append(c)
        try:
            return Iri("".join(out))
        except ValueError as exc:
            raise self.error(str(exc)) from None

    def read_blank(self) -> BlankNode:
        if not self.text.startswith("_:", self.pos):
            raise self.error("expected blank node")
        self.pos += 2
        start = self.pos
        while self.pos < len(self.text) and (
            self.text[self.pos].isalnum() or self.text[self.pos] in "_.-"
        ):
            self.pos += 1
        label = self.text[start : self.pos]
        if label.endswith("."):
            self.pos -= 1
            label = label[:-1]
        try:
            return BlankNode(label)
        except ValueError as exc:
            raise self.error(str(exc)) from None

    def read_string_body(self) -> str:
        self.expect('"')
        out: list[str] = []
        while True:
            if self.at_end():
                raise self.error("unterminated string literal")
            c = self.text[self.pos]
            self.pos += 1
            if c == '"':
                return "".join(out)
            if c == "\n":
                raise self.error("newline inside string literal")
            if c == "\\":
                out.append(self._read_uchar(allow_echar=True))
            else:
                out.append(c)

    def read_langtag(self) -> str:
        self.expect("@")
        start = self.pos
        while self.pos < len(self.text) and (
            self.text[self.pos].isalnum() or self.text[self.pos] == "-"
        ):
            self.pos += 1
        tag = self.text[start : self.pos]
        if not _LANGTAG_RE.match(tag):
            raise self.error(f"invalid language tag: {tag!r}")
        return tag

    def _read_uchar(self, allow_echar: bool) -> str:
        if self.at_end():
            raise self.error("dangling escape")
        c = self.text[self.pos]
        self.pos += 1
        if c == "u" or c == "U":
            width = 4 if c == "u" else 8
            digits = self.text[self.pos : self.pos + width]
            if len(digits) != width or any(d not in "0123456789abcdefABCDEF" for d in digits):
                raise self.error(f"invalid \\{c} escape")
            self.pos += width
            return chr(int(digits, 16))
        if allow_echar and c in _ECHAR_DECODE:
            return _ECHAR_DECODE[c]
        raise self.error(f"invalid escape sequence \\{c}")


# ---------------------------------------------------------------------------
# N-Triples


def parse_ntriples(text: str) -> Graph:
    """Parse N-Triples; raises ParseError with the line number on bad input."""
    g = Graph()
    for lineno, raw in enumerate(text.split("\n"), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        sc = _Scanner(line, lineno)
        subject = _nt_subject(sc)
        sc.skip_ws()
        predicate = sc.read_iriref()
        sc.skip_ws()
        obj = _nt_object(sc)
        sc.skip_ws()
        sc.expect(".")
        sc.skip_ws()
        if not sc.at_end():
            raise sc.error(f"trailing content after '.': {sc.text[sc.pos:]!r}")
        g.add(Triple(subject, predicate, obj))
    return g


def _nt_subject(sc: _Scanner) -> Term:
    sc.skip_ws()
    if sc.peek() == "<":
        return sc.read_iriref()
    if sc.peek() == "_":
        return sc.read_blank()
    raise sc.error(f"expected IRI or blank node subject, found {sc.peek()!r}")


def _nt_object(sc: _Scanner) -> Term:
    c = sc.peek()
    if c == "<":
        return sc.read_iriref()
    if c == "_":
        return sc.read_blank()
    if c == '"':
        body = sc.read_string_body()
        if sc.peek() == "@":
            return Literal(body, language=sc.read_langtag())
        if sc.text.startswith("^^", sc.pos):
            sc.pos += 2
            return Literal(body, datatype=sc.read_iriref().value)
        return Literal(body)
    raise sc.error(f"expected IRI, blank node or literal object, found {c!r}")


def serialize_ntriples(g: Graph) -> str:
    """Serialize a graph as N-Triples, one sorted line per triple."""
    lines = [
        f"{format_term(t.subject)} {format_term(t.predicate)} {format_term(t.object)} ."
        for t in g
    ]
    return "".join(line + "\n" for line in sorted(lines))


# ---------------------------------------------------------------------------
# Turtle subset

_TURTLE_UNSUPPORTED = {
    "(": "collections",
    "[": "blank node property lists",
    "'": "single-quoted strings",
}


def parse_turtle(text: str) -> Graph:
    """Parse the supported Turtle subset.

    Features outside the subset (collections, blank node property lists,
    base declarations, bare numeric or boolean literals, single-quoted or
    long strings) raise ParseError naming the feature.
    """
    sc = _Scanner(text, 1)
    g = Graph()
    prefixes: dict[str, str] = {}
    while True:
        sc.skip_ws()
        if sc.at_end():
            return g
        if sc.text.startswith("@prefix", sc.pos):
            sc.pos += len("@prefix")
            _read_prefix_decl(sc, prefixes, dotted=True)
            continue
        if sc.text.startswith("@base", sc.pos) or _keyword_at(sc, "BASE"):
            raise sc.error("unsupported Turtle feature: base declarations")
        if sc.text.startswith("@", sc.pos):
            raise sc.error("unknown directive")
        if _keyword_at(sc, "PREFIX"):
            sc.pos += len("PREFIX")
            _read_prefix_decl(sc, prefixes, dotted=False)
            continue
        _read_statement(sc, g, prefixes)


def _keyword_at(sc: _Scanner, word: str) -> bool:
    end = sc.pos + len(word)
    if sc.text[sc.pos : end].upper() != word:
        return False
    if end >= len(sc.text):
        return True
    # a following ':' means this is a prefixed name, not a keyword
    return not (sc.text[end].isalnum() or sc.text[end] in "_:")


def _read_prefix_decl(sc: _Scanner, prefixes: dict[str, str], dotted: bool) -> None:
    sc.skip_ws()
    start = sc.pos
    while sc.pos < len(sc.text) and sc.text[sc.pos] != ":":
        if sc.text[sc.pos] in " \t\n<":
            raise sc.error("malformed prefix declaration")
        sc.pos += 1
    name = sc.text[start : sc.pos]
    sc.expect(":")
    sc.skip_ws()
    iri = sc.read_iriref()
    if dotted:
        sc.skip_ws()
        sc.expect(".")
    prefixes[name] = iri.value


def _read_statement(sc: _Scanner, g: Graph, prefixes: dict[str, str]) -> None:
    subject = _turtle_term(sc, prefixes, position="subject")
    while True:
        sc.skip_ws()
        predicate = _turtle_verb(sc, prefixes)
        while True:
            sc.skip_ws()
            obj = _turtle_term(sc, prefixes, position="object")
            g.add(Triple(subject, predicate, obj))
            sc.skip_ws()
            if sc.peek() == ",":
                sc.pos += 1
                continue
            break
        if sc.peek() == ";":
            while sc.peek() == ";":
                sc.pos += 1
                sc.skip_ws()
            if sc.peek() == ".":
                sc.pos += 1
                return
            if sc.at_end():
                raise sc.error("statement not terminated by '.'")
            continue
        sc.expect(".")
        return


def _turtle_verb(sc: _Scanner, prefixes: dict[str, str]) -> Iri:
    if _keyword_at(sc, "A") and sc.text[sc.pos] == "a":
        sc.pos += 1
        return Iri(RDF_TYPE)
    term = _turtle_term(sc, prefixes, position="predicate")
    if not isinstance(term, Iri):
        raise sc.error("predicate must be an IRI")
    return term


def _turtle_term(sc: _Scanner, prefixes: dict[str, str], position: str) -> Term:
    sc.skip_ws()
    c = sc.peek()
    if c == "":
        raise sc.error("unexpected end of input")
    if c in _TURTLE_UNSUPPORTED:
        raise sc.error(f"unsupported Turtle feature: {_TURTLE_UNSUPPORTED[c]}")
    if c == "<":
        return sc.read_iriref()
    if c == "_":
        return sc.read_blank()
    if c == '"':
        if position == "subject":
            raise sc.error("subject cannot be a literal")
        if sc.text.startswith('"""', sc.pos):
            raise sc.error("unsupported Turtle feature: long strings")
        body = sc.read_string_body()
        if sc.peek() == "@":
            return Literal(body, language=sc.read_langtag())
        if sc.text.startswith("^^", sc.pos):
            sc.pos += 2
            sc.skip_ws()
            if sc.peek() == "<":
                return Literal(body, datatype=sc.read_iriref().value)
            dt = _read_pname(sc, prefixes)
            return Literal(body, datatype=dt.value)
        return Literal(body)
    if c.isdigit() or c in "+-" or _keyword_at(sc, "TRUE") or _keyword_at(sc, "FALSE"):
        raise sc.error("unsupported Turtle feature: bare numeric and boolean literals")
    return _read_pname(sc, prefixes)


_PNAME_STOP = set(' \t\r\n,;<>"()[]{}#')


def _read_pname(sc: _Scanner, prefixes: dict[str, str]) -> Iri:
    start = sc.pos
    while sc.pos < len(sc.text) and sc.text[sc.pos] not in _PNAME_STOP:
        sc.pos += 1
    token = sc.text[start : sc.pos]
    if token.endswith("."):
        token = token[:-1]
        sc.pos -= 1
    if ":" not in token:
        raise sc.error(f"expected a prefixed name, found {token!r}")
    prefix, local = token.split(":", 1)
    if prefix not in prefixes:
        raise sc.error(f"undeclared prefix {prefix + ':'!r}")
    try:
        return Iri(prefixes[prefix] + local)
    except ValueError as exc:
        raise sc.error(str(exc)) from None


# ---------------------------------------------------------------------------
# Convenience loading


def load_rdf(path: str) -> Graph:
    """Load an RDF file, picking the reader from the file extension."""
    with open(path, "r", encoding="utf-8") as handle:
        text = handle.read()
    if path.endswith(".nt"):
        return parse_ntriples(text)
    if path.endswith((".ttl", ".turtle")):
        return parse_turtle(text)
    raise ParseError(f"cannot infer RDF format from file name: {path}")
