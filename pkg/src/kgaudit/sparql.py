"""A small SPARQL fragment: ASK and SELECT over basic graph patterns and UNION.

The fragment covers exactly what the requirement queries and the dataset
discovery query need: PREFIX declarations, ASK and SELECT forms, triple
patterns with ``a``, predicate/object lists, grouped patterns and UNION.
``?name`` parses as a variable and ``$name`` as a placeholder to be filled
in by :func:`substitute` before evaluation.

Everything else (FILTER, OPTIONAL, property paths, solution modifiers, and
so on) raises :class:`UnsupportedSparqlFeature` naming the construct, so a
query outside the fragment fails loudly instead of being half-understood.

Evaluation implements natural-join semantics over an in-memory graph with
distinct solutions.  Patterns inside a BGP are tried most-selective-first,
counting bound positions under the bindings accumulated so far.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping, Union as TypingUnion

from .rdf import (
    RDF_TYPE,
    Graph,
    Iri,
    Literal,
    Term,
    _Scanner,
    format_term,
    term_sort_key,
)

# ---------------------------------------------------------------------------
# Errors


class SparqlError(ValueError):
    """Base error for query parsing, substitution and evaluation."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class UnsupportedSparqlFeature(SparqlError):
    """A syntactically valid SPARQL construct outside the supported fragment."""

    def __init__(self, feature: str, line: int | None = None):
        self.feature = feature
        super().__init__(f"unsupported SPARQL feature: {feature}", line)


class PlaceholderError(SparqlError):
    """A placeholder was left unfilled, or a substitution value is missing."""


# ---------------------------------------------------------------------------
# AST


@dataclass(frozen=True)
class Variable:
    name: str


@dataclass(frozen=True)
class Placeholder:
    """A ``$name`` hole that substitution must fill before evaluation."""

    name: str


PatternTerm = TypingUnion[Iri, Literal, Variable, Placeholder]


@dataclass(frozen=True)
class TriplePattern:
    subject: PatternTerm
    predicate: PatternTerm
    object: PatternTerm

    def positions(self) -> tuple[PatternTerm, PatternTerm, PatternTerm]:
        return (self.subject, self.predicate, self.object)


@dataclass(frozen=True)
class Bgp:
    """A basic graph pattern: a conjunction of triple patterns."""

    patterns: tuple[TriplePattern, ...] = ()


@dataclass(frozen=True)
class UnionPattern:
    """Alternative group patterns; solutions are the union over branches."""

    branches: tuple["GroupPattern", ...]

    def __post_init__(self) -> None:
        if len(self.branches) < 2:
            raise ValueError("UNION needs at least two branches")


@dataclass(frozen=True)
class SeqPattern:
    """Group patterns evaluated in sequence and joined."""

    parts: tuple["GroupPattern", ...]


GroupPattern = TypingUnion[Bgp, UnionPattern, SeqPattern]


@dataclass(frozen=True, eq=True)
class Query:
    """A parsed query.

    ``projection`` is None for ASK; for SELECT it lists the projected
    variable names, with the empty tuple standing for ``*``.
    """

    form: str  # "ask" | "select"
    projection: tuple[str, ...] | None
    pattern: GroupPattern
    prefixes: Mapping[str, str] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.form not in ("ask", "select"):
            raise ValueError(f"unknown query form: {self.form}")


def pattern_variables(pattern: GroupPattern) -> set[str]:
    """Names of all variables occurring anywhere in the pattern."""
    out: set[str] = set()
    for tp in _walk_patterns(pattern):
        for pos in tp.positions():
            if isinstance(pos, Variable):
                out.add(pos.name)
    return out


def pattern_placeholders(pattern: GroupPattern) -> set[str]:
    out: set[str] = set()
    for tp in _walk_patterns(pattern):
        for pos in tp.positions():
            if isinstance(pos, Placeholder):
                out.add(pos.name)
    return out


def _walk_patterns(pattern: GroupPattern) -> Iterator[TriplePattern]:
    if isinstance(pattern, Bgp):
        yield from pattern.patterns
    elif isinstance(pattern, UnionPattern):
        for branch in pattern.branches:
            yield from _walk_patterns(branch)
    else:
        for part in pattern.parts:
            yield from _walk_patterns(part)


# ---------------------------------------------------------------------------
# Tokenizer

_KEYWORDS = {"PREFIX", "ASK", "SELECT", "WHERE", "UNION", "DISTINCT", "A"}
_REJECTED_KEYWORDS = {
    "FILTER", "OPTIONAL", "GRAPH", "SERVICE", "BIND", "VALUES", "MINUS",
    "EXISTS", "LIMIT", "OFFSET", "ORDER", "GROUP", "HAVING", "CONSTRUCT",
    "DESCRIBE", "INSERT", "DELETE", "FROM", "NAMED", "REDUCED", "BASE",
}
_PATH_PUNCT = set("/|^+")
_PNAME_CHARS_STOP = set(' \t\r\n{}.;,*<>"()[]/|^+?$&!=@')


@dataclass
class _Token:
    kind: str  # keyword | var | placeholder | iri | pname | literal | punct | eof
    value: object
    line: int


def _tokenize(text: str) -> list[_Token]:
    sc = _Scanner(text, 1)
    tokens: list[_Token] = []
    while True:
        sc.skip_ws()
        if sc.at_end():
            tokens.append(_Token("eof", None, sc.line))
            return tokens
        line = sc.line
        c = sc.peek()
        if c in "{}.;,*":
            sc.pos += 1
            tokens.append(_Token("punct", c, line))
        elif c.isdigit() or (c in "+-" and sc.text[sc.pos + 1 : sc.pos + 2].isdigit()):
            raise UnsupportedSparqlFeature("numeric literals", line)
        elif c in _PATH_PUNCT:
            raise UnsupportedSparqlFeature("property paths", line)
        elif c == "(":
            raise UnsupportedSparqlFeature("RDF collections or expressions", line)
        elif c == "[":
            raise UnsupportedSparqlFeature("blank node property lists", line)
        elif c in "?$":
            sc.pos += 1
            start = sc.pos
            while sc.pos < len(sc.text) and (sc.text[sc.pos].isalnum() or sc.text[sc.pos] == "_"):
                sc.pos += 1
            name = sc.text[start : sc.pos]
            if not name:
                raise SparqlError(f"expected a variable name after {c!r}", line)
            tokens.append(_Token("var" if c == "?" else "placeholder", name, line))
        elif c == "<":
            tokens.append(_Token("iri", sc.read_iriref(), line))
        elif c == '"':
            tokens.append(_Token("literal", _read_literal(sc), line))
        elif c == "'":
            raise UnsupportedSparqlFeature("single-quoted strings", line)
        elif c == "_":
            raise UnsupportedSparqlFeature("blank nodes in query patterns", line)
        else:
            tokens.append(_read_word(sc, line))


def _read_literal(sc: _Scanner) -> tuple[str, str | None, object]:
    body = sc.read_string_body()
    if sc.peek() == "@":
        return (body, sc.read_langtag(), None)
    if sc.text.startswith("^^", sc.pos):
        sc.pos += 2
        if sc.peek() == "<":
            return (body, None, ("iri", sc.read_iriref().value))
        word = _read_word(sc, sc.line)
        if word.kind != "pname":
            raise SparqlError("expected a datatype IRI after '^^'", sc.line)
        return (body, None, ("pname",) + word.value)  # type: ignore[operator]
    return (body, None, None)


def _read_word(sc: _Scanner, line: int) -> _Token:
    start = sc.pos
    while sc.pos < len(sc.text) and sc.text[sc.pos] not in _PNAME_CHARS_STOP:
        sc.pos += 1
    token = sc.text[start : sc.pos]
    if token.endswith(".") and ":" in token:
        token = token[:-1]
        sc.pos -= 1
    if not token:
        raise SparqlError(f"unexpected character {sc.peek()!r}", line)
    if ":" in token:
        prefix, local = token.split(":", 1)
        return _Token("pname", (prefix, local), line)
    word = token.upper()
    if word in _REJECTED_KEYWORDS:
        raise UnsupportedSparqlFeature(word, line)
    if word in _KEYWORDS:
        return _Token("keyword", word, line)
    raise SparqlError(f"unexpected token {token!r}", line)


# ---------------------------------------------------------------------------
# Parser


class _Parser:
    def __init__(self, tokens: list[_Token]):
        self.tokens = tokens
        self.pos = 0

    def peek(self) -> _Token:
        return self.tokens[self.pos]

    def next(self) -> _Token:
        tok = self.tokens[self.pos]
        if tok.kind != "eof":
            self.pos += 1
        return tok

    def error(self, message: str) -> SparqlError:
        return SparqlError(message, self.peek().line)

    def at_keyword(self, word: str) -> bool:
        tok = self.peek()
        return tok.kind == "keyword" and tok.value == word

    def expect_punct(self, char: str) -> None:
        tok = self.next()
        if tok.kind != "punct" or tok.value != char:
            raise SparqlError(f"expected {char!r}", tok.line)

    def parse_query(self) -> Query:
        prefixes: dict[str, str] = {}
        while self.at_keyword("PREFIX"):
            self.next()
            name_tok = self.next()
            if name_tok.kind != "pname" or name_tok.value[1] != "":
                raise SparqlError("expected a prefix name ending in ':'", name_tok.line)
            iri_tok = self.next()
            if iri_tok.kind != "iri":
                raise SparqlError("expected an IRI in PREFIX declaration", iri_tok.line)
            prefixes[name_tok.value[0]] = iri_tok.value.value

        if self.at_keyword("ASK"):
            self.next()
            pattern = self.group(prefixes)
            query = Query("ask", None, pattern, prefixes)
        elif self.at_keyword("SELECT"):
            self.next()
            if self.at_keyword("DISTINCT"):
                self.next()
            projection: list[str] = []
            star = False
            if self.peek().kind == "punct" and self.peek().value == "*":
                self.next()
                star = True
            else:
                while self.peek().kind == "var":
                    projection.append(self.next().value)
                if not projection:
                    raise self.error("SELECT needs '*' or at least one variable")
            if self.at_keyword("WHERE"):
                self.next()
            pattern = self.group(prefixes)
            if not star:
                missing = set(projection) - pattern_variables(pattern)
                if missing:
                    raise SparqlError(
                        "projected variables not in pattern: "
                        + ", ".join(sorted(missing))
                    )
            query = Query("select", tuple(projection), pattern, prefixes)
        else:
            raise self.error("expected ASK or SELECT")

        tok = self.next()
        if tok.kind != "eof":
            raise SparqlError("unexpected content after query", tok.line)
        return query

    def group(self, prefixes: dict[str, str]) -> GroupPattern:
        self.expect_punct("{")
        parts: list[GroupPattern] = []
        bgp: list[TriplePattern] = []

        def flush() -> None:
            if bgp:
                parts.append(Bgp(tuple(bgp)))
                bgp.clear()

        while True:
            tok = self.peek()
            if tok.kind == "punct" and tok.value == "}":
                self.next()
                break
            if tok.kind == "punct" and tok.value == "{":
                flush()
                branches = [self.group(prefixes)]
                while self.at_keyword("UNION"):
                    self.next()
                    branches.append(self.group(prefixes))
                parts.append(branches[0] if len(branches) == 1 else UnionPattern(tuple(branches)))
                if self.peek().kind == "punct" and self.peek().value == ".":
                    self.next()
                continue
            if tok.kind == "eof":
                raise SparqlError("unterminated group pattern", tok.line)
            self.triples_same_subject(bgp, prefixes)
            if self.peek().kind == "punct" and self.peek().value == ".":
                self.next()
            elif not (self.peek().kind == "punct" and self.peek().value in "}{"):
                raise self.error("expected '.', '}' or a group")

        flush()
        if not parts:
            return Bgp(())
        if len(parts) == 1:
            return parts[0]
        return SeqPattern(tuple(parts))

    def triples_same_subject(self, bgp: list[TriplePattern], prefixes: dict[str, str]) -> None:
        subject = self.term(prefixes)
        while True:
            predicate = self.verb(prefixes)
            while True:
                obj = self.term(prefixes)
                bgp.append(TriplePattern(subject, predicate, obj))
                if self.peek().kind == "punct" and self.peek().value == ",":
                    self.next()
                    continue
                break
            if self.peek().kind == "punct" and self.peek().value == ";":
                self.next()
                tok = self.peek()
                if tok.kind == "punct" and tok.value in ".}":
                    return
                continue
            return

    def verb(self, prefixes: dict[str, str]) -> PatternTerm:
        if self.at_keyword("A"):
            self.next()
            return Iri(RDF_TYPE)
        term = self.term(prefixes)
        if isinstance(term, Literal):
            raise self.error("a literal cannot be a predicate")
        return term

    def term(self, prefixes: dict[str, str]) -> PatternTerm:
        tok = self.next()
        if tok.kind == "var":
            return Variable(tok.value)
        if tok.kind == "placeholder":
            return Placeholder(tok.value)
        if tok.kind == "iri":
            return tok.value
        if tok.kind == "pname":
            return _resolve_pname(tok.value, prefixes, tok.line)
        if tok.kind == "literal":
            body, lang, dtype = tok.value
            if lang is not None:
                return Literal(body, language=lang)
            if dtype is None:
                return Literal(body)
            if dtype[0] == "iri":
                return Literal(body, datatype=dtype[1])
            return Literal(body, datatype=_resolve_pname(dtype[1:], prefixes, tok.line).value)
        raise SparqlError(f"expected a term, found {tok.value!r}", tok.line)


def _resolve_pname(value: tuple[str, str], prefixes: Mapping[str, str], line: int) -> Iri:
    prefix, local = value
    if prefix not in prefixes:
        raise SparqlError(f"undeclared prefix {prefix + ':'!r}", line)
    try:
        return Iri(prefixes[prefix] + local)
    except ValueError as exc:
        raise SparqlError(str(exc), line) from None


def parse_query(text: str) -> Query:
    """Parse an ASK or SELECT query in the supported fragment."""
    return _Parser(_tokenize(text)).parse_query()


def parse_triple_patterns(text: str, prefixes: Mapping[str, str]) -> tuple[TriplePattern, ...]:
    """Parse a bare list of triple patterns, e.g. for equivalence rules.

    The text uses the same syntax as a BGP body; prefixed names resolve
    against the supplied mapping.
    """
    parser = _Parser(_tokenize(text))
    bgp: list[TriplePattern] = []
    env = dict(prefixes)
    while parser.peek().kind != "eof":
        parser.triples_same_subject(bgp, env)
        if parser.peek().kind == "punct" and parser.peek().value == ".":
            parser.next()
    if not bgp:
        raise SparqlError("no triple patterns found")
    return tuple(bgp)


# ---------------------------------------------------------------------------
# Pretty-printing

_SAFE_LOCAL = set("abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789_-.")


def format_query(query: Query) -> str:
    """Render a query as standard SPARQL; parsing the output reproduces it."""
    lines = [
        f"PREFIX {name}: <{iri}>"
        for name, iri in sorted(query.prefixes.items())
    ]
    if query.form == "ask":
        head = "ASK "
    else:
        proj = "*" if query.projection == () else " ".join(f"?{v}" for v in query.projection or ())
        head = f"SELECT {proj} WHERE "
    body = _format_group(query.pattern, query.prefixes, indent=0)
    lines.append(head + body)
    return "\n".join(lines) + "\n"


def _format_group(pattern: GroupPattern, prefixes: Mapping[str, str], indent: int) -> str:
    pad = "  " * indent
    inner = "  " * (indent + 1)
    if isinstance(pattern, Bgp):
        if not pattern.patterns:
            return "{ }"
        lines = [inner + _format_triple(tp, prefixes) for tp in pattern.patterns]
        return "{\n" + "\n".join(lines) + "\n" + pad + "}"
    if isinstance(pattern, UnionPattern):
        rendered = [_format_group(b, prefixes, indent + 1) for b in pattern.branches]
        joined = ("\n" + inner + "UNION ").join(rendered)
        return "{\n" + inner + joined + "\n" + pad + "}"
    parts = [_format_group(p, prefixes, indent + 1) for p in pattern.parts]
    return "{\n" + "\n".join(inner + p for p in parts) + "\n" + pad + "}"


def _format_triple(tp: TriplePattern, prefixes: Mapping[str, str]) -> str:
    if tp.predicate == Iri(RDF_TYPE):
        verb = "a"
    else:
        verb = _format_pattern_term(tp.predicate, prefixes)
    return (
        f"{_format_pattern_term(tp.subject, prefixes)} {verb} "
        f"{_format_pattern_term(tp.object, prefixes)} ."
    )


def format_triple_pattern(tp: TriplePattern, prefixes: Mapping[str, str]) -> str:
    """One pattern as SPARQL text, dot-terminated; inverse of parse_triple_patterns."""
    return _format_triple(tp, prefixes)


def _format_pattern_term(term: PatternTerm, prefixes: Mapping[str, str]) -> str:
    if isinstance(term, Variable):
        return f"?{term.name}"
    if isinstance(term, Placeholder):
        return f"${term.name}"
    if isinstance(term, Iri):
        return _abbreviate(term, prefixes)
    if isinstance(term, Literal) and term.datatype is not None:
        dt = _abbreviate(Iri(term.datatype), prefixes)
        if not dt.startswith("<"):
            return f'"{term.lexical}"^^{dt}' if _plain(term.lexical) else format_term(term)
    return format_term(term)


def _plain(lexical: str) -> bool:
    return all(c not in '"\\\n\r\t\b\f' for c in lexical)


def _abbreviate(iri: Iri, prefixes: Mapping[str, str]) -> str:
    best: tuple[int, str, str] | None = None
    for name, base in prefixes.items():
        if iri.value.startswith(base):
            local = iri.value[len(base):]
            if local and (not all(c in _SAFE_LOCAL for c in local)):
                continue
            if local.startswith((".", "-")) or local.endswith("."):
                continue
            if local and not (local[0].isalnum() or local[0] == "_"):
                continue
            if best is None or len(base) > best[0]:
                best = (len(base), name, local)
    if best is None:
        return f"<{iri.value}>"
    return f"{best[1]}:{best[2]}"


# ---------------------------------------------------------------------------
# Substitution


def substitute(query: Query, values: Mapping[str, Term]) -> Query:
    """Fill placeholders (and same-named variables) with concrete terms.

    Every placeholder occurring in the query must have a value; variables
    listed in ``values`` are replaced too, which is how the dataset IRI is
    injected into requirement queries written with ``?kg``.
    """
    missing = pattern_placeholders(query.pattern) - set(values)
    if missing:
        raise PlaceholderError(
            "missing placeholder value: " + ", ".join(sorted(missing))
        )
    if query.projection:
        clash = set(query.projection) & set(values)
        if clash:
            raise SparqlError(
                "cannot substitute projected variables: " + ", ".join(sorted(clash))
            )
    return Query(
        query.form,
        query.projection,
        _substitute_group(query.pattern, values),
        dict(query.prefixes),
    )


def _substitute_group(pattern: GroupPattern, values: Mapping[str, Term]) -> GroupPattern:
    if isinstance(pattern, Bgp):
        return Bgp(tuple(_substitute_triple(tp, values) for tp in pattern.patterns))
    if isinstance(pattern, UnionPattern):
        return UnionPattern(tuple(_substitute_group(b, values) for b in pattern.branches))
    return SeqPattern(tuple(_substitute_group(p, values) for p in pattern.parts))


def _substitute_triple(tp: TriplePattern, values: Mapping[str, Term]) -> TriplePattern:
    subject = _substitute_term(tp.subject, values)
    predicate = _substitute_term(tp.predicate, values)
    obj = _substitute_term(tp.object, values)
    if isinstance(subject, Literal):
        raise SparqlError("cannot substitute a literal into subject position")
    if isinstance(predicate, Literal):
        raise SparqlError("cannot substitute a literal into predicate position")
    return TriplePattern(subject, predicate, obj)


def _substitute_term(term: PatternTerm, values: Mapping[str, Term]) -> PatternTerm:
    if isinstance(term, (Variable, Placeholder)) and term.name in values:
        return values[term.name]
    return term


# ---------------------------------------------------------------------------
# Solutions and evaluation


class Solution(Mapping[str, Term]):
    """An immutable variable binding."""

    __slots__ = ("_bindings",)

    def __init__(self, bindings: Mapping[str, Term]):
        self._bindings = dict(bindings)

    def __getitem__(self, name: str) -> Term:
        return self._bindings[name]

    def __iter__(self) -> Iterator[str]:
        return iter(self._bindings)

    def __len__(self) -> int:
        return len(self._bindings)

    def __eq__(self, other: object) -> bool:
        if isinstance(other, Solution):
            return self._bindings == other._bindings
        if isinstance(other, Mapping):
            return self._bindings == dict(other)
        return NotImplemented

    def __hash__(self) -> int:
        return hash(frozenset(self._bindings.items()))

    def merge(self, other: "Solution") -> "Solution | None":
        """Merge compatible solutions; None when a shared variable disagrees."""
        merged = dict(self._bindings)
        for name, value in other._bindings.items():
            if merged.get(name, value) != value:
                return None
            merged[name] = value
        return Solution(merged)

    def __repr__(self) -> str:
        inner = ", ".join(
            f"?{k}={format_term(self._bindings[k])}" for k in sorted(self._bindings)
        )
        return f"Solution({inner})"


def _check_no_placeholders(pattern: GroupPattern) -> None:
    left = pattern_placeholders(pattern)
    if left:
        raise PlaceholderError(
            "query still contains placeholders: " + ", ".join(sorted(left))
        )


def _resolve(term: PatternTerm, binding: Mapping[str, Term]) -> Term | None:
    """Concrete term for a pattern position, or None when still free."""
    if isinstance(term, Variable):
        return binding.get(term.name)
    if isinstance(term, Placeholder):
        raise PlaceholderError(f"query still contains placeholders: {term.name}")
    return term


def _boundness(tp: TriplePattern, binding: Mapping[str, Term]) -> int:
    count = 0
    for pos in tp.positions():
        if not isinstance(pos, (Variable, Placeholder)) or (
            isinstance(pos, Variable) and pos.name in binding
        ):
            count += 1
    return count


def _gen_bgp(
    g: Graph, patterns: list[TriplePattern], binding: dict[str, Term]
) -> Iterator[dict[str, Term]]:
    if not patterns:
        yield binding
        return
    best = max(range(len(patterns)), key=lambda i: (_boundness(patterns[i], binding), -i))
    tp = patterns[best]
    rest = patterns[:best] + patterns[best + 1 :]
    s = _resolve(tp.subject, binding)
    p = _resolve(tp.predicate, binding)
    o = _resolve(tp.object, binding)
    for triple in g.match(s, p, o):
        extended = dict(binding)
        ok = True
        for pos, value in zip(tp.positions(), (triple.subject, triple.predicate, triple.object)):
            if isinstance(pos, Variable):
                if extended.get(pos.name, value) != value:
                    ok = False
                    break
                extended[pos.name] = value
        if ok:
            yield from _gen_bgp(g, rest, extended)


def _gen(g: Graph, pattern: GroupPattern, binding: dict[str, Term]) -> Iterator[dict[str, Term]]:
    if isinstance(pattern, Bgp):
        yield from _gen_bgp(g, list(pattern.patterns), binding)
    elif isinstance(pattern, UnionPattern):
        for branch in pattern.branches:
            yield from _gen(g, branch, binding)
    else:
        yield from _gen_seq(g, list(pattern.parts), binding)


def _gen_seq(
    g: Graph, parts: list[GroupPattern], binding: dict[str, Term]
) -> Iterator[dict[str, Term]]:
    if not parts:
        yield binding
        return
    head, rest = parts[0], parts[1:]
    for solution in _gen(g, head, binding):
        yield from _gen_seq(g, rest, solution)


def eval_bgp(
    g: Graph,
    patterns: Iterable[TriplePattern],
    initial: Mapping[str, Term] | None = None,
) -> list[Solution]:
    """Distinct solutions of a basic graph pattern, natural-join semantics.

    ``initial`` pre-binds variables; every returned solution extends it.
    """
    pattern_list = list(patterns)
    _check_no_placeholders(Bgp(tuple(pattern_list)))
    seen: dict[Solution, None] = {}
    for binding in _gen_bgp(g, pattern_list, dict(initial or {})):
        seen.setdefault(Solution(binding))
    return list(seen)


def eval_ask(g: Graph, query: Query) -> bool:
    """True iff the pattern of an ASK query has at least one solution."""
    if query.form != "ask":
        raise SparqlError("eval_ask needs an ASK query")
    _check_no_placeholders(query.pattern)
    for _ in _gen(g, query.pattern, {}):
        return True
    return False


def eval_select(g: Graph, query: Query) -> list[Solution]:
    """Distinct projected solutions of a SELECT query, deterministically sorted."""
    if query.form != "select":
        raise SparqlError("eval_select needs a SELECT query")
    _check_no_placeholders(query.pattern)
    if query.projection == ():
        names = sorted(pattern_variables(query.pattern))
    else:
        names = list(query.projection or ())
    seen: dict[Solution, None] = {}
    for binding in _gen(g, query.pattern, {}):
        projected = {name: binding[name] for name in names if name in binding}
        seen.setdefault(Solution(projected))

    def row_key(sol: Solution) -> tuple:
        return tuple(
            term_sort_key(sol[name]) if name in sol else (-1, "")
            for name in names
        )

    return sorted(seen, key=row_key)
