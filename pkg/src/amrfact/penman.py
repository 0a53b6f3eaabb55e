"""PENMAN text format: parsing, serialization, and multi-graph files.

The accepted grammar is the classic nested form::

    node     := '(' VAR '/' CONCEPT relation* ')'
    relation := ':' ROLE (node | VAR | constant)
    constant := '"' chars '"' | number | symbol

Lines of the form ``# ::key value`` before an expression populate the
graph's metadata. Variables are a single lowercase letter with optional
digits; a bare token of that shape that is never defined is an undefined
variable, any other bare token is a symbol constant.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterator, Optional, Union

from .errors import (
    DuplicateVariableError,
    PenmanSyntaxError,
    UndefinedVariableError,
)
from .graph import (
    AmrGraph,
    Constant,
    Edge,
    Ref,
    Span,
    VARIABLE_RE,
    spanning,
    symbol_constant,
)

_METADATA_RE = re.compile(r"::(\S+)[ \t]*((?:(?!::)\S|[ \t])*)")

_TOKEN_RE = re.compile(
    r"""
      (?P<ws>      \s+                     )
    | (?P<lparen>  \(                      )
    | (?P<rparen>  \)                      )
    | (?P<slash>   /                       )
    | (?P<string>  "(?:[^"\\]|\\.)*"       )
    | (?P<role>    :[^\s()/:"]+            )
    | (?P<symbol>  [^\s()/:"]+             )
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class _Token:
    kind: str
    text: str
    line: int
    column: int


def _tokenize(text: str, line_offset: int = 0) -> list[_Token]:
    tokens = []
    line = 1 + line_offset
    col = 1
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise PenmanSyntaxError(
                f"unexpected character {text[pos]!r}", line, col
            )
        kind = m.lastgroup or ""
        lexeme = m.group()
        if kind != "ws":
            tokens.append(_Token(kind, lexeme, line, col))
        newlines = lexeme.count("\n")
        if newlines:
            line += newlines
            col = len(lexeme) - lexeme.rfind("\n")
        else:
            col += len(lexeme)
        pos = m.end()
    return tokens


def _split_metadata(text: str) -> tuple[dict[str, str], str, int]:
    """Strip leading comment lines; return (metadata, body, body line offset)."""
    metadata: dict[str, str] = {}
    lines = text.split("\n")
    body_start = 0
    for i, raw in enumerate(lines):
        stripped = raw.strip()
        if not stripped:
            body_start = i + 1
            continue
        if stripped.startswith("#"):
            # One comment line may carry several ::key value pairs.
            for m in _METADATA_RE.finditer(stripped):
                metadata[m.group(1)] = m.group(2).strip()
            body_start = i + 1
            continue
        body_start = i
        break
    body = "\n".join(lines[body_start:])
    return metadata, body, body_start


@dataclass(frozen=True)
class _Pending:
    """A bare token whose meaning (reference or constant) is resolved
    once all variable definitions are known."""

    lexeme: str
    line: int
    column: int


class _Parser:
    def __init__(self, tokens: list[_Token], end_line: int):
        self.tokens = tokens
        self.pos = 0
        self.end_line = end_line
        self.variables: dict[str, str] = {}
        self.edges: list[tuple[str, str, Union[str, Constant, _Pending]]] = []

    def peek(self) -> Optional[_Token]:
        return self.tokens[self.pos] if self.pos < len(self.tokens) else None

    def take(self, kind: str, what: str) -> _Token:
        tok = self.peek()
        if tok is None:
            raise PenmanSyntaxError(f"expected {what}, found end of input",
                                    self.end_line, 1)
        if tok.kind != kind:
            raise PenmanSyntaxError(
                f"expected {what}, found {tok.text!r}", tok.line, tok.column
            )
        self.pos += 1
        return tok

    def parse_node(self) -> str:
        self.take("lparen", "'('")
        var_tok = self.take("symbol", "a variable")
        var = var_tok.text
        if not VARIABLE_RE.match(var):
            raise PenmanSyntaxError(
                f"invalid variable name {var!r}", var_tok.line, var_tok.column
            )
        if var in self.variables:
            raise DuplicateVariableError(
                f"variable {var!r} defined twice", var_tok.line, var_tok.column
            )
        self.take("slash", "'/'")
        concept_tok = self.take("symbol", "a concept")
        self.variables[var] = concept_tok.text

        while True:
            tok = self.peek()
            if tok is None:
                raise PenmanSyntaxError("unclosed '('", self.end_line, 1)
            if tok.kind == "rparen":
                self.pos += 1
                return var
            role_tok = self.take("role", "a ':role'")
            role = role_tok.text[1:]
            # Reserve this edge's slot before descending into the value so
            # the edge list mirrors surface order; serialization follows
            # edge order, so this keeps canonical output a fixpoint.
            slot = len(self.edges)
            self.edges.append((var, role, None))
            value = self.parse_value(role_tok)
            self.edges[slot] = (var, role, value)

    def parse_value(self, role_tok: _Token) -> Union[str, Constant, _Pending]:
        tok = self.peek()
        if tok is None:
            raise PenmanSyntaxError(
                f"role :{role_tok.text[1:]} has no value", self.end_line, 1
            )
        if tok.kind == "lparen":
            return self.parse_node()
        if tok.kind == "string":
            self.pos += 1
            return Constant(_unescape(tok.text[1:-1]), "string")
        if tok.kind == "symbol":
            self.pos += 1
            return _Pending(tok.text, tok.line, tok.column)
        raise PenmanSyntaxError(
            f"expected a value after :{role_tok.text[1:]}, found {tok.text!r}",
            tok.line,
            tok.column,
        )


def parse_penman(text: str) -> AmrGraph:
    """Parse one PENMAN expression (with optional metadata lines).

    Raises :class:`PenmanSyntaxError` with a 1-based position on
    malformed input, and graph errors (duplicate or undefined variable,
    cycle) as documented in :mod:`amrfact.errors`.
    """
    metadata, body, offset = _split_metadata(text)
    tokens = _tokenize(body, line_offset=offset)
    if not tokens:
        raise PenmanSyntaxError("empty input", offset + 1, 1)
    parser = _Parser(tokens, end_line=offset + body.count("\n") + 1)
    top = parser.parse_node()
    trailing = parser.peek()
    if trailing is not None:
        raise PenmanSyntaxError(
            f"unexpected trailing {trailing.text!r}",
            trailing.line,
            trailing.column,
        )

    edges = []
    for source, role, value in parser.edges:
        if isinstance(value, _Pending):
            if value.lexeme in parser.variables:
                value = value.lexeme
            elif VARIABLE_RE.match(value.lexeme):
                raise UndefinedVariableError(
                    f"undefined variable {value.lexeme!r} "
                    f"(line {value.line}, column {value.column})"
                )
            else:
                value = symbol_constant(value.lexeme)
        edges.append(Edge(source, role, value))

    return AmrGraph.create(top, parser.variables, edges, metadata)


def _unescape(inner: str) -> str:
    return inner.replace('\\"', '"').replace("\\\\", "\\")


def _escape(value: str) -> str:
    return value.replace("\\", "\\\\").replace('"', '\\"')


def format_constant(c: Constant) -> str:
    if c.kind == "string":
        return f'"{_escape(c.value)}"'
    return c.value


def serialize_penman(graph: AmrGraph, pretty: bool = False) -> str:
    """Render the canonical form: depth-first, original edge order, the
    first mention of each variable inlined as its definition."""
    root = spanning(graph)
    if not pretty:
        return _render_flat(root)
    return "\n".join(_render_pretty(root, 0))


def _render_flat(span: Span) -> str:
    out = [f"({span.var} / {span.concept}"]
    for role, child in span.items:
        if isinstance(child, Span):
            out.append(f" :{role} {_render_flat(child)}")
        elif isinstance(child, Ref):
            out.append(f" :{role} {child.var}")
        else:
            out.append(f" :{role} {format_constant(child)}")
    out.append(")")
    return "".join(out)


def _render_pretty(span: Span, depth: int) -> list[str]:
    pad = "    " * (depth + 1)
    head = f"({span.var} / {span.concept}"
    if not span.items:
        return [head + ")"]
    lines = [head]
    for role, child in span.items:
        if isinstance(child, Span):
            sub = _render_pretty(child, depth + 1)
            lines.append(f"{pad}:{role} {sub[0]}")
            lines.extend(sub[1:])
        elif isinstance(child, Ref):
            lines.append(f"{pad}:{role} {child.var}")
        else:
            lines.append(f"{pad}:{role} {format_constant(child)}")
    lines[-1] += ")"
    return lines


def dump_penman_block(graph: AmrGraph, pretty: bool = False) -> str:
    """Metadata lines followed by the serialized expression."""
    lines = [f"# ::{key} {value}".rstrip()
             for key, value in graph.metadata.items()]
    lines.append(serialize_penman(graph, pretty=pretty))
    return "\n".join(lines)


def iter_penman_blocks(text: str) -> Iterator[str]:
    """Split a multi-graph document on blank lines, keeping each block's
    metadata lines attached to the expression that follows them."""
    block: list[str] = []
    for line in text.split("\n"):
        if line.strip():
            block.append(line)
        elif block:
            yield "\n".join(block)
            block = []
    if block:
        yield "\n".join(block)


def load_penman_text(text: str) -> list[AmrGraph]:
    return [parse_penman(block) for block in iter_penman_blocks(text)]


def load_penman_file(path: str) -> list[AmrGraph]:
    with open(path, encoding="utf-8") as fh:
        return load_penman_text(fh.read())


def dump_penman_text(graphs: Iterator[AmrGraph] | list[AmrGraph],
                     pretty: bool = False) -> str:
    return "\n\n".join(dump_penman_block(g, pretty=pretty) for g in graphs) + "\n"
