"""Typed model for rooted semantic graphs.

A graph is a set of variables (each labelled with a concept), a sequence
of role edges, and a distinguished top variable. Edge targets are either
variables (plain strings) or :class:`Constant` values. Inverse roles
(``:ARG0-of`` and friends) are normalized away at construction time, so
the in-memory form always stores the forward edge; the serializer
reintroduces ``-of`` only where the traversal needs it.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field, replace
from typing import Iterator, Mapping, NamedTuple, Optional, Sequence, Union

from .errors import CycleError, GraphError, UnreachableNodeError

#: Concepts carrying a frame sense suffix: a dash plus exactly two digits.
FRAME_SUFFIX_RE = re.compile(r"-\d{2}$")

#: Lexeme shape of a variable: one lowercase letter, optional digits.
VARIABLE_RE = re.compile(r"^[a-z][0-9]*$")

_NUMBER_RE = re.compile(r"^[+-]?\d+(\.\d+)?$")

_CONSTANT_KINDS = ("string", "number", "symbol")


@dataclass(frozen=True)
class Constant:
    """A non-variable edge target.

    ``value`` holds the unquoted text; for numbers it is the original
    lexeme (``"3.50"`` stays ``"3.50"``), never a parsed float.
    """

    value: str
    kind: str = "symbol"

    def __post_init__(self):
        if self.kind not in _CONSTANT_KINDS:
            raise ValueError(f"unknown constant kind: {self.kind!r}")


def symbol_constant(lexeme: str) -> Constant:
    """Classify a bare lexeme as a number or symbol constant."""
    kind = "number" if _NUMBER_RE.match(lexeme) else "symbol"
    return Constant(lexeme, kind)


#: The negative polarity attribute value.
POLARITY_NEG = Constant("-", "symbol")

Target = Union[str, Constant]


class Edge(NamedTuple):
    source: str
    role: str
    target: Target


def is_frame(concept: str) -> bool:
    """True for concepts with a predicate sense suffix, e.g. ``work-01``."""
    return FRAME_SUFFIX_RE.search(concept) is not None


def normalize_edge(edge: Edge) -> Edge:
    """Store an inverse role as the forward edge in the other direction.

    Only applies when the target is a variable; an ``-of`` role pointing
    at a constant has no forward form and is kept as written.
    """
    if edge.role.endswith("-of") and len(edge.role) > 3 and isinstance(edge.target, str):
        return Edge(edge.target, edge.role[:-3], edge.source)
    return edge


@dataclass(frozen=True)
class AmrGraph:
    """An immutable rooted graph. Use :meth:`create` for arbitrary input;
    the plain constructor trusts its edges to be normalized already.
    """

    top: str
    nodes: Mapping[str, str]
    edges: tuple[Edge, ...] = ()
    metadata: Mapping[str, str] = field(default_factory=dict)

    @classmethod
    def create(
        cls,
        top: str,
        nodes: Mapping[str, str],
        edges: Sequence[Edge] = (),
        metadata: Optional[Mapping[str, str]] = None,
    ) -> "AmrGraph":
        graph = cls(
            top=top,
            nodes=dict(nodes),
            edges=tuple(normalize_edge(e) for e in edges),
            metadata=dict(metadata or {}),
        )
        graph.validate()
        return graph

    # -- inspection ----------------------------------------------------

    def concept(self, var: str) -> str:
        return self.nodes[var]

    def outgoing(self, var: str) -> Iterator[tuple[int, Edge]]:
        for i, e in enumerate(self.edges):
            if e.source == var:
                yield i, e

    def incoming(self, var: str) -> Iterator[tuple[int, Edge]]:
        for i, e in enumerate(self.edges):
            if e.target == var:
                yield i, e

    def attribute_indices(self, var: str, role: str) -> list[int]:
        """Indices of ``var``'s outgoing edges with ``role`` and a constant target."""
        return [
            i
            for i, e in self.outgoing(var)
            if e.role == role and isinstance(e.target, Constant)
        ]

    def has_negative_polarity(self, var: str) -> bool:
        return any(
            self.edges[i].target == POLARITY_NEG
            for i in self.attribute_indices(var, "polarity")
        )

    # -- rewriting (all return new graphs) -----------------------------

    def with_concept(self, var: str, concept: str) -> "AmrGraph":
        if var not in self.nodes:
            raise GraphError(f"unknown variable: {var}")
        nodes = dict(self.nodes)
        nodes[var] = concept
        return replace(self, nodes=nodes)

    def with_edge_added(self, edge: Edge) -> "AmrGraph":
        return replace(self, edges=self.edges + (normalize_edge(edge),))

    def with_edge_removed(self, index: int) -> "AmrGraph":
        edges = self.edges[:index] + self.edges[index + 1 :]
        return replace(self, edges=edges)

    def with_edge_replaced(self, index: int, edge: Edge) -> "AmrGraph":
        edges = list(self.edges)
        edges[index] = normalize_edge(edge)
        return replace(self, edges=tuple(edges))

    def with_top(self, var: str) -> "AmrGraph":
        if var not in self.nodes:
            raise GraphError(f"unknown variable: {var}")
        return replace(self, top=var)

    def with_metadata(self, metadata: Mapping[str, str]) -> "AmrGraph":
        return replace(self, metadata=dict(metadata))

    # -- validation -----------------------------------------------------

    def validate(self) -> None:
        """Raise :class:`GraphError` if any structural invariant fails."""
        if not self.nodes:
            raise GraphError("graph has no nodes")
        if self.top not in self.nodes:
            raise GraphError(f"top variable {self.top!r} is not a node")
        for var, concept in self.nodes.items():
            if not VARIABLE_RE.match(var):
                raise GraphError(f"invalid variable name: {var!r}")
            if not concept:
                raise GraphError(f"empty concept label on {var!r}")
        for e in self.edges:
            if e.source not in self.nodes:
                raise GraphError(f"edge source {e.source!r} is not a node")
            if isinstance(e.target, str) and e.target not in self.nodes:
                raise GraphError(f"edge target {e.target!r} is not a node")
            if not e.role or e.role.startswith(":"):
                raise GraphError(f"malformed role name: {e.role!r}")
        cycle = _find_cycle(self)
        if cycle:
            raise CycleError("role edges form a cycle: " + " -> ".join(cycle))


def _find_cycle(graph: AmrGraph) -> Optional[list[str]]:
    """Return one directed cycle over variable-to-variable edges, if any."""
    succ: dict[str, list[str]] = {v: [] for v in graph.nodes}
    for e in graph.edges:
        e = normalize_edge(e)
        if isinstance(e.target, str):
            succ[e.source].append(e.target)
    WHITE, GREY, BLACK = 0, 1, 2
    color = {v: WHITE for v in graph.nodes}
    parent: dict[str, str] = {}

    for start in graph.nodes:
        if color[start] != WHITE:
            continue
        stack = [(start, iter(succ[start]))]
        color[start] = GREY
        while stack:
            var, it = stack[-1]
            advanced = False
            for nxt in it:
                if color[nxt] == GREY:
                    # unwind the grey path into an explicit cycle
                    cycle = [nxt, var]
                    cur = var
                    while cur != nxt:
                        cur = parent[cur]
                        cycle.append(cur)
                    cycle.reverse()
                    return cycle
                if color[nxt] == WHITE:
                    color[nxt] = GREY
                    parent[nxt] = var
                    stack.append((nxt, iter(succ[nxt])))
                    advanced = True
                    break
            if not advanced:
                color[var] = BLACK
                stack.pop()
    return None


# -- canonical traversal ------------------------------------------------


@dataclass(frozen=True)
class Ref:
    """A repeated mention of an already-introduced variable."""

    var: str


@dataclass(frozen=True)
class Span:
    """One inlined node definition in the canonical traversal.

    ``items`` pairs the role text as it will be emitted (inverse roles
    already carry their ``-of``) with the child: a nested definition, a
    back-reference, or a constant.
    """

    var: str
    concept: str
    items: tuple[tuple[str, Union["Span", Ref, Constant]], ...]


def spanning(graph: AmrGraph) -> Span:
    """Build the canonical depth-first traversal plan.

    Edges incident to each node are scanned in their insertion order.
    Forward edges are emitted as written; a stored edge is emitted in its
    inverse ``-of`` orientation only when its source is not reachable from
    the top by forward edges (otherwise the forward pass will cover it).
    The first mention of every variable is an inline definition.

    Raises :class:`UnreachableNodeError` when some node is disconnected
    from the top even through inverse orientations.
    """
    incident: dict[str, list[tuple[int, Edge, bool]]] = {v: [] for v in graph.nodes}
    for i, e in enumerate(graph.edges):
        incident[e.source].append((i, e, True))
        if isinstance(e.target, str):
            incident[e.target].append((i, e, False))

    forward: dict[str, list[str]] = {v: [] for v in graph.nodes}
    for e in graph.edges:
        if isinstance(e.target, str):
            forward[e.source].append(e.target)
    reachable: set[str] = set()
    stack = [graph.top]
    while stack:
        var = stack.pop()
        if var in reachable:
            continue
        reachable.add(var)
        stack.extend(forward[var])

    used: set[int] = set()
    introduced: set[str] = set()

    def visit(var: str) -> Span:
        introduced.add(var)
        items: list[tuple[str, Union[Span, Ref, Constant]]] = []
        for i, e, is_forward in incident[var]:
            if i in used:
                continue
            if is_forward:
                used.add(i)
                if isinstance(e.target, Constant):
                    items.append((e.role, e.target))
                elif e.target not in introduced:
                    items.append((e.role, visit(e.target)))
                else:
                    items.append((e.role, Ref(e.target)))
            else:
                if e.source in reachable:
                    continue  # the forward pass will emit it
                used.add(i)
                role = e.role + "-of"
                if e.source not in introduced:
                    items.append((role, visit(e.source)))
                else:
                    items.append((role, Ref(e.source)))
        return Span(var, graph.nodes[var], tuple(items))

    root = visit(graph.top)
    if len(introduced) != len(graph.nodes):
        missing = sorted(set(graph.nodes) - introduced)
        raise UnreachableNodeError(
            "nodes unreachable from top: " + ", ".join(missing)
        )
    return root


def canonical_order(graph: AmrGraph) -> tuple[str, ...]:
    """Variables in the order the canonical serialization introduces them."""
    order: list[str] = []

    def walk(span: Span) -> None:
        order.append(span.var)
        for _, child in span.items:
            if isinstance(child, Span):
                walk(child)

    walk(spanning(graph))
    return tuple(order)


def find_nodes(
    graph: AmrGraph,
    concept: Optional[str] = None,
    incoming_role: Optional[str] = None,
    outgoing_role: Optional[str] = None,
) -> list[str]:
    """Variables selected by exactly one criterion, in canonical order.

    ``concept`` is a regular expression matched with ``re.search``, so a
    suffix pattern like ``-\\d{2}$`` selects frame concepts.
    """
    given = [x is not None for x in (concept, incoming_role, outgoing_role)]
    if sum(given) != 1:
        raise ValueError("exactly one selector must be given")
    order = canonical_order(graph)
    if concept is not None:
        pat = re.compile(concept)
        return [v for v in order if pat.search(graph.nodes[v])]
    if incoming_role is not None:
        hits = {e.target for e in graph.edges if e.role == incoming_role
                and isinstance(e.target, str)}
        return [v for v in order if v in hits]
    hits = {e.source for e in graph.edges if e.role == outgoing_role}
    return [v for v in order if v in hits]


def fresh_variable(graph: AmrGraph, concept: str) -> str:
    """A variable name not used by ``graph``: the concept's first letter,
    then that letter with 2, 3, ... appended."""
    first = next((c for c in concept.lower() if c.isalpha()), "x")
    if first not in graph.nodes:
        return first
    n = 2
    while f"{first}{n}" in graph.nodes:
        n += 1
    return f"{first}{n}"


def graphs_equal(a: AmrGraph, b: AmrGraph) -> bool:
    """Structural equality: same top, node labelling, and edge multiset.

    Edge order and metadata are not compared.
    """
    if a.top != b.top or dict(a.nodes) != dict(b.nodes):
        return False
    return sorted(_edge_key(e) for e in a.edges) == sorted(
        _edge_key(e) for e in b.edges
    )


def _edge_key(e: Edge) -> tuple:
    t = e.target
    if isinstance(t, Constant):
        return (e.source, e.role, 1, t.kind, t.value)
    return (e.source, e.role, 0, "", t)
