"""Rule-based graph perturbations that inject factual errors.

Five error families are produced, each by local graph edits:

* predicate: polarity toggles and antonym substitution;
* entity: agent/patient exchange and same-document value substitution;
* circumstance: modality strengthening and location/time/date
  substitution;
* discourse-link: temporal operator flips and causality reversal;
* out-of-article: substitution with a value foreign to the source
  document, drawn from the corpus-wide pool.

Enumeration is exhaustive and deterministic; wherever a rule must pick
one of several legal payloads, the choice is made by an RNG keyed on
(seed, graph id, variant, target), so reruns reproduce it exactly.
"""
from __future__ import annotations

import hashlib
import random
import re
from dataclasses import dataclass, field
from enum import Enum
from typing import Mapping, Optional, Sequence, Union

from .errors import (
    CycleError,
    DegenerateEditError,
    GraphError,
    InapplicableSiteError,
)
from .graph import (
    POLARITY_NEG,
    AmrGraph,
    Constant,
    Edge,
    canonical_order,
    is_frame,
)
from .lexicon import (
    AntonymLexicon,
    ModalityMap,
    bundled_antonym_lexicon,
    bundled_modality_map,
)
from .penman import serialize_penman
from .textutil import word_tokens


class Family(str, Enum):
    PREDICATE = "predicate"
    ENTITY = "entity"
    CIRCUMSTANCE = "circumstance"
    DISCOURSE_LINK = "discourse-link"
    OUT_OF_ARTICLE = "out-of-article"


ALL_FAMILIES = tuple(Family)

FAMILY_VARIANTS: Mapping[Family, tuple[str, ...]] = {
    Family.PREDICATE: ("polarity-add", "polarity-remove", "antonym"),
    Family.ENTITY: ("agent-patient-swap", "entity-substitute"),
    Family.CIRCUMSTANCE: ("modality-strengthen", "circumstance-substitute"),
    Family.DISCOURSE_LINK: ("temporal-flip", "causality-reverse"),
    Family.OUT_OF_ARTICLE: ("foreign-substitute",),
}

#: Variants whose sites carry a substitution payload.
_PAYLOAD_VARIANTS = frozenset(
    {
        "antonym",
        "entity-substitute",
        "modality-strengthen",
        "circumstance-substitute",
        "temporal-flip",
        "foreign-substitute",
    }
)

#: Attribute roles of a date-entity node that form the date pool.
DATE_PART_ROLES = frozenset(
    {
        "year", "month", "day", "weekday", "time", "timezone", "quarter",
        "dayperiod", "season", "year2", "decade", "century", "calendar", "era",
    }
)

_OP_ROLE_RE = re.compile(r"^op\d+$")

_TEMPORAL_FLIPS = {"before": "after", "after": "before"}

Payload = Union[str, Constant, None]
PoolEntry = Union[Constant, tuple[str, Constant]]


@dataclass(frozen=True)
class PerturbationSite:
    """One applicable edit: where (a variable or an edge index) plus the
    substitution payload when the variant replaces content."""

    family: Family
    variant: str
    target: Union[str, int]
    payload: Payload = None

    def __post_init__(self):
        if self.variant not in FAMILY_VARIANTS[self.family]:
            raise ValueError(
                f"variant {self.variant!r} does not belong to {self.family.value}"
            )

    def describe(self) -> str:
        where = (
            f"edge#{self.target}" if isinstance(self.target, int) else self.target
        )
        if self.payload is None:
            return f"{self.variant}@{where}"
        value = (
            self.payload.value if isinstance(self.payload, Constant) else self.payload
        )
        return f"{self.variant}@{where}->{value or '(delete)'}"


@dataclass(frozen=True)
class PerturbationContext:
    """Document-level resources a perturbation run draws on."""

    same_doc_pools: Mapping[str, tuple[PoolEntry, ...]] = field(default_factory=dict)
    doc_vocabulary: frozenset[str] = frozenset()
    global_pool: Mapping[str, tuple[PoolEntry, ...]] = field(default_factory=dict)
    antonyms: AntonymLexicon = field(default_factory=lambda: AntonymLexicon({}))
    modality: ModalityMap = field(default_factory=lambda: ModalityMap({}))


def default_context(
    antonyms: Optional[AntonymLexicon] = None,
    modality: Optional[ModalityMap] = None,
) -> PerturbationContext:
    """A context with the bundled lexicons and empty pools."""
    return PerturbationContext(
        antonyms=antonyms if antonyms is not None else bundled_antonym_lexicon(),
        modality=modality if modality is not None else bundled_modality_map(),
    )


@dataclass(frozen=True)
class PerturbConfig:
    families: tuple[Family, ...] = ALL_FAMILIES
    max_sites_per_family: Optional[int] = None
    rng_seed: int = 0

    def __post_init__(self):
        if self.max_sites_per_family is not None and self.max_sites_per_family < 1:
            raise ValueError("max_sites_per_family must be positive")


def graph_id(graph: AmrGraph) -> str:
    """Stable identity used for seeding: the ``id`` metadata when present,
    else a digest of the canonical serialization."""
    meta = graph.metadata.get("id")
    if meta:
        return meta
    digest = hashlib.sha256(serialize_penman(graph).encode()).hexdigest()
    return digest[:16]


def _site_rng(seed: int, gid: str, variant: str, target: Union[str, int]) -> random.Random:
    key = f"{seed}|{gid}|{variant}|{target}"
    digest = hashlib.sha256(key.encode()).digest()
    return random.Random(int.from_bytes(digest[:8], "big"))


# -- value slots ---------------------------------------------------------


@dataclass(frozen=True)
class ValueSlot:
    """A constant-valued edge eligible for pool substitution."""

    edge_index: int
    pool_key: str  # name | quant | location | time | date
    date_part: Optional[str] = None


def value_slots(graph: AmrGraph) -> list[ValueSlot]:
    """Substitutable constant slots in edge order."""
    slots: list[ValueSlot] = []
    for idx, e in enumerate(graph.edges):
        if not isinstance(e.target, Constant):
            continue
        source_concept = graph.nodes[e.source]
        if source_concept == "name" and _OP_ROLE_RE.match(e.role):
            slots.append(ValueSlot(idx, _name_context(graph, e.source)))
        elif source_concept == "date-entity" and e.role in DATE_PART_ROLES:
            slots.append(ValueSlot(idx, "date", e.role))
        elif e.role == "quant":
            slots.append(ValueSlot(idx, "quant"))
        elif e.role == "location":
            slots.append(ValueSlot(idx, "location"))
        elif e.role == "time":
            slots.append(ValueSlot(idx, "time"))
    return slots


def _name_context(graph: AmrGraph, name_var: str) -> str:
    """Pool key for a name node: 'location' or 'time' when the named
    entity hangs off such a role, plain 'name' otherwise."""
    for _, e in graph.incoming(name_var):
        if e.role == "name":
            entity_roles = {pe.role for _, pe in graph.incoming(e.source)}
            if "location" in entity_roles:
                return "location"
            if "time" in entity_roles:
                return "time"
    return "name"


def harvest_pools(graphs: Sequence[AmrGraph]) -> dict[str, tuple[PoolEntry, ...]]:
    """Collect substitution pools from every value slot of ``graphs``.

    Deduplicated, first-seen order; date entries keep their part role so
    substitution never crosses parts (a year never replaces a month).
    """
    pools: dict[str, list[PoolEntry]] = {}
    seen: dict[str, set] = {}
    for g in graphs:
        for slot in value_slots(g):
            e = g.edges[slot.edge_index]
            entry: PoolEntry = (
                (slot.date_part, e.target) if slot.pool_key == "date" else e.target
            )
            bucket = pools.setdefault(slot.pool_key, [])
            keys = seen.setdefault(slot.pool_key, set())
            if entry not in keys:
                keys.add(entry)
                bucket.append(entry)
    return {k: tuple(v) for k, v in pools.items()}


def is_document_foreign(value: str, vocabulary: frozenset[str]) -> bool:
    """True when at least one token of ``value`` is absent from the
    document vocabulary; valueless payloads are never foreign."""
    tokens = word_tokens(value)
    return bool(tokens) and any(t not in vocabulary for t in tokens)


def _pool_candidates(
    pool: tuple[PoolEntry, ...],
    current: Constant,
    date_part: Optional[str],
) -> list[Constant]:
    out: list[Constant] = []
    for entry in pool:
        if isinstance(entry, tuple):
            part, value = entry
            if part != date_part:
                continue
        else:
            value = entry
        if value != current and value not in out:
            out.append(value)
    return out


# -- enumeration ----------------------------------------------------------


def enumerate_sites(
    graph: AmrGraph,
    ctx: PerturbationContext,
    config: PerturbConfig = PerturbConfig(),
) -> list[PerturbationSite]:
    """All applicable sites, deterministically ordered: families in the
    configured order, variants in declaration order, targets in canonical
    node order or edge order."""
    gid = graph_id(graph)
    seed = config.rng_seed
    out: list[PerturbationSite] = []
    for family in config.families:
        sites = _ENUMERATORS[family](graph, ctx, seed, gid)
        if config.max_sites_per_family is not None:
            sites = sites[: config.max_sites_per_family]
        out.extend(sites)
    return out


def _enumerate_predicate(graph, ctx, seed, gid):
    order = canonical_order(graph)
    frames = [v for v in order if is_frame(graph.nodes[v])]
    sites = [
        PerturbationSite(Family.PREDICATE, "polarity-add", v)
        for v in frames
        if not graph.has_negative_polarity(v)
    ]
    sites += [
        PerturbationSite(Family.PREDICATE, "polarity-remove", v)
        for v in frames
        if graph.has_negative_polarity(v)
    ]
    for v in order:
        options = ctx.antonyms.replacements(graph.nodes[v])
        if options:
            rng = _site_rng(seed, gid, "antonym", v)
            sites.append(
                PerturbationSite(Family.PREDICATE, "antonym", v, rng.choice(options))
            )
    return sites


def _first_role_edge(graph, var, role):
    for i, e in graph.outgoing(var):
        if e.role == role:
            return i, e
    return None, None


def _enumerate_entity(graph, ctx, seed, gid):
    sites = []
    for v in canonical_order(graph):
        if not is_frame(graph.nodes[v]):
            continue
        i0, e0 = _first_role_edge(graph, v, "ARG0")
        i1, e1 = _first_role_edge(graph, v, "ARG1")
        if e0 is not None and e1 is not None and e0.target != e1.target:
            sites.append(PerturbationSite(Family.ENTITY, "agent-patient-swap", v))
    for slot in value_slots(graph):
        if slot.pool_key not in ("name", "quant"):
            continue
        pool = ctx.same_doc_pools.get(slot.pool_key, ())
        current = graph.edges[slot.edge_index].target
        candidates = _pool_candidates(pool, current, None)
        if candidates:
            rng = _site_rng(seed, gid, "entity-substitute", slot.edge_index)
            sites.append(
                PerturbationSite(
                    Family.ENTITY,
                    "entity-substitute",
                    slot.edge_index,
                    rng.choice(candidates),
                )
            )
    return sites


def _enumerate_circumstance(graph, ctx, seed, gid):
    sites = []
    for v in canonical_order(graph):
        stronger = ctx.modality.stronger(graph.nodes[v])
        if stronger is not None:
            sites.append(
                PerturbationSite(Family.CIRCUMSTANCE, "modality-strengthen", v, stronger)
            )
    for slot in value_slots(graph):
        if slot.pool_key not in ("location", "time", "date"):
            continue
        pool = ctx.same_doc_pools.get(slot.pool_key, ())
        current = graph.edges[slot.edge_index].target
        candidates = _pool_candidates(pool, current, slot.date_part)
        if candidates:
            rng = _site_rng(seed, gid, "circumstance-substitute", slot.edge_index)
            sites.append(
                PerturbationSite(
                    Family.CIRCUMSTANCE,
                    "circumstance-substitute",
                    slot.edge_index,
                    rng.choice(candidates),
                )
            )
    return sites


def _enumerate_discourse(graph, ctx, seed, gid):
    sites = []
    for v in canonical_order(graph):
        concept = graph.nodes[v]
        if concept in _TEMPORAL_FLIPS:
            sites.append(
                PerturbationSite(
                    Family.DISCOURSE_LINK, "temporal-flip", v, _TEMPORAL_FLIPS[concept]
                )
            )
        elif concept == "now":
            rng = _site_rng(seed, gid, "temporal-flip", v)
            sites.append(
                PerturbationSite(
                    Family.DISCOURSE_LINK,
                    "temporal-flip",
                    v,
                    rng.choice(["before", "after"]),
                )
            )
    for v in canonical_order(graph):
        if graph.nodes[v] != "cause-01":
            continue
        _, e0 = _first_role_edge(graph, v, "ARG0")
        _, e1 = _first_role_edge(graph, v, "ARG1")
        if e0 is not None and e1 is not None and e0.target != e1.target:
            sites.append(PerturbationSite(Family.DISCOURSE_LINK, "causality-reverse", v))
    for idx, e in enumerate(graph.edges):
        if e.role != "cause" or not isinstance(e.target, str):
            continue
        site = PerturbationSite(Family.DISCOURSE_LINK, "causality-reverse", idx)
        try:
            perturb_discourse(graph, site)
        except (InapplicableSiteError, DegenerateEditError):
            continue
        sites.append(site)
    return sites


def _enumerate_out_of_article(graph, ctx, seed, gid):
    sites = []
    for slot in value_slots(graph):
        pool = ctx.global_pool.get(slot.pool_key, ())
        current = graph.edges[slot.edge_index].target
        candidates = [
            c
            for c in _pool_candidates(pool, current, slot.date_part)
            if is_document_foreign(c.value, ctx.doc_vocabulary)
        ]
        if candidates:
            rng = _site_rng(seed, gid, "foreign-substitute", slot.edge_index)
            sites.append(
                PerturbationSite(
                    Family.OUT_OF_ARTICLE,
                    "foreign-substitute",
                    slot.edge_index,
                    rng.choice(candidates),
                )
            )
    return sites


_ENUMERATORS = {
    Family.PREDICATE: _enumerate_predicate,
    Family.ENTITY: _enumerate_entity,
    Family.CIRCUMSTANCE: _enumerate_circumstance,
    Family.DISCOURSE_LINK: _enumerate_discourse,
    Family.OUT_OF_ARTICLE: _enumerate_out_of_article,
}


# -- application ----------------------------------------------------------


def _require_node(graph: AmrGraph, site: PerturbationSite) -> str:
    if not isinstance(site.target, str) or site.target not in graph.nodes:
        raise InapplicableSiteError(
            f"{site.variant}: no such variable {site.target!r}"
        )
    return site.target


def _require_edge(graph: AmrGraph, site: PerturbationSite) -> int:
    if not isinstance(site.target, int) or not 0 <= site.target < len(graph.edges):
        raise InapplicableSiteError(f"{site.variant}: no such edge {site.target!r}")
    return site.target


def perturb_predicate(graph: AmrGraph, site: PerturbationSite) -> AmrGraph:
    var = _require_node(graph, site)
    if site.variant == "polarity-add":
        if graph.has_negative_polarity(var):
            raise InapplicableSiteError(f"{var} already carries negative polarity")
        return graph.with_edge_added(Edge(var, "polarity", POLARITY_NEG))
    if site.variant == "polarity-remove":
        for i in graph.attribute_indices(var, "polarity"):
            if graph.edges[i].target == POLARITY_NEG:
                return graph.with_edge_removed(i)
        raise InapplicableSiteError(f"{var} has no negative polarity to remove")
    if site.variant == "antonym":
        if not isinstance(site.payload, str) or not site.payload:
            raise InapplicableSiteError(f"no antonym known for {graph.nodes[var]!r}")
        if site.payload == graph.nodes[var]:
            raise DegenerateEditError(f"antonym equals the original: {site.payload!r}")
        return graph.with_concept(var, site.payload)
    raise InapplicableSiteError(f"unknown predicate variant {site.variant!r}")


def _swap_role_targets(graph: AmrGraph, var: str, role_a: str, role_b: str) -> AmrGraph:
    ia, ea = _first_role_edge(graph, var, role_a)
    ib, eb = _first_role_edge(graph, var, role_b)
    if ea is None or eb is None:
        raise InapplicableSiteError(
            f"{graph.nodes[var]} at {var} lacks {role_a} or {role_b}"
        )
    if ea.target == eb.target:
        raise DegenerateEditError(f"{role_a} and {role_b} of {var} already coincide")
    swapped = graph.with_edge_replaced(ia, Edge(var, role_a, eb.target))
    swapped = swapped.with_edge_replaced(ib, Edge(var, role_b, ea.target))
    swapped.validate()
    return swapped


def _substitute_slot(
    graph: AmrGraph,
    site: PerturbationSite,
    allowed_keys: tuple[str, ...],
) -> AmrGraph:
    idx = _require_edge(graph, site)
    slot = next((s for s in value_slots(graph) if s.edge_index == idx), None)
    if slot is None or slot.pool_key not in allowed_keys:
        raise InapplicableSiteError(
            f"{site.variant}: edge #{idx} is not a substitutable "
            f"{'/'.join(allowed_keys)} value"
        )
    if not isinstance(site.payload, Constant):
        raise InapplicableSiteError(f"{site.variant}: a constant payload is required")
    edge = graph.edges[idx]
    if site.payload == edge.target:
        raise DegenerateEditError(f"substitute with identical value at edge #{idx}")
    return graph.with_edge_replaced(idx, Edge(edge.source, edge.role, site.payload))


def perturb_entity(graph: AmrGraph, site: PerturbationSite) -> AmrGraph:
    if site.variant == "agent-patient-swap":
        var = _require_node(graph, site)
        return _swap_role_targets(graph, var, "ARG0", "ARG1")
    if site.variant == "entity-substitute":
        return _substitute_slot(graph, site, ("name", "quant"))
    raise InapplicableSiteError(f"unknown entity variant {site.variant!r}")


def _delete_wrapper(graph: AmrGraph, var: str) -> AmrGraph:
    _, content = _first_role_edge(graph, var, "ARG1")
    if content is None or not isinstance(content.target, str):
        raise InapplicableSiteError(
            f"wrapper {var} has no node-valued ARG1 content to promote"
        )
    child = content.target
    nodes = {v: c for v, c in graph.nodes.items() if v != var}
    edges = []
    for e in graph.edges:
        if e.source == var:
            continue
        if e.target == var:
            edges.append(Edge(e.source, e.role, child))
        else:
            edges.append(e)
    top = child if graph.top == var else graph.top
    try:
        return AmrGraph.create(top, nodes, edges, graph.metadata)
    except CycleError as exc:
        raise InapplicableSiteError(f"deleting {var} would create a cycle") from exc


def perturb_circumstance(graph: AmrGraph, site: PerturbationSite) -> AmrGraph:
    if site.variant == "modality-strengthen":
        var = _require_node(graph, site)
        if site.payload is None:
            raise InapplicableSiteError(
                f"{graph.nodes[var]!r} has no stronger form"
            )
        if not isinstance(site.payload, str):
            raise InapplicableSiteError("modality payload must be a concept")
        if site.payload == "":
            return _delete_wrapper(graph, var)
        if site.payload == graph.nodes[var]:
            raise DegenerateEditError("modality payload equals the original")
        return graph.with_concept(var, site.payload)
    if site.variant == "circumstance-substitute":
        return _substitute_slot(graph, site, ("location", "time", "date"))
    raise InapplicableSiteError(f"unknown circumstance variant {site.variant!r}")


def perturb_discourse(graph: AmrGraph, site: PerturbationSite) -> AmrGraph:
    if site.variant == "temporal-flip":
        var = _require_node(graph, site)
        concept = graph.nodes[var]
        if concept in _TEMPORAL_FLIPS:
            return graph.with_concept(var, _TEMPORAL_FLIPS[concept])
        if concept == "now":
            if site.payload not in ("before", "after"):
                raise InapplicableSiteError(
                    "flipping 'now' needs a 'before' or 'after' payload"
                )
            return graph.with_concept(var, site.payload)
        raise InapplicableSiteError(f"{concept!r} is not a temporal operator")
    if site.variant == "causality-reverse":
        if isinstance(site.target, str):
            var = _require_node(graph, site)
            if graph.nodes[var] != "cause-01":
                raise InapplicableSiteError(
                    f"{graph.nodes[var]!r} is not a causal predicate"
                )
            return _swap_role_targets(graph, var, "ARG0", "ARG1")
        idx = _require_edge(graph, site)
        e = graph.edges[idx]
        if e.role != "cause" or not isinstance(e.target, str):
            raise InapplicableSiteError(
                f"edge #{idx} is not a node-valued cause modifier"
            )
        reversed_edge = Edge(e.target, "cause", e.source)
        candidate = graph.with_edge_replaced(idx, reversed_edge)
        if graph.top == e.source:
            candidate = candidate.with_top(e.target)
        try:
            candidate.validate()
        except CycleError as exc:
            raise InapplicableSiteError(
                f"reversing cause edge #{idx} would create a cycle"
            ) from exc
        return candidate
    raise InapplicableSiteError(f"unknown discourse variant {site.variant!r}")


def perturb_out_of_article(
    graph: AmrGraph, site: PerturbationSite, ctx: PerturbationContext
) -> AmrGraph:
    if site.variant != "foreign-substitute":
        raise InapplicableSiteError(f"unknown out-of-article variant {site.variant!r}")
    if not isinstance(site.payload, Constant):
        raise InapplicableSiteError("foreign-substitute requires a constant payload")
    if not is_document_foreign(site.payload.value, ctx.doc_vocabulary):
        raise InapplicableSiteError(
            f"payload {site.payload.value!r} is not foreign to the document"
        )
    return _substitute_slot(
        graph, site, ("name", "quant", "location", "time", "date")
    )


def apply_site(
    graph: AmrGraph,
    site: PerturbationSite,
    ctx: Optional[PerturbationContext] = None,
) -> AmrGraph:
    """Apply one site; the input graph is never modified."""
    if site.family is Family.PREDICATE:
        result = perturb_predicate(graph, site)
    elif site.family is Family.ENTITY:
        result = perturb_entity(graph, site)
    elif site.family is Family.CIRCUMSTANCE:
        result = perturb_circumstance(graph, site)
    elif site.family is Family.DISCOURSE_LINK:
        result = perturb_discourse(graph, site)
    else:
        if ctx is None:
            raise ValueError("out-of-article edits need a PerturbationContext")
        result = perturb_out_of_article(graph, site, ctx)
    result.validate()
    return result


def apply_all(
    graph: AmrGraph,
    ctx: PerturbationContext,
    config: PerturbConfig = PerturbConfig(),
) -> list[tuple[PerturbationSite, AmrGraph]]:
    """Enumerate and apply every site; sites that turn out inapplicable
    or degenerate at application time are dropped."""
    out = []
    for site in enumerate_sites(graph, ctx, config):
        try:
            out.append((site, apply_site(graph, site, ctx)))
        except (InapplicableSiteError, DegenerateEditError):
            continue
    return out
