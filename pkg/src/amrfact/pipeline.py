"""Dataset construction: exhaustive perturbation over a corpus, text
realization, validity filtering, class balancing, and JSONL emission.

Every stage is deterministic under a fixed (corpus, lexicons, config,
seed) tuple; worker count never changes the output bytes.
"""
from __future__ import annotations

import hashlib
import json
import random
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from decimal import ROUND_HALF_UP, Decimal
from pathlib import Path
from typing import Callable, Mapping, Optional, Sequence, Union

from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.exceptions import NotFittedError

from .corpus import (
    DocumentRecord,
    LabeledExample,
    NegativeCandidate,
    example_to_json,
    write_jsonl,
)
from .errors import PipelineError
from .filtering import FilterConfig, Rejection, filter_batch
from .graph import AmrGraph, Constant, Ref, Span, spanning
from .lexicon import (
    AntonymLexicon,
    ModalityMap,
    bundled_antonym_lexicon,
    bundled_modality_map,
    load_antonym_lexicon,
    load_modality_map,
)
from .penman import parse_penman, serialize_penman
from .perturb import (
    ALL_FAMILIES,
    Family,
    PerturbConfig,
    PerturbationContext,
    apply_all,
    harvest_pools,
)
from .scoring import ExecBridge, Scorer, score_candidates
from .textutil import word_tokens

ContextBuilder = Callable[
    [DocumentRecord, Sequence[AmrGraph], Mapping], PerturbationContext
]


def linearize(graph: AmrGraph) -> str:
    """Depth-first concept/constant sequence used by passthrough
    realization, e.g. ``(g / go-02 :polarity -)`` -> ``go-02 polarity:-``.
    Re-mentions of a variable repeat its concept."""
    tokens: list[str] = []

    def visit(span: Span) -> None:
        tokens.append(span.concept)
        for role, child in span.items:
            if isinstance(child, Span):
                visit(child)
            elif isinstance(child, Ref):
                tokens.append(graph.nodes[child.var])
            else:
                tokens.append(f"{role}:{child.value}")

    visit(spanning(graph))
    return " ".join(tokens)


def parse_document_graphs(record: DocumentRecord) -> list[AmrGraph]:
    """Parse each summary sentence, stamping a stable per-sentence id so
    seeded choices stay reproducible across runs."""
    graphs = []
    for i, sentence in enumerate(record.summary_sentences):
        g = parse_penman(sentence.penman)
        meta = dict(g.metadata)
        meta["id"] = f"{record.doc_id}/{i}"
        graphs.append(g.with_metadata(meta))
    return graphs


def make_context_builder(
    antonyms: Optional[AntonymLexicon] = None,
    modality: Optional[ModalityMap] = None,
) -> ContextBuilder:
    antonyms = antonyms if antonyms is not None else bundled_antonym_lexicon()
    modality = modality if modality is not None else bundled_modality_map()

    def build(record, graphs, global_pool):
        return PerturbationContext(
            same_doc_pools=harvest_pools(graphs),
            doc_vocabulary=frozenset(word_tokens(record.document_text)),
            global_pool=global_pool,
            antonyms=antonyms,
            modality=modality,
        )

    return build


def generate(
    records: Sequence[DocumentRecord],
    ctx_builder: ContextBuilder,
    config: PerturbConfig = PerturbConfig(),
    jobs: int = 1,
) -> list[NegativeCandidate]:
    """Apply every applicable perturbation to every summary sentence.

    Documents may be processed by several workers; candidates are
    concatenated in document order, so the result is independent of
    ``jobs``.
    """
    parsed = [(record, parse_document_graphs(record)) for record in records]
    global_pool = harvest_pools([g for _, graphs in parsed for g in graphs])

    def work(item) -> list[NegativeCandidate]:
        record, graphs = item
        ctx = ctx_builder(record, graphs, global_pool)
        out: list[NegativeCandidate] = []
        for sent_idx, (sentence, graph) in enumerate(
            zip(record.summary_sentences, graphs)
        ):
            for k, (site, perturbed) in enumerate(apply_all(graph, ctx, config)):
                out.append(
                    NegativeCandidate(
                        candidate_id=(
                            f"{record.doc_id}:{sent_idx}:"
                            f"{site.family.value}:{site.variant}:{k}"
                        ),
                        doc_id=record.doc_id,
                        sentence_index=sent_idx,
                        family=site.family,
                        variant=site.variant,
                        site=site.describe(),
                        positive_text=sentence.text,
                        perturbed_penman=serialize_penman(perturbed),
                    )
                )
        return out

    if jobs <= 1:
        batches = [work(item) for item in parsed]
    else:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            batches = list(pool.map(work, parsed))
    return [c for batch in batches for c in batch]


def realize(
    candidates: Sequence[NegativeCandidate],
    realizer: Union[str, Callable[[str], str]] = "passthrough",
) -> list[NegativeCandidate]:
    """Fill perturbed_text on every candidate.

    ``passthrough`` linearizes the graph offline and marks the result;
    ``exec:CMD`` sends the whole batch through an AMR-to-text adapter;
    a callable receives each PENMAN string and returns text.
    """
    for c in candidates:
        if not c.perturbed_penman:
            raise PipelineError(f"{c.candidate_id}: no perturbed graph to realize")
    if realizer == "passthrough":
        return [
            c.with_text(linearize(parse_penman(c.perturbed_penman)), "linearized")
            for c in candidates
        ]
    if isinstance(realizer, str) and realizer.startswith("exec:"):
        if not candidates:
            return []
        bridge = ExecBridge(realizer[len("exec:"):])
        outputs = bridge.translate_batch(
            "amr2text", [(c.candidate_id, c.perturbed_penman) for c in candidates]
        )
        return [c.with_text(outputs[c.candidate_id], "adapter") for c in candidates]
    if callable(realizer):
        return [c.with_text(realizer(c.perturbed_penman), "adapter") for c in candidates]
    raise PipelineError(f"unknown realizer {realizer!r}")


def positives_from_records(records: Sequence[DocumentRecord]) -> list[LabeledExample]:
    return [
        LabeledExample(r.doc_id, r.document_text, s.text, "entailment", "reference")
        for r in records
        for s in r.summary_sentences
    ]


def negatives_from_candidates(
    candidates: Sequence[NegativeCandidate],
    documents: Mapping[str, str],
) -> list[LabeledExample]:
    out = []
    for c in candidates:
        if c.perturbed_text is None:
            raise PipelineError(f"{c.candidate_id}: candidate not realized")
        out.append(
            LabeledExample(
                c.doc_id,
                documents[c.doc_id],
                c.perturbed_text,
                "contradiction",
                c.family.value,
            )
        )
    return out


@dataclass(frozen=True)
class DatasetManifest:
    seed: int
    per_class: int
    positives_in: int
    negatives_in: int
    per_family_emitted: Mapping[str, int]
    split_ratio: Optional[float]
    split_counts: Mapping[str, int]
    files: tuple[str, ...]

    def to_dict(self) -> dict:
        return {
            "seed": self.seed,
            "per_class": self.per_class,
            "input_counts": {
                "positives": self.positives_in,
                "negatives": self.negatives_in,
            },
            "per_family_emitted": dict(self.per_family_emitted),
            "split_ratio": self.split_ratio,
            "split_counts": dict(self.split_counts),
            "files": list(self.files),
        }


def _downsample(examples: list, rng: random.Random, n: int) -> list:
    if len(examples) <= n:
        return list(examples)
    keep = sorted(rng.sample(range(len(examples)), n))
    return [examples[i] for i in keep]


def _emit_key(example: LabeledExample) -> tuple:
    return (example.doc_id, example.label, example.provenance, example.summary_text)


def split_by_document(
    examples: Sequence[LabeledExample], ratio: float, seed: int
) -> tuple[list[LabeledExample], list[LabeledExample]]:
    """Split keeping each doc_id entirely in one side; the first side
    receives whole documents until it holds >= ratio of the examples."""
    if not 0.0 < ratio < 1.0:
        raise PipelineError(f"split ratio must be in (0,1), got {ratio}")
    doc_ids = sorted({e.doc_id for e in examples})
    if len(doc_ids) < 2:
        raise PipelineError("cannot split a single-document dataset by doc_id")
    rng = random.Random(f"split|{seed}")
    rng.shuffle(doc_ids)
    per_doc: dict[str, int] = {}
    for e in examples:
        per_doc[e.doc_id] = per_doc.get(e.doc_id, 0) + 1
    total = len(examples)
    train_docs: set[str] = set()
    count = 0
    for d in doc_ids:
        if count / total >= ratio or len(train_docs) == len(doc_ids) - 1:
            break
        train_docs.add(d)
        count += per_doc[d]
    train = [e for e in examples if e.doc_id in train_docs]
    val = [e for e in examples if e.doc_id not in train_docs]
    return train, val


def balance_and_emit(
    positives: Sequence[LabeledExample],
    negatives: Sequence[LabeledExample],
    out_dir: str,
    seed: int,
    split_ratio: Optional[float] = None,
) -> DatasetManifest:
    """Downsample the larger class to the smaller one's size with a
    seeded uniform draw, then write the dataset under ``out_dir``.

    Without a split everything lands in dataset.jsonl; with one, whole
    documents are assigned to train.jsonl / validation.jsonl.
    """
    if not positives or not negatives:
        raise PipelineError("both classes must be nonempty to balance")
    n = min(len(positives), len(negatives))
    rng = random.Random(f"balance|{seed}")
    pos = _downsample(list(positives), rng, n)
    neg = _downsample(list(negatives), rng, n)

    emitted = sorted(pos + neg, key=_emit_key)
    per_family: dict[str, int] = {}
    for e in neg:
        per_family[e.provenance] = per_family.get(e.provenance, 0) + 1

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    files: list[str] = []
    split_counts: dict[str, int] = {}
    if split_ratio is None or split_ratio >= 1.0:
        write_jsonl(str(out / "dataset.jsonl"), map(example_to_json, emitted))
        files.append("dataset.jsonl")
        split_counts["dataset"] = len(emitted)
        ratio_recorded = None
    else:
        train, val = split_by_document(emitted, split_ratio, seed)
        write_jsonl(str(out / "train.jsonl"), map(example_to_json, train))
        write_jsonl(str(out / "validation.jsonl"), map(example_to_json, val))
        files.extend(["train.jsonl", "validation.jsonl"])
        split_counts["train"] = len(train)
        split_counts["validation"] = len(val)
        ratio_recorded = split_ratio

    return DatasetManifest(
        seed=seed,
        per_class=n,
        positives_in=len(positives),
        negatives_in=len(negatives),
        per_family_emitted=per_family,
        split_ratio=ratio_recorded,
        split_counts=split_counts,
        files=tuple(files),
    )


# -- statistics -----------------------------------------------------------


@dataclass(frozen=True)
class StatsReport:
    total: int
    per_family: Mapping[str, tuple[int, str]]  # family -> (count, percent)
    acceptance_rate: Optional[str]
    per_document: Mapping[str, int]

    def to_dict(self) -> dict:
        return {
            "total": self.total,
            "per_family": {
                name: {"count": count, "percent": percent}
                for name, (count, percent) in self.per_family.items()
            },
            "acceptance_rate": self.acceptance_rate,
            "per_document": dict(self.per_document),
        }

    def render_table(self) -> str:
        lines = [f"{'family':<16} {'count':>8} {'percent':>8}"]
        for name, (count, percent) in self.per_family.items():
            lines.append(f"{name:<16} {count:>8} {percent:>8}")
        lines.append(f"{'total':<16} {self.total:>8}")
        if self.acceptance_rate is not None:
            lines.append(f"filter acceptance rate: {self.acceptance_rate}")
        return "\n".join(lines)


def _percent(count: int, total: int) -> str:
    value = (Decimal(count) * 100 / Decimal(total)).quantize(
        Decimal("0.01"), rounding=ROUND_HALF_UP
    )
    return str(value)


def stats(
    items: Sequence[Union[NegativeCandidate, LabeledExample]],
    rejected_count: Optional[int] = None,
) -> StatsReport:
    """Per-family composition of candidates or of an emitted dataset.

    For datasets, only contradiction rows enter the family histogram;
    reference rows are excluded from the denominator. ``rejected_count``
    folds a filter outcome into the acceptance rate: the items are
    understood as the pre-filter population of which ``rejected_count``
    were dropped.
    """
    if not items:
        raise PipelineError("stats over empty input")
    family_names = {f.value for f in Family}
    counts: dict[str, int] = {}
    per_document: dict[str, int] = {}
    for item in items:
        name = (
            item.family.value
            if isinstance(item, NegativeCandidate)
            else item.provenance
        )
        if name in family_names:
            counts[name] = counts.get(name, 0) + 1
            per_document[item.doc_id] = per_document.get(item.doc_id, 0) + 1
    total = sum(counts.values())
    if total == 0:
        raise PipelineError("stats input contains no family-tagged items")
    per_family = {
        f.value: (counts.get(f.value, 0), _percent(counts.get(f.value, 0), total))
        for f in Family
    }
    acceptance = None
    if rejected_count is not None:
        if not 0 <= rejected_count <= total:
            raise PipelineError("rejected_count outside the item count")
        acceptance = _percent(total - rejected_count, total)
    return StatsReport(
        total=total,
        per_family=per_family,
        acceptance_rate=acceptance,
        per_document=dict(sorted(per_document.items())),
    )


# -- one-call orchestration (used by the CLI) ------------------------------


def config_fingerprint(payload: Mapping) -> str:
    canon = json.dumps(payload, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode()).hexdigest()


def build_dataset(
    records: Sequence[DocumentRecord],
    out_dir: str,
    seed: int,
    scorer: Scorer,
    antonyms: Optional[AntonymLexicon] = None,
    modality: Optional[ModalityMap] = None,
    families: tuple[Family, ...] = ALL_FAMILIES,
    max_sites_per_family: Optional[int] = None,
    filter_config: FilterConfig = FilterConfig(),
    split_ratio: Optional[float] = None,
    realizer: Union[str, Callable[[str], str]] = "passthrough",
    jobs: int = 1,
) -> dict:
    """Run the full construction and write dataset, manifest and stats
    files into ``out_dir``. Returns the manifest dictionary."""
    config = PerturbConfig(
        families=families, max_sites_per_family=max_sites_per_family, rng_seed=seed
    )
    ctx_builder = make_context_builder(antonyms, modality)
    candidates = generate(records, ctx_builder, config, jobs=jobs)
    if not candidates:
        raise PipelineError("no perturbation candidates were generated")
    realized = realize(candidates, realizer)
    documents = {r.doc_id: r.document_text for r in records}
    scores = score_candidates(realized, scorer, documents)
    valid, rejected = filter_batch(realized, scores, filter_config)

    positives = positives_from_records(records)
    negatives = negatives_from_candidates(valid, documents)
    manifest = balance_and_emit(positives, negatives, out_dir, seed, split_ratio)

    report = stats(realized, rejected_count=len(rejected))
    reject_reasons: dict[str, int] = {}
    for r in rejected:
        reject_reasons[r.reason] = reject_reasons.get(r.reason, 0) + 1

    payload = manifest.to_dict()
    payload["config_hash"] = config_fingerprint(
        {
            "families": [f.value for f in families],
            "max_sites_per_family": max_sites_per_family,
            "seed": seed,
            "tau1": filter_config.tau1,
            "tau2": filter_config.tau2,
            "split_ratio": split_ratio,
            "realizer": realizer if isinstance(realizer, str) else "adapter",
        }
    )
    payload["filter"] = {
        "tau1": filter_config.tau1,
        "tau2": filter_config.tau2,
        "scored": len(scores),
        "valid": len(valid),
        "rejected": len(rejected),
        "reject_reasons": dict(sorted(reject_reasons.items())),
    }
    payload["stats"] = report.to_dict()

    out = Path(out_dir)
    (out / "manifest.json").write_text(
        json.dumps(payload, indent=2, sort_keys=True, ensure_ascii=False) + "\n",
        encoding="utf-8",
    )
    (out / "stats.json").write_text(
        json.dumps(report.to_dict(), indent=2, sort_keys=True, ensure_ascii=False)
        + "\n",
        encoding="utf-8",
    )
    return payload


# -- estimator facade -------------------------------------------------------


class AmrPerturber(TransformerMixin, BaseEstimator):
    """Perturbation as a scikit-learn transformer over document records.

    fit loads the lexicons and freezes the configuration; transform maps
    DocumentRecords to the flat list of NegativeCandidates, deriving the
    per-document pools and the corpus-wide pool from its input.
    """

    def __init__(
        self,
        families: Optional[Sequence[str]] = None,
        max_sites_per_family: Optional[int] = None,
        rng_seed: int = 0,
        antonym_path: Optional[str] = None,
        modality_path: Optional[str] = None,
        jobs: int = 1,
    ):
        self.families = families
        self.max_sites_per_family = max_sites_per_family
        self.rng_seed = rng_seed
        self.antonym_path = antonym_path
        self.modality_path = modality_path
        self.jobs = jobs

    def fit(self, X: Sequence[DocumentRecord], y=None) -> "AmrPerturber":
        antonyms = (
            load_antonym_lexicon(self.antonym_path)
            if self.antonym_path
            else bundled_antonym_lexicon()
        )
        modality = (
            load_modality_map(self.modality_path)
            if self.modality_path
            else bundled_modality_map()
        )
        self.ctx_builder_ = make_context_builder(antonyms, modality)
        self.config_ = PerturbConfig(
            families=(
                tuple(Family(f) for f in self.families)
                if self.families
                else ALL_FAMILIES
            ),
            max_sites_per_family=self.max_sites_per_family,
            rng_seed=self.rng_seed,
        )
        return self

    def transform(self, X: Sequence[DocumentRecord]) -> list[NegativeCandidate]:
        if not hasattr(self, "config_"):
            raise NotFittedError("AmrPerturber.transform called before fit")
        return generate(X, self.ctx_builder_, self.config_, jobs=self.jobs)
