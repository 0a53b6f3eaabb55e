"""Corpus records, candidate/example types, and their JSONL forms.

The input corpus is one document per line::

    {"doc_id": ..., "document_text": ...,
     "summary_sentences": [{"text": ..., "penman": ...}, ...]}

Emitted datasets are one labeled example per line::

    {"doc_id": ..., "document": ..., "summary": ..., "label": ...,
     "provenance": ...}
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from typing import Iterable, Optional

from .errors import AmrfactError, CorpusError
from .penman import parse_penman
from .perturb import Family

LABELS = ("entailment", "contradiction")


@dataclass(frozen=True)
class SummarySentence:
    text: str
    penman: str


@dataclass(frozen=True)
class DocumentRecord:
    doc_id: str
    document_text: str
    summary_sentences: tuple[SummarySentence, ...]

    def __post_init__(self):
        if not self.doc_id:
            raise CorpusError("document record without doc_id")
        if not self.summary_sentences:
            raise CorpusError(f"{self.doc_id}: no summary sentences")


@dataclass(frozen=True)
class NegativeCandidate:
    """A perturbed summary sentence proposed as an inconsistent example."""

    candidate_id: str
    doc_id: str
    sentence_index: int
    family: Family
    variant: str
    site: str
    positive_text: str
    perturbed_penman: str
    perturbed_text: Optional[str] = None
    realization: Optional[str] = None

    def with_text(self, text: str, realization: str) -> "NegativeCandidate":
        return replace(self, perturbed_text=text, realization=realization)


@dataclass(frozen=True)
class LabeledExample:
    doc_id: str
    document_text: str
    summary_text: str
    label: str
    provenance: str

    def __post_init__(self):
        if self.label not in LABELS:
            raise CorpusError(f"unknown label {self.label!r}")
        if (self.label == "entailment") != (self.provenance == "reference"):
            raise CorpusError(
                f"label {self.label!r} inconsistent with provenance "
                f"{self.provenance!r}"
            )


@dataclass(frozen=True)
class IngestResult:
    records: tuple[DocumentRecord, ...]
    skipped: tuple[tuple[int, str], ...]  # (1-based line, reason)

    @property
    def valid_count(self) -> int:
        return len(self.records)

    @property
    def skipped_count(self) -> int:
        return len(self.skipped)


def _parse_record(obj: dict) -> DocumentRecord:
    try:
        doc_id = obj["doc_id"]
        document_text = obj["document_text"]
        raw_sentences = obj["summary_sentences"]
    except (KeyError, TypeError) as exc:
        raise CorpusError(f"missing field: {exc}") from exc
    if not isinstance(raw_sentences, list) or not raw_sentences:
        raise CorpusError("summary_sentences must be a nonempty list")
    sentences = []
    for i, s in enumerate(raw_sentences):
        try:
            text, penman = s["text"], s["penman"]
        except (KeyError, TypeError) as exc:
            raise CorpusError(f"sentence {i}: missing field {exc}") from exc
        if not isinstance(text, str) or not text.strip():
            raise CorpusError(f"sentence {i}: empty text")
        if not isinstance(penman, str) or not penman.strip():
            raise CorpusError(f"sentence {i}: empty penman")
        try:
            parse_penman(penman)
        except AmrfactError as exc:
            raise CorpusError(f"sentence {i}: {exc}") from exc
        sentences.append(SummarySentence(text, penman))
    return DocumentRecord(str(doc_id), str(document_text), tuple(sentences))


def ingest(corpus_path: str) -> IngestResult:
    """Load a corpus file, keeping valid records and reporting the rest.

    A record with any malformed sentence graph is skipped whole; the
    result lists each skip with its line number. Raises
    :class:`CorpusError` when the file is unreadable or no record
    survives.
    """
    try:
        with open(corpus_path, encoding="utf-8") as fh:
            lines = fh.read().split("\n")
    except OSError as exc:
        raise CorpusError(f"cannot read corpus: {exc}") from exc

    records: list[DocumentRecord] = []
    skipped: list[tuple[int, str]] = []
    for lineno, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            skipped.append((lineno, f"invalid JSON: {exc}"))
            continue
        try:
            records.append(_parse_record(obj))
        except CorpusError as exc:
            skipped.append((lineno, str(exc)))
    if not records:
        raise CorpusError(f"{corpus_path}: zero valid records")
    seen: set[str] = set()
    for r in records:
        if r.doc_id in seen:
            raise CorpusError(f"duplicate doc_id {r.doc_id!r}")
        seen.add(r.doc_id)
    return IngestResult(tuple(records), tuple(skipped))


def example_to_json(example: LabeledExample) -> str:
    return json.dumps(
        {
            "doc_id": example.doc_id,
            "document": example.document_text,
            "summary": example.summary_text,
            "label": example.label,
            "provenance": example.provenance,
        },
        sort_keys=True,
        ensure_ascii=False,
    )


def example_from_json(line: str) -> LabeledExample:
    try:
        obj = json.loads(line)
        return LabeledExample(
            doc_id=obj["doc_id"],
            document_text=obj["document"],
            summary_text=obj["summary"],
            label=obj["label"],
            provenance=obj["provenance"],
        )
    except json.JSONDecodeError as exc:
        raise CorpusError(f"invalid example JSON: {exc}") from exc
    except KeyError as exc:
        raise CorpusError(f"example missing field {exc}") from exc
    except (TypeError, ValueError) as exc:
        raise CorpusError(f"malformed example: {exc}") from exc


def candidate_to_json(c: NegativeCandidate) -> str:
    return json.dumps(
        {
            "candidate_id": c.candidate_id,
            "doc_id": c.doc_id,
            "sentence_index": c.sentence_index,
            "family": c.family.value,
            "variant": c.variant,
            "site": c.site,
            "positive_text": c.positive_text,
            "perturbed_penman": c.perturbed_penman,
            "perturbed_text": c.perturbed_text,
            "realization": c.realization,
        },
        sort_keys=True,
        ensure_ascii=False,
    )


def candidate_from_json(line: str) -> NegativeCandidate:
    try:
        obj = json.loads(line)
        return NegativeCandidate(
            candidate_id=obj["candidate_id"],
            doc_id=obj["doc_id"],
            sentence_index=int(obj["sentence_index"]),
            family=Family(obj["family"]),
            variant=obj["variant"],
            site=obj["site"],
            positive_text=obj["positive_text"],
            perturbed_penman=obj["perturbed_penman"],
            perturbed_text=obj.get("perturbed_text"),
            realization=obj.get("realization"),
        )
    except json.JSONDecodeError as exc:
        raise CorpusError(f"invalid candidate JSON: {exc}") from exc
    except KeyError as exc:
        raise CorpusError(f"candidate missing field {exc}") from exc
    except (TypeError, ValueError) as exc:
        raise CorpusError(f"malformed candidate: {exc}") from exc


def write_jsonl(path: str, lines: Iterable[str]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for line in lines:
            fh.write(line)
            fh.write("\n")


def read_jsonl(path: str) -> list[str]:
    with open(path, encoding="utf-8") as fh:
        return [ln for ln in fh.read().split("\n") if ln.strip()]
