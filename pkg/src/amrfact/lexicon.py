"""Concept substitution tables loaded from TSV files.

Two tables drive concept-level rewrites:

* the antonym table, ``concept<TAB>relation<TAB>replacement`` with the
  relation restricted to Antonym, NotDesires, NotCapableOf or
  NotHasProperty;
* the modality table, ``concept<TAB>stronger_concept``, mapping a modal
  predicate to its strengthened form. An empty replacement marks the
  concept as a deletable wrapper.

Small curated defaults ship with the package and are used whenever the
caller does not supply files of their own.
"""
from __future__ import annotations

from dataclasses import dataclass
from importlib import resources
from typing import Iterable, Mapping

from .errors import AmrfactError

ANTONYM_RELATIONS = ("Antonym", "NotDesires", "NotCapableOf", "NotHasProperty")


class LexiconError(AmrfactError):
    """A substitution table file is malformed."""


@dataclass(frozen=True)
class AntonymLexicon:
    """Maps a concept to its replacement candidates, keyed for lookup."""

    entries: Mapping[str, tuple[str, ...]]

    def replacements(self, concept: str) -> tuple[str, ...]:
        return self.entries.get(concept, ())

    def __contains__(self, concept: str) -> bool:
        return concept in self.entries

    def __len__(self) -> int:
        return len(self.entries)


@dataclass(frozen=True)
class ModalityMap:
    """Maps a modal concept to its stronger form ('' = deletable wrapper)."""

    entries: Mapping[str, str]

    def stronger(self, concept: str) -> str | None:
        return self.entries.get(concept)

    def __contains__(self, concept: str) -> bool:
        return concept in self.entries

    def __len__(self) -> int:
        return len(self.entries)


def _data_lines(text: str, path: str) -> Iterable[tuple[int, list[str]]]:
    for lineno, raw in enumerate(text.split("\n"), start=1):
        line = raw.rstrip("\n")
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        yield lineno, line.split("\t")


def parse_antonym_lexicon(text: str, path: str = "<antonyms>") -> AntonymLexicon:
    entries: dict[str, list[str]] = {}
    for lineno, fields in _data_lines(text, path):
        if len(fields) != 3:
            raise LexiconError(
                f"{path}:{lineno}: expected 3 tab-separated fields, got {len(fields)}"
            )
        concept, relation, replacement = (f.strip() for f in fields)
        if relation not in ANTONYM_RELATIONS:
            raise LexiconError(
                f"{path}:{lineno}: unknown relation {relation!r}"
            )
        if not concept or not replacement:
            raise LexiconError(f"{path}:{lineno}: empty concept field")
        bucket = entries.setdefault(concept, [])
        if replacement not in bucket:
            bucket.append(replacement)
    return AntonymLexicon({k: tuple(v) for k, v in entries.items()})


def parse_modality_map(text: str, path: str = "<modality>") -> ModalityMap:
    entries: dict[str, str] = {}
    for lineno, fields in _data_lines(text, path):
        if len(fields) != 2:
            raise LexiconError(
                f"{path}:{lineno}: expected 2 tab-separated fields, got {len(fields)}"
            )
        concept, stronger = (f.strip() for f in fields)
        if not concept:
            raise LexiconError(f"{path}:{lineno}: empty concept field")
        entries[concept] = stronger
    return ModalityMap(entries)


def load_antonym_lexicon(path: str) -> AntonymLexicon:
    with open(path, encoding="utf-8") as fh:
        return parse_antonym_lexicon(fh.read(), path)


def load_modality_map(path: str) -> ModalityMap:
    with open(path, encoding="utf-8") as fh:
        return parse_modality_map(fh.read(), path)


def _bundled(name: str) -> str:
    return resources.files("amrfact.data").joinpath(name).read_text("utf-8")


def bundled_antonym_lexicon() -> AntonymLexicon:
    return parse_antonym_lexicon(_bundled("antonyms.tsv"), "antonyms.tsv")


def bundled_modality_map() -> ModalityMap:
    return parse_modality_map(_bundled("modality.tsv"), "modality.tsv")
