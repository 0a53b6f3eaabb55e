"""Tokenizers shared by the builtin scorers and the vocabulary checks.

Two deliberately different token definitions live here:

* ``word_tokens`` keeps digits. It feeds document vocabularies, where
  numeric values (years, quantities) must be checkable for membership.
* ``alpha_tokens`` keeps only alphabetic runs. It feeds the builtin
  overlap scorers, where sense suffixes such as the ``02`` in ``go-02``
  would otherwise count as content words.
"""
from __future__ import annotations

import re

_WORD_RE = re.compile(r"[a-z0-9']+")
_ALPHA_RE = re.compile(r"[a-z']+")


def word_tokens(text: str) -> set[str]:
    """Lowercase alphanumeric tokens of ``text`` (apostrophes kept)."""
    return set(_WORD_RE.findall(text.lower()))


def alpha_tokens(text: str) -> set[str]:
    """Lowercase alphabetic tokens of ``text``; digits never form tokens."""
    return set(_ALPHA_RE.findall(text.lower()))
