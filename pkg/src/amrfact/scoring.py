"""Scorers that grade perturbed summaries for the validity filter.

Every scorer maps candidates to :class:`ScoreRecord` values carrying two
numbers per candidate: an entailment probability (how inferable the
perturbed summary is from the original one) and a relevance score on a
log-likelihood scale (how well it aligns with the source document).

Three implementations satisfy the contract:

* ``builtin`` — crude token-overlap formulas, no models, fully offline;
* ``file:PATH`` — precomputed scores read from a JSONL file;
* ``exec:CMD`` — a child process speaking the line protocol below.

The child-process protocol is line-delimited JSON over stdin/stdout.
The adapter first emits a handshake ``{"protocol": "amrfact-scorer/1"}``,
then answers each request ``{id, task, premise, hypothesis}`` with one
``{id, score}`` line, in any order.
"""
from __future__ import annotations

import json
import math
import queue
import shlex
import subprocess
import threading
from dataclasses import dataclass
from typing import Iterable, Mapping, Optional, Protocol, Sequence

from .corpus import NegativeCandidate
from .errors import AdapterProtocolError, ScoreJoinError, ScoringError
from .textutil import alpha_tokens

PROTOCOL_NAME = "amrfact-scorer/1"

RELEVANCE_SCALE = 5.0


@dataclass(frozen=True)
class ScoreRecord:
    candidate_id: str
    entailment: float
    relevance: float

    def __post_init__(self):
        if not 0.0 <= self.entailment <= 1.0:
            raise ScoringError(
                f"{self.candidate_id}: entailment {self.entailment} outside [0,1]"
            )
        if not math.isfinite(self.relevance):
            raise ScoringError(f"{self.candidate_id}: non-finite relevance")


@dataclass(frozen=True)
class ScoreRequest:
    """Texts a scorer needs for one candidate."""

    candidate_id: str
    document: str
    positive_text: str
    perturbed_text: str


class Scorer(Protocol):
    def score_batch(self, requests: Sequence[ScoreRequest]) -> list[ScoreRecord]:
        ...


def builtin_entailment(positive_text: str, perturbed_text: str) -> float:
    """Containment of the perturbed summary's tokens in the original's.

    Tokens are alphabetic runs; an empty perturbed token set counts as
    fully contained.
    """
    perturbed = alpha_tokens(perturbed_text)
    if not perturbed:
        return 1.0
    positive = alpha_tokens(positive_text)
    return len(perturbed & positive) / len(perturbed)


def builtin_relevance(document: str, perturbed_text: str,
                      scale: float = RELEVANCE_SCALE) -> float:
    """-(1 - overlap(D, S)) * scale where overlap is the fraction of the
    perturbed summary's tokens present in the document. Zero overlap
    yields -scale; full overlap yields 0."""
    perturbed = alpha_tokens(perturbed_text)
    if not perturbed:
        return 0.0
    doc = alpha_tokens(document)
    overlap = len(perturbed & doc) / len(perturbed)
    return -(1.0 - overlap) * scale


class BuiltinScorer:
    """Offline baseline; deliberately crude and non-neural."""

    def score_batch(self, requests: Sequence[ScoreRequest]) -> list[ScoreRecord]:
        return [
            ScoreRecord(
                r.candidate_id,
                builtin_entailment(r.positive_text, r.perturbed_text),
                builtin_relevance(r.document, r.perturbed_text),
            )
            for r in requests
        ]


class FileScorer:
    """Precomputed scores: JSONL of {candidate_id, entailment, relevance}."""

    def __init__(self, path: str):
        self.path = path
        self._records: Optional[dict[str, ScoreRecord]] = None

    def _load(self) -> dict[str, ScoreRecord]:
        if self._records is None:
            records: dict[str, ScoreRecord] = {}
            try:
                with open(self.path, encoding="utf-8") as fh:
                    lines = fh.read().split("\n")
            except OSError as exc:
                raise ScoringError(f"cannot read score file: {exc}") from exc
            for lineno, line in enumerate(lines, start=1):
                if not line.strip():
                    continue
                try:
                    obj = json.loads(line)
                    rec = ScoreRecord(
                        str(obj["candidate_id"]),
                        float(obj["entailment"]),
                        float(obj["relevance"]),
                    )
                except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
                    raise ScoringError(
                        f"{self.path}:{lineno}: malformed score line: {exc}"
                    ) from exc
                if rec.candidate_id in records:
                    raise ScoreJoinError(
                        f"duplicate score for candidate {rec.candidate_id!r}"
                    )
                records[rec.candidate_id] = rec
            self._records = records
        return self._records

    def score_batch(self, requests: Sequence[ScoreRequest]) -> list[ScoreRecord]:
        table = self._load()
        out = []
        for r in requests:
            if r.candidate_id not in table:
                raise ScoreJoinError(f"no score for candidate {r.candidate_id!r}")
            out.append(table[r.candidate_id])
        return out


def _pump_lines(stream, out_queue: queue.Queue) -> None:
    try:
        for line in stream:
            out_queue.put(line)
    finally:
        out_queue.put(None)


def _feed_lines(stream, lines: list[str]) -> None:
    try:
        for line in lines:
            stream.write(line + "\n")
        stream.flush()
        stream.close()
    except (BrokenPipeError, OSError):
        pass


def _next_json(lines: queue.Queue, timeout: float) -> dict:
    try:
        line = lines.get(timeout=timeout)
    except queue.Empty:
        raise AdapterProtocolError(
            f"adapter produced no output within {timeout}s"
        ) from None
    if line is None:
        raise AdapterProtocolError("adapter stream ended early")
    try:
        obj = json.loads(line)
    except json.JSONDecodeError as exc:
        raise AdapterProtocolError(f"malformed adapter line: {line!r}") from exc
    if not isinstance(obj, dict):
        raise AdapterProtocolError(f"adapter line is not an object: {line!r}")
    return obj


def adapter_exchange(
    command: str,
    requests: Sequence[dict],
    value_key: str,
    timeout: float = 300.0,
) -> dict[str, object]:
    """Run one adapter session: start the child, check its handshake,
    send every request line, and collect ``{id, value_key}`` responses
    (any order) until each request id is answered once."""
    expected_ids = {r["id"] for r in requests}
    if len(expected_ids) != len(requests):
        raise AdapterProtocolError("request ids must be unique")
    request_lines = [json.dumps(r, ensure_ascii=False) for r in requests]
    try:
        proc = subprocess.Popen(
            shlex.split(command),
            stdin=subprocess.PIPE,
            stdout=subprocess.PIPE,
            text=True,
            encoding="utf-8",
        )
    except OSError as exc:
        raise ScoringError(f"cannot start adapter: {exc}") from exc

    lines: queue.Queue = queue.Queue()
    threading.Thread(target=_pump_lines, args=(proc.stdout, lines), daemon=True).start()
    threading.Thread(
        target=_feed_lines, args=(proc.stdin, request_lines), daemon=True
    ).start()

    try:
        handshake = _next_json(lines, timeout)
        if handshake.get("protocol") != PROTOCOL_NAME:
            raise AdapterProtocolError(
                f"bad handshake: expected protocol {PROTOCOL_NAME!r}, "
                f"got {handshake!r}"
            )
        answers: dict[str, object] = {}
        while len(answers) < len(expected_ids):
            obj = _next_json(lines, timeout)
            if "error" in obj:
                raise AdapterProtocolError(
                    f"adapter error for id {obj.get('id')!r}: {obj['error']}"
                )
            rid = obj.get("id")
            if rid not in expected_ids:
                raise AdapterProtocolError(f"unexpected response id {rid!r}")
            if rid in answers:
                raise AdapterProtocolError(f"duplicate response id {rid!r}")
            if value_key not in obj:
                raise AdapterProtocolError(
                    f"response for id {rid!r} lacks {value_key!r}"
                )
            answers[rid] = obj[value_key]
        return answers
    finally:
        proc.terminate()
        try:
            proc.wait(timeout=10)
        except subprocess.TimeoutExpired:
            proc.kill()
            proc.wait()


class ExecScorer:
    """Scores through a child process speaking the adapter protocol."""

    def __init__(self, command: str, timeout: float = 300.0):
        if not command.strip():
            raise ScoringError("empty adapter command")
        self.command = command
        self.timeout = timeout

    def score_batch(self, requests: Sequence[ScoreRequest]) -> list[ScoreRecord]:
        protocol_requests = []
        for r in requests:
            for task, premise, suffix in (
                ("entailment", r.positive_text, "e"),
                ("relevance", r.document, "r"),
            ):
                protocol_requests.append(
                    {
                        "id": f"{r.candidate_id}#{suffix}",
                        "task": task,
                        "premise": premise,
                        "hypothesis": r.perturbed_text,
                    }
                )
        answers = adapter_exchange(
            self.command, protocol_requests, "score", self.timeout
        )

        def as_score(rid: str) -> float:
            try:
                return float(answers[rid])  # type: ignore[arg-type]
            except (TypeError, ValueError) as exc:
                raise AdapterProtocolError(
                    f"malformed score for id {rid!r}"
                ) from exc

        return [
            ScoreRecord(
                r.candidate_id,
                as_score(f"{r.candidate_id}#e"),
                as_score(f"{r.candidate_id}#r"),
            )
            for r in requests
        ]


class ExecBridge:
    """Text/graph translation through the same protocol: tasks
    ``amr2text`` and ``text2amr`` with an ``input`` field, answered by
    ``{id, output}`` lines."""

    def __init__(self, command: str, timeout: float = 300.0):
        if not command.strip():
            raise ScoringError("empty adapter command")
        self.command = command
        self.timeout = timeout

    def translate_batch(self, task: str, items: Sequence[tuple[str, str]]) -> dict[str, str]:
        if task not in ("amr2text", "text2amr"):
            raise ScoringError(f"unknown bridge task {task!r}")
        requests = [
            {"id": item_id, "task": task, "input": text} for item_id, text in items
        ]
        answers = adapter_exchange(self.command, requests, "output", self.timeout)
        out: dict[str, str] = {}
        for item_id, _ in items:
            value = answers[item_id]
            if not isinstance(value, str):
                raise AdapterProtocolError(
                    f"bridge output for id {item_id!r} is not text"
                )
            out[item_id] = value
        return out


def make_scorer(spec: str, timeout: float = 300.0) -> Scorer:
    """Build a scorer from its CLI spec: builtin | file:PATH | exec:CMD."""
    if spec == "builtin":
        return BuiltinScorer()
    if spec.startswith("file:"):
        return FileScorer(spec[len("file:"):])
    if spec.startswith("exec:"):
        return ExecScorer(spec[len("exec:"):], timeout=timeout)
    raise ScoringError(
        f"unknown scorer spec {spec!r} (expected builtin, file:PATH or exec:CMD)"
    )


def score_candidates(
    candidates: Sequence[NegativeCandidate],
    scorer: Scorer,
    documents: Mapping[str, str],
) -> list[ScoreRecord]:
    """One ScoreRecord per candidate. ``documents`` maps doc_id to the
    source document text the relevance score conditions on."""
    requests = []
    for c in candidates:
        if c.perturbed_text is None:
            raise ScoringError(
                f"{c.candidate_id}: candidate has no realized text to score"
            )
        if c.doc_id not in documents:
            raise ScoringError(f"{c.candidate_id}: unknown doc_id {c.doc_id!r}")
        requests.append(
            ScoreRequest(
                c.candidate_id, documents[c.doc_id], c.positive_text, c.perturbed_text
            )
        )
    return scorer.score_batch(requests)
