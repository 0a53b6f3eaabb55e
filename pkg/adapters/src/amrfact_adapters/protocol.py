"""Line-delimited JSON server for the ``amrfact-scorer/1`` protocol.

A session is: one handshake line, then exactly one response per
well-formed request line, until stdin closes. Malformed lines never end
the session. When an ``id`` can be recovered from the raw text the line
is answered with ``{id, error}`` so the caller is not left waiting;
otherwise the line is logged to stderr and skipped.
"""
from __future__ import annotations

import json
import re
from typing import IO, Protocol

PROTOCOL_NAME = "amrfact-scorer/1"

SCORE_TASKS = ("entailment", "relevance")
BRIDGE_TASKS = ("amr2text", "text2amr")

_ID_RE = re.compile(r'"id"\s*:\s*"((?:[^"\\]|\\.)*)"')


class Backend(Protocol):
    def score(self, task: str, premise: str, hypothesis: str) -> float: ...

    def translate(self, task: str, text: str) -> str: ...


def recover_id(raw: str) -> str | None:
    """Best-effort id extraction from a line that failed JSON parsing."""
    match = _ID_RE.search(raw)
    if match is None:
        return None
    try:
        return json.loads(f'"{match.group(1)}"')
    except json.JSONDecodeError:
        return None


def _emit(stream: IO[str], obj: dict) -> None:
    stream.write(json.dumps(obj, ensure_ascii=False) + "\n")
    stream.flush()


def _answer(backend: Backend, request: dict) -> dict:
    rid = request["id"]
    task = request.get("task")
    if task in SCORE_TASKS:
        score = backend.score(task, request["premise"], request["hypothesis"])
        return {"id": rid, "score": float(score)}
    if task in BRIDGE_TASKS:
        output = backend.translate(task, request["input"])
        if not isinstance(output, str):
            raise TypeError(
                f"bridge output must be text, got {type(output).__name__}"
            )
        return {"id": rid, "output": output}
    raise ValueError(f"unknown task {task!r}")


def serve(
    backend: Backend,
    in_stream: IO[str],
    out_stream: IO[str],
    err_stream: IO[str],
) -> int:
    """Answer requests from ``in_stream`` until it closes.

    The handshake is written first; the caller must construct (and
    load) the backend before calling, so a broken backend never emits
    protocol output. Backend failures for a single request become
    ``{id, error}`` responses rather than ending the session.
    """
    _emit(out_stream, {"protocol": PROTOCOL_NAME})
    for raw in in_stream:
        line = raw.strip()
        if not line:
            continue
        try:
            request = json.loads(line)
        except json.JSONDecodeError as exc:
            rid = recover_id(line)
            if rid is None:
                print(f"skipping unparseable line: {exc}", file=err_stream)
            else:
                _emit(out_stream, {"id": rid, "error": f"invalid JSON: {exc}"})
            continue
        if not isinstance(request, dict) or not isinstance(request.get("id"), str):
            print(f"skipping request without an id: {line[:120]}", file=err_stream)
            continue
        try:
            _emit(out_stream, _answer(backend, request))
        except KeyError as exc:
            _emit(out_stream, {"id": request["id"], "error": f"missing field {exc}"})
        except Exception as exc:
            _emit(out_stream, {"id": request["id"], "error": str(exc)})
    return 0
