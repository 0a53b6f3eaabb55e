"""Builtin scorers, file joins, and the line-protocol adapter client."""
import sys
import textwrap

import pytest

from amrfact import (
    AdapterProtocolError,
    BuiltinScorer,
    ScoreRecord,
    builtin_entailment,
    builtin_relevance,
    make_scorer,
    score_candidates,
)
from amrfact.corpus import NegativeCandidate
from amrfact.errors import ScoreJoinError, ScoringError
from amrfact.perturb import Family
from amrfact.scoring import ExecScorer, FileScorer, ScoreRequest

from suite_helpers import write_jsonl_file


# -- builtin oracles ----------------------------------------------------------


def test_builtin_entailment_is_token_containment():
    # hypothesis tokens {a, b}; premise holds both -> 1.0
    assert builtin_entailment("a b c", "a b") == 1.0
    # half the hypothesis tokens covered
    assert builtin_entailment("a c", "a b") == 0.5
    assert builtin_entailment("x y", "a b") == 0.0


def test_builtin_entailment_empty_hypothesis_is_fully_entailed():
    assert builtin_entailment("anything", "") == 1.0
    assert builtin_entailment("anything", "123") == 1.0  # digits drop out


def test_builtin_entailment_ignores_digits_and_case():
    assert builtin_entailment("The boy goes", "go-02 BOY") == pytest.approx(0.5)


def test_builtin_relevance_scales_overlap_gap():
    # Full overlap -> 0.0; none -> -5.0; half -> -2.5.
    assert builtin_relevance("a b", "a b") == 0.0
    assert builtin_relevance("x y", "a b") == -5.0
    assert builtin_relevance("a x", "a b") == -2.5


def test_builtin_relevance_empty_hypothesis_is_neutral():
    assert builtin_relevance("document", "") == 0.0


def test_builtin_scorer_batch():
    reqs = [
        ScoreRequest("c1", "doc with boy", "The boy goes", "go-02 boy"),
        ScoreRequest("c2", "other text", "nothing shared", "zebra"),
    ]
    records = BuiltinScorer().score_batch(reqs)
    assert [r.candidate_id for r in records] == ["c1", "c2"]
    assert records[0].entailment == pytest.approx(0.5)
    assert records[0].relevance == pytest.approx(-2.5)
    assert records[1].entailment == 0.0
    assert records[1].relevance == -5.0


def test_score_record_validation():
    ScoreRecord("c", 0.0, -1.0)
    ScoreRecord("c", 1.0, 0.0)
    with pytest.raises(ScoringError):
        ScoreRecord("c", 1.5, 0.0)
    with pytest.raises(ScoringError):
        ScoreRecord("c", -0.1, 0.0)
    with pytest.raises(ScoringError):
        ScoreRecord("c", 0.5, float("nan"))


# -- file scorer ----------------------------------------------------------------


def make_candidate(cid="d1:0:predicate:antonym:0", text="leisure-01 boy"):
    return NegativeCandidate(
        candidate_id=cid,
        doc_id="d1",
        sentence_index=0,
        family=Family.PREDICATE,
        variant="antonym",
        site="antonym@w->leisure-01",
        positive_text="The boy works.",
        perturbed_penman="(w / leisure-01 :ARG0 (b / boy))",
        perturbed_text=text,
        realization="linearized",
    )


def test_file_scorer_joins_by_candidate_id(tmp_path):
    path = write_jsonl_file(
        tmp_path / "scores.jsonl",
        [
            {"candidate_id": "a", "entailment": 0.2, "relevance": -0.5},
            {"candidate_id": "b", "entailment": 0.95, "relevance": -3.0},
        ],
    )
    scorer = FileScorer(str(path))
    out = scorer.score_batch(
        [ScoreRequest("b", "", "", "x"), ScoreRequest("a", "", "", "x")]
    )
    assert [(r.candidate_id, r.entailment) for r in out] == [("b", 0.95), ("a", 0.2)]


def test_file_scorer_missing_id_is_join_error(tmp_path):
    path = write_jsonl_file(
        tmp_path / "scores.jsonl",
        [{"candidate_id": "a", "entailment": 0.2, "relevance": -0.5}],
    )
    with pytest.raises(ScoreJoinError) as exc:
        FileScorer(str(path)).score_batch([ScoreRequest("zz", "", "", "x")])
    assert "zz" in str(exc.value)


def test_file_scorer_duplicate_id_is_join_error(tmp_path):
    path = write_jsonl_file(
        tmp_path / "scores.jsonl",
        [
            {"candidate_id": "a", "entailment": 0.2, "relevance": -0.5},
            {"candidate_id": "a", "entailment": 0.3, "relevance": -0.6},
        ],
    )
    with pytest.raises(ScoreJoinError):
        FileScorer(str(path)).score_batch([ScoreRequest("a", "", "", "x")])


def test_file_scorer_malformed_line_names_lineno(tmp_path):
    path = tmp_path / "scores.jsonl"
    path.write_text('{"candidate_id": "a"}\n', encoding="utf-8")
    with pytest.raises(ScoringError) as exc:
        FileScorer(str(path)).score_batch([ScoreRequest("a", "", "", "x")])
    assert ":1:" in str(exc.value)


# -- exec scorer -------------------------------------------------------------------


def write_adapter(tmp_path, body, name="adapter.py"):
    """A one-file adapter speaking the line protocol, for subprocess tests."""
    path = tmp_path / name
    path.write_text(
        textwrap.dedent(
            """\
            import json, sys

            def main():
            %s

            main()
            """
        )
        % textwrap.indent(textwrap.dedent(body), "    "),
        encoding="utf-8",
    )
    return f"{sys.executable} {path}"


GOOD_ADAPTER = """\
print(json.dumps({"protocol": "amrfact-scorer/1"}), flush=True)
for line in sys.stdin:
    req = json.loads(line)
    score = 0.25 if req["task"] == "entailment" else -1.0
    print(json.dumps({"id": req["id"], "score": score}), flush=True)
"""


def test_exec_scorer_round_trip(tmp_path):
    cmd = write_adapter(tmp_path, GOOD_ADAPTER)
    out = ExecScorer(cmd, timeout=30).score_batch(
        [ScoreRequest("c1", "doc", "pos", "neg"), ScoreRequest("c2", "d", "p", "n")]
    )
    assert [(r.candidate_id, r.entailment, r.relevance) for r in out] == [
        ("c1", 0.25, -1.0),
        ("c2", 0.25, -1.0),
    ]


def test_exec_scorer_accepts_out_of_order_responses(tmp_path):
    body = """\
    print(json.dumps({"protocol": "amrfact-scorer/1"}), flush=True)
    reqs = [json.loads(l) for l in sys.stdin]
    for req in reversed(reqs):
        score = 0.5 if req["task"] == "entailment" else -2.0
        print(json.dumps({"id": req["id"], "score": score}), flush=True)
    """
    cmd = write_adapter(tmp_path, body)
    out = ExecScorer(cmd, timeout=30).score_batch([ScoreRequest("c1", "d", "p", "n")])
    assert out[0].entailment == 0.5
    assert out[0].relevance == -2.0


def test_exec_scorer_rejects_bad_handshake(tmp_path):
    body = """\
    print(json.dumps({"protocol": "something-else/9"}), flush=True)
    """
    cmd = write_adapter(tmp_path, body)
    with pytest.raises(AdapterProtocolError) as exc:
        ExecScorer(cmd, timeout=30).score_batch([ScoreRequest("c1", "d", "p", "n")])
    assert "handshake" in str(exc.value).lower()


def test_exec_scorer_rejects_duplicate_response_ids(tmp_path):
    body = """\
    print(json.dumps({"protocol": "amrfact-scorer/1"}), flush=True)
    first = json.loads(sys.stdin.readline())
    print(json.dumps({"id": first["id"], "score": 0.5}), flush=True)
    print(json.dumps({"id": first["id"], "score": 0.5}), flush=True)
    """
    cmd = write_adapter(tmp_path, body)
    with pytest.raises(AdapterProtocolError):
        ExecScorer(cmd, timeout=30).score_batch([ScoreRequest("c1", "d", "p", "n")])


def test_exec_scorer_rejects_unknown_response_id(tmp_path):
    body = """\
    print(json.dumps({"protocol": "amrfact-scorer/1"}), flush=True)
    sys.stdin.readline()
    print(json.dumps({"id": "who-is-this", "score": 0.5}), flush=True)
    """
    cmd = write_adapter(tmp_path, body)
    with pytest.raises(AdapterProtocolError):
        ExecScorer(cmd, timeout=30).score_batch([ScoreRequest("c1", "d", "p", "n")])


def test_exec_scorer_propagates_error_responses(tmp_path):
    body = """\
    print(json.dumps({"protocol": "amrfact-scorer/1"}), flush=True)
    req = json.loads(sys.stdin.readline())
    print(json.dumps({"id": req["id"], "error": "model exploded"}), flush=True)
    """
    cmd = write_adapter(tmp_path, body)
    with pytest.raises(AdapterProtocolError) as exc:
        ExecScorer(cmd, timeout=30).score_batch([ScoreRequest("c1", "d", "p", "n")])
    assert "model exploded" in str(exc.value)


def test_exec_scorer_rejects_exit_before_answers(tmp_path):
    body = """\
    print(json.dumps({"protocol": "amrfact-scorer/1"}), flush=True)
    """
    cmd = write_adapter(tmp_path, body)
    with pytest.raises(AdapterProtocolError):
        ExecScorer(cmd, timeout=30).score_batch([ScoreRequest("c1", "d", "p", "n")])


def test_exec_scorer_rejects_non_numeric_score(tmp_path):
    body = """\
    print(json.dumps({"protocol": "amrfact-scorer/1"}), flush=True)
    for line in sys.stdin:
        req = json.loads(line)
        print(json.dumps({"id": req["id"], "score": "high"}), flush=True)
    """
    cmd = write_adapter(tmp_path, body)
    with pytest.raises(AdapterProtocolError):
        ExecScorer(cmd, timeout=30).score_batch([ScoreRequest("c1", "d", "p", "n")])


# -- spec dispatch and the candidate-level entry point ------------------------------


def test_make_scorer_dispatch(tmp_path):
    assert isinstance(make_scorer("builtin"), BuiltinScorer)
    assert isinstance(make_scorer("file:/tmp/x.jsonl"), FileScorer)
    assert isinstance(make_scorer("exec:python3 x.py"), ExecScorer)
    with pytest.raises(ScoringError):
        make_scorer("magic:beans")
    with pytest.raises(ScoringError):
        make_scorer("exec:")


def test_score_candidates_requires_realized_text():
    cand = make_candidate()
    unrealized = NegativeCandidate(
        **{
            **cand.__dict__,
            "perturbed_text": None,
            "realization": None,
        }
    )
    with pytest.raises(ScoringError):
        score_candidates([unrealized], BuiltinScorer(), {"d1": "doc"})


def test_score_candidates_requires_known_document():
    with pytest.raises(ScoringError):
        score_candidates([make_candidate()], BuiltinScorer(), {"other": "doc"})


def test_score_candidates_builds_requests_in_order(tmp_path):
    c1 = make_candidate("c1")
    c2 = make_candidate("c2", text="fall-01 boy")
    out = score_candidates([c1, c2], BuiltinScorer(), {"d1": "The boy works."})
    assert [r.candidate_id for r in out] == ["c1", "c2"]
