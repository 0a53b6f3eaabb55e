"""Dataset construction stages: realization, balancing, splitting,
composition stats, and the one-call orchestrator."""
import json

import pytest
from sklearn.exceptions import NotFittedError

from amrfact import (
    AmrPerturber,
    BuiltinScorer,
    LabeledExample,
    balance_and_emit,
    build_dataset,
    generate,
    linearize,
    make_context_builder,
    parse_penman,
    split_by_document,
    stats,
)
from amrfact.errors import PipelineError
from amrfact.perturb import Family, PerturbConfig
from amrfact.pipeline import (
    config_fingerprint,
    negatives_from_candidates,
    parse_document_graphs,
    positives_from_records,
    realize,
)
from test_scoring import make_candidate


# -- linearization -----------------------------------------------------------


@pytest.mark.parametrize(
    "penman, expected",
    [
        ("(g / go-02 :polarity -)", "go-02 polarity:-"),
        ("(b / boy)", "boy"),
        (
            "(w / want-01 :ARG0 (b / boy) :ARG1 (g / go-02 :ARG0 b))",
            "want-01 boy go-02 boy",
        ),
        (
            '(p / person :name (n / name :op1 "Ada" :op2 "Lovelace"))',
            "person name op1:Ada op2:Lovelace",
        ),
        (
            "(t / temperature-quantity :quant -3.5 :scale (c / celsius))",
            "temperature-quantity quant:-3.5 celsius",
        ),
    ],
)
def test_linearize(penman, expected):
    assert linearize(parse_penman(penman)) == expected


def test_linearize_follows_edge_order():
    g = parse_penman("(s / see-01 :ARG1 (c / cat) :ARG0 (d / dog))")
    assert linearize(g) == "see-01 cat dog"


# -- generation --------------------------------------------------------------


def test_parse_document_graphs_stamps_ids(corpus_records):
    record = corpus_records[0]
    graphs = parse_document_graphs(record)
    assert [g.metadata["id"] for g in graphs] == [
        f"{record.doc_id}/{i}" for i in range(len(graphs))
    ]


def test_generate_is_deterministic_and_job_invariant(corpus_records):
    records = corpus_records[:6]
    builder = make_context_builder()
    config = PerturbConfig(rng_seed=11)
    first = generate(records, builder, config, jobs=1)
    again = generate(records, builder, config, jobs=1)
    threaded = generate(records, builder, config, jobs=4)
    assert first == again
    assert first == threaded
    assert first, "designed corpus must yield candidates"


def test_generate_candidate_ids_are_structured(corpus_records):
    cands = generate(corpus_records[:3], make_context_builder(), PerturbConfig())
    for c in cands:
        doc_id, sent_idx, family, variant, k = c.candidate_id.split(":")
        assert doc_id == c.doc_id
        assert int(sent_idx) == c.sentence_index
        assert family == c.family.value
        assert variant == c.variant
        assert k.isdigit()
    assert len({c.candidate_id for c in cands}) == len(cands)


def test_generate_orders_candidates_by_document(corpus_records):
    records = corpus_records[:4]
    cands = generate(records, make_context_builder(), PerturbConfig(), jobs=3)
    doc_order = [r.doc_id for r in records]
    positions = [doc_order.index(c.doc_id) for c in cands]
    assert positions == sorted(positions)


# -- realization -------------------------------------------------------------


def test_realize_passthrough_linearizes():
    c = make_candidate().with_text(None, None)
    out = realize([c], "passthrough")
    assert out[0].perturbed_text == "leisure-01 boy"
    assert out[0].realization == "linearized"


def test_realize_with_callable():
    c = make_candidate()
    out = realize([c], lambda penman: f"<<{penman}>>")
    assert out[0].perturbed_text == f"<<{c.perturbed_penman}>>"
    assert out[0].realization == "adapter"


def test_realize_unknown_name_errors():
    with pytest.raises(PipelineError):
        realize([make_candidate()], "mystery")


def test_realize_requires_graphs():
    import dataclasses

    broken = dataclasses.replace(make_candidate(), perturbed_penman="")
    with pytest.raises(PipelineError):
        realize([broken], "passthrough")


# -- example assembly --------------------------------------------------------


def test_positives_from_records(corpus_records):
    examples = positives_from_records(corpus_records[:2])
    assert len(examples) == sum(
        len(r.summary_sentences) for r in corpus_records[:2]
    )
    assert all(e.label == "entailment" for e in examples)
    assert all(e.provenance == "reference" for e in examples)


def test_negatives_from_candidates():
    c = make_candidate()
    examples = negatives_from_candidates([c], {"d1": "The boy works."})
    assert examples[0].label == "contradiction"
    assert examples[0].provenance == "predicate"
    assert examples[0].summary_text == c.perturbed_text


def test_negatives_require_realized_text():
    c = make_candidate().with_text(None, None)
    with pytest.raises(PipelineError):
        negatives_from_candidates([c], {"d1": "doc"})


# -- document-level split ----------------------------------------------------


def example(doc_id, i=0, label="entailment"):
    provenance = "reference" if label == "entailment" else "predicate"
    return LabeledExample(doc_id, f"doc {doc_id}", f"s{i} of {doc_id}", label, provenance)


def test_split_keeps_documents_whole():
    examples = [example(f"d{d}", i) for d in range(10) for i in range(4)]
    train, val = split_by_document(examples, 0.75, seed=5)
    train_docs = {e.doc_id for e in train}
    val_docs = {e.doc_id for e in val}
    assert not (train_docs & val_docs)
    assert train_docs | val_docs == {f"d{d}" for d in range(10)}
    assert len(train) + len(val) == 40
    assert len(train) >= 0.75 * 40
    assert val, "validation side must keep at least one document"


def test_split_is_seed_deterministic():
    examples = [example(f"d{d}", i) for d in range(8) for i in range(3)]
    assert split_by_document(examples, 0.6, seed=1) == split_by_document(
        examples, 0.6, seed=1
    )


def test_split_always_reserves_a_validation_document():
    examples = [example("a", 0), example("a", 1), example("b", 0)]
    train, val = split_by_document(examples, 0.99, seed=0)
    assert {e.doc_id for e in train}.isdisjoint({e.doc_id for e in val})
    assert train and val


def test_split_validates_inputs():
    examples = [example("a"), example("b")]
    with pytest.raises(PipelineError):
        split_by_document(examples, 1.2, seed=0)
    with pytest.raises(PipelineError):
        split_by_document(examples, 0.0, seed=0)
    with pytest.raises(PipelineError):
        split_by_document([example("only"), example("only", 1)], 0.5, seed=0)


# -- balancing and emission --------------------------------------------------


def negative(doc_id, i, family="predicate"):
    return LabeledExample(
        doc_id, f"doc {doc_id}", f"neg{i} of {doc_id}", "contradiction", family
    )


def read_rows(path):
    with open(path, encoding="utf-8") as fh:
        return [json.loads(line) for line in fh]


def test_balance_downsamples_to_smaller_class(tmp_path):
    positives = [example(f"d{i}") for i in range(3)]
    negatives = [negative(f"d{i % 3}", i) for i in range(7)]
    manifest = balance_and_emit(positives, negatives, str(tmp_path), seed=2)
    assert manifest.per_class == 3
    assert manifest.positives_in == 3
    assert manifest.negatives_in == 7
    assert manifest.files == ("dataset.jsonl",)
    rows = read_rows(tmp_path / "dataset.jsonl")
    assert len(rows) == 6
    labels = [r["label"] for r in rows]
    assert labels.count("entailment") == labels.count("contradiction") == 3


def test_balance_emits_rows_in_sorted_order(tmp_path):
    positives = [example(f"d{i}") for i in range(2, -1, -1)]
    negatives = [negative(f"d{i}", i) for i in range(3)]
    balance_and_emit(positives, negatives, str(tmp_path), seed=0)
    rows = read_rows(tmp_path / "dataset.jsonl")
    keys = [(r["doc_id"], r["label"], r["provenance"], r["summary"]) for r in rows]
    assert keys == sorted(keys)


def test_balance_same_seed_same_bytes(tmp_path):
    positives = [example(f"d{i}") for i in range(4)]
    negatives = [negative(f"d{i % 4}", i) for i in range(9)]
    balance_and_emit(positives, negatives, str(tmp_path / "a"), seed=3)
    balance_and_emit(positives, negatives, str(tmp_path / "b"), seed=3)
    a = (tmp_path / "a" / "dataset.jsonl").read_bytes()
    b = (tmp_path / "b" / "dataset.jsonl").read_bytes()
    assert a == b


def test_balance_with_split_writes_two_files(tmp_path):
    positives = [example(f"d{i}", j) for i in range(6) for j in range(2)]
    negatives = [negative(f"d{i}", j) for i in range(6) for j in range(2)]
    manifest = balance_and_emit(
        positives, negatives, str(tmp_path), seed=1, split_ratio=0.7
    )
    assert manifest.files == ("train.jsonl", "validation.jsonl")
    train = read_rows(tmp_path / "train.jsonl")
    val = read_rows(tmp_path / "validation.jsonl")
    assert manifest.split_counts == {"train": len(train), "validation": len(val)}
    assert {r["doc_id"] for r in train}.isdisjoint({r["doc_id"] for r in val})


def test_balance_per_family_counts_emitted_negatives(tmp_path):
    positives = [example(f"d{i}") for i in range(4)]
    negatives = [negative("d0", 0), negative("d1", 1, "entity"), negative("d2", 2)]
    manifest = balance_and_emit(positives, negatives, str(tmp_path), seed=0)
    assert manifest.per_family_emitted == {"predicate": 2, "entity": 1}


def test_balance_rejects_empty_class(tmp_path):
    with pytest.raises(PipelineError):
        balance_and_emit([], [negative("d0", 0)], str(tmp_path), seed=0)
    with pytest.raises(PipelineError):
        balance_and_emit([example("d0")], [], str(tmp_path), seed=0)


# -- composition stats -------------------------------------------------------


def test_stats_even_split_is_fifty_fifty():
    items = [
        negative("d0", 0),
        negative("d0", 1),
        negative("d1", 2, "entity"),
        negative("d1", 3, "entity"),
    ]
    report = stats(items)
    assert report.total == 4
    assert report.per_family["predicate"] == (2, "50.00")
    assert report.per_family["entity"] == (2, "50.00")


def test_stats_lists_all_families_even_at_zero():
    report = stats([negative("d0", 0)])
    assert set(report.per_family) == {f.value for f in Family}
    assert report.per_family["out-of-article"] == (0, "0.00")


def test_stats_rounds_half_up():
    # 1 / 800 = 0.125%; half-up gives 0.13 where half-even would give 0.12.
    items = [negative("d0", 0)] + [negative("d1", i, "entity") for i in range(799)]
    report = stats(items)
    assert report.per_family["predicate"] == (1, "0.13")
    assert report.per_family["entity"] == (799, "99.88")


def test_stats_percentages_sum_near_hundred(corpus_records):
    cands = generate(corpus_records, make_context_builder(), PerturbConfig())
    report = stats(cands)
    total = sum(float(pct) for _, pct in report.per_family.values())
    assert abs(total - 100.0) <= 0.02


def test_stats_ignores_reference_rows():
    items = [example("d0"), example("d1"), negative("d2", 0)]
    report = stats(items)
    assert report.total == 1
    assert report.per_family["predicate"] == (1, "100.00")


def test_stats_acceptance_rate():
    items = [negative("d0", i) for i in range(10)]
    report = stats(items, rejected_count=3)
    assert report.acceptance_rate == "70.00"
    assert stats(items).acceptance_rate is None
    with pytest.raises(PipelineError):
        stats(items, rejected_count=11)


def test_stats_per_document_counts():
    items = [negative("d1", 0), negative("d0", 1), negative("d1", 2, "entity")]
    report = stats(items)
    assert report.per_document == {"d0": 1, "d1": 2}
    assert list(report.per_document) == ["d0", "d1"]


def test_stats_rejects_empty_and_untagged_input():
    with pytest.raises(PipelineError):
        stats([])
    with pytest.raises(PipelineError):
        stats([example("d0")])


def test_stats_report_serialization():
    report = stats([negative("d0", 0)])
    d = report.to_dict()
    assert d["total"] == 1
    assert d["per_family"]["predicate"] == {"count": 1, "percent": "100.00"}
    table = report.render_table()
    assert "predicate" in table and "100.00" in table


# -- orchestration -----------------------------------------------------------


def test_config_fingerprint_is_key_order_independent():
    a = config_fingerprint({"seed": 1, "tau1": 0.9})
    b = config_fingerprint({"tau1": 0.9, "seed": 1})
    c = config_fingerprint({"tau1": 0.9, "seed": 2})
    assert a == b
    assert a != c
    assert len(a) == 64


def test_build_dataset_outputs(tmp_path, corpus_records):
    records = corpus_records[:8]
    payload = build_dataset(
        records, str(tmp_path / "out"), seed=3, scorer=BuiltinScorer()
    )
    out = tmp_path / "out"
    assert {p.name for p in out.iterdir()} == {
        "dataset.jsonl",
        "manifest.json",
        "stats.json",
    }
    rows = read_rows(out / "dataset.jsonl")
    labels = [r["label"] for r in rows]
    assert labels.count("entailment") == labels.count("contradiction")
    assert payload["per_class"] * 2 == len(rows)
    assert payload["filter"]["scored"] == (
        payload["filter"]["valid"] + payload["filter"]["rejected"]
    )
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest == payload
    stats_doc = json.loads((out / "stats.json").read_text())
    assert stats_doc == payload["stats"]


def test_build_dataset_job_count_never_changes_bytes(tmp_path, corpus_records):
    records = corpus_records[:8]
    a = build_dataset(
        records, str(tmp_path / "a"), seed=9, scorer=BuiltinScorer(), jobs=1
    )
    b = build_dataset(
        records, str(tmp_path / "b"), seed=9, scorer=BuiltinScorer(), jobs=2
    )
    assert a == b
    for name in ("dataset.jsonl", "manifest.json", "stats.json"):
        assert (tmp_path / "a" / name).read_bytes() == (
            tmp_path / "b" / name
        ).read_bytes()


def test_build_dataset_config_hash_tracks_settings(tmp_path, corpus_records):
    records = corpus_records[:4]
    a = build_dataset(records, str(tmp_path / "a"), seed=1, scorer=BuiltinScorer())
    b = build_dataset(records, str(tmp_path / "b"), seed=2, scorer=BuiltinScorer())
    assert a["config_hash"] != b["config_hash"]


# -- estimator facade --------------------------------------------------------


def test_perturber_requires_fit(corpus_records):
    with pytest.raises(NotFittedError):
        AmrPerturber().transform(corpus_records[:1])


def test_perturber_fit_transform(corpus_records):
    records = corpus_records[:4]
    perturber = AmrPerturber(families=["predicate"], rng_seed=7)
    cands = perturber.fit(records).transform(records)
    assert cands
    assert all(c.family is Family.PREDICATE for c in cands)
    direct = generate(
        records,
        make_context_builder(),
        PerturbConfig(families=(Family.PREDICATE,), rng_seed=7),
    )
    assert cands == direct


def test_perturber_params_round_trip():
    perturber = AmrPerturber(max_sites_per_family=2, rng_seed=5)
    params = perturber.get_params()
    assert params["max_sites_per_family"] == 2
    assert params["rng_seed"] == 5
    clone = AmrPerturber(**params)
    assert clone.get_params() == params
