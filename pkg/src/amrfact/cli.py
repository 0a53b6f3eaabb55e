"""Command line entry point: every pipeline stage as a subcommand.

Exit codes: 0 success, 1 validation or data errors, 2 usage errors.
Options may come from a JSON config file (--config); explicit flags win.
The seed is a required flag on build-dataset so generation runs are
always pinned; reporting commands accept --format json for machines.
"""
from __future__ import annotations

import functools
import json
import sys
from pathlib import Path
from typing import Optional

import click

from .corpus import (
    candidate_from_json,
    candidate_to_json,
    example_from_json,
    ingest,
    read_jsonl,
)
from .errors import AmrfactError
from .evaluation import (
    bootstrap_ci,
    evaluate as run_evaluation,
    load_eval_records,
    tune_thresholds_by_origin,
)
from .filtering import FilterConfig, filter_batch
from .graph import Constant
from .lexicon import load_antonym_lexicon, load_modality_map
from .penman import dump_penman_block, load_penman_file, serialize_penman
from .perturb import (
    ALL_FAMILIES,
    Family,
    PerturbConfig,
    PerturbationContext,
    apply_all,
    harvest_pools,
)
from .pipeline import build_dataset, realize, stats as compute_stats
from .scoring import make_scorer, score_candidates

DEFAULT_TAU1 = 0.9
DEFAULT_TAU2 = -1.8
DEFAULT_SPLIT_RATIO = 0.874


def _die(exc: Exception) -> None:
    click.echo(f"error: {exc}", err=True)
    sys.exit(1)


def wraps_errors(fn):
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except AmrfactError as exc:
            _die(exc)
        except OSError as exc:
            _die(exc)

    return wrapper


def _load_config(path: Optional[str]) -> dict:
    if not path:
        return {}
    try:
        obj = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        _die(f"bad config file: {exc}")
    if not isinstance(obj, dict):
        _die("config file must hold a JSON object")
    return obj


def _pick(flag, config: dict, key: str, default):
    """Explicit flag > config file entry > built-in default."""
    if flag is not None:
        return flag
    if key in config:
        return config[key]
    return default


def _parse_families(spec: Optional[str]) -> tuple[Family, ...]:
    if not spec:
        return ALL_FAMILIES
    out = []
    for name in spec.split(","):
        name = name.strip()
        if not name:
            continue
        try:
            out.append(Family(name))
        except ValueError:
            raise click.UsageError(
                f"unknown family {name!r}; expected one of "
                + ", ".join(f.value for f in Family)
            )
    return tuple(out) if out else ALL_FAMILIES


@click.group()
@click.version_option(package_name="amrfact", prog_name="amrfact")
def main() -> None:
    """Build and evaluate factual-consistency datasets by perturbing
    semantic graphs."""


@main.command(name="parse")
@click.option("--in", "in_path", required=True, type=click.Path(),
              help="PENMAN file; blank lines separate graphs.")
@click.option("--format", "fmt", type=click.Choice(["penman", "json"]),
              default="penman", show_default=True,
              help="Output canonical PENMAN blocks or a JSON dump.")
@click.option("--pretty", is_flag=True, help="Indent nested PENMAN output.")
@wraps_errors
def parse_cmd(in_path: str, fmt: str, pretty: bool) -> None:
    """Parse graphs and print their canonical serialization."""
    graphs = load_penman_file(in_path)
    if fmt == "json":
        payload = []
        for g in graphs:
            payload.append(
                {
                    "top": g.top,
                    "nodes": dict(g.nodes),
                    "edges": [
                        {
                            "source": e.source,
                            "role": e.role,
                            "target": (
                                {"constant": e.target.value, "kind": e.target.kind}
                                if isinstance(e.target, Constant)
                                else e.target
                            ),
                        }
                        for e in g.edges
                    ],
                    "metadata": dict(g.metadata),
                }
            )
        click.echo(json.dumps(payload, indent=2, sort_keys=True, ensure_ascii=False))
        return
    blocks = [dump_penman_block(g, pretty=pretty) for g in graphs]
    click.echo("\n\n".join(blocks))


@main.command(name="perturb")
@click.option("--in", "in_path", required=True, type=click.Path(),
              help="PENMAN file with the graphs to perturb.")
@click.option("--families", "families_spec", default=None,
              help="Comma-separated family subset (default: all five).")
@click.option("--max-sites-per-family", type=int, default=None,
              help="Keep at most this many sites per family per graph.")
@click.option("--seed", type=int, default=0, show_default=True,
              help="Seed for payload choices.")
@click.option("--lexicon", "lexicon_path", type=click.Path(), default=None,
              help="Antonym lexicon TSV (default: bundled).")
@click.option("--modality-map", "modality_path", type=click.Path(), default=None,
              help="Modality strengthening TSV (default: bundled).")
@click.option("--corpus", "corpus_path", type=click.Path(), default=None,
              help="Corpus JSONL used to build the out-of-article pool.")
@click.option("--format", "fmt", type=click.Choice(["penman", "jsonl"]),
              default="penman", show_default=True)
@click.option("--config", "config_path", type=click.Path(), default=None,
              help="JSON file with defaults for these options.")
@wraps_errors
def perturb_cmd(
    in_path: str,
    families_spec: Optional[str],
    max_sites_per_family: Optional[int],
    seed: int,
    lexicon_path: Optional[str],
    modality_path: Optional[str],
    corpus_path: Optional[str],
    fmt: str,
    config_path: Optional[str],
) -> None:
    """Enumerate and apply every perturbation of the input graphs.

    The input file's own graphs provide the same-document pools; with
    --corpus, that corpus provides the out-of-article pool (otherwise
    the input graphs do)."""
    config = _load_config(config_path)
    lexicon_path = _pick(lexicon_path, config, "lexicon", None)
    modality_path = _pick(modality_path, config, "modality_map", None)
    families = _parse_families(_pick(families_spec, config, "families", None))

    graphs = load_penman_file(in_path)
    from .lexicon import bundled_antonym_lexicon, bundled_modality_map

    antonyms = (
        load_antonym_lexicon(lexicon_path) if lexicon_path
        else bundled_antonym_lexicon()
    )
    modality = (
        load_modality_map(modality_path) if modality_path
        else bundled_modality_map()
    )
    same_doc = harvest_pools(graphs)
    if corpus_path:
        result = ingest(corpus_path)
        corpus_graphs = []
        from .pipeline import parse_document_graphs

        for record in result.records:
            corpus_graphs.extend(parse_document_graphs(record))
        global_pool = harvest_pools(corpus_graphs)
    else:
        global_pool = same_doc
    ctx = PerturbationContext(
        same_doc_pools=same_doc,
        doc_vocabulary=frozenset(),
        global_pool=global_pool,
        antonyms=antonyms,
        modality=modality,
    )
    perturb_config = PerturbConfig(
        families=families, max_sites_per_family=max_sites_per_family, rng_seed=seed
    )

    blocks = []
    for gi, graph in enumerate(graphs):
        source_id = graph.metadata.get("id", f"graph{gi}")
        for site, perturbed in apply_all(graph, ctx, perturb_config):
            if fmt == "jsonl":
                click.echo(
                    json.dumps(
                        {
                            "source_id": source_id,
                            "family": site.family.value,
                            "variant": site.variant,
                            "site": site.describe(),
                            "penman": serialize_penman(perturbed),
                        },
                        sort_keys=True,
                        ensure_ascii=False,
                    )
                )
                continue
            meta = dict(perturbed.metadata)
            meta.update(
                {
                    "source": source_id,
                    "family": site.family.value,
                    "variant": site.variant,
                    "site": site.describe(),
                }
            )
            blocks.append(dump_penman_block(perturbed.with_metadata(meta)))
    if fmt == "penman" and blocks:
        click.echo("\n\n".join(blocks))


@main.command(name="filter")
@click.option("--candidates", "candidates_path", required=True, type=click.Path(),
              help="Candidate JSONL (as written by build-dataset or perturb).")
@click.option("--scorer", "scorer_spec", default="builtin", show_default=True,
              help="builtin | file:PATH | exec:CMD")
@click.option("--corpus", "corpus_path", type=click.Path(), default=None,
              help="Corpus JSONL; required unless the scorer is file-based.")
@click.option("--tau1", type=float, default=None,
              help=f"Entailment ceiling (default {DEFAULT_TAU1}).")
@click.option("--tau2", type=float, default=None,
              help=f"Relevance floor (default {DEFAULT_TAU2}).")
@click.option("--out", "out_dir", type=click.Path(), default=None,
              help="Directory for valid.jsonl / rejected.jsonl.")
@click.option("--format", "fmt", type=click.Choice(["table", "json"]),
              default="table", show_default=True)
@click.option("--config", "config_path", type=click.Path(), default=None)
@wraps_errors
def filter_cmd(
    candidates_path: str,
    scorer_spec: str,
    corpus_path: Optional[str],
    tau1: Optional[float],
    tau2: Optional[float],
    out_dir: Optional[str],
    fmt: str,
    config_path: Optional[str],
) -> None:
    """Score candidates and split them into valid and rejected."""
    config = _load_config(config_path)
    tau1 = float(_pick(tau1, config, "tau1", DEFAULT_TAU1))
    tau2 = float(_pick(tau2, config, "tau2", DEFAULT_TAU2))
    scorer_spec = _pick(None, config, "scorer", scorer_spec) if scorer_spec == "builtin" else scorer_spec
    corpus_path = _pick(corpus_path, config, "corpus", None)

    candidates = [candidate_from_json(line) for line in read_jsonl(candidates_path)]
    if any(c.perturbed_text is None for c in candidates):
        candidates = realize(candidates, "passthrough")

    if corpus_path:
        documents = {
            r.doc_id: r.document_text for r in ingest(corpus_path).records
        }
    elif scorer_spec.startswith("file:"):
        documents = {c.doc_id: "" for c in candidates}
    else:
        raise click.UsageError(
            "--corpus is required unless --scorer is file:PATH"
        )

    scorer = make_scorer(scorer_spec)
    scores = score_candidates(candidates, scorer, documents)
    cfg = FilterConfig(tau1, tau2)
    valid, rejected = filter_batch(candidates, scores, cfg)

    if out_dir:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        (out / "valid.jsonl").write_text(
            "".join(candidate_to_json(c) + "\n" for c in valid), encoding="utf-8"
        )
        (out / "rejected.jsonl").write_text(
            "".join(
                json.dumps(
                    {"candidate": json.loads(candidate_to_json(r.candidate)),
                     "reason": r.reason},
                    sort_keys=True,
                    ensure_ascii=False,
                )
                + "\n"
                for r in rejected
            ),
            encoding="utf-8",
        )
    reasons: dict[str, int] = {}
    for r in rejected:
        reasons[r.reason] = reasons.get(r.reason, 0) + 1
    summary = {
        "scored": len(candidates),
        "valid": len(valid),
        "rejected": len(rejected),
        "reject_reasons": dict(sorted(reasons.items())),
        "tau1": tau1,
        "tau2": tau2,
    }
    if fmt == "json":
        click.echo(json.dumps(summary, indent=2, sort_keys=True))
    else:
        click.echo(
            f"scored {summary['scored']}: {summary['valid']} valid, "
            f"{summary['rejected']} rejected {summary['reject_reasons']}"
        )


@main.command(name="build-dataset")
@click.option("--corpus", "corpus_path", required=True, type=click.Path(),
              help="Input corpus JSONL.")
@click.option("--lexicon", "lexicon_path", type=click.Path(), default=None,
              help="Antonym lexicon TSV (default: bundled).")
@click.option("--modality-map", "modality_path", type=click.Path(), default=None,
              help="Modality strengthening TSV (default: bundled).")
@click.option("--tau1", type=float, default=None,
              help=f"Entailment ceiling (default {DEFAULT_TAU1}).")
@click.option("--tau2", type=float, default=None,
              help=f"Relevance floor (default {DEFAULT_TAU2}).")
@click.option("--seed", type=int, required=True,
              help="Seed pinning all sampling; required.")
@click.option("--scorer", "scorer_spec", default=None,
              help="builtin | file:PATH | exec:CMD (default builtin).")
@click.option("--realizer", "realizer_spec", default=None,
              help="passthrough | exec:CMD (default passthrough).")
@click.option("--families", "families_spec", default=None,
              help="Comma-separated family subset (default: all five).")
@click.option("--max-sites-per-family", type=int, default=None)
@click.option("--split-ratio", type=float, default=None,
              help=f"Train share by document (default {DEFAULT_SPLIT_RATIO}; "
                   "1 disables the split).")
@click.option("--jobs", type=int, default=1, show_default=True,
              help="Worker count for generation; never changes outputs.")
@click.option("--out", "out_dir", required=True, type=click.Path(),
              help="Output directory.")
@click.option("--format", "fmt", type=click.Choice(["summary", "json"]),
              default="summary", show_default=True)
@click.option("--config", "config_path", type=click.Path(), default=None)
@wraps_errors
def build_dataset_cmd(
    corpus_path: str,
    lexicon_path: Optional[str],
    modality_path: Optional[str],
    tau1: Optional[float],
    tau2: Optional[float],
    seed: int,
    scorer_spec: Optional[str],
    realizer_spec: Optional[str],
    families_spec: Optional[str],
    max_sites_per_family: Optional[int],
    split_ratio: Optional[float],
    jobs: int,
    out_dir: str,
    fmt: str,
    config_path: Optional[str],
) -> None:
    """Run the full pipeline and write dataset, manifest and stats."""
    config = _load_config(config_path)
    lexicon_path = _pick(lexicon_path, config, "lexicon", None)
    modality_path = _pick(modality_path, config, "modality_map", None)
    tau1 = float(_pick(tau1, config, "tau1", DEFAULT_TAU1))
    tau2 = float(_pick(tau2, config, "tau2", DEFAULT_TAU2))
    scorer_spec = _pick(scorer_spec, config, "scorer", "builtin")
    realizer_spec = _pick(realizer_spec, config, "realizer", "passthrough")
    families = _parse_families(_pick(families_spec, config, "families", None))
    max_sites_per_family = _pick(
        max_sites_per_family, config, "max_sites_per_family", None
    )
    split_ratio = float(_pick(split_ratio, config, "split_ratio", DEFAULT_SPLIT_RATIO))

    result = ingest(corpus_path)
    for lineno, reason in result.skipped:
        click.echo(f"skip line {lineno}: {reason}", err=True)
    if result.skipped:
        click.echo(
            f"ingested {result.valid_count} records, "
            f"skipped {result.skipped_count}",
            err=True,
        )

    antonyms = load_antonym_lexicon(lexicon_path) if lexicon_path else None
    modality = load_modality_map(modality_path) if modality_path else None

    manifest = build_dataset(
        records=result.records,
        out_dir=out_dir,
        seed=seed,
        scorer=make_scorer(scorer_spec),
        antonyms=antonyms,
        modality=modality,
        families=families,
        max_sites_per_family=max_sites_per_family,
        filter_config=FilterConfig(tau1, tau2),
        split_ratio=None if split_ratio >= 1.0 else split_ratio,
        realizer=realizer_spec,
        jobs=jobs,
    )
    if fmt == "json":
        click.echo(json.dumps(manifest, indent=2, sort_keys=True))
    else:
        counts = manifest["split_counts"]
        click.echo(
            f"emitted {manifest['per_class']} examples per class into "
            f"{out_dir} ({', '.join(f'{k}={v}' for k, v in counts.items())})"
        )


@main.command(name="evaluate")
@click.option("--val", "val_path", required=True, type=click.Path(),
              help="Validation records JSONL (threshold tuning).")
@click.option("--test", "test_path", required=True, type=click.Path(),
              help="Test records JSONL.")
@click.option("--ci-resamples", type=int, default=1000, show_default=True,
              help="Bootstrap resamples for CIs; 0 disables them.")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--level", type=float, default=0.95, show_default=True,
              help="Confidence level for the interval.")
@click.option("--invert-scores", is_flag=True,
              help="Negate scores (for metrics where higher = faithful).")
@click.option("--out", "out_path", type=click.Path(), default=None,
              help="Also write the JSON report here.")
@click.option("--format", "fmt", type=click.Choice(["table", "json"]),
              default="table", show_default=True)
@wraps_errors
def evaluate_cmd(
    val_path: str,
    test_path: str,
    ci_resamples: int,
    seed: int,
    level: float,
    invert_scores: bool,
    out_path: Optional[str],
    fmt: str,
) -> None:
    """Tune per-origin thresholds on --val, report on --test."""
    val_records = load_eval_records(val_path, invert_scores)
    test_records = load_eval_records(test_path, invert_scores)
    thresholds = tune_thresholds_by_origin(val_records)
    report = run_evaluation(
        test_records,
        thresholds,
        ci_resamples=ci_resamples if ci_resamples > 0 else None,
        seed=seed,
        level=level,
    )
    payload = json.dumps(report.to_dict(), indent=2, sort_keys=True)
    if out_path:
        Path(out_path).write_text(payload + "\n", encoding="utf-8")
    if fmt == "json":
        click.echo(payload)
    else:
        click.echo(report.render_table())


@main.command(name="stats")
@click.option("--in", "in_path", required=True, type=click.Path(),
              help="Candidate JSONL or emitted dataset JSONL.")
@click.option("--format", "fmt", type=click.Choice(["table", "json"]),
              default="table", show_default=True)
@wraps_errors
def stats_cmd(in_path: str, fmt: str) -> None:
    """Family composition of candidates or of an emitted dataset."""
    lines = read_jsonl(in_path)
    if not lines:
        _die(f"{in_path}: empty input")
    first = json.loads(lines[0])
    if "candidate_id" in first:
        items = [candidate_from_json(line) for line in lines]
    else:
        items = [example_from_json(line) for line in lines]
    report = compute_stats(items)
    if fmt == "json":
        click.echo(json.dumps(report.to_dict(), indent=2, sort_keys=True))
    else:
        click.echo(report.render_table())


if __name__ == "__main__":
    main()
