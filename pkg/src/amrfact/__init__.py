"""Factual-consistency data generation by semantic graph perturbation.

The package parses PENMAN graphs, applies meaning-altering edits drawn
from five error families, screens the results with a two-threshold
entailment/relevance filter, emits balanced labeled datasets, and
evaluates consistency scorers with per-origin threshold tuning and
bootstrap confidence intervals.
"""
from .corpus import (
    DocumentRecord,
    IngestResult,
    LabeledExample,
    NegativeCandidate,
    SummarySentence,
    ingest,
)
from .errors import (
    AdapterProtocolError,
    AmrfactError,
    CorpusError,
    CycleError,
    DegenerateEditError,
    DuplicateVariableError,
    EvaluationError,
    GraphError,
    InapplicableSiteError,
    PenmanSyntaxError,
    PerturbationError,
    PipelineError,
    ScoreJoinError,
    ScoringError,
    UndefinedVariableError,
    UnreachableNodeError,
)
from .evaluation import (
    EvalRecord,
    EvalReport,
    ThresholdClassifier,
    balanced_accuracy,
    bootstrap_ci,
    evaluate,
    load_eval_records,
    predict_with_threshold,
    tune_threshold,
    tune_threshold_scores,
    tune_thresholds_by_origin,
)
from .filtering import FilterConfig, NegativeFilter, Rejection, decide, filter_batch
from .graph import AmrGraph, Constant, Edge, find_nodes, graphs_equal
from .lexicon import (
    AntonymLexicon,
    ModalityMap,
    bundled_antonym_lexicon,
    bundled_modality_map,
    load_antonym_lexicon,
    load_modality_map,
)
from .penman import (
    dump_penman_block,
    dump_penman_text,
    load_penman_file,
    load_penman_text,
    parse_penman,
    serialize_penman,
)
from .perturb import (
    ALL_FAMILIES,
    Family,
    PerturbConfig,
    PerturbationContext,
    PerturbationSite,
    apply_all,
    apply_site,
    default_context,
    enumerate_sites,
    harvest_pools,
)
from .pipeline import (
    AmrPerturber,
    DatasetManifest,
    StatsReport,
    balance_and_emit,
    build_dataset,
    generate,
    linearize,
    make_context_builder,
    realize,
    split_by_document,
    stats,
)
from .scoring import (
    BuiltinScorer,
    ExecScorer,
    FileScorer,
    ScoreRecord,
    Scorer,
    builtin_entailment,
    builtin_relevance,
    make_scorer,
    score_candidates,
)

__version__ = "0.1.0"

__all__ = [
    "ALL_FAMILIES",
    "AdapterProtocolError",
    "AmrGraph",
    "AmrPerturber",
    "AmrfactError",
    "AntonymLexicon",
    "BuiltinScorer",
    "Constant",
    "CorpusError",
    "CycleError",
    "DatasetManifest",
    "DegenerateEditError",
    "DocumentRecord",
    "DuplicateVariableError",
    "Edge",
    "EvalRecord",
    "EvalReport",
    "EvaluationError",
    "ExecScorer",
    "Family",
    "FileScorer",
    "FilterConfig",
    "GraphError",
    "InapplicableSiteError",
    "IngestResult",
    "LabeledExample",
    "ModalityMap",
    "NegativeCandidate",
    "NegativeFilter",
    "PenmanSyntaxError",
    "PerturbConfig",
    "PerturbationContext",
    "PerturbationError",
    "PerturbationSite",
    "PipelineError",
    "Rejection",
    "ScoreJoinError",
    "ScoreRecord",
    "Scorer",
    "ScoringError",
    "StatsReport",
    "SummarySentence",
    "ThresholdClassifier",
    "UndefinedVariableError",
    "UnreachableNodeError",
    "apply_all",
    "apply_site",
    "balance_and_emit",
    "balanced_accuracy",
    "bootstrap_ci",
    "build_dataset",
    "builtin_entailment",
    "builtin_relevance",
    "bundled_antonym_lexicon",
    "bundled_modality_map",
    "decide",
    "default_context",
    "dump_penman_block",
    "dump_penman_text",
    "enumerate_sites",
    "evaluate",
    "filter_batch",
    "find_nodes",
    "generate",
    "graphs_equal",
    "harvest_pools",
    "ingest",
    "linearize",
    "make_context_builder",
    "load_antonym_lexicon",
    "load_eval_records",
    "load_modality_map",
    "load_penman_file",
    "load_penman_text",
    "make_scorer",
    "parse_penman",
    "predict_with_threshold",
    "realize",
    "score_candidates",
    "serialize_penman",
    "split_by_document",
    "stats",
    "tune_threshold",
    "tune_threshold_scores",
    "tune_thresholds_by_origin",
]
