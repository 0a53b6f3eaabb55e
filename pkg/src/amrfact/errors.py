"""Exception hierarchy shared across the package.

Everything user-facing derives from AmrfactError so the CLI can map any
domain failure to a single non-zero exit code.
"""
from __future__ import annotations


class AmrfactError(Exception):
    """Base class for all errors raised by this package."""


class GraphError(AmrfactError):
    """A graph violates a structural invariant."""


class PenmanSyntaxError(GraphError):
    """Malformed PENMAN text. Carries the 1-based line and column."""

    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"{message} (line {line}, column {column})")
        self.line = line
        self.column = column


class DuplicateVariableError(PenmanSyntaxError):
    """The same variable is defined by two `(var / concept ...)` nodes."""


class UndefinedVariableError(GraphError):
    """A variable is referenced but never defined."""


class CycleError(GraphError):
    """The role edges contain a directed cycle after inverse normalization."""


class UnreachableNodeError(GraphError):
    """A node cannot be reached from the top and cannot be serialized."""


class PerturbationError(AmrfactError):
    """Base class for perturbation failures."""


class InapplicableSiteError(PerturbationError):
    """The requested edit does not apply to the graph as given."""


class DegenerateEditError(PerturbationError):
    """The requested edit would leave the graph unchanged."""


class ScoringError(AmrfactError):
    """A scorer produced unusable output or could not run."""


class ScoreJoinError(ScoringError):
    """Candidates and score records do not line up one-to-one."""


class AdapterProtocolError(ScoringError):
    """An external adapter broke the line-delimited JSON protocol."""


class CorpusError(AmrfactError):
    """Corpus input is unreadable or contains no usable records."""


class PipelineError(AmrfactError):
    """A dataset-construction stage cannot proceed."""


class EvaluationError(AmrfactError):
    """Evaluation input is malformed or a metric is undefined on it."""
