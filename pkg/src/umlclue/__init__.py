"""umlclue: scoring toolkit for UML class-diagram designs."""

__version__ = "0.1.0"

from .clue import (
    ClueScores,
    PairEvaluator,
    RelationshipTypeLUT,
    WeightConfig,
    clue,
    clue_attribute,
    clue_class,
    clue_method,
    clue_relation,
    sim_rq,
)
from .matching import MatchingResult, SimilarityMatrix, optimal_matching
from .model import (
    Attribute,
    ClassEntity,
    ClassModel,
    Method,
    MultiplicityLabel,
    Parameter,
    Relationship,
    RelationshipKind,
    from_canonical_document,
    model_stats,
    to_canonical_document,
)
from .passk import TaskSampleRecord, pass_at_k
from .plantuml import extract_plantuml, parse, to_plantuml, validate
from .semantics import CachedProvider, EmbeddingServiceProvider, LexicalProvider, cached
from .stats import mean_stderr, pearson, spearman, zscore

__all__ = [
    "Attribute",
    "CachedProvider",
    "ClassEntity",
    "ClassModel",
    "ClueScores",
    "EmbeddingServiceProvider",
    "LexicalProvider",
    "MatchingResult",
    "Method",
    "MultiplicityLabel",
    "PairEvaluator",
    "Parameter",
    "Relationship",
    "RelationshipKind",
    "RelationshipTypeLUT",
    "SimilarityMatrix",
    "TaskSampleRecord",
    "WeightConfig",
    "cached",
    "clue",
    "clue_attribute",
    "clue_class",
    "clue_method",
    "clue_relation",
    "extract_plantuml",
    "from_canonical_document",
    "mean_stderr",
    "model_stats",
    "optimal_matching",
    "parse",
    "pass_at_k",
    "pearson",
    "sim_rq",
    "spearman",
    "to_canonical_document",
    "to_plantuml",
    "validate",
    "zscore",
]
