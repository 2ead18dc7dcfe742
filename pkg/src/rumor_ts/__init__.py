"""Rumor classification from conversation reaction timelines.

Conversations are reduced to per-interval reaction counts, compressed with a
truncated SVD, scaled, and classified by fixed six-member recurrent ensembles
under majority voting, evaluated with leave-one-event-out cross-validation.
"""

from .ensemble import IMPLEMENTATIONS, EnsembleSpec, MajorityVoteEnsemble, majority_vote
from .errors import ConfigError, DataError, RumorTsError, TrainingError
from .evaluation import EvalReport, FoldResult, RunSettings, leave_one_event_out
from .ingest import (
    Conversation,
    RawDataset,
    format_timestamp,
    load_dataset,
    parse_timestamp,
    validate_conversation,
)
from .metrics import ConfusionCounts, confusion, macro_f1, micro_f1
from .models import (
    BASE_LEARNERS,
    LearnerSpec,
    SequenceClassifier,
    TrainConfig,
    build_learner,
    rule_of_thumb_units,
)
from .preprocess import MinMaxScaler, TruncatedSVD, class_weights, remove_conflicting_duplicates
from .synthetic import generate_synthetic_corpus, write_corpus_tree
from .timeseries import (
    IntervalConfig,
    ReactionCountVectorizer,
    TimeSeriesDataset,
    build_matrix,
    conversation_length,
    interval_count,
    vectorize,
)

__version__ = "0.1.0"

__all__ = [
    "BASE_LEARNERS",
    "ConfigError",
    "ConfusionCounts",
    "Conversation",
    "DataError",
    "EnsembleSpec",
    "EvalReport",
    "FoldResult",
    "IMPLEMENTATIONS",
    "IntervalConfig",
    "LearnerSpec",
    "MajorityVoteEnsemble",
    "MinMaxScaler",
    "RawDataset",
    "ReactionCountVectorizer",
    "RumorTsError",
    "RunSettings",
    "SequenceClassifier",
    "TimeSeriesDataset",
    "TrainConfig",
    "TrainingError",
    "TruncatedSVD",
    "build_learner",
    "build_matrix",
    "class_weights",
    "confusion",
    "conversation_length",
    "format_timestamp",
    "generate_synthetic_corpus",
    "interval_count",
    "leave_one_event_out",
    "load_dataset",
    "macro_f1",
    "majority_vote",
    "micro_f1",
    "parse_timestamp",
    "remove_conflicting_duplicates",
    "rule_of_thumb_units",
    "validate_conversation",
    "vectorize",
    "write_corpus_tree",
]
