"""Graph-to-text generation with reconstruction-based auxiliary training.

A structure-aware transformer encoder-decoder whose training signal is
enriched by two detachable heads: a biaffine scorer that reconstructs
graph triples grounded onto the sentence, and a second decoder that
regenerates the bracketed graph linearization.
"""

from .alignment import Alignment, coverage_report, load_alignments, match_kg_nodes
from .graphs import (
    GraphError,
    LabeledGraph,
    PenmanError,
    canonical_form,
    isomorphic,
    parse_penman,
    parse_triple_set,
    serialize_penman,
    simplify,
    strip_sense,
)
from .metrics import evaluate_bleu, relation_recall
from .model import LossReport, Model, ModelConfig
from .training import TrainConfig, make_batches, train
from .views import (
    FeatureVocabulary,
    GroundedArcSet,
    LinearizedGraph,
    build_feature_vocab,
    extract_spo,
    ground_triples,
    linearize,
    path_feature,
    reparse_linearized,
)

__version__ = "0.1.0"

__all__ = [
    "Alignment",
    "FeatureVocabulary",
    "GraphError",
    "GroundedArcSet",
    "LabeledGraph",
    "LinearizedGraph",
    "LossReport",
    "Model",
    "ModelConfig",
    "PenmanError",
    "TrainConfig",
    "__version__",
    "build_feature_vocab",
    "canonical_form",
    "coverage_report",
    "evaluate_bleu",
    "extract_spo",
    "ground_triples",
    "isomorphic",
    "linearize",
    "load_alignments",
    "make_batches",
    "match_kg_nodes",
    "parse_penman",
    "parse_triple_set",
    "path_feature",
    "relation_recall",
    "reparse_linearized",
    "serialize_penman",
    "simplify",
    "strip_sense",
    "train",
]
