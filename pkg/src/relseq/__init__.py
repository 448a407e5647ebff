"""Relational sequence mining, naive Bayes classification and GRASP
feature selection."""

from .bayes import BayesModel, discriminant, error_count, fit, predict, vectorize
from .dataset import LabeledDataset, LanguageBias, MinedFeature
from .errors import (EvaluationError, FitError, MalformedSequenceError, ParseError,
                     RelSeqError, StratificationError, VocabularyError)
from .grasp import GraspConfig, Selection, SubsetObjective, grasp_select
from .logic import (Atom, DimAtom, Pattern, RelationalSequence, Term, find_sequence_substitution,
                    oi_equivalent, oi_subsumes_pattern, subsumes_sequence)
from .miner import MinerConfig, mine, mine_frequent, refine
from .pipeline import (EvalReport, PipelineConfig, cross_validate, cross_validate_data,
                       round_robin_fit, round_robin_predict)
from .synth import generate_synthetic
from .syntax import parse_background, parse_dataset, parse_pattern

__version__ = "0.1.0"

__all__ = [
    "Atom", "BayesModel", "DimAtom", "EvalReport", "EvaluationError", "FitError",
    "GraspConfig", "LabeledDataset", "LanguageBias", "MalformedSequenceError", "MinedFeature",
    "MinerConfig", "ParseError", "Pattern", "PipelineConfig", "RelSeqError",
    "RelationalSequence", "Selection", "StratificationError", "SubsetObjective", "Term",
    "VocabularyError", "cross_validate", "cross_validate_data", "discriminant", "error_count",
    "find_sequence_substitution", "fit", "generate_synthetic", "grasp_select", "mine",
    "mine_frequent", "oi_equivalent", "oi_subsumes_pattern", "parse_background",
    "parse_dataset", "parse_pattern", "predict", "refine", "round_robin_fit",
    "round_robin_predict", "subsumes_sequence", "vectorize",
]
