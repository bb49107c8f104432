"""Scores of nominal outlyingness for categorical data.

Per-itemset support thresholds are derived from simultaneous multinomial
confidence intervals; a pruned itemset-lattice search flags highly infrequent
(or frequent) itemsets; flagged itemsets yield per-observation scores,
outlyingness depths and a variable contribution matrix. A slow reference
oracle ships alongside the fast path so every result can be audited.
"""

__version__ = "0.1.0"

from .config import RunConfig
from .data import (Dataset, IngestionOptions, Itemset, ProbabilityModel,
                   cell_probability, empirical_model, load_dataset, read_csv,
                   user_model)
from .engine import RunInfo, run_analysis
from .errors import (CISearchFailure, DegenerateTruncation, DomainError,
                     EmptyDatasetError, IngestionError, InternalConsistencyError,
                     OracleRefusal, SonoError, TableExplosion)
from .lattice import (FlagRecord, SearchStats, count_support, search_frequent,
                      search_infrequent)
from .oracle import (OracleConfig, WalkerResult, check_propositions, exact_nu,
                     random_dataset, walker)
from .scoring import (ScoreReport, build_report, contribution_matrix, depth_flags,
                      max_score_bound, score_flags)
from .simci import (CellSpec, SimultaneousCI, TruncatedPoissonMoments,
                    coverage_probability, edgeworth_sum_density, find_c,
                    simultaneous_intervals, truncated_poisson_moments)
from .thresholds import (MaxlenDecision, ThresholdProvider, ThresholdTable,
                         determine_maxlen, subset_thresholds)

__all__ = [
    "__version__",
    "RunConfig", "RunInfo", "run_analysis",
    "Dataset", "IngestionOptions", "Itemset", "ProbabilityModel",
    "cell_probability", "empirical_model", "load_dataset", "read_csv", "user_model",
    "SonoError", "IngestionError", "EmptyDatasetError", "DomainError",
    "DegenerateTruncation", "CISearchFailure", "TableExplosion", "OracleRefusal",
    "InternalConsistencyError",
    "FlagRecord", "SearchStats", "count_support", "search_infrequent",
    "search_frequent",
    "ScoreReport", "build_report", "score_flags", "depth_flags",
    "contribution_matrix", "max_score_bound",
    "CellSpec", "SimultaneousCI", "TruncatedPoissonMoments",
    "truncated_poisson_moments", "edgeworth_sum_density", "coverage_probability",
    "find_c", "simultaneous_intervals",
    "MaxlenDecision", "ThresholdTable", "ThresholdProvider", "determine_maxlen",
    "subset_thresholds",
    "OracleConfig", "WalkerResult", "walker", "exact_nu", "check_propositions",
    "random_dataset",
]
