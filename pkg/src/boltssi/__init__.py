"""Screening of pairwise interactions in high-dimensional regression.

Two scorers are provided: exact marginal GLM likelihood increments
(``ssi``) and a discretized log-linear approximation computed from
bit-packed contingency counts (``bolt`` / ``bolt-ksa``).
"""

__version__ = "0.1.0"

from .bitmat import BitMatrix, build_bitmatrix, joint_count
from .contingency import ContingencyTable3, build_table
from .discretize import DiscreteMatrix, DiscretizationSpec, QuantileDiscretizer, discretize
from .efficiency import arcsine_check, efficiency_ratio, efficiency_report, theoretical_ratio
from .estimators import InteractionScreener
from .exceptions import (
    BadResponse,
    Collinear,
    ConstantColumn,
    DataError,
    DegenerateColumn,
    DegeneratePair,
    DimensionTooSmall,
    IndexOutOfRange,
    NotConverged,
    NumericError,
    ParseError,
    ScreeningError,
    Separation,
)
from .ingest import Dataset, Family, PairIndex, as_dataset, load_delimited, pair_iterator
from .loglinear import chisq_critical, ipf_fit, ksa_fit, score_pair
from .marginal_glm import fit_marginal, ssi_score
from .screen import (
    BonferroniAlpha,
    Method,
    ScreenConfig,
    ScreenResult,
    Threshold,
    TopD,
    parse_rule,
    screen,
    select,
)
from .simgen import SimDesign, SimMetrics, evaluate, generate, run_simulation

__all__ = [
    "BadResponse", "BitMatrix", "BonferroniAlpha", "Collinear", "ConstantColumn",
    "ContingencyTable3", "DataError", "Dataset", "DegenerateColumn", "DegeneratePair",
    "DimensionTooSmall", "DiscreteMatrix", "DiscretizationSpec", "Family", "IndexOutOfRange",
    "InteractionScreener", "Method", "NotConverged", "NumericError", "PairIndex", "ParseError",
    "QuantileDiscretizer", "ScreenConfig", "ScreenResult", "ScreeningError", "Separation",
    "SimDesign", "SimMetrics", "Threshold", "TopD", "arcsine_check", "as_dataset",
    "build_bitmatrix", "build_table", "chisq_critical", "discretize", "efficiency_ratio",
    "efficiency_report", "evaluate", "fit_marginal", "generate", "ipf_fit", "joint_count",
    "ksa_fit", "load_delimited", "pair_iterator", "parse_rule", "run_simulation", "score_pair",
    "screen", "select", "ssi_score", "theoretical_ratio",
]
