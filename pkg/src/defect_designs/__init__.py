"""Defect-tolerant bipartite redundancy designs.

Construction, exact verification, composition and optimization of designs
that wire primary elements to programmable spares, plus the fundamental
redundancy/wiring trade-off regions those designs can reach.
"""

from .designs import (
    BipartiteDesign,
    Labeling,
    TradePoint,
    copy_designs,
    hamming_block,
    is_permutation_invariant,
    load_design,
    make_complete,
    make_repetition,
    make_subset,
    merge_designs,
    metrics,
    save_design,
    symmetrize,
)
from .errors import (
    BudgetExceededError,
    DesignError,
    InfeasibleDesignError,
    RegionUnknownError,
)
from .finite_k import (
    CorrectionBounds,
    GridValue,
    SizeDistribution,
    correction_rate_finite,
    correction_rate_grid,
    degree_distribution,
    hypergeometric_pmf,
    load_distribution,
    multinomial_pmf,
    save_distribution,
    subset_correction_bounds,
    tv_hypergeom_multinomial,
)
from .oracle import (
    CorrectionCertificate,
    best_redundant_labeling,
    canonical_form,
    certify,
    check_labeling,
    is_defect_correcting,
    max_correctable_defects,
    search_min_edges,
)

__version__ = "0.1.0"

__all__ = [
    "BipartiteDesign",
    "BudgetExceededError",
    "CorrectionBounds",
    "CorrectionCertificate",
    "DesignError",
    "GridValue",
    "InfeasibleDesignError",
    "Labeling",
    "RegionUnknownError",
    "SizeDistribution",
    "TradePoint",
    "best_redundant_labeling",
    "canonical_form",
    "certify",
    "check_labeling",
    "copy_designs",
    "correction_rate_finite",
    "correction_rate_grid",
    "degree_distribution",
    "hamming_block",
    "hypergeometric_pmf",
    "is_defect_correcting",
    "is_permutation_invariant",
    "load_design",
    "load_distribution",
    "make_complete",
    "make_repetition",
    "make_subset",
    "max_correctable_defects",
    "merge_designs",
    "metrics",
    "multinomial_pmf",
    "save_design",
    "save_distribution",
    "search_min_edges",
    "subset_correction_bounds",
    "symmetrize",
    "tv_hypergeom_multinomial",
]
