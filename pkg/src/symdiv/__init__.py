"""Symmetric divergences for link-transformed models and divergence-based model averaging."""

from .copula import (
    FGMCopula,
    GaussianCopula,
    IndependentCopula,
    check_dependence_symmetry,
    copula_density,
    dependence_divergence,
    make_copula,
    normalized_dependence_index,
)
from .distributions import make_model
from .divergence import (
    DivergenceResult,
    SymmetryReport,
    check_gll_symmetry,
    check_survival_link_symmetry,
    intrinsic_information,
    jeffreys,
    kl_generic,
    kl_ph,
    kl_po_null,
    kl_po_pair,
    renyi_gll,
    renyi_po,
    renyi_unit_link,
)
from .equilibrium import crkl, crkl_symmetry_defect, ed_link_parent, equilibrium_of, scaled_survival_divergence
from .exceptions import SymdivError
from .fitting import FitConfig, FitResult, POSurvivalRegressor, SurvivalDataset, fit_po_mle, sample_po
from .links import (
    LinkedModel,
    PiecewiseUniformLink,
    POLink,
    PowerLink,
    asymmetric_pw_density,
    gll_transform,
    po_transform,
    real_link,
    survival_transform,
)
from .subset_eval import (
    EvaluationTable,
    SubsetInformationAnalysis,
    enumerate_subsets,
    evaluate_table,
    js_and_bounds,
    pairwise_matrix,
    reference_divergences,
)

__version__ = "0.1.0"
