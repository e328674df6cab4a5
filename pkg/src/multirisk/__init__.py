"""Systemic-risk analytics for multi-layer financial exposure networks.

Builds indirect bank-bank exposures from overlapping security portfolios,
propagates distress cascades (DebtRank) on single or combined layers, and
prices systemic risk as an expected loss, exactly over all default
combinations or via the small-probability approximation.
"""

__version__ = "0.1.0"

from .debtrank import (
    DebtRankResult,
    EconomicValue,
    debtrank_all_singletons,
    debtrank_run,
    economic_value,
    impact_matrix,
)
from .generator import GeneratorConfig, generate_series, generate_synthetic
from .losses import (
    BankLimitError,
    ExpectedLossResult,
    MarginalExposureRecord,
    expected_loss_approx,
    expected_loss_exact,
    marginal_exposure_loss,
    marginal_scan,
)
from .model import (
    BankRegistry,
    ExposureLayer,
    HoldingsSnapshot,
    SystemSnapshot,
    ValidationReport,
    Violation,
    align_banks,
    validate_snapshot,
)
from .multilayer import (
    MultiLayerNetwork,
    SRProfile,
    average_debtrank,
    build_network,
    combine_layers,
    normalized_debtrank,
    sr_profile,
    with_exposure_delta,
    without_exposure,
)
from .projection import (
    AssetImpactMatrix,
    absorption_impact,
    calibrate_alpha,
    indirect_exposures,
    linear_impact,
    op_economic_value,
    price_after_sale,
)

__all__ = [
    "__version__",
    "BankRegistry",
    "HoldingsSnapshot",
    "ExposureLayer",
    "SystemSnapshot",
    "Violation",
    "ValidationReport",
    "validate_snapshot",
    "align_banks",
    "EconomicValue",
    "DebtRankResult",
    "impact_matrix",
    "economic_value",
    "debtrank_run",
    "debtrank_all_singletons",
    "AssetImpactMatrix",
    "linear_impact",
    "price_after_sale",
    "calibrate_alpha",
    "absorption_impact",
    "indirect_exposures",
    "op_economic_value",
    "MultiLayerNetwork",
    "SRProfile",
    "combine_layers",
    "build_network",
    "normalized_debtrank",
    "sr_profile",
    "average_debtrank",
    "with_exposure_delta",
    "without_exposure",
    "ExpectedLossResult",
    "MarginalExposureRecord",
    "BankLimitError",
    "expected_loss_exact",
    "expected_loss_approx",
    "marginal_exposure_loss",
    "marginal_scan",
    "GeneratorConfig",
    "generate_synthetic",
    "generate_series",
]
