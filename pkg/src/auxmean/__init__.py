"""Auxiliary-information estimators of a finite-population mean under SRSWOR."""

from .analytic import (
    efficiency_margins,
    msemin_proposed,
    mse_bahl_tuteja,
    mse_kadilar_cingi,
    mse_mean,
    mse_proposed_general,
    mse_ratio,
    mse_regression_family,
    mse_singh_tailor,
    optimum_weights,
    pre,
    theta_family_mse,
)
from .estimators import AuxKnowledge, EstimatorSpec, Family, estimate_point, transformation_factor
from .montecarlo import McConfig, generate_synthetic, run_mc, validate_first_order
from .sampling import (
    DesignParams,
    MomentSummary,
    PopulationFrame,
    SampleDraw,
    design_params,
    draw_srswor,
    enumerate_all_samples,
    summarize,
)

__version__ = "0.1.0"
