"""Distributionally-robust regression on locally differentially-private data."""

from .data import Dataset, FeatureBounds, UNIT_BOUNDS
from .mechanisms import (MechanismKind, MechanismParams, PrivacyBudget, calibrate,
                         privatize, sensitivity)
from .ambiguity import (ConcentrationConfig, Radius, radius, w1_empirical, w2_gaussian,
                        zeta)
from ._descent import SolverConfig
from .erm import (LossKind, LossSpec, Norm, ThetaModel, empirical_loss, evaluate,
                  lipschitz_constant, train_regularized)
from .gauss_dro import (GaussianSummary, LinearModel, SdpCertificate, check_sdp_certificate,
                        inner_dual, lambda_reg, optimal_bias, summarize, train_gauss_dro)

__all__ = [
    "Dataset", "FeatureBounds", "UNIT_BOUNDS",
    "MechanismKind", "MechanismParams", "PrivacyBudget", "calibrate", "privatize",
    "sensitivity",
    "ConcentrationConfig", "Radius", "radius", "w1_empirical", "w2_gaussian", "zeta",
    "SolverConfig",
    "LossKind", "LossSpec", "Norm", "ThetaModel", "empirical_loss", "evaluate",
    "lipschitz_constant", "train_regularized",
    "GaussianSummary", "LinearModel", "SdpCertificate", "check_sdp_certificate",
    "inner_dual", "lambda_reg", "optimal_bias", "summarize", "train_gauss_dro",
]

__version__ = "0.1.0"
