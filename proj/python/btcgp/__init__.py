"""Gaussian-process regression for 1-D series with a banded training covariance."""

from ._core import (
    BandedCholeskyFactor,
    BandedSymMatrix,
    BandwidthOutOfRangeError,
    BtcgpError,
    Dataset1D,
    FittedModel,
    NotPositiveDefiniteError,
    PdFailureError,
    PredictiveDistribution,
    SeHyperParams,
    TrainResult,
    add_diagonal,
    add_observation_noise,
    band_from_dense,
    check_predictive_pd,
    cholesky_banded,
    fit,
    fit_factor,
    gram_banded,
    gram_dense,
    init_hyperparams,
    kfold_split,
    min_spacing,
    nll_btc,
    nll_exact,
    nlpd,
    nlpd_pointwise_mean,
    nmse,
    sample_gp,
    se_kernel,
    spacing_quantile,
    theoretical_bandwidth,
    thin_to_spacing,
    thm1_margin,
)

__all__ = [
    "BandedCholeskyFactor",
    "BandedSymMatrix",
    "BandwidthOutOfRangeError",
    "BtcgpError",
    "Dataset1D",
    "FittedModel",
    "NotPositiveDefiniteError",
    "PdFailureError",
    "PredictiveDistribution",
    "SeHyperParams",
    "TrainResult",
    "add_diagonal",
    "add_observation_noise",
    "band_from_dense",
    "check_predictive_pd",
    "cholesky_banded",
    "fit",
    "fit_factor",
    "gram_banded",
    "gram_dense",
    "init_hyperparams",
    "kfold_split",
    "min_spacing",
    "nll_btc",
    "nll_exact",
    "nlpd",
    "nlpd_pointwise_mean",
    "nmse",
    "sample_gp",
    "se_kernel",
    "spacing_quantile",
    "theoretical_bandwidth",
    "thin_to_spacing",
    "thm1_margin",
]

__version__ = "0.1.0"
