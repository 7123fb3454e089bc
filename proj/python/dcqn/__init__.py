"""Day-ahead renewable power scenarios from a dynamic Gaussian copula over
implicit quantile network marginals."""

from ._core import (
    CorrelationModel,
    covariance_json,
    crps,
    Dataset,
    DimensionError,
    DomainError,
    energy_score,
    Error,
    evaluation_levels,
    fan_levels,
    fit_static_copula,
    FormatError,
    generate,
    mae,
    NotFoundError,
    pinball_score,
    QuantileModel,
    rmse,
    Sample,
    std_normal_cdf,
    std_normal_quantile,
    train_dcn,
    train_iqn,
    UsageError,
    variogram_score,
)

__all__ = [name for name in dir() if not name.startswith("_")]
