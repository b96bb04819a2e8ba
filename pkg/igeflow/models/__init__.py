from igeflow.models.base import (
    ContinuousSampleSpace,
    FiniteSampleSpace,
    ParameterDomain,
    StatisticalModel,
)
from igeflow.models.catalog import available_models, catalog, gaussian_product
from igeflow.models.expectation import expectation
from igeflow.models.metric import (
    fisher_metric,
    fisher_metric_numeric,
    fisher_metric_quadrature,
    metric_field,
    relative_entropy,
)
from igeflow.models.reparametrize import log_scale_chart, reparametrize

__all__ = [
    "ContinuousSampleSpace",
    "FiniteSampleSpace",
    "ParameterDomain",
    "StatisticalModel",
    "available_models",
    "catalog",
    "expectation",
    "fisher_metric",
    "fisher_metric_numeric",
    "fisher_metric_quadrature",
    "gaussian_product",
    "log_scale_chart",
    "metric_field",
    "relative_entropy",
    "reparametrize",
]
