from igeflow.numerics.intervals import HyperRectangle, Interval
from igeflow.numerics.linalg import batch_sqrt_det, det_and_inverse
from igeflow.numerics.ode import OdeState, integrate_ode
from igeflow.numerics.quadrature import (
    QuadratureResult,
    integrate_box,
    vectorize_field,
)

__all__ = [
    "HyperRectangle",
    "Interval",
    "OdeState",
    "QuadratureResult",
    "batch_sqrt_det",
    "det_and_inverse",
    "integrate_box",
    "integrate_ode",
    "vectorize_field",
]
