from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np
import numpy.typing as npt

from ..errors import InvalidArgumentError
from ..quaternion import Matrix, Vector, as_quaternion

#: quaternion dimension
NQ = 4

# kernel status codes
OK = 0
COVARIANCE_DEGENERATE = 1
INNOVATION_DEGENERATE = 2
STATE_DEGENERATE = 3


class PointSource(str, Enum):
    """Where the measurement update takes its cubature points from.

    ``REDRAW`` regenerates them from the Cholesky factor of the predicted
    covariance. ``REUSE`` feeds the propagated prediction points straight
    into the observation model.
    """

    REDRAW = "redraw"
    REUSE = "reuse"


@dataclass(frozen=True)
class FilterState:
    """Posterior mean quaternion and its 4x4 covariance."""

    q: Vector
    P: Matrix

    def __post_init__(self) -> None:
        q = as_quaternion(self.q)
        P = np.asarray(self.P, dtype=np.float64)
        if P.shape != (4, 4) or not np.all(np.isfinite(P)):
            raise InvalidArgumentError(f"P must be a finite 4x4 matrix, got shape {P.shape}")
        object.__setattr__(self, "q", np.ascontiguousarray(q))
        object.__setattr__(self, "P", np.ascontiguousarray(P))

    @classmethod
    def initial(cls, q0: npt.ArrayLike | None = None, P0: npt.ArrayLike | None = None) -> "FilterState":
        """Default start: identity attitude with unit covariance."""
        q0 = np.array([1.0, 0.0, 0.0, 0.0]) if q0 is None else q0
        P0 = np.eye(4) if P0 is None else P0
        return cls(np.array(q0, dtype=np.float64), np.array(P0, dtype=np.float64))


@dataclass(frozen=True)
class Prediction:
    """Output of a cubature prediction.

    ``M`` is the propagated square-root factor ``F @ S``; the literal CKF
    route never forms it and leaves it ``None``.
    """

    q_pred: Vector
    P_pred: Matrix
    points: Matrix
    M: Matrix | None = None


@dataclass(frozen=True)
class UkfWeights:
    wm0: float
    wc0: float
    wi: float
    lam: float
    alpha: float
    beta: float
    kappa: float
    nq: int = NQ
