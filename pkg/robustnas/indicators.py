from typing import Sequence

import numpy as np
from pymoo.indicators.hv import HV

from .exceptions import LengthMismatch, PointBeyondReference

__all__ = ("hypervolume",)


def hypervolume(front, reference: Sequence[float]) -> float:
    """
    Return the exact volume of objective space dominated by `front` and
    bounded by `reference`, all objectives minimized.

    Points may lie on the reference boundary, where they add nothing, but not
    beyond it. An empty front has a hypervolume of 0.
    """
    reference_point = np.asarray(reference, dtype=float)
    points = np.asarray(front, dtype=float)
    if points.size == 0:
        return 0.0
    points = np.atleast_2d(points)
    if points.shape[1] != len(reference_point):
        raise LengthMismatch(
            f"Front points have {points.shape[1]} objectives but the reference "
            f"point has {len(reference_point)}."
        )
    beyond = np.any(points > reference_point, axis=1)
    if beyond.any():
        raise PointBeyondReference(
            f"Point {points[beyond][0].tolist()} lies beyond the reference point "
            f"{reference_point.tolist()}."
        )
    inside = points[np.all(points < reference_point, axis=1)]
    if len(inside) == 0:
        return 0.0
    return float(HV(ref_point=reference_point)(inside))
