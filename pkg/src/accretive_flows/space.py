"""Euclidean model of the ambient state space.

Everything downstream is dimension-free: all certified bounds are derived
from norms and pairings only.  The desk-scale model is R^d with the Euclidean
norm, where the normalized duality pairing reduces to the ordinary inner
product.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

__all__ = ["Point", "SpaceModel", "as_point", "norm", "pairing", "eta_hilbert"]

# State vectors are plain 1-d float arrays.
Point = np.ndarray


def as_point(coords) -> Point:
    """Coerce coordinates to a state vector: 1-d, nonempty, all finite."""
    x = np.asarray(coords, dtype=float)
    if x.ndim == 0:
        x = x.reshape(1)
    if x.ndim != 1 or x.size == 0:
        raise ValueError("a point must be a nonempty 1-d coordinate sequence")
    if not np.all(np.isfinite(x)):
        raise ValueError("point coordinates must be finite")
    return x


def norm(x) -> float:
    return float(np.linalg.norm(as_point(x)))


def pairing(y, x) -> float:
    """Duality pairing <y, J(x)>, which is the inner product in this model.

    Satisfies ``pairing(x, x) == norm(x)**2`` and the Cauchy-Schwarz bound
    ``|pairing(y, x)| <= norm(y) * norm(x)``.
    """
    y = as_point(y)
    x = as_point(x)
    if y.shape != x.shape:
        raise ValueError(
            f"dimension mismatch: pairing of {y.shape[0]}-d with {x.shape[0]}-d point"
        )
    return float(np.dot(y, x))


def eta_hilbert(eps: float) -> float:
    """Modulus of uniform convexity of Hilbert space: 1 - sqrt(1 - eps^2/4).

    Defined for eps in (0, 2], nondecreasing, with values in (0, 1].
    """
    if not 0.0 < eps <= 2.0:
        raise ValueError(f"eps must lie in (0, 2], got {eps}")
    return 1.0 - math.sqrt(1.0 - eps * eps / 4.0)


@dataclass(frozen=True)
class SpaceModel:
    """Ambient space: a dimension plus a modulus of uniform convexity.

    The modulus must be nondecreasing on (0, 2] with values in (0, 1];
    the default is the exact Hilbert-space modulus.
    """

    dim: int
    convexity_modulus: Callable[[float], float] = eta_hilbert

    def __post_init__(self):
        if int(self.dim) < 1:
            raise ValueError("space dimension must be >= 1")
