"""Vector kernel: inner products, norms, hyperplane projection, cosine.

Vectors are 1-d float64 numpy arrays.
"""

from __future__ import annotations

import enum

import numpy as np

from .errors import DegenerateModifier, DegenerateVector, DimensionMismatch, MissingOccupationVector

EPS = 1e-12


class TranslationalMode(str, enum.Enum):
    RESIDUAL = "residual"
    PLAIN = "plain"


def as_vector(values) -> np.ndarray:
    v = np.asarray(values, dtype=np.float64)
    if v.ndim != 1 or v.size == 0:
        raise ValueError("embedding vectors must be non-empty and one-dimensional")
    return v


def _same_dim(x: np.ndarray, y: np.ndarray) -> None:
    if x.shape != y.shape:
        raise DimensionMismatch(f"dimension {x.shape[0]} vs {y.shape[0]}")


def dot(x, y) -> float:
    x, y = as_vector(x), as_vector(y)
    _same_dim(x, y)
    return float(np.dot(x, y))


def l2_norm(x) -> float:
    return float(np.linalg.norm(as_vector(x)))


def l1_norm(x) -> float:
    return float(np.abs(as_vector(x)).sum())


def project_orthogonal(x, c) -> np.ndarray:
    """Remove from ``x`` its component along ``c``: x - (x.c / c.c) c."""
    x, c = as_vector(x), as_vector(c)
    _same_dim(x, c)
    cc = float(np.dot(c, c))
    if np.sqrt(cc) <= EPS:
        raise DegenerateModifier(f"modifier norm {np.sqrt(cc):.3g} below {EPS}")
    return x - (float(np.dot(x, c)) / cc) * c


def cosine(x, y) -> float:
    x, y = as_vector(x), as_vector(y)
    _same_dim(x, y)
    nx, ny = float(np.linalg.norm(x)), float(np.linalg.norm(y))
    if nx <= EPS or ny <= EPS:
        raise DegenerateVector(f"cannot take cosine of a vector with norm {min(nx, ny):.3g}")
    value = float(np.dot(x, y)) / (nx * ny)
    return min(1.0, max(-1.0, value))


def translational_distance(a, c, b, occ_b, mode: TranslationalMode | str = TranslationalMode.RESIDUAL) -> float:
    """Translational score of candidate ``b`` for target ``a`` under modifier ``c``.

    Residual mode compares what is left of each entity once its own field is
    subtracted, cos(a - c, b - occ_b); plain mode is cos(a, b). Higher is better.
    """
    mode = TranslationalMode(mode)
    a, c, b = as_vector(a), as_vector(c), as_vector(b)
    _same_dim(a, c)
    _same_dim(a, b)
    if mode is TranslationalMode.PLAIN:
        return cosine(a, b)
    if occ_b is None:
        raise MissingOccupationVector("candidate occupation has no vector")
    occ_b = as_vector(occ_b)
    _same_dim(b, occ_b)
    return cosine(a - c, b - occ_b)
