"""Image carrier and the forward-difference gradient / divergence pair.

Images are plain 2-D ``float64`` numpy arrays indexed ``[row, col]``.
Differences use Neumann boundaries: the last column of the horizontal
component and the last row of the vertical component are zero.
"""
from __future__ import annotations

from typing import NamedTuple

import numpy as np


class GradientField(NamedTuple):
    """Horizontal and vertical components of a discrete vector field."""

    dh: np.ndarray
    dv: np.ndarray


# The Chambolle dual variables live on the same grid as a gradient.
DualField = GradientField


def as_image(data, *, name: str = "image") -> np.ndarray:
    """Validate ``data`` as an image and return it as a 2-D float64 array.

    Raises ``ValueError`` for non-2-D, empty or non-finite input.
    """
    img = np.asarray(data, dtype=np.float64)
    if img.ndim != 2:
        raise ValueError(f"{name} must be 2-D, got shape {img.shape}")
    if img.shape[0] < 1 or img.shape[1] < 1:
        raise ValueError(f"{name} must have at least one pixel, got shape {img.shape}")
    if not np.all(np.isfinite(img)):
        raise ValueError(f"{name} contains NaN or Inf")
    return img


def gradient(img: np.ndarray) -> GradientField:
    dh = np.zeros_like(img, dtype=np.float64)
    dv = np.zeros_like(img, dtype=np.float64)
    dh[:, :-1] = img[:, 1:] - img[:, :-1]
    dv[:-1, :] = img[1:, :] - img[:-1, :]
    return GradientField(dh, dv)


def divergence(p: GradientField) -> np.ndarray:
    """Negative adjoint of :func:`gradient`: ``<grad u, p> = -<u, div p>``."""
    ph, pv = p
    out = np.zeros_like(ph, dtype=np.float64)
    out[:, :-1] += ph[:, :-1]
    out[:, 1:] -= ph[:, :-1]
    out[:-1, :] += pv[:-1, :]
    out[1:, :] -= pv[:-1, :]
    return out


def gradient_magnitude(field: GradientField) -> np.ndarray:
    return np.sqrt(field.dh * field.dh + field.dv * field.dv)


def tv_value(img: np.ndarray) -> float:
    """Isotropic total variation, the sum of per-pixel gradient magnitudes."""
    return float(np.sum(gradient_magnitude(gradient(img))))
