"""M-look Gamma speckle simulation.

Noise is unit-mean Gamma with shape ``M`` and scale ``1/M`` (variance
``1/M``).  Draws come from a single numpy ``PCG64`` stream seeded by
``SpeckleParams.seed`` and are laid out in row-major order, so a field
depends only on (seed, shape, looks), never on thread count.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .image import as_image


@dataclass(frozen=True)
class SpeckleParams:
    looks: float
    seed: int = 0

    def __post_init__(self):
        if not np.isfinite(self.looks) or self.looks < 1:
            raise ValueError(f"looks must be >= 1, got {self.looks}")
        if not 0 <= int(self.seed) < 2**64:
            raise ValueError(f"seed must be a 64-bit unsigned integer, got {self.seed}")


def _rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(int(seed))))


def sample_gamma_noise(params: SpeckleParams, height: int, width: int) -> np.ndarray:
    """Draw an ``height x width`` field of unit-mean Gamma(M, 1/M) noise.

    Integer ``M`` uses the mean of ``M`` unit exponentials, each obtained
    as ``-log(U)`` with ``U`` uniform on (0, 1].  Non-integer ``M`` falls
    back to numpy's Marsaglia-Tsang rejection sampler.
    """
    if height < 1 or width < 1:
        raise ValueError(f"shape must be positive, got ({height}, {width})")
    rng = _rng(params.seed)
    n = height * width
    looks = params.looks
    if float(looks).is_integer():
        m = int(looks)
        acc = np.zeros(n)
        for _ in range(m):
            # random() is on [0, 1); 1 - U is on (0, 1] so the log is finite
            acc -= np.log1p(-rng.random(n))
        noise = acc / m
    else:
        noise = rng.standard_gamma(looks, size=n) / looks
    # -log(1) = 0 happens with probability ~2^-53 per draw; keep the field positive
    noise = np.maximum(noise, np.finfo(np.float64).tiny)
    return noise.reshape(height, width)


def apply_speckle(clean, params: SpeckleParams) -> np.ndarray:
    """Multiply a strictly positive reflectance image by Gamma speckle."""
    clean = as_image(clean, name="clean")
    if np.any(clean <= 0):
        raise ValueError("clean image must be strictly positive; rescale it first")
    return clean * sample_gamma_noise(params, *clean.shape)


def rescale_image(img, xmin: float, xmax: float) -> np.ndarray:
    """Affinely map the range of ``img`` onto ``[xmin, xmax]``.

    Extrema land exactly on ``xmin`` and ``xmax``.
    """
    img = as_image(img)
    if not xmax > xmin > 0:
        raise ValueError(f"need xmax > xmin > 0, got xmin={xmin}, xmax={xmax}")
    lo, hi = float(img.min()), float(img.max())
    if hi == lo:
        raise ValueError("cannot rescale a constant image")
    t = (img - lo) / (hi - lo)
    out = xmin + t * (xmax - xmin)
    out[img == lo] = xmin
    out[img == hi] = xmax
    return out
