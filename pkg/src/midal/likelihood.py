"""Log-domain Gamma likelihood and its decoupled proximal z-update.

With ``g = log y`` and ``z = log x`` the negative log-likelihood of an
M-look observation is, up to a constant, ``M * sum(z + exp(g - z))``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .image import as_image

# exp() overflows float64 just above this argument
_EXP_MAX = 709.0


class ConvergenceError(RuntimeError):
    """Newton iteration hit its cap without meeting the tolerance."""

    def __init__(self, message: str, pixel: tuple[int, int] | None = None):
        super().__init__(message)
        self.pixel = pixel


@dataclass(frozen=True)
class LikelihoodParams:
    looks: float
    g: np.ndarray

    def __post_init__(self):
        if not self.looks >= 1:
            raise ValueError(f"looks must be >= 1, got {self.looks}")
        object.__setattr__(self, "g", as_image(self.g, name="g"))


def _checked_exp(arg: np.ndarray) -> np.ndarray:
    if np.any(arg > _EXP_MAX):
        idx = np.unravel_index(int(np.argmax(arg)), arg.shape)
        raise OverflowError(f"exp(g - z) overflows at pixel {tuple(int(i) for i in idx)}")
    return np.exp(arg)


def neg_log_likelihood(z: np.ndarray, params: LikelihoodParams) -> float:
    if z.shape != params.g.shape:
        raise ValueError(f"shape mismatch: z {z.shape} vs g {params.g.shape}")
    return float(params.looks * np.sum(z + _checked_exp(params.g - z)))


def neg_log_likelihood_grad(z: np.ndarray, params: LikelihoodParams) -> np.ndarray:
    return params.looks * (1.0 - _checked_exp(params.g - z))


def z_update(
    z_prime: np.ndarray,
    params: LikelihoodParams,
    mu: float,
    tol: float = 1e-10,
    max_iter: int = 50,
) -> np.ndarray:
    """Per-pixel minimizer of ``z + exp(g - z) + (a/2)(z - z')^2``, ``a = mu/M``.

    Safeguarded Newton on ``h'(z) = 1 - exp(g - z) + a (z - z')``.  The
    root is always bracketed by ``[min(z', g), max(z', g)]``; a Newton step
    leaving the current bracket, or shrinking by less than half of the
    previous step, is replaced by bisection.  A pixel is done
    once ``|h'| <= tol`` or its bracket (or Newton step) has shrunk to
    float resolution, which is what bounds ``|h'|`` when ``a`` is huge.
    """
    if not mu > 0:
        raise ValueError(f"mu must be positive, got {mu}")
    if not tol > 0:
        raise ValueError(f"tol must be positive, got {tol}")
    g = params.g
    zp = np.asarray(z_prime, dtype=np.float64)
    if zp.shape != g.shape:
        raise ValueError(f"shape mismatch: z' {zp.shape} vs g {g.shape}")
    a = mu / params.looks

    lo = np.minimum(zp, g)
    hi = np.maximum(zp, g)
    # raise the lower end to g - 700 wherever h' is still negative there,
    # so exp(g - z) stays finite inside the bracket
    floor = g - 700.0
    with np.errstate(over="ignore"):
        h_floor = 1.0 - np.exp(700.0) + a * (floor - zp)
    lo = np.where((floor > lo) & (h_floor <= 0), floor, lo)
    z = hi.copy()
    last_step = hi - lo
    for _ in range(max_iter):
        e = _checked_exp(g - z)
        hp = 1.0 - e + a * (z - zp)
        neg = hp < 0
        lo = np.where(neg, z, lo)
        hi = np.where(neg, hi, z)
        delta = hp / (e + a)
        ulp = 4.0 * np.finfo(np.float64).eps * np.maximum(1.0, np.abs(z))
        resolved = (hi - lo <= ulp) | (np.abs(delta) <= ulp)
        active = (np.abs(hp) > tol) & ~resolved
        if not active.any():
            return z
        newton = z - delta
        # bisect when Newton leaves the bracket or fails to halve the previous step
        bisect = (newton <= lo) | (newton >= hi) | (2.0 * np.abs(delta) > np.abs(last_step))
        step = np.where(bisect, 0.5 * (lo + hi), newton)
        last_step = np.where(active, step - z, last_step)
        z = np.where(active, step, z)
    e = _checked_exp(g - z)
    hp = np.abs(1.0 - e + a * (z - zp))
    worst = np.unravel_index(int(np.argmax(hp)), hp.shape)
    raise ConvergenceError(
        f"z-update did not converge in {max_iter} iterations "
        f"(|h'| = {hp[worst]:.3g} at pixel {tuple(int(i) for i in worst)})",
        pixel=tuple(int(i) for i in worst),
    )


def z_update_oracle(g: float, z_prime: float, a: float, tol: float = 1e-12) -> float:
    """Scalar reference for :func:`z_update` by plain bisection on ``h'``."""
    if not a > 0:
        raise ValueError(f"a must be positive, got {a}")
    lo, hi = min(z_prime, g), max(z_prime, g)
    for _ in range(400):
        if hi - lo <= tol:
            break
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        # beyond the exp range h' is dominated by -exp(g - z) < 0
        if g - mid > _EXP_MAX or 1.0 - math.exp(g - mid) + a * (mid - z_prime) < 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)
