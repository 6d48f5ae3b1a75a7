"""Proximity operator of ``gamma * TV`` by Chambolle's dual fixed point.

The dual field is kept in a :class:`ProxState` that the caller owns, so
consecutive calls inside an outer loop start from the previous dual
solution instead of from zero.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .image import DualField, divergence, gradient, tv_value

DEFAULT_TAU = 0.248


@dataclass(frozen=True)
class ProxParams:
    gamma: float
    inner_iters: int = 20
    tau: float = DEFAULT_TAU

    def __post_init__(self):
        if self.gamma < 0:
            raise ValueError(f"gamma must be >= 0, got {self.gamma}")
        if self.inner_iters < 1:
            raise ValueError(f"inner_iters must be >= 1, got {self.inner_iters}")
        if not 0 < self.tau <= 0.25:
            raise ValueError(f"tau must lie in (0, 1/4], got {self.tau}")


@dataclass
class ProxState:
    dual: DualField
    last_gamma: float | None = None
    iterations: int = field(default=0)

    @classmethod
    def zeros(cls, shape: tuple[int, int]) -> "ProxState":
        return cls(DualField(np.zeros(shape), np.zeros(shape)))


def chambolle_step(p: DualField, u_scaled: np.ndarray, tau: float) -> DualField:
    """One fixed-point sweep; ``u_scaled`` is ``u' / gamma``."""
    gh, gv = gradient(divergence(p) - u_scaled)
    denom = 1.0 + tau * np.sqrt(gh * gh + gv * gv)
    return DualField((p.dh + tau * gh) / denom, (p.dv + tau * gv) / denom)


def tv_prox(u_prime: np.ndarray, params: ProxParams, state: ProxState, callback=None) -> np.ndarray:
    """Approximate ``argmin_u 0.5*||u - u'||^2 + gamma*TV(u)``.

    Runs exactly ``params.inner_iters`` sweeps from ``state.dual`` and
    leaves the final dual field in ``state`` for the next call.
    ``callback(p)`` is invoked after every sweep if given.
    """
    gamma = params.gamma
    state.last_gamma = gamma
    if gamma == 0:
        return np.array(u_prime, dtype=np.float64, copy=True)
    if state.dual.dh.shape != u_prime.shape:
        raise ValueError(f"dual shape {state.dual.dh.shape} does not match input {u_prime.shape}")
    u_scaled = u_prime / gamma
    p = state.dual
    for _ in range(params.inner_iters):
        p = chambolle_step(p, u_scaled, params.tau)
        if callback is not None:
            callback(p)
    state.dual = p
    state.iterations += params.inner_iters
    return u_prime - gamma * divergence(p)


def prox_duality_gap(u: np.ndarray, u_prime: np.ndarray, params: ProxParams, state: ProxState) -> float:
    """Primal minus dual objective for the prox problem.

    The dual of ``0.5||u - u'||^2 + gamma TV(u)`` over fields with
    ``|p| <= 1`` is ``0.5||u'||^2 - 0.5||u' - gamma div p||^2``; weak
    duality makes the gap nonnegative whenever ``state.dual`` is feasible.
    """
    gamma = params.gamma
    r = u - u_prime
    primal = 0.5 * float(np.sum(r * r)) + gamma * tv_value(u)
    w = u_prime - gamma * divergence(state.dual)
    dual = 0.5 * float(np.sum(u_prime * u_prime)) - 0.5 * float(np.sum(w * w))
    return primal - dual
