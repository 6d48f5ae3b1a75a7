"""ADMM outer loop for TV-regularized multiplicative denoising (MIDAL)."""
from __future__ import annotations

import time
from dataclasses import asdict, dataclass, field

import numpy as np

from .image import as_image, tv_value
from .likelihood import LikelihoodParams, neg_log_likelihood, z_update
from .tvprox import DEFAULT_TAU, ProxParams, ProxState, tv_prox

# observed pixels are clamped to this before taking logs
POSITIVITY_FLOOR = 1e-12


class SolverError(RuntimeError):
    def __init__(self, message: str, iteration: int | None = None):
        super().__init__(message if iteration is None else f"iteration {iteration}: {message}")
        self.iteration = iteration


@dataclass(frozen=True)
class MidalParams:
    """Solver knobs.  ``mu=None`` means ``mu = lam``."""

    looks: float
    lam: float
    mu: float | None = None
    inner_iters: int = 20
    newton_tol: float = 1e-10
    stop_exponent: int = 4
    max_outer: int = 500
    tau: float = DEFAULT_TAU
    warm_start: bool = True

    def __post_init__(self):
        if not self.looks >= 1:
            raise ValueError(f"looks must be >= 1, got {self.looks}")
        if not self.lam > 0:
            raise ValueError(f"lambda must be positive, got {self.lam}")
        if self.mu is not None and not self.mu > 0:
            raise ValueError(f"mu must be positive, got {self.mu}")
        if self.inner_iters < 1:
            raise ValueError(f"inner_iters must be >= 1, got {self.inner_iters}")
        if self.stop_exponent < 1:
            raise ValueError(f"stop_exponent must be >= 1, got {self.stop_exponent}")
        if self.max_outer < 1:
            raise ValueError(f"max_outer must be >= 1, got {self.max_outer}")

    @property
    def penalty(self) -> float:
        return self.lam if self.mu is None else self.mu


@dataclass
class TraceRecord:
    iter: int
    objective: float
    constraint_sq: float
    rel_change: float
    inner_iters_cum: int
    seconds: float


@dataclass
class SolveTrace:
    records: list[TraceRecord] = field(default_factory=list)

    def __len__(self):
        return len(self.records)

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(r, name) for r in self.records])

    def to_dict(self) -> dict:
        """JSON-ready form; non-finite values (the first ``rel_change``) become None."""
        records = []
        for r in self.records:
            d = asdict(r)
            records.append({k: (None if isinstance(v, float) and not np.isfinite(v) else v) for k, v in d.items()})
        return {"records": records}


@dataclass
class MidalResult:
    estimate: np.ndarray
    log_estimate: np.ndarray
    iterations: int
    trace: SolveTrace
    converged: bool
    split: np.ndarray | None = None


def evaluate_objective(u: np.ndarray, params: MidalParams, g: np.ndarray) -> float:
    """``M * sum(u + exp(g - u)) + lam * TV(u)``, additive constant dropped."""
    nll = neg_log_likelihood(u, LikelihoodParams(params.looks, g))
    return nll + params.lam * tv_value(u)


def midal_solve(noisy, params: MidalParams, u0: np.ndarray | None = None) -> MidalResult:
    """Denoise a speckled intensity image.

    Runs in the log domain with ``g = log(max(noisy, floor))``, starting
    from ``u = g`` (or ``u0`` if given) and ``d = 0``.  Iteration stops when
    ``||x_{k+1} - x_k|| / ||x_k|| <= 10**-stop_exponent`` with ``x = exp(z)``,
    or after ``max_outer`` iterations (``converged`` is then False).
    """
    y = as_image(noisy, name="noisy")
    if np.any(y <= 0):
        raise ValueError("noisy image must be strictly positive")
    g = np.log(np.maximum(y, POSITIVITY_FLOOR))
    lik = LikelihoodParams(params.looks, g)
    mu = params.penalty
    prox = ProxParams(gamma=params.lam / mu, inner_iters=params.inner_iters, tau=params.tau)
    state = ProxState.zeros(g.shape)

    u = g.copy() if u0 is None else as_image(u0, name="u0").copy()
    if u.shape != g.shape:
        raise ValueError(f"u0 shape {u.shape} does not match image {g.shape}")
    d = np.zeros_like(g)
    # z_1 = g exactly when u_0 = g and d_0 = 0, so the stopping test
    # starts once two z iterates exist
    x_prev = None
    z = u
    threshold = 10.0 ** (-params.stop_exponent)
    trace = SolveTrace()
    converged = False
    t0 = time.perf_counter()

    for k in range(1, params.max_outer + 1):
        try:
            z = z_update(u + d, lik, mu, params.newton_tol)
        except (OverflowError, RuntimeError) as exc:
            raise SolverError(str(exc), k) from exc
        if not params.warm_start:
            state = ProxState.zeros(g.shape)
        u = tv_prox(z - d, prox, state)
        d = d - (z - u)
        if not (np.all(np.isfinite(u)) and np.all(np.isfinite(d))):
            raise SolverError("non-finite iterate", k)

        x = np.exp(z)
        if x_prev is None:
            rel = float("inf")
        else:
            diff = x - x_prev
            rel = float(np.sqrt(np.sum(diff * diff)) / np.sqrt(np.sum(x_prev * x_prev)))
        r = z - u
        trace.records.append(
            TraceRecord(
                iter=k,
                objective=evaluate_objective(u, params, g),
                constraint_sq=float(np.sum(r * r)),
                rel_change=rel,
                inner_iters_cum=k * params.inner_iters,
                seconds=time.perf_counter() - t0,
            )
        )
        x_prev = x
        if rel <= threshold:
            converged = True
            break

    return MidalResult(
        estimate=np.exp(z),
        log_estimate=z,
        iterations=len(trace),
        trace=trace,
        converged=converged,
        split=u,
    )
