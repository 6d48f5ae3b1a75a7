"""Reconstruction quality measures and the MSE-driven lambda sweep."""
from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .solver import MidalParams, midal_solve


@dataclass(frozen=True)
class EvalReport:
    err: float
    mae: float
    mse: float


def evaluate(estimate, truth) -> EvalReport:
    """Relative l2 error, mean absolute deviation and mean squared error."""
    est = np.asarray(estimate, dtype=np.float64)
    ref = np.asarray(truth, dtype=np.float64)
    if est.shape != ref.shape:
        raise ValueError(f"shape mismatch: estimate {est.shape} vs truth {ref.shape}")
    norm = np.linalg.norm(ref)
    if norm == 0:
        raise ValueError("truth image is identically zero")
    r = est - ref
    return EvalReport(
        err=float(np.linalg.norm(r) / norm),
        mae=float(np.mean(np.abs(r))),
        mse=float(np.mean(r * r)),
    )


class SweepError(RuntimeError):
    def __init__(self, lam: float, cause: Exception):
        super().__init__(f"lambda={lam}: {cause}")
        self.lam = lam


def lambda_sweep(noisy, truth, params: MidalParams, grid, *, track_mu: bool = True):
    """Pick the lambda in ``grid`` with the lowest MSE against ``truth``.

    Every grid point gets a fresh solve.  With ``track_mu`` the penalty
    follows lambda (``mu = lam``); otherwise ``params.mu`` is kept.  Ties go
    to the smaller lambda.  Returns ``(best_lambda, [(lam, EvalReport), ...])``
    in grid order.
    """
    grid = [float(v) for v in grid]
    if not grid:
        raise ValueError("lambda grid is empty")
    if any(not v > 0 for v in grid):
        raise ValueError(f"lambda grid must be positive, got {grid}")
    reports = []
    for lam in grid:
        p = replace(params, lam=lam, mu=None if track_mu else params.mu)
        try:
            result = midal_solve(noisy, p)
        except Exception as exc:
            raise SweepError(lam, exc) from exc
        reports.append((lam, evaluate(result.estimate, truth)))
    best = min(reports, key=lambda item: (item[1].mse, item[0]))[0]
    return best, reports
