import numpy as np
import pytest

from oracles import scalar_z_minimizer
from midal.image import tv_value
from midal.likelihood import LikelihoodParams, neg_log_likelihood
from midal.solver import MidalParams, SolverError, evaluate_objective, midal_solve
from midal.speckle import SpeckleParams, apply_speckle


@pytest.fixture(scope="module")
def small_problem():
    rng = np.random.default_rng(3)
    clean = np.full((32, 32), 0.2)
    clean[8:24, 8:24] = 0.8
    clean[12:20, 2:6] = 0.5
    noisy = apply_speckle(clean, SpeckleParams(4, seed=1))
    return clean, noisy


def test_params_defaults_and_validation():
    p = MidalParams(looks=3, lam=4)
    assert p.penalty == 4 and p.inner_iters == 20 and p.newton_tol == 1e-10 and p.max_outer == 500
    assert MidalParams(looks=3, lam=4, mu=2).penalty == 2
    for bad in [dict(looks=0.5, lam=1), dict(looks=1, lam=0), dict(looks=1, lam=1, mu=-1), dict(looks=1, lam=1, inner_iters=0)]:
        with pytest.raises(ValueError):
            MidalParams(**bad)


def test_rejects_nonpositive_input():
    with pytest.raises(ValueError):
        midal_solve(np.array([[1.0, 0.0], [1.0, 1.0]]), MidalParams(1, 1))


def test_objective_reduces_to_likelihood(rng):
    g = rng.standard_normal((5, 5))
    u = rng.standard_normal((5, 5))
    p = MidalParams(2, 3.0)
    nll = neg_log_likelihood(u, LikelihoodParams(2, g))
    assert evaluate_objective(u, p, g) == pytest.approx(nll + 3.0 * tv_value(u))
    assert evaluate_objective(np.full((5, 5), 0.3), p, g) == pytest.approx(neg_log_likelihood(np.full((5, 5), 0.3), LikelihoodParams(2, g)))


def test_constant_observation():
    c = 0.37
    result = midal_solve(np.full((16, 16), c), MidalParams(looks=3, lam=4))
    est = result.estimate
    assert np.ptp(est) <= 0.01 * est.mean()
    # single-pixel problem: the z-update fixed point at z' = g
    g = np.log(c)
    ref = np.exp(scalar_z_minimizer(g, g, 4 / 3))
    np.testing.assert_allclose(est, ref, rtol=0.01)


def test_vanishing_lambda_returns_observation(small_problem):
    _, noisy = small_problem
    result = midal_solve(noisy, MidalParams(looks=4, lam=1e-8))
    np.testing.assert_allclose(result.estimate, noisy, rtol=1e-3)


def test_trace_records(small_problem):
    _, noisy = small_problem
    result = midal_solve(noisy, MidalParams(looks=4, lam=3))
    tr = result.trace
    assert len(tr) == result.iterations
    assert [r.iter for r in tr.records] == list(range(1, result.iterations + 1))
    assert np.all(tr.column("constraint_sq") >= 0)
    assert tr.column("inner_iters_cum")[-1] == 20 * result.iterations
    assert np.all(np.diff(tr.column("seconds")) >= 0)
    assert result.converged and tr.records[-1].rel_change <= 1e-4
    assert np.all(result.estimate > 0)
    np.testing.assert_array_equal(result.estimate, np.exp(result.log_estimate))


def test_objective_settles(small_problem):
    _, noisy = small_problem
    obj = midal_solve(noisy, MidalParams(looks=4, lam=3)).trace.column("objective")
    assert obj[-1] <= obj[1]


def test_max_outer_exhaustion_is_not_an_error(small_problem):
    _, noisy = small_problem
    result = midal_solve(noisy, MidalParams(looks=4, lam=3, max_outer=3))
    assert result.iterations == 3 and not result.converged


def test_deterministic(small_problem):
    _, noisy = small_problem
    a = midal_solve(noisy, MidalParams(looks=4, lam=3))
    b = midal_solve(noisy, MidalParams(looks=4, lam=3))
    assert a.estimate.tobytes() == b.estimate.tobytes()
    assert a.iterations == b.iterations


def test_denoising_helps(small_problem):
    clean, noisy = small_problem
    est = midal_solve(noisy, MidalParams(looks=4, lam=3)).estimate
    assert np.linalg.norm(est - clean) < 0.5 * np.linalg.norm(noisy - clean)


def test_scale_equivariance(small_problem):
    # log-domain solver: scaling y by c shifts g by log c and scales the estimate by c
    _, noisy = small_problem
    a = midal_solve(noisy, MidalParams(looks=4, lam=3))
    b = midal_solve(100.0 * noisy, MidalParams(looks=4, lam=3))
    np.testing.assert_allclose(b.estimate, 100.0 * a.estimate, rtol=1e-8)


def test_bad_initialization_shape(small_problem):
    _, noisy = small_problem
    with pytest.raises(ValueError):
        midal_solve(noisy, MidalParams(looks=4, lam=3), u0=np.zeros((3, 3)))


def test_far_initialization_still_solves():
    noisy = np.full((4, 4), 1.0)
    result = midal_solve(noisy, MidalParams(looks=1, lam=1), u0=np.full((4, 4), -2000.0))
    assert np.all(np.isfinite(result.estimate))


def test_subproblem_failure_reports_iteration(monkeypatch, small_problem):
    _, noisy = small_problem
    calls = []

    def flaky(*args, **kwargs):
        calls.append(1)
        if len(calls) == 3:
            raise OverflowError("boom")
        return real(*args, **kwargs)

    import midal.solver as solver

    real = solver.z_update
    monkeypatch.setattr(solver, "z_update", flaky)
    with pytest.raises(SolverError, match="iteration 3") as info:
        midal_solve(noisy, MidalParams(looks=4, lam=3))
    assert info.value.iteration == 3
