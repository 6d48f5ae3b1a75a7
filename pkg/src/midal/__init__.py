"""Total-variation denoising of M-look speckled images by ADMM in the log domain."""
from .image import DualField, GradientField, as_image, divergence, gradient, tv_value
from .likelihood import LikelihoodParams, neg_log_likelihood, z_update, z_update_oracle
from .metrics import EvalReport, evaluate, lambda_sweep
from .solver import MidalParams, MidalResult, SolveTrace, evaluate_objective, midal_solve
from .speckle import SpeckleParams, apply_speckle, rescale_image, sample_gamma_noise
from .tvprox import ProxParams, ProxState, prox_duality_gap, tv_prox

__all__ = [
    "DualField",
    "EvalReport",
    "GradientField",
    "LikelihoodParams",
    "MidalParams",
    "MidalResult",
    "ProxParams",
    "ProxState",
    "SolveTrace",
    "SpeckleParams",
    "apply_speckle",
    "as_image",
    "divergence",
    "evaluate",
    "evaluate_objective",
    "gradient",
    "lambda_sweep",
    "midal_solve",
    "neg_log_likelihood",
    "prox_duality_gap",
    "rescale_image",
    "sample_gamma_noise",
    "tv_prox",
    "tv_value",
    "z_update",
    "z_update_oracle",
]
