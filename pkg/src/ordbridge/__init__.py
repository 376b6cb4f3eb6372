"""Bayesian cumulative-logit models with Bridge-distributed random effects.

Fits two- and three-level clustered ordinal regressions whose random
intercepts follow the Bridge distribution for the logit link, so that the
regression coefficients keep a marginal (population-averaged) logistic
interpretation.  Includes a No-U-Turn sampler, WAIC/LPML/DIC model
comparison, posterior predictive checks, and a batch CLI.
"""

__version__ = "0.1.0"

from . import bridge, criteria, data, diagnostics, kernels, model, ppc, sampler
from .criteria import PointwiseLogLik, dic, lpml, waic
from .data import DataError, EncodingPlan, TrueParams, generate, load
from .model import (ConstrainedParams, Dataset, ModelSpec, PosteriorModel,
                    effect_interpretation, marginalize, pointwise_loglik)
from .ppc import diff_code, ppc_report, simulate_replicate
from .sampler import DrawsStore, SamplerConfig, SamplingError, run_chains

__all__ = [
    "__version__", "bridge", "criteria", "data", "diagnostics", "kernels",
    "model", "ppc", "sampler", "PointwiseLogLik", "dic", "lpml", "waic",
    "DataError", "EncodingPlan", "TrueParams", "generate", "load",
    "ConstrainedParams", "Dataset", "ModelSpec", "PosteriorModel",
    "effect_interpretation", "marginalize", "pointwise_loglik", "diff_code",
    "ppc_report", "simulate_replicate", "DrawsStore", "SamplerConfig",
    "SamplingError", "run_chains",
]
