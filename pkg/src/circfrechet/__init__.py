"""Kernel smoothing with a circular predictor.

Directional kernel density estimation and local constant / local linear
Fréchet regression for responses in a metric space, with the asymptotic
constants needed to check convergence rates by simulation.
"""

__version__ = "0.1.0"

from .errors import *  # noqa: F401,F403
from .kernel import (  # noqa: F401
    DirectionalKernel, KernelFamily, custom_kernel, exponential_kernel, get_kernel,
    lambda_h, moment_a, normalizing_c, uniform_kernel, von_mises_kernel,
)
from .circle import CircularSample, canonical_angle, chord_arg, sample_von_mises  # noqa: F401
from .kde import (  # noqa: F401
    DensityEstimate, DensityModel, amise, h_amise, mise_empirical, score_Sf, von_mises_density,
)
from .metric import (  # noqa: F401
    CircleArc, EuclideanReal, FrechetEstimate, Wasserstein1D, get_space, weighted_frechet_mean,
)
from .frechet_lc import PairedSample, RegressionModel, lc_estimate, lc_objective  # noqa: F401
from .frechet_ll import effective_weights, ll_estimate, ll_objective, local_moments  # noqa: F401
from .bandwidth import BandwidthGrid, cv_bandwidth_frechet, plugin_bandwidth  # noqa: F401
from .harness import ExperimentConfig, fit_loglog_slope, run_rate_experiment  # noqa: F401
