"""Exact finite-support laboratory for MLE, NCE, self-contrastive estimation
and the GAN distinguishability game."""

from contrastlab.models import (
    DistributionTable,
    InvalidParameterError,
    ParamVector,
    Support,
    SupportMismatchError,
    softmax_probs,
    softmax_score,
)
from contrastlab.estimators import (
    Discriminator,
    mle_gradient,
    nce_discriminator,
    nce_gradient,
    nce_objective,
    sce_gradient,
    sce_objective_value,
    value_function,
    vanishing_term,
)

__version__ = "0.1.0"

__all__ = [
    "Discriminator",
    "DistributionTable",
    "InvalidParameterError",
    "ParamVector",
    "Support",
    "SupportMismatchError",
    "mle_gradient",
    "nce_discriminator",
    "nce_gradient",
    "nce_objective",
    "sce_gradient",
    "sce_objective_value",
    "softmax_probs",
    "softmax_score",
    "value_function",
    "vanishing_term",
]
