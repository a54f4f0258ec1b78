"""Exact expected-gradient estimators on a finite support.

``p_d`` is always an exact table (the infinite-data regime), so every
expectation below is a finite sum and the identities between estimators
hold to rounding error.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import expit, log_expit

from contrastlab.models import (
    DistributionTable,
    InvalidParameterError,
    as_params,
    as_table,
    check_sizes,
    softmax_probs,
    score_contract,
)


@dataclass(frozen=True, eq=False)
class Discriminator:
    """Tabular classifier: ``p_c(y=1 | x) = sigmoid(logit_table[x])``."""

    logit_table: np.ndarray

    def __post_init__(self):
        arr = np.array(self.logit_table, dtype=np.float64)
        if arr.ndim != 1 or not np.all(np.isfinite(arr)):
            raise InvalidParameterError("discriminator logits must be a finite 1-d vector")
        arr.setflags(write=False)
        object.__setattr__(self, "logit_table", arr)

    def __len__(self) -> int:
        return self.logit_table.shape[0]

    def __eq__(self, other):
        return isinstance(other, Discriminator) and np.array_equal(
            self.logit_table, other.logit_table
        )

    def __hash__(self):
        return hash(self.logit_table.tobytes())

    @classmethod
    def constant(cls, k: int, value: float = 0.0) -> "Discriminator":
        return cls(np.full(k, float(value)))

    def prob_real(self) -> np.ndarray:
        return expit(self.logit_table)


def as_disc(disc) -> Discriminator:
    return disc if isinstance(disc, Discriminator) else Discriminator(disc)


def value_function(p_d, p_g, disc) -> float:
    """Log likelihood of the classifier on an even data/generator mixture."""
    p_d, p_g, disc = as_table(p_d), as_table(p_g), as_disc(disc)
    check_sizes(p_d, p_g, disc)
    a = disc.logit_table
    return float(p_d.probs @ log_expit(a) + p_g.probs @ log_expit(-a))


def log_ratio_discriminator(p_num, p_den) -> Discriminator:
    p_num, p_den = as_table(p_num), as_table(p_den)
    check_sizes(p_num, p_den)
    return Discriminator(p_num.log_probs - p_den.log_probs)


def nce_discriminator(p_m, p_g) -> Discriminator:
    """Classifier implied by a model against noise: ``p_m / (p_m + p_g)``."""
    return log_ratio_discriminator(p_m, p_g)


def nce_objective(theta, p_g, p_d) -> float:
    theta = as_params(theta)
    check_sizes(theta, as_table(p_g), as_table(p_d))
    return value_function(p_d, p_g, nce_discriminator(softmax_probs(theta), p_g))


def nce_gradient(theta, p_g, p_d) -> np.ndarray:
    """Exact gradient of :func:`nce_objective` in the model logits.

    The noise table ``p_g`` is a constant: only the model side of the
    classifier log-ratio depends on ``theta``.
    """
    theta, p_g, p_d = as_params(theta), as_table(p_g), as_table(p_d)
    check_sizes(theta, p_g, p_d)
    p_m = softmax_probs(theta)
    a = nce_discriminator(p_m, p_g).logit_table
    weights = p_d.probs * expit(-a) - p_g.probs * expit(a)
    return score_contract(p_m.probs, weights)


def mle_gradient(theta, p_d) -> np.ndarray:
    """Expected score under the data: gradient of ``E_{p_d} log p_m``."""
    theta, p_d = as_params(theta), as_table(p_d)
    check_sizes(theta, p_d)
    return score_contract(softmax_probs(theta).probs, p_d.probs)


def frozen_model_copy(theta) -> DistributionTable:
    """Deep copy of the current model, detached from its parameters."""
    return DistributionTable(np.array(softmax_probs(theta).probs, copy=True))


def sce_gradient(theta, p_d) -> np.ndarray:
    """NCE gradient against a frozen copy of the current model.

    Equals half of :func:`mle_gradient` up to rounding.
    """
    theta = as_params(theta)
    return nce_gradient(theta, frozen_model_copy(theta), p_d)


def sce_objective_value(theta, p_d) -> float:
    theta = as_params(theta)
    return nce_objective(theta, frozen_model_copy(theta), p_d)


def vanishing_term(theta) -> np.ndarray:
    """Noise-side part of the self-contrastive gradient; identically zero."""
    theta = as_params(theta)
    p_g = frozen_model_copy(theta).probs
    p_m = softmax_probs(theta).probs
    weights = p_g * p_m / (p_m + p_g)
    return score_contract(p_m, weights)


def fit_nce(p_d, p_g, theta0, lr: float = 1.0, max_iter: int = 100_000,
            grad_tol: float = 1e-12) -> tuple[np.ndarray, int]:
    """Plain gradient ascent on the NCE objective with fixed noise.

    Returns the final logits and the number of steps taken.
    """
    p_d, p_g = as_table(p_d), as_table(p_g)
    theta = np.array(as_params(theta0).logits)
    for step in range(max_iter):
        g = nce_gradient(theta, p_g, p_d)
        if np.max(np.abs(g)) <= grad_tol:
            return theta, step
        theta = theta + lr * g
    return theta, max_iter
