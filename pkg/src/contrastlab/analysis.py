"""Independent oracles and Monte Carlo studies."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from contrastlab.game import (
    CostKind,
    GeneratorCostVariant,
    generator_gradient_exact,
    mc_generator_gradient,
    optimal_discriminator,
)
from contrastlab.models import DistributionTable, ParamVector, as_params, softmax_probs, softmax_score

REL_FLOOR = 1e-12

SCENARIO_K = 128
SCENARIO_EPS = 1e-9


def finite_difference_gradient(objective: Callable[[np.ndarray], float], theta, h: float = 1e-5) -> np.ndarray:
    """Central differences ``[obj(theta + h e_j) - obj(theta - h e_j)] / 2h``."""
    if not h > 0:
        raise ValueError("step h must be positive")
    theta = np.array(getattr(theta, "logits", theta), dtype=np.float64)
    grad = np.empty_like(theta)
    for j in range(theta.size):
        step = np.zeros_like(theta)
        step[j] = h
        hi, lo = float(objective(theta + step)), float(objective(theta - step))
        if not (np.isfinite(hi) and np.isfinite(lo)):
            raise ValueError(f"objective not finite near component {j}")
        grad[j] = (hi - lo) / (2 * h)
    return grad


@dataclass(frozen=True)
class GradientReport:
    candidate: np.ndarray
    reference: np.ndarray
    max_abs_diff: float
    max_rel_diff: float
    tolerance: float
    passed: bool

    def __bool__(self):
        return self.passed


def compare_gradients(candidate, reference, tolerance: float, normwise: bool = False) -> GradientReport:
    """Per-component relative error with the denominator floored at 1e-12.

    A component also passes when its absolute difference is at most 1e-12,
    so identities that hold at exact zeros are not failed by rounding noise.
    With ``normwise`` every component is scaled by ``max(||reference||_inf,
    1e-12)`` instead, which suits finite-difference references whose absolute
    noise does not shrink with the component.
    """
    c = np.asarray(candidate, dtype=np.float64)
    r = np.asarray(reference, dtype=np.float64)
    if c.shape != r.shape:
        raise ValueError(f"length mismatch: {c.shape} vs {r.shape}")
    diff = np.abs(c - r)
    scale = np.max(np.abs(r), initial=0.0) if normwise else np.abs(r)
    rel = diff / np.maximum(scale, REL_FLOOR)
    passed = bool(np.all((rel <= tolerance) | (diff <= REL_FLOOR)))
    return GradientReport(c, r, float(diff.max(initial=0.0)), float(rel.max(initial=0.0)),
                          tolerance, passed)


# -- variance study --------------------------------------------------------


def concentrated_scenario():
    """Uniform generator over 128 outcomes against nearly one-hot data.

    Returns ``(p_d, theta_g, disc)`` with the discriminator at its optimum.
    """
    p_d = DistributionTable.smoothed_onehot(SCENARIO_K, 0, SCENARIO_EPS)
    theta_g = ParamVector(np.zeros(SCENARIO_K))
    disc = optimal_discriminator(p_d, softmax_probs(theta_g))
    return p_d, theta_g, disc


def exact_per_sample_variance(variant, disc, theta_g) -> float:
    """Closed-form ``sum_x p_g(x) ||f(a(x)) score(x) - g||^2`` by enumeration."""
    theta_g = as_params(theta_g)
    p = softmax_probs(theta_g).probs
    f = GeneratorCostVariant(variant.kind, variant.offset)(disc.logit_table)
    rows = np.stack([f[x] * softmax_score(theta_g, x) for x in range(len(p))])
    g = p @ rows
    return float(p @ np.sum((rows - g) ** 2, axis=1))


@dataclass(frozen=True)
class VarianceStudyRow:
    variant: CostKind
    n_samples: int
    per_sample_variance: float
    grad_error_norm: float


def variance_study(n_samples_list: Sequence[int], seed: int = 0) -> list[VarianceStudyRow]:
    """Monte Carlo generator gradients for every cost kind on the concentrated scenario."""
    if any(int(n) != n or n < 1 for n in n_samples_list):
        raise ValueError("every n must be a positive integer")
    _, theta_g, disc = concentrated_scenario()
    rows = []
    for kind in CostKind:
        variant = GeneratorCostVariant(kind)
        exact = generator_gradient_exact(variant, disc, theta_g)
        for n in sorted(set(int(n) for n in n_samples_list)):
            est, var = mc_generator_gradient(variant, disc, theta_g, n, seed)
            rows.append(VarianceStudyRow(kind, n, var, float(np.linalg.norm(est - exact))))
    return rows
