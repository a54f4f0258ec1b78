"""Randomized verification suites for the gradient and value identities.

Each suite returns a report dict with the keys
``suite, trials, max_abs_diff, max_rel_diff, tolerance, pass``.
Identity suites pass on ``max_rel_diff``; suites whose target is an exact
zero or an exact constant (objective value, vanishing term, offsets,
stationarity) pass on ``max_abs_diff``.
"""

from __future__ import annotations

import math

import numpy as np

from contrastlab.analysis import compare_gradients, finite_difference_gradient
from contrastlab.estimators import (
    Discriminator,
    mle_gradient,
    nce_gradient,
    nce_objective,
    sce_gradient,
    sce_objective_value,
    value_function,
    vanishing_term,
)
from contrastlab.game import (
    CostKind,
    GeneratorCostVariant,
    MAXIMUM_LIKELIHOOD,
    discriminator_gradient,
    generator_gradient_exact,
    optimal_discriminator,
)
from contrastlab.models import DistributionTable, ParamVector, softmax_probs

IDENTITY_TOL = 1e-10
ABSOLUTE_TOL = 1e-12
FD_TOL = 1e-6
FD_STEP = 1e-5
NEG_TWO_LOG_TWO = -2.0 * math.log(2.0)
OFFSETS = (-10.0, -1.0, 0.0, 1.0, 10.0)


def random_case(rng: np.random.Generator, k_min: int = 2, k_max: int = 50):
    """Random ``(theta, p_d)`` with K drawn uniformly from ``k_min..k_max``."""
    k = int(rng.integers(k_min, k_max + 1))
    theta = ParamVector(rng.normal(0.0, 2.0, size=k))
    p_d = DistributionTable.normalized(rng.dirichlet(np.ones(k)) + 1e-6)
    return theta, p_d


def _report(suite, trials, max_abs, max_rel, tol, passed):
    return {
        "suite": suite,
        "trials": int(trials),
        "max_abs_diff": float(max_abs),
        "max_rel_diff": float(max_rel),
        "tolerance": float(tol),
        "pass": bool(passed),
    }


def _gradient_suite(name, pairs, trials, tol, normwise=False):
    max_abs = max_rel = 0.0
    ok = True
    for cand, ref in pairs:
        rep = compare_gradients(cand, ref, tol, normwise=normwise)
        max_abs, max_rel = max(max_abs, rep.max_abs_diff), max(max_rel, rep.max_rel_diff)
        ok &= rep.passed
    return _report(name, trials, max_abs, max_rel, tol, ok)


def sce_identity_suite(trials=100, k_min=2, k_max=50, seed=0):
    """Self-contrastive gradient against half the likelihood gradient."""
    rng = np.random.default_rng(seed)
    cases = [random_case(rng, k_min, k_max) for _ in range(trials)]
    pairs = ((sce_gradient(t, p), 0.5 * mle_gradient(t, p)) for t, p in cases)
    return _gradient_suite("sce-mle-gradient", pairs, trials, IDENTITY_TOL)


def sce_objective_suite(trials=50, k_min=2, k_max=50, seed=0):
    rng = np.random.default_rng(seed)
    diffs = [abs(sce_objective_value(*random_case(rng, k_min, k_max)) - NEG_TWO_LOG_TWO)
             for _ in range(trials)]
    worst = max(diffs)
    return _report("sce-objective", trials, worst, worst / abs(NEG_TWO_LOG_TWO),
                   ABSOLUTE_TOL, worst <= ABSOLUTE_TOL)


def vanishing_term_suite(trials=100, k_min=2, k_max=50, seed=0):
    rng = np.random.default_rng(seed)
    worst = max(float(np.max(np.abs(vanishing_term(random_case(rng, k_min, k_max)[0]))))
                for _ in range(trials))
    return _report("vanishing-term", trials, worst, worst / 1e-12, ABSOLUTE_TOL, worst <= ABSOLUTE_TOL)


def gan_mle_suite(trials=100, k_min=2, k_max=50, seed=0):
    """Likelihood-cost generator gradient under the optimal discriminator."""
    rng = np.random.default_rng(seed)
    pairs = []
    for _ in range(trials):
        theta_g, p_d = random_case(rng, k_min, k_max)
        disc = optimal_discriminator(p_d, softmax_probs(theta_g))
        pairs.append((generator_gradient_exact(MAXIMUM_LIKELIHOOD, disc, theta_g),
                      -mle_gradient(theta_g, p_d)))
    return _gradient_suite("gan-mle-recovery", pairs, trials, IDENTITY_TOL)


def offset_invariance_suite(trials=20, k_min=2, k_max=50, seed=0):
    rng = np.random.default_rng(seed)
    worst = worst_rel = 0.0
    for _ in range(trials):
        theta_g, _ = random_case(rng, k_min, k_max)
        disc = Discriminator(rng.normal(0.0, 2.0, size=len(theta_g)))
        for kind in CostKind:
            base = generator_gradient_exact(GeneratorCostVariant(kind), disc, theta_g)
            for c in OFFSETS:
                shifted = generator_gradient_exact(GeneratorCostVariant(kind, c), disc, theta_g)
                rep = compare_gradients(shifted, base, ABSOLUTE_TOL)
                worst, worst_rel = max(worst, rep.max_abs_diff), max(worst_rel, rep.max_rel_diff)
    return _report("offset-invariance", trials, worst, worst_rel, ABSOLUTE_TOL, worst <= ABSOLUTE_TOL)


def disc_stationarity_suite(trials=20, perturbations=200, k_min=2, k_max=50, seed=0):
    """Zero gradient at the optimal discriminator, and no perturbation improves V."""
    rng = np.random.default_rng(seed)
    worst_grad = 0.0
    increases = 0
    for _ in range(trials):
        theta_g, p_d = random_case(rng, k_min, k_max)
        p_g = softmax_probs(theta_g)
        a_star = optimal_discriminator(p_d, p_g)
        worst_grad = max(worst_grad, float(np.max(np.abs(discriminator_gradient(a_star, p_d, p_g)))))
        v_star = value_function(p_d, p_g, a_star)
        for _ in range(perturbations):
            delta = rng.uniform(-0.1, 0.1, size=len(p_d))
            if value_function(p_d, p_g, Discriminator(a_star.logit_table + delta)) > v_star:
                increases += 1
    passed = worst_grad <= ABSOLUTE_TOL and increases == 0
    return _report("disc-stationarity", trials, worst_grad, worst_grad / 1e-12, ABSOLUTE_TOL, passed)


def finite_difference_cases(rng, k_min=2, k_max=12):
    """One random instance of every analytic gradient, paired with its objective.

    Yields ``(name, analytic_gradient, objective, point)``.
    """
    theta, p_d = random_case(rng, k_min, k_max)
    k = len(theta)
    p_g = DistributionTable.normalized(rng.dirichlet(np.ones(k)) + 1e-3)
    disc = Discriminator(rng.normal(0.0, 1.5, size=k))

    yield ("nce_gradient", nce_gradient(theta, p_g, p_d),
           lambda t: nce_objective(t, p_g, p_d), theta)
    yield ("mle_gradient", mle_gradient(theta, p_d),
           lambda t: float(p_d.probs @ np.log(softmax_probs(t).probs)), theta)
    frozen = softmax_probs(theta)
    yield ("sce_gradient", sce_gradient(theta, p_d),
           lambda t: nce_objective(t, frozen, p_d), theta)
    for kind in CostKind:
        variant = GeneratorCostVariant(kind)
        yield (f"generator_gradient_exact[{kind.value}]",
               generator_gradient_exact(variant, disc, theta),
               lambda t, v=variant: float(softmax_probs(t).probs @ v(disc.logit_table)), theta)
    yield ("discriminator_gradient", discriminator_gradient(disc, p_d, p_g),
           lambda a: value_function(p_d, p_g, Discriminator(a)), disc.logit_table)


def finite_difference_suite(trials=20, seed=0, h=FD_STEP):
    rng = np.random.default_rng(seed)
    pairs = []
    for _ in range(trials):
        for _name, grad, objective, point in finite_difference_cases(rng):
            pairs.append((grad, finite_difference_gradient(objective, point, h)))
    return _gradient_suite("finite-differences", pairs, trials, FD_TOL, normwise=True)


def all_suites(seed=0):
    return [
        sce_identity_suite(seed=seed),
        sce_objective_suite(seed=seed),
        vanishing_term_suite(seed=seed),
        gan_mle_suite(seed=seed),
        offset_invariance_suite(seed=seed),
        disc_stationarity_suite(seed=seed),
        finite_difference_suite(seed=seed),
    ]
