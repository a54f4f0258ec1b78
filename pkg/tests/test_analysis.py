import json
import math
from pathlib import Path

import numpy as np
import pytest

from contrastlab.analysis import (
    compare_gradients,
    concentrated_scenario,
    exact_per_sample_variance,
    finite_difference_gradient,
    variance_study,
)
from contrastlab.estimators import nce_gradient, nce_objective
from contrastlab.game import MAXIMUM_LIKELIHOOD, MINIMAX, CostKind, GeneratorCostVariant, mc_generator_gradient
from contrastlab.models import DistributionTable
from contrastlab.suites import finite_difference_cases, random_case

GOLDEN = Path(__file__).parent / "golden"
N_GRID = [10**2, 10**3, 10**4, 10**5]


class TestFiniteDifferences:
    def test_quadratic_exact(self):
        g = finite_difference_gradient(lambda t: float(np.sum(t**2)), [1.0, 2.0], 1e-5)
        np.testing.assert_allclose(g, [2.0, 4.0], atol=1e-9)

    def test_constant(self):
        np.testing.assert_array_equal(finite_difference_gradient(lambda t: 3.0, np.zeros(4)), 0.0)

    def test_rejects_bad_step(self):
        with pytest.raises(ValueError):
            finite_difference_gradient(lambda t: 0.0, [0.0], 0.0)

    def test_rejects_nonfinite_objective(self):
        with pytest.raises(ValueError):
            finite_difference_gradient(lambda t: math.log(t[0]), [0.0, 1.0])

    def test_nce_cross_check(self, rng):
        theta, p_d = random_case(rng, 3, 8)
        p_g = DistributionTable.normalized(rng.random(len(theta)) + 0.1)
        fd = finite_difference_gradient(lambda t: nce_objective(t, p_g, p_d), theta)
        assert compare_gradients(nce_gradient(theta, p_g, p_d), fd, 1e-6, normwise=True)

    def test_every_analytic_gradient_covered(self, rng):
        names = {name for name, *_ in finite_difference_cases(rng)}
        assert names == {"nce_gradient", "mle_gradient", "sce_gradient", "discriminator_gradient",
                         "generator_gradient_exact[minimax]", "generator_gradient_exact[heuristic]",
                         "generator_gradient_exact[mle]"}


class TestCompareGradients:
    def test_identical(self):
        rep = compare_gradients([1.0, -2.0], [1.0, -2.0], 1e-10)
        assert rep.passed and rep.max_abs_diff == 0 and rep.max_rel_diff == 0

    def test_relative_failure(self):
        rep = compare_gradients([1.0], [1.0 + 1e-6], 1e-10)
        assert not rep.passed
        assert rep.max_rel_diff == pytest.approx(1e-6, rel=1e-5)

    def test_absolute_fallback(self):
        assert compare_gradients([0.0], [1e-13], 1e-10).passed

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            compare_gradients([0.0, 1.0], [0.0], 1e-10)

    def test_normwise(self):
        rep = compare_gradients([1.0, 1e-4 + 1e-9], [1.0, 1e-4], 1e-6, normwise=True)
        assert rep.passed and rep.max_rel_diff == pytest.approx(1e-9, rel=1e-5)
        assert not compare_gradients([1.0, 1e-4 + 1e-9], [1.0, 1e-4], 1e-6).passed


class TestScenario:
    def test_shape(self):
        p_d, theta_g, disc = concentrated_scenario()
        assert len(p_d) == 128 and p_d.probs[0] == 1 - 1e-9
        np.testing.assert_array_equal(theta_g.logits, 0.0)
        # data outcome looks real, everything else almost certainly fake
        assert disc.prob_real()[0] > 0.99 and disc.prob_real()[1:].max() < 2e-9

    def test_exact_variance_golden(self):
        golden = json.loads((GOLDEN / "variance_ratio.json").read_text())
        _, theta_g, disc = concentrated_scenario()
        for kind in CostKind:
            assert exact_per_sample_variance(GeneratorCostVariant(kind), disc, theta_g) == pytest.approx(
                golden["exact_per_sample_variance"][kind.label], rel=1e-12)


class TestVarianceStudy:
    def test_rows_sorted_and_complete(self):
        rows = variance_study([1000, 100], seed=0)
        assert [(r.variant, r.n_samples) for r in rows] == [(k, n) for k in CostKind for n in (100, 1000)]
        assert all(r.per_sample_variance >= 0 for r in rows)

    def test_invalid_n(self):
        with pytest.raises(ValueError):
            variance_study([100, 0])

    def test_mle_exceeds_minimax(self):
        for seed in range(5):
            rows = {(r.variant, r.n_samples): r for r in variance_study(N_GRID, seed)}
            for n in N_GRID:
                assert (rows[CostKind.MAXIMUM_LIKELIHOOD, n].per_sample_variance
                        > rows[CostKind.MINIMAX, n].per_sample_variance)

    def test_error_shrinks_with_n(self):
        errs = {}
        for seed in range(10):
            for r in variance_study(N_GRID, seed):
                errs.setdefault((r.variant, r.n_samples), []).append(r.grad_error_norm)
        for kind in CostKind:
            medians = [np.median(errs[kind, n]) for n in N_GRID]
            assert all(b < a for a, b in zip(medians, medians[1:])), (kind, medians)

    def test_variance_converges_to_oracle(self):
        _, theta_g, disc = concentrated_scenario()
        for kind in CostKind:
            v = GeneratorCostVariant(kind)
            exact = exact_per_sample_variance(v, disc, theta_g)
            med = np.median([mc_generator_gradient(v, disc, theta_g, 10**5, s)[1] for s in range(10)])
            assert abs(med / exact - 1) <= 0.05

    def test_regression_ratio(self):
        golden = json.loads((GOLDEN / "variance_ratio.json").read_text())
        _, theta_g, disc = concentrated_scenario()
        ratio = (exact_per_sample_variance(MAXIMUM_LIKELIHOOD, disc, theta_g)
                 / exact_per_sample_variance(MINIMAX, disc, theta_g))
        assert ratio == pytest.approx(golden["oracle_ratio_mle_over_minimax"], rel=1e-12)
        rows = {(r.variant, r.n_samples): r for r in variance_study([1000], seed=0)}
        emp = (rows[CostKind.MAXIMUM_LIKELIHOOD, 1000].per_sample_variance
               / rows[CostKind.MINIMAX, 1000].per_sample_variance)
        assert emp == pytest.approx(golden["empirical_ratio_mle_over_minimax_n1000_seed0"], rel=1e-12)
