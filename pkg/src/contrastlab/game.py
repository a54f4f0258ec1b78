"""Generator-side machinery of the distinguishability game.

Covers the optimal tabular discriminator, the three pointwise generator
costs, exact and Monte Carlo generator gradients, and a gradient-dynamics
simulator for two-player games (the tabular softmax game and a bilinear
fixture ``V(u, v) = u * v``).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np
from scipy.special import expit, log_expit

from contrastlab.estimators import (
    Discriminator,
    as_disc,
    log_ratio_discriminator,
    value_function,
)
from contrastlab.models import (
    DistributionTable,
    InvalidParameterError,
    ParamVector,
    as_params,
    as_table,
    check_sizes,
    softmax_probs,
    score_contract,
)

MC_CHUNK = 1 << 18


class CostKind(enum.Enum):
    MINIMAX = "minimax"
    HEURISTIC = "heuristic"
    MAXIMUM_LIKELIHOOD = "mle"

    @property
    def label(self) -> str:
        return {"minimax": "Minimax", "heuristic": "Heuristic", "mle": "MaximumLikelihood"}[self.value]


@dataclass(frozen=True)
class GeneratorCostVariant:
    """Pointwise generator cost ``f(a)`` as a function of discriminator logit.

    minimax:            -softplus(a)      (the game's own generator term)
    heuristic:          -log sigmoid(a)   (non-saturating reformulation)
    mle:                -exp(a)           (recovers the likelihood gradient)
    """

    kind: CostKind
    offset: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "kind", CostKind(self.kind))
        if not np.isfinite(self.offset):
            raise InvalidParameterError("cost offset must be finite")

    def __call__(self, a):
        a = np.asarray(a, dtype=np.float64)
        if self.kind is CostKind.MINIMAX:
            f = log_expit(-a)
        elif self.kind is CostKind.HEURISTIC:
            f = -log_expit(a)
        else:
            f = -np.exp(a)
        return f + self.offset

    def slope(self, a):
        """Derivative ``df/da``; negative everywhere for every kind."""
        a = np.asarray(a, dtype=np.float64)
        if self.kind is CostKind.MINIMAX:
            return -expit(a)
        if self.kind is CostKind.HEURISTIC:
            return -expit(-a)
        return -np.exp(a)


MINIMAX = GeneratorCostVariant(CostKind.MINIMAX)
HEURISTIC = GeneratorCostVariant(CostKind.HEURISTIC)
MAXIMUM_LIKELIHOOD = GeneratorCostVariant(CostKind.MAXIMUM_LIKELIHOOD)


def as_variant(variant) -> GeneratorCostVariant:
    if isinstance(variant, GeneratorCostVariant):
        return variant
    return GeneratorCostVariant(CostKind(variant))


def generator_cost(variant, a: float) -> float:
    if not np.isfinite(a):
        raise InvalidParameterError("discriminator logit must be finite")
    return float(as_variant(variant)(a))


def optimal_discriminator(p_d, p_g) -> Discriminator:
    """Maximizer of the value function for fixed data and generator tables."""
    return log_ratio_discriminator(p_d, p_g)


def discriminator_gradient(disc, p_d, p_g) -> np.ndarray:
    """Gradient of the value function in the tabular discriminator logits."""
    disc, p_d, p_g = as_disc(disc), as_table(p_d), as_table(p_g)
    check_sizes(disc, p_d, p_g)
    a = disc.logit_table
    return p_d.probs * expit(-a) - p_g.probs * expit(a)


def generator_gradient_exact(variant, disc, theta_g) -> np.ndarray:
    """Exact gradient of ``E_{x ~ p_g} f(a(x))`` in the generator logits."""
    variant, disc, theta_g = as_variant(variant), as_disc(disc), as_params(theta_g)
    check_sizes(disc, theta_g)
    p_g = softmax_probs(theta_g).probs
    return score_contract(p_g, variant(disc.logit_table) * p_g)


def cost_curve(a_min: float, a_max: float, n_points: int) -> np.ndarray:
    """Rows ``(a, f_minimax, f_heuristic, f_mle)`` on an even grid."""
    if not (np.isfinite(a_min) and np.isfinite(a_max)) or not a_min < a_max:
        raise ValueError("need finite a_min < a_max")
    if n_points < 2:
        raise ValueError("need at least two grid points")
    a = np.linspace(a_min, a_max, n_points)
    return np.column_stack([a, MINIMAX(a), HEURISTIC(a), MAXIMUM_LIKELIHOOD(a)])


# -- Monte Carlo -----------------------------------------------------------


def sample_outcomes(probs: np.ndarray, n: int, seed: int, chunk: int = MC_CHUNK) -> np.ndarray:
    """Inverse-CDF sampling driven by a counter-based (Philox) uniform stream.

    Draw ``i`` always consumes the ``i``-th uniform of the stream, so the
    result does not depend on ``chunk``.
    """
    rng = np.random.Generator(np.random.Philox(key=seed))
    cdf = np.cumsum(probs)
    out = np.empty(n, dtype=np.int64)
    for start in range(0, n, chunk):
        stop = min(n, start + chunk)
        u = rng.random(stop - start) * cdf[-1]
        out[start:stop] = np.searchsorted(cdf, u, side="right")
    np.minimum(out, len(probs) - 1, out=out)
    return out


def mc_generator_gradient(variant, disc, theta_g, n_samples: int, seed: int):
    """Score-function estimate of :func:`generator_gradient_exact`.

    Returns ``(mean, per_sample_variance)`` where the variance is the mean
    squared Euclidean distance of the single-sample estimates to their mean.
    """
    if int(n_samples) != n_samples or n_samples < 1:
        raise ValueError("n_samples must be a positive integer")
    variant, disc, theta_g = as_variant(variant), as_disc(disc), as_params(theta_g)
    check_sizes(disc, theta_g)
    p = softmax_probs(theta_g).probs
    f = variant(disc.logit_table)
    xs = sample_outcomes(p, int(n_samples), seed)

    # every single-sample estimate is one of K vectors f[x] * (onehot(x) - p)
    freq = np.bincount(xs, minlength=len(p)) / n_samples
    mean = score_contract(p, freq * f)
    # ||f_x (e_x - p) - m||^2 expanded so no K x K matrix is formed
    p_sq = p @ p
    dev_sq = f**2 * (1.0 - 2.0 * p + p_sq) - 2.0 * f * (mean - p @ mean) + mean @ mean
    variance = float(max(freq @ dev_sq, 0.0))
    return mean, variance


# -- dynamics --------------------------------------------------------------


class UpdateMode(enum.Enum):
    SIMULTANEOUS = "simultaneous"
    ALTERNATING = "alternating"


class Verdict(enum.Enum):
    CONVERGED = "Converged"
    OSCILLATING = "Oscillating"
    DIVERGING = "Diverging"
    UNDETERMINED = "Undetermined"


class TabularGame:
    """Softmax generator against a tabular discriminator.

    The generator descends ``E_{p_g} f`` for its cost variant; the
    discriminator ascends the value function.
    """

    def __init__(self, p_d, cost=MINIMAX):
        self.p_d = as_table(p_d)
        self.cost = as_variant(cost)

    # raw-array versions of the public operations; the inner loop of
    # simulate_dynamics would otherwise re-validate tables at every step
    @staticmethod
    def _probs(g):
        e = np.exp(g - g.max())
        return e / e.sum()

    def value(self, g: np.ndarray, c: np.ndarray) -> float:
        return float(self.p_d.probs @ log_expit(c) + self._probs(g) @ log_expit(-c))

    def grad_g(self, g: np.ndarray, c: np.ndarray) -> np.ndarray:
        p = self._probs(g)
        return score_contract(p, self.cost(c) * p)

    def grad_c(self, g: np.ndarray, c: np.ndarray) -> np.ndarray:
        return self.p_d.probs * expit(-c) - self._probs(g) * expit(c)


class BilinearGame:
    """``V(u, v) = u . v``; the generator minimizes over u, the discriminator maximizes over v."""

    def value(self, g, c):
        return float(g @ c)

    def grad_g(self, g, c):
        return np.array(c, dtype=np.float64)

    def grad_c(self, g, c):
        return np.array(g, dtype=np.float64)


@dataclass(frozen=True)
class DynamicsConfig:
    eta_g: float
    eta_c: float
    init_theta_g: ParamVector
    init_disc: Discriminator
    iterations: int = 1000
    mode: UpdateMode = UpdateMode.SIMULTANEOUS
    disc_steps_per_gen_step: int = 1
    cost: GeneratorCostVariant = MINIMAX

    def __post_init__(self):
        for name in ("eta_g", "eta_c"):
            eta = getattr(self, name)
            if not (np.isfinite(eta) and eta > 0):
                raise InvalidParameterError(f"{name} must be positive and finite")
        if self.iterations < 1 or self.disc_steps_per_gen_step < 1:
            raise InvalidParameterError("iterations and disc_steps_per_gen_step must be >= 1")
        object.__setattr__(self, "mode", UpdateMode(self.mode))
        object.__setattr__(self, "init_theta_g", as_params(self.init_theta_g))
        object.__setattr__(self, "init_disc", as_disc(self.init_disc))
        object.__setattr__(self, "cost", as_variant(self.cost))


@dataclass(frozen=True)
class Snapshot:
    iteration: int
    theta_g: ParamVector
    disc: Discriminator
    value: float
    grad_norm_g: float
    grad_norm_c: float

    @property
    def param_norm_g(self) -> float:
        return float(np.linalg.norm(self.theta_g.logits))

    @property
    def joint_norm(self) -> float:
        return float(np.hypot(self.param_norm_g, np.linalg.norm(self.disc.logit_table)))


@dataclass
class GameTrajectory:
    snapshots: list[Snapshot] = field(default_factory=list)
    diverged: bool = False

    def __len__(self):
        return len(self.snapshots)

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(s, name) for s in self.snapshots])


def simulate_dynamics(p_d, cfg: DynamicsConfig, game=None) -> GameTrajectory:
    """Run gradient dynamics and record the state after every iteration.

    ``p_d`` builds a :class:`TabularGame` with ``cfg.cost`` unless an explicit
    ``game`` (e.g. :class:`BilinearGame`) is given, in which case ``p_d`` may
    be None. Snapshot 0 is the initial state.
    """
    if game is None:
        game = TabularGame(p_d, cfg.cost)
        check_sizes(game.p_d, cfg.init_theta_g, cfg.init_disc)
    g = np.array(cfg.init_theta_g.logits)
    c = np.array(cfg.init_disc.logit_table)
    traj = GameTrajectory()

    def record(it):
        if not (np.all(np.isfinite(g)) and np.all(np.isfinite(c))):
            return False
        value = game.value(g, c)
        dg, dc = game.grad_g(g, c), game.grad_c(g, c)
        if not (np.isfinite(value) and np.all(np.isfinite(dg)) and np.all(np.isfinite(dc))):
            return False
        traj.snapshots.append(Snapshot(it, ParamVector(g), Discriminator(c), value,
                                       float(np.linalg.norm(dg)), float(np.linalg.norm(dc))))
        return True

    with np.errstate(over="ignore", invalid="ignore"):
        if not record(0):
            raise InvalidParameterError("initial state gives non-finite values")
        for it in range(1, cfg.iterations + 1):
            if cfg.mode is UpdateMode.SIMULTANEOUS:
                dg, dc = game.grad_g(g, c), game.grad_c(g, c)
                g, c = g - cfg.eta_g * dg, c + cfg.eta_c * dc
            else:
                for _ in range(cfg.disc_steps_per_gen_step):
                    c = c + cfg.eta_c * game.grad_c(g, c)
                g = g - cfg.eta_g * game.grad_g(g, c)
            if not record(it):
                traj.diverged = True
                break
    return traj


@dataclass(frozen=True)
class DynamicsReport:
    verdict: Verdict
    final_value: float
    final_grad_norms: tuple[float, float]
    oscillation_score: float


def diagnose_trajectory(traj: GameTrajectory, tol: float = 1e-8, cap: float = 1e6,
                        variance_floor: float = 1e-12, min_sign_change: float = 0.1) -> DynamicsReport:
    """Classify a trajectory using its last-half window.

    Converged: final gradient norms both <= tol.
    Diverging: truncated by non-finite values, parameters beyond ``cap``, or
    joint parameter norm and total gradient norm both strictly increasing
    across the window.
    Oscillating: window mean gradient norm >= 10 * tol, generator logits
    still spread (variance > floor), and d(value) changes sign in at least
    ``min_sign_change`` of the window.
    """
    if not traj.snapshots:
        raise ValueError("empty trajectory")
    last = traj.snapshots[-1]
    tail = traj.snapshots[len(traj.snapshots) // 2:]

    values = np.array([s.value for s in tail])
    dv = np.sign(np.diff(values))
    dv = dv[dv != 0]
    score = float(np.mean(dv[1:] != dv[:-1])) if dv.size > 1 else 0.0

    grad_total = np.array([np.hypot(s.grad_norm_g, s.grad_norm_c) for s in tail])
    joint = np.array([s.joint_norm for s in tail])
    thetas = np.stack([s.theta_g.logits for s in tail])
    max_param = max(np.max(np.abs(thetas)), max(np.max(np.abs(s.disc.logit_table)) for s in tail))

    if last.grad_norm_g <= tol and last.grad_norm_c <= tol and not traj.diverged:
        verdict = Verdict.CONVERGED
    elif (traj.diverged or max_param > cap or abs(last.value) > cap
          or (len(tail) > 1 and np.all(np.diff(joint) > 0) and np.all(np.diff(grad_total) > 0))):
        verdict = Verdict.DIVERGING
    elif (grad_total.mean() >= 10 * tol and thetas.var(axis=0).sum() > variance_floor
          and score >= min_sign_change):
        verdict = Verdict.OSCILLATING
    else:
        verdict = Verdict.UNDETERMINED
    return DynamicsReport(verdict, last.value, (last.grad_norm_g, last.grad_norm_c), score)
