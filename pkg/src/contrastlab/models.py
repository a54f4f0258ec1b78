"""Softmax families over a finite support.

Every distribution in the package is a strictly positive probability table
indexed by outcome number ``0..K-1``. The only parametric family is the
tabular softmax, whose score function has the closed form
``onehot(x) - probs``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Hashable, Sequence

import numpy as np

PROB_SUM_TOL = 1e-12


class InvalidParameterError(ValueError):
    """Raised for non-finite logits or malformed probability tables."""


class SupportMismatchError(ValueError):
    """Raised when operands live on supports of different sizes."""


def _frozen(values, name: str) -> np.ndarray:
    arr = np.array(values, dtype=np.float64)
    if arr.ndim != 1:
        raise InvalidParameterError(f"{name} must be a 1-d vector, got shape {arr.shape}")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class Support:
    """Ordered outcome labels; operations refer to outcomes by index."""

    outcomes: tuple[Hashable, ...]

    def __post_init__(self):
        object.__setattr__(self, "outcomes", tuple(self.outcomes))
        if len(self.outcomes) < 2:
            raise InvalidParameterError("a support needs at least two outcomes")
        if len(set(self.outcomes)) != len(self.outcomes):
            raise InvalidParameterError("support outcomes must be distinct")

    @classmethod
    def range(cls, k: int) -> "Support":
        return cls(tuple(range(k)))

    @property
    def size(self) -> int:
        return len(self.outcomes)

    def index(self, outcome: Hashable) -> int:
        return self.outcomes.index(outcome)


@dataclass(frozen=True, eq=False)
class ParamVector:
    """Softmax logits. Entries must be finite."""

    logits: np.ndarray

    def __post_init__(self):
        arr = _frozen(self.logits, "logits")
        if not np.all(np.isfinite(arr)):
            raise InvalidParameterError("logits must be finite")
        object.__setattr__(self, "logits", arr)

    def __len__(self) -> int:
        return self.logits.shape[0]

    def __eq__(self, other):
        return isinstance(other, ParamVector) and np.array_equal(self.logits, other.logits)

    def __hash__(self):
        return hash(self.logits.tobytes())


@dataclass(frozen=True, eq=False)
class DistributionTable:
    """Strictly positive probabilities over ``K`` outcomes summing to one."""

    probs: np.ndarray

    def __post_init__(self):
        arr = _frozen(self.probs, "probs")
        if arr.shape[0] < 2:
            raise InvalidParameterError("a distribution needs at least two outcomes")
        if not np.all(np.isfinite(arr)) or not np.all(arr > 0):
            raise InvalidParameterError("probabilities must be finite and strictly positive")
        if abs(arr.sum() - 1.0) > PROB_SUM_TOL:
            raise InvalidParameterError(f"probabilities sum to {arr.sum()!r}, not 1")
        object.__setattr__(self, "probs", arr)

    @classmethod
    def normalized(cls, weights: Sequence[float]) -> "DistributionTable":
        w = np.asarray(weights, dtype=np.float64)
        return cls(w / w.sum())

    @classmethod
    def smoothed_onehot(cls, k: int, index: int, eps: float = 1e-9) -> "DistributionTable":
        """One-hot table with ``eps`` mass spread evenly over the other outcomes."""
        probs = np.full(k, eps / (k - 1))
        probs[index] = 1.0 - eps
        return cls(probs)

    def __len__(self) -> int:
        return self.probs.shape[0]

    def __eq__(self, other):
        return isinstance(other, DistributionTable) and np.array_equal(self.probs, other.probs)

    def __hash__(self):
        return hash(self.probs.tobytes())

    def copy(self) -> "DistributionTable":
        return DistributionTable(self.probs.copy())

    @property
    def log_probs(self) -> np.ndarray:
        return np.log(self.probs)


def as_params(theta) -> ParamVector:
    return theta if isinstance(theta, ParamVector) else ParamVector(theta)


def as_table(p) -> DistributionTable:
    return p if isinstance(p, DistributionTable) else DistributionTable(p)


def check_sizes(*operands) -> int:
    """Return the common support size of ``operands`` or raise."""
    sizes = {len(op) for op in operands}
    if len(sizes) != 1:
        raise SupportMismatchError(f"support sizes differ: {sorted(sizes)}")
    return sizes.pop()


def log_softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max()
    return shifted - np.log(np.exp(shifted).sum())


def softmax_probs(theta) -> DistributionTable:
    """Softmax of the logits, stabilized by max subtraction."""
    theta = as_params(theta)
    shifted = theta.logits - theta.logits.max()
    e = np.exp(shifted)
    return DistributionTable(e / e.sum())


def softmax_score(theta, x: int) -> np.ndarray:
    """Gradient of ``log softmax_probs(theta)[x]`` with respect to the logits."""
    theta = as_params(theta)
    k = len(theta)
    if not 0 <= x < k:
        raise IndexError(f"outcome index {x} outside 0..{k - 1}")
    score = -softmax_probs(theta).probs
    score[x] += 1.0
    return score


def score_contract(probs: np.ndarray, weights: np.ndarray) -> np.ndarray:
    """``sum_x weights[x] * (onehot(x) - probs)`` without forming the score matrix."""
    return weights - probs * weights.sum()
