"""Cost-based cutpoints and minimum-expected-cost classification.

With a false-negative cost ``c_fn`` and a false-positive cost ``c_fp`` the
relative cost is ``r = c_fn / c_fp`` and the cutpoint is ``1 / (1 + r)``. At
that probability the expected cost of calling a subject negative,
``p * c_fn``, equals that of calling it positive, ``(1 - p) * c_fp``.
Subjects with ``p >= cutpoint`` are high risk. Correct decisions cost nothing.
"""

from __future__ import annotations

import enum
import math
import numbers
from dataclasses import dataclass
from typing import Sequence

import numpy as np


class PolicyError(ValueError):
    pass


class Action(enum.Enum):
    HIGH_RISK = "high"
    LOW_RISK = "low"

    @property
    def positive(self) -> bool:
        return self is Action.HIGH_RISK


HighRisk = Action.HIGH_RISK
LowRisk = Action.LOW_RISK


@dataclass(frozen=True)
class CostPolicy:
    cost_fn: float
    cost_fp: float = 1.0

    def __post_init__(self):
        for label, c in (("cost_fn", self.cost_fn), ("cost_fp", self.cost_fp)):
            if not (isinstance(c, numbers.Real) and not isinstance(c, bool) and math.isfinite(c) and c > 0):
                raise PolicyError(f"{label} must be a positive finite number, got {c!r}")

    @property
    def relative_cost(self) -> float:
        return self.cost_fn / self.cost_fp

    @property
    def cutpoint(self) -> float:
        return 1.0 / (1.0 + self.relative_cost)


def make_policy(cost_fn: float, cost_fp: float = 1.0) -> CostPolicy:
    return CostPolicy(float(cost_fn), float(cost_fp))


def policy_from_ratio(ratio: float) -> CostPolicy:
    """``--cost-ratio R``: a false negative costs R false positives."""
    return make_policy(ratio, 1.0)


@dataclass(frozen=True)
class Decision:
    action: Action
    probability: float
    cost_if_negative: float
    cost_if_positive: float

    @property
    def high_risk(self) -> bool:
        return self.action is Action.HIGH_RISK


def _check_probability(p: float) -> float:
    p = float(p)
    if not 0.0 <= p <= 1.0:
        raise PolicyError(f"probability must lie in [0, 1], got {p!r}")
    return p


def expected_costs(p: float, policy: CostPolicy) -> tuple[float, float]:
    """(cost of predicting negative, cost of predicting positive)."""
    p = _check_probability(p)
    return p * policy.cost_fn, (1.0 - p) * policy.cost_fp


def classify(p: float, policy: CostPolicy) -> Decision:
    neg, pos = expected_costs(p, policy)
    action = Action.HIGH_RISK if p >= policy.cutpoint else Action.LOW_RISK
    return Decision(action, float(p), neg, pos)


def classify_all(probabilities: Sequence[float], policy: CostPolicy) -> list[Decision]:
    return [classify(p, policy) for p in probabilities]


def high_risk_mask(probabilities, policy: CostPolicy) -> np.ndarray:
    """Vectorized ``classify``: boolean array, True where high risk."""
    p = np.asarray(probabilities, dtype=np.float64)
    if p.size and (np.any(~np.isfinite(p)) or p.min() < 0.0 or p.max() > 1.0):
        raise PolicyError("probabilities must lie in [0, 1]")
    return p >= policy.cutpoint
