"""Confusion matrices, costs in false-positive units, and diagnostic metrics.

Every cost here is expressed in units of one false positive, so a rule with
``fp`` false positives and ``fn`` false negatives under relative cost ``r``
costs ``fp + r * fn``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, asdict
from typing import Sequence

import numpy as np

from .decision import CostPolicy, Decision, high_risk_mask, make_policy


class MetricError(ValueError):
    """A metric is undefined for the given counts."""


@dataclass(frozen=True)
class ConfusionMatrix:
    tp: int
    fp: int
    fn: int
    tn: int

    def __post_init__(self):
        for label in ("tp", "fp", "fn", "tn"):
            v = getattr(self, label)
            if int(v) != v or v < 0:
                raise MetricError(f"{label} must be a nonnegative integer, got {v!r}")
            object.__setattr__(self, label, int(v))

    @property
    def positives(self) -> int:
        return self.tp + self.fn

    @property
    def negatives(self) -> int:
        return self.fp + self.tn

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.fn + self.tn

    def as_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class DiagnosticMetrics:
    prevalence: float
    sensitivity: float
    specificity: float
    lr_plus: float
    post_test_probability: float
    lr_plus_infinite: bool = False


@dataclass(frozen=True)
class CostReport:
    policy: CostPolicy
    confusion: ConfusionMatrix
    metrics: DiagnosticMetrics | None
    total_cost: float
    baseline_all_negative: float
    baseline_all_positive: float
    saving_vs_all_negative: float | None
    break_even_ratio: float | None
    required_lr_plus_odds: float | None
    required_lr_plus_probability_ratio: float | None

    def as_dict(self) -> dict:
        m = self.metrics
        return {
            "format": "costcut-report",
            "version": 1,
            "policy": {"cost_fn": self.policy.cost_fn, "cost_fp": self.policy.cost_fp,
                       "relative_cost": self.policy.relative_cost,
                       "cutpoint": self.policy.cutpoint},
            "confusion": self.confusion.as_dict(),
            "metrics": asdict(m) if m is not None else None,
            "costs": {"total_cost": self.total_cost,
                      "saving_vs_all_negative": self.saving_vs_all_negative},
            "baselines": {"all_negative": self.baseline_all_negative,
                          "all_positive": self.baseline_all_positive},
            "break_even_ratio": self.break_even_ratio,
            "required_lr_plus": {"target_posterior": 0.5,
                                 "odds": self.required_lr_plus_odds,
                                 "probability_ratio": self.required_lr_plus_probability_ratio},
        }


def _as_flags(decisions) -> np.ndarray:
    out = []
    for d in decisions:
        if isinstance(d, Decision):
            out.append(d.high_risk)
        elif hasattr(d, "positive"):
            out.append(d.positive)
        else:
            out.append(bool(d))
    return np.array(out, dtype=bool)


def confusion(labels: Sequence[int], decisions) -> ConfusionMatrix:
    """Cross-tabulate outcomes against decisions (Decision, Action or bool)."""
    y = np.asarray(labels)
    flags = _as_flags(decisions)
    if len(y) != len(flags):
        raise MetricError(f"length mismatch: {len(y)} labels, {len(flags)} decisions")
    if len(y) and not np.all((y == 0) | (y == 1)):
        raise MetricError("labels must be 0 or 1")
    pos = y == 1
    return ConfusionMatrix(tp=int(np.sum(pos & flags)), fp=int(np.sum(~pos & flags)),
                           fn=int(np.sum(pos & ~flags)), tn=int(np.sum(~pos & ~flags)))


def total_cost(cm: ConfusionMatrix, policy: CostPolicy) -> float:
    return (cm.fp * policy.cost_fp + cm.fn * policy.cost_fn) / policy.cost_fp


def diagnostic_metrics(cm: ConfusionMatrix) -> DiagnosticMetrics:
    if cm.positives < 1 or cm.negatives < 1:
        raise MetricError("need at least one positive and one negative subject")
    sens = cm.tp / cm.positives
    spec = cm.tn / cm.negatives
    if cm.fp == 0:
        lr, infinite = math.inf, True
    else:
        lr, infinite = sens / (1.0 - spec), False
    ppv = cm.tp / (cm.tp + cm.fp) if cm.tp + cm.fp else math.nan
    return DiagnosticMetrics(cm.positives / cm.total, sens, spec, lr, ppv, infinite)


def required_lr_plus(prevalence: float, target_posterior: float, form: str = "odds") -> float:
    """LR+ needed to lift ``prevalence`` to ``target_posterior``.

    ``odds`` is the Bayes-correct posterior-odds / prior-odds. ``probability_ratio``
    is the cruder target / prevalence, which is the arithmetic behind the
    published "46.6" figure.
    """
    for label, v in (("prevalence", prevalence), ("target_posterior", target_posterior)):
        if not 0.0 < v < 1.0:
            raise MetricError(f"{label} must lie strictly between 0 and 1")
    if form == "odds":
        return (target_posterior / (1.0 - target_posterior)) / (prevalence / (1.0 - prevalence))
    if form == "probability_ratio":
        return target_posterior / prevalence
    raise MetricError(f"unknown form {form!r}; use 'odds' or 'probability_ratio'")


def baseline_all_negative(positives: int, policy: CostPolicy) -> float:
    """Cost of releasing everyone: every case becomes a false negative."""
    if positives < 0:
        raise MetricError("positives must be nonnegative")
    return positives * policy.relative_cost


def baseline_all_positive(negatives: int, policy: CostPolicy) -> float:
    if negatives < 0:
        raise MetricError("negatives must be nonnegative")
    return float(negatives)


def break_even_ratio(cm: ConfusionMatrix) -> float | None:
    """Relative cost at which the rule costs the same as calling everyone negative.

    Solves ``fp + r * fn = r * positives``, i.e. ``r = fp / tp``. None when
    ``tp == 0``: the rule then never beats the all-negative baseline.
    """
    if cm.tp == 0:
        return None
    return cm.fp / cm.tp


def cost_saving_vs_all_negative(cm: ConfusionMatrix, policy: CostPolicy) -> float:
    baseline = baseline_all_negative(cm.positives, policy)
    if baseline <= 0:
        raise MetricError("no positives: saving relative to the all-negative rule is undefined")
    return (baseline - total_cost(cm, policy)) / baseline


def evaluate(cm: ConfusionMatrix, policy: CostPolicy) -> CostReport:
    try:
        metrics = diagnostic_metrics(cm)
    except MetricError:
        metrics = None
    prev = cm.positives / cm.total if cm.total else 0.0
    if 0.0 < prev < 1.0:
        req_odds = required_lr_plus(prev, 0.5, "odds")
        req_ratio = required_lr_plus(prev, 0.5, "probability_ratio")
    else:
        req_odds = req_ratio = None
    return CostReport(
        policy=policy,
        confusion=cm,
        metrics=metrics,
        total_cost=total_cost(cm, policy),
        baseline_all_negative=baseline_all_negative(cm.positives, policy),
        baseline_all_positive=baseline_all_positive(cm.negatives, policy),
        saving_vs_all_negative=(cost_saving_vs_all_negative(cm, policy)
                                if cm.positives else None),
        break_even_ratio=break_even_ratio(cm),
        required_lr_plus_odds=req_odds,
        required_lr_plus_probability_ratio=req_ratio,
    )


def evaluate_scores(probabilities, labels, policy: CostPolicy) -> CostReport:
    return evaluate(confusion(labels, high_risk_mask(probabilities, policy)), policy)


@dataclass(frozen=True)
class SweepRow:
    ratio: float
    cutpoint: float
    confusion: ConfusionMatrix
    total_cost: float
    saving: float | None


def sweep(probabilities, labels, ratios: Sequence[float]) -> list[SweepRow]:
    """Evaluate the cost-optimal rule at each relative cost in ``ratios``."""
    ratios = [float(r) for r in ratios]
    if not ratios:
        raise MetricError("empty ratio list")
    if any(r <= 0 for r in ratios):
        raise MetricError("ratios must be positive")
    if any(b < a for a, b in zip(ratios, ratios[1:])):
        raise MetricError("ratios must be in ascending order")
    p = np.asarray(probabilities, dtype=np.float64)
    rows = []
    for r in ratios:
        policy = make_policy(r, 1.0)
        cm = confusion(labels, high_risk_mask(p, policy))
        saving = cost_saving_vs_all_negative(cm, policy) if cm.positives else None
        rows.append(SweepRow(r, policy.cutpoint, cm, total_cost(cm, policy), saving))
    return rows


def format_report(report: CostReport) -> str:
    """Human-readable report."""
    cm, m, pol = report.confusion, report.metrics, report.policy
    lines = [
        f"relative cost (FN:FP)     {pol.relative_cost:g}:1",
        f"probability cutpoint      {pol.cutpoint:.6f} ({100 * pol.cutpoint:.2f}%)",
        "",
        "                 case    non-case",
        f"  high risk  {cm.tp:>8d}  {cm.fp:>10d}",
        f"  low risk   {cm.fn:>8d}  {cm.tn:>10d}",
        "",
        f"total cost (FP units)     {report.total_cost:.10g}",
        f"all-negative baseline     {report.baseline_all_negative:.10g}",
        f"all-positive baseline     {report.baseline_all_positive:.10g}",
    ]
    if report.saving_vs_all_negative is not None:
        lines.append(f"saving vs all-negative    {100 * report.saving_vs_all_negative:.1f}%")
    lines.append("break-even relative cost  " + (
        f"{report.break_even_ratio:.4g}" if report.break_even_ratio is not None
        else "undefined (no true positives)"))
    if m is not None:
        lines += [
            "",
            f"prevalence                {m.prevalence:.6f}",
            f"sensitivity               {m.sensitivity:.6f}",
            f"specificity               {m.specificity:.6f}",
            "LR+                       " + ("infinite (no false positives)" if m.lr_plus_infinite
                                            else f"{m.lr_plus:.4f}"),
            f"post-test probability     {m.post_test_probability:.6f}",
        ]
    if report.required_lr_plus_odds is not None:
        lines += [
            f"LR+ needed for 50% post-test probability: {report.required_lr_plus_odds:.2f} "
            f"(odds form), {report.required_lr_plus_probability_ratio:.2f} "
            "(probability-ratio form)",
        ]
    return "\n".join(lines)
