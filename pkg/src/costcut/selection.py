"""Stepwise model selection by AIC or Wald p-value, plus a brute-force AIC oracle.

AIC is minimized (``2p - 2l``). The trace stores raw log-likelihoods and
parameter counts so a "larger is better" criterion such as ``l - p`` can be
recovered from it.

Candidates are visited in design-column order and ties go to the earliest
candidate, so results do not depend on evaluation order. Candidate models that
are singular or fail to converge (separation) are skipped.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field, asdict
from typing import Sequence

import numpy as np

from .encoding import DesignMatrix, INTERCEPT
from .glm import FitError, FitOptions, LogisticFit, fit, wald_group_p_value

DIRECTIONS = ("forward", "backward", "bidirectional")
CRITERIA = ("aic", "p_value")
GRANULARITIES = ("single_column", "variable_group")
MAX_ORACLE_COLUMNS = 12


class SelectionError(ValueError):
    pass


@dataclass(frozen=True)
class SelectionConfig:
    direction: str = "bidirectional"
    criterion: str = "aic"
    alpha_in: float = 0.10
    alpha_out: float = 0.10
    candidate_granularity: str = "single_column"
    max_steps: int = 100

    def __post_init__(self):
        if self.direction not in DIRECTIONS:
            raise SelectionError(f"direction must be one of {DIRECTIONS}")
        if self.criterion not in CRITERIA:
            raise SelectionError(f"criterion must be one of {CRITERIA}")
        if self.candidate_granularity not in GRANULARITIES:
            raise SelectionError(f"candidate_granularity must be one of {GRANULARITIES}")
        for a in (self.alpha_in, self.alpha_out):
            if not 0 < a <= 1:
                raise SelectionError("alpha values must lie in (0, 1]")
        if self.max_steps < 1:
            raise SelectionError("max_steps must be at least 1")


@dataclass(frozen=True)
class Step:
    action: str  # "add" or "remove"
    columns: tuple[str, ...]
    aic_before: float
    aic_after: float
    log_likelihood_after: float
    n_params_after: int
    p_value: float | None = None


@dataclass
class SelectionTrace:
    initial: tuple[str, ...]
    steps: list[Step] = field(default_factory=list)
    final: tuple[str, ...] = ()
    warnings: list[str] = field(default_factory=list)

    def replay(self) -> frozenset[str]:
        """Apply the steps to the initial model; yields the final column set."""
        current = set(self.initial)
        for step in self.steps:
            if step.action == "add":
                current |= set(step.columns)
            else:
                current -= set(step.columns)
        return frozenset(current)

    def to_lines(self) -> list[str]:
        """One JSON object per line: a header, one line per step, a footer."""
        lines = [json.dumps({"format": "costcut-trace", "version": 1,
                             "initial": list(self.initial)})]
        for i, step in enumerate(self.steps, start=1):
            rec = {"step": i, **asdict(step)}
            rec["columns"] = list(step.columns)
            lines.append(json.dumps(rec))
        lines.append(json.dumps({"final": list(self.final), "warnings": self.warnings}))
        return lines

    @classmethod
    def from_lines(cls, lines: Sequence[str]) -> "SelectionTrace":
        records = [json.loads(l) for l in lines if l.strip()]
        head, body, tail = records[0], records[1:-1], records[-1]
        steps = []
        for rec in body:
            rec.pop("step")
            rec["columns"] = tuple(rec["columns"])
            steps.append(Step(**rec))
        return cls(tuple(head["initial"]), steps, tuple(tail["final"]), list(tail["warnings"]))


def _try_fit(design: DesignMatrix, y, cols: Sequence[str], options) -> LogisticFit | None:
    try:
        f = fit(design.select(cols), y, options)
    except FitError:
        return None
    return f if f.converged else None


def _groups(design: DesignMatrix, granularity: str) -> list[tuple[str, ...]]:
    """Candidate units in design order (intercept excluded)."""
    units: dict[str, list[str]] = {}
    for name, prov in zip(design.names, design.provenance):
        if prov.kind == "intercept":
            continue
        key = name if granularity == "single_column" else prov.group
        units.setdefault(key, []).append(name)
    return [tuple(v) for v in units.values()]


def _parent_groups(design: DesignMatrix, unit: tuple[str, ...]) -> set[str]:
    prov = design.provenance[design.index(unit[0])]
    if prov.kind != "interaction":
        return set()
    return {p.group for p in prov.parents}


def stepwise(design: DesignMatrix, y, config: SelectionConfig | None = None,
             fit_options: FitOptions | None = None) -> tuple[LogisticFit, SelectionTrace]:
    config = config or SelectionConfig()
    y = np.asarray(y, dtype=np.float64)
    intercepts = [n for n, p in zip(design.names, design.provenance) if p.kind == "intercept"]
    units = _groups(design, config.candidate_granularity)
    heredity = config.candidate_granularity == "variable_group"
    order = {n: i for i, n in enumerate(design.names)}

    def ordered(cols):
        return sorted(cols, key=order.__getitem__)

    if config.direction == "backward":
        included = [u for u in units]
    else:
        included = []

    def cols_of(inc):
        return ordered(intercepts + [c for u in inc for c in u])

    def groups_in(inc):
        return {design.provenance[design.index(u[0])].group for u in inc}

    current = _try_fit(design, y, cols_of(included), fit_options)
    if current is None:
        raise FitError("starting model could not be fitted: "
                       + ", ".join(cols_of(included) or ["<empty>"]))
    trace = SelectionTrace(initial=tuple(cols_of(included)))
    visited = {frozenset(cols_of(included))}
    can_add = config.direction in ("forward", "bidirectional")
    can_remove = config.direction in ("backward", "bidirectional")

    for _ in range(config.max_steps):
        adds, removes = [], []
        if can_add:
            present = groups_in(included)
            for u in units:
                if u in included:
                    continue
                if heredity and not _parent_groups(design, u) <= present:
                    continue
                adds.append(u)
        if can_remove:
            for u in included:
                if heredity:
                    g = design.provenance[design.index(u[0])].group
                    if any(g in _parent_groups(design, v) for v in included if v != u):
                        continue
                removes.append(u)

        move = (_aic_move if config.criterion == "aic" else _pvalue_move)(
            design, y, included, adds, removes, current, cols_of, fit_options, config)
        if move is None:
            break
        action, unit, new_fit, pval = move
        new_included = included + [unit] if action == "add" else [u for u in included if u != unit]
        key = frozenset(cols_of(new_included))
        if key in visited:
            trace.warnings.append(f"cycle detected at {action} {list(unit)}; stopping")
            break
        visited.add(key)
        trace.steps.append(Step(action, tuple(unit), current.aic, new_fit.aic,
                                new_fit.log_likelihood, new_fit.n_params, pval))
        included, current = new_included, new_fit
    else:
        trace.warnings.append(f"max_steps={config.max_steps} reached")

    trace.final = tuple(current.names)
    return current, trace


def _aic_move(design, y, included, adds, removes, current, cols_of, options, config):
    best = None
    candidates = [("add", u, included + [u]) for u in adds] + \
                 [("remove", u, [v for v in included if v != u]) for u in removes]
    index = {n: i for i, n in enumerate(design.names)}
    # earliest column breaks ties, across adds and removes alike
    candidates.sort(key=lambda c: index[c[1][0]])
    for action, unit, inc in candidates:
        f = _try_fit(design, y, cols_of(inc), options)
        if f is None:
            continue
        if best is None or f.aic < best[2].aic:
            best = (action, unit, f, None)
    if best is not None and best[2].aic < current.aic:
        return best
    return None


def _pvalue_move(design, y, included, adds, removes, current, cols_of, options, config):
    best_add = None
    for unit in adds:
        f = _try_fit(design, y, cols_of(included + [unit]), options)
        if f is None:
            continue
        try:
            p = wald_group_p_value(f, [f.names.index(c) for c in unit])
        except FitError:
            continue
        if p < config.alpha_in and (best_add is None or p < best_add[3]):
            best_add = ("add", unit, f, p)
    if best_add is not None:
        return best_add
    worst = None
    for unit in removes:
        try:
            p = wald_group_p_value(current, [current.names.index(c) for c in unit])
        except FitError:
            continue
        if p > config.alpha_out and (worst is None or p > worst[1]):
            worst = (unit, p)
    if worst is None:
        return None
    unit, p = worst
    f = _try_fit(design, y, cols_of([u for u in included if u != unit]), options)
    if f is None:
        return None
    return ("remove", unit, f, p)


@dataclass(frozen=True)
class OracleResult:
    columns: tuple[str, ...]
    aic: float
    fit: LogisticFit
    subsets_tried: int
    subsets_skipped: int


def exhaustive_best_aic(design: DesignMatrix, y, max_columns: int = MAX_ORACLE_COLUMNS,
                        fit_options: FitOptions | None = None) -> OracleResult:
    """Fit every subset of the non-intercept columns and keep the lowest AIC.

    Subsets are scanned by size, then lexicographically by column position;
    the first minimum wins. Singular or unconverged subsets are skipped.
    """
    if max_columns > MAX_ORACLE_COLUMNS:
        raise SelectionError(f"max_columns may not exceed {MAX_ORACLE_COLUMNS}")
    fixed = [n for n, p in zip(design.names, design.provenance) if p.kind == "intercept"]
    candidates = [n for n in design.names if n not in fixed]
    if len(candidates) > max_columns:
        raise SelectionError(f"{len(candidates)} candidate columns exceed the limit of "
                             f"{max_columns}")
    best, tried, skipped = None, 0, 0
    for k in range(len(candidates) + 1):
        for subset in itertools.combinations(candidates, k):
            cols = fixed + list(subset)
            if not cols:
                continue
            tried += 1
            f = _try_fit(design, y, cols, fit_options)
            if f is None:
                skipped += 1
                continue
            if best is None or f.aic < best.aic:
                best = f
    if best is None:
        raise FitError("no subset could be fitted")
    return OracleResult(tuple(best.names), best.aic, best, tried, skipped)


__all__ = ["SelectionConfig", "SelectionTrace", "Step", "stepwise", "exhaustive_best_aic",
           "OracleResult", "SelectionError", "INTERCEPT"]
