"""Design matrices: traffic-light dummies, categorical dummies and interactions.

A traffic-light family for ``age`` with thresholds 16, 17, 18 holds the columns
``age>=16``, ``age>=17``, ``age>=18``. Each column is 1 when the value reaches
its threshold, so the family is monotone and dropping one column merges the two
groups on either side of that threshold.

Plan files hold one directive per line (``#`` starts a comment)::

    traffic_light age: 16,17,18
    categorical region
    raw income
    interact age>=18 region=north

Column order in the design is: intercept, then each variable's columns in plan
order, then interactions in plan order.
"""

from __future__ import annotations

import os
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .tabular import DataError, Dataset

INTERCEPT = "(intercept)"
TIMES = "×"


class EncodingError(ValueError):
    pass


@dataclass(frozen=True)
class ThresholdSet:
    variable: str
    thresholds: tuple[float, ...]

    def __post_init__(self):
        t = tuple(float(v) for v in self.thresholds)
        object.__setattr__(self, "thresholds", t)
        if not t:
            raise EncodingError(f"empty threshold set for {self.variable!r}")
        if any(b <= a for a, b in zip(t, t[1:])):
            raise EncodingError(f"thresholds for {self.variable!r} must be strictly increasing")


@dataclass(frozen=True)
class Provenance:
    """Where a design column came from.

    kind is one of ``intercept``, ``raw``, ``threshold``, ``level``,
    ``interaction``. Interactions keep their parents' provenance so that the
    column can be rebuilt from raw data alone.
    """

    kind: str
    source: str = ""
    threshold: float | None = None
    level: str | None = None
    parents: tuple["Provenance", "Provenance"] | None = None
    parent_names: tuple[str, str] | None = None

    @property
    def squared(self) -> bool:
        return self.kind == "interaction" and self.parent_names[0] == self.parent_names[1]

    @property
    def group(self) -> str:
        """Selection group: the source variable, or the column itself for interactions."""
        if self.kind == "interaction":
            return TIMES.join(self.parent_names)
        return self.source or INTERCEPT

    def to_text(self) -> str:
        if self.kind == "intercept":
            return "intercept"
        if self.kind == "raw":
            return f"raw|{self.source}"
        if self.kind == "threshold":
            return f"ge|{self.source}|{_fmt_threshold(self.threshold)}"
        if self.kind == "level":
            return f"eq|{self.source}|{self.level}"
        a, b = self.parents
        return f"mul|{a.to_text()}|{b.to_text()}"

    @classmethod
    def from_text(cls, text: str) -> "Provenance":
        parts = text.split("|")
        prov, rest = cls._parse(parts)
        if rest:
            raise EncodingError(f"trailing fields in term {text!r}")
        return prov

    @classmethod
    def _parse(cls, parts):
        if not parts:
            raise EncodingError("truncated term")
        head, rest = parts[0], parts[1:]
        try:
            if head == "intercept":
                return cls("intercept"), rest
            if head == "raw":
                return cls("raw", rest[0]), rest[1:]
            if head == "ge":
                return cls("threshold", rest[0], threshold=float(rest[1])), rest[2:]
            if head == "eq":
                return cls("level", rest[0], level=rest[1]), rest[2:]
        except (IndexError, ValueError):
            raise EncodingError(f"malformed {head!r} term") from None
        if head == "mul":
            a, rest = cls._parse(rest)
            b, rest = cls._parse(rest)
            return cls("interaction", parents=(a, b),
                       parent_names=(column_name(a), column_name(b))), rest
        raise EncodingError(f"unknown term kind {head!r}")


def _fmt_threshold(t: float) -> str:
    short = format(t, "g")
    return short if float(short) == t else repr(t)


def column_name(prov: Provenance) -> str:
    if prov.kind == "intercept":
        return INTERCEPT
    if prov.kind == "raw":
        return prov.source
    if prov.kind == "threshold":
        return f"{prov.source}>={_fmt_threshold(prov.threshold)}"
    if prov.kind == "level":
        return f"{prov.source}={prov.level}"
    return TIMES.join(prov.parent_names)


@dataclass(frozen=True, eq=False)
class DesignMatrix:
    names: tuple[str, ...]
    values: np.ndarray
    provenance: tuple[Provenance, ...]

    def __post_init__(self):
        values = np.array(self.values, dtype=np.float64)
        if values.ndim != 2 or values.shape[1] != len(self.names):
            raise EncodingError("values shape does not match column names")
        if len(set(self.names)) != len(self.names):
            dupes = [k for k, c in Counter(self.names).items() if c > 1]
            raise EncodingError(f"duplicate column names: {dupes}")
        if len(self.provenance) != len(self.names):
            raise EncodingError("provenance does not match column names")
        values.setflags(write=False)
        object.__setattr__(self, "names", tuple(self.names))
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "provenance", tuple(self.provenance))

    @property
    def shape(self):
        return self.values.shape

    def index(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise EncodingError(f"unknown column {name!r}") from None

    def column(self, name: str) -> np.ndarray:
        return self.values[:, self.index(name)]

    def select(self, names: Sequence[str]) -> "DesignMatrix":
        idx = [self.index(n) for n in names]
        return DesignMatrix(tuple(self.names[i] for i in idx), self.values[:, idx],
                            tuple(self.provenance[i] for i in idx))

    def __eq__(self, other):
        if not isinstance(other, DesignMatrix):
            return NotImplemented
        return (self.names == other.names and self.provenance == other.provenance
                and np.array_equal(self.values, other.values))


@dataclass(frozen=True)
class EncodingPlan:
    traffic_lights: tuple[ThresholdSet, ...] = ()
    categorical: tuple[str, ...] = ()
    raw: tuple[str, ...] = ()
    interactions: tuple[tuple[str, str], ...] = ()
    intercept: bool = True
    # plan-file order of variable directives as (kind, variable)
    order: tuple[tuple[str, str], ...] = field(default=())

    def variable_order(self) -> list[tuple[str, str]]:
        if self.order:
            return list(self.order)
        return ([("traffic_light", t.variable) for t in self.traffic_lights]
                + [("categorical", v) for v in self.categorical]
                + [("raw", v) for v in self.raw])


def traffic_light(values, thresholds: ThresholdSet | Sequence[float]) -> np.ndarray:
    """``(n, m)`` 0/1 matrix; column j is 1 where value >= j-th threshold."""
    if not isinstance(thresholds, ThresholdSet):
        thresholds = ThresholdSet("x", tuple(thresholds))
    x = np.asarray(values, dtype=np.float64)
    t = np.asarray(thresholds.thresholds)
    return (x.reshape(-1, 1) >= t.reshape(1, -1)).astype(np.float64)


def reference_level(values) -> str:
    """Most frequent level; ties go to the lexicographically smallest."""
    counts = Counter(str(v) for v in values)
    if not counts:
        raise EncodingError("cannot choose a reference level for an empty column")
    return min(counts, key=lambda lv: (-counts[lv], lv))


def evaluate_term(data: Dataset, prov: Provenance) -> np.ndarray:
    """Rebuild one design column from raw data."""
    if prov.kind == "intercept":
        return np.ones(data.n)
    if prov.kind == "interaction":
        a, b = prov.parents
        return evaluate_term(data, a) * evaluate_term(data, b)
    col = data.column(prov.source)
    if prov.kind == "level":
        return (col.astype(str) == prov.level).astype(np.float64)
    if col.dtype.kind == "U":
        raise EncodingError(f"column {prov.source!r} is categorical; cannot use it as numeric")
    if prov.kind == "raw":
        return col.astype(np.float64)
    return (col >= prov.threshold).astype(np.float64)


def encode_terms(data: Dataset, terms: Sequence[Provenance]) -> DesignMatrix:
    """Design matrix with exactly the given columns, evaluated on ``data``."""
    needed = sorted({s for t in terms for s in _sources(t)})
    missing = [s for s in needed if s not in data.names]
    if missing:
        raise EncodingError(f"table is missing columns required by the model: {missing}")
    values = np.column_stack([evaluate_term(data, t) for t in terms]) if terms \
        else np.empty((data.n, 0))
    return DesignMatrix(tuple(column_name(t) for t in terms), values.reshape(data.n, len(terms)),
                        tuple(terms))


def _sources(prov: Provenance):
    if prov.kind == "interaction":
        for p in prov.parents:
            yield from _sources(p)
    elif prov.kind != "intercept":
        yield prov.source


def drop_column(design: DesignMatrix, name: str) -> DesignMatrix:
    j = design.index(name)
    if design.provenance[j].kind == "intercept":
        raise EncodingError("the intercept cannot be dropped")
    keep = [n for i, n in enumerate(design.names) if i != j]
    return design.select(keep)


def interactions(design: DesignMatrix, pairs: Sequence[tuple[str, str]]) -> DesignMatrix:
    """Append one product column per pair, named ``a×b``."""
    names = list(design.names)
    cols = [design.values[:, j] for j in range(len(names))]
    provs = list(design.provenance)
    for a, b in pairs:
        ia, ib = design.index(a), design.index(b)
        pa, pb = design.provenance[ia], design.provenance[ib]
        for p, nm in ((pa, a), (pb, b)):
            if p.kind in ("intercept", "interaction"):
                raise EncodingError(f"{nm!r} cannot be an interaction parent")
        prov = Provenance("interaction", parents=(pa, pb), parent_names=(a, b))
        name = column_name(prov)
        if name in names:
            raise EncodingError(f"duplicate interaction column {name!r}")
        names.append(name)
        cols.append(design.values[:, ia] * design.values[:, ib])
        provs.append(prov)
    values = np.column_stack(cols) if cols else np.empty((design.shape[0], 0))
    return DesignMatrix(tuple(names), values, tuple(provs))


def plan_terms(data: Dataset, plan: EncodingPlan) -> list[Provenance]:
    """Resolve a plan against data (reference levels come from the data)."""
    terms = [Provenance("intercept")] if plan.intercept else []
    tl = {t.variable: t for t in plan.traffic_lights}
    for kind, var in plan.variable_order():
        if var not in data.names:
            raise EncodingError(f"plan references unknown variable {var!r}")
        if var == data.outcome:
            raise EncodingError(f"plan uses the outcome {var!r} as a predictor")
        if kind == "categorical":
            col = data.column(var).astype(str)
            ref = reference_level(col)
            terms += [Provenance("level", var, level=str(lv)) for lv in sorted(set(col)) if lv != ref]
            continue
        if data.kind(var) == "categorical":
            raise EncodingError(f"variable {var!r} is categorical; use a categorical directive")
        if kind == "raw":
            terms.append(Provenance("raw", var))
        else:
            terms += [Provenance("threshold", var, threshold=t) for t in tl[var].thresholds]
    return terms


def build_design(data: Dataset, plan: EncodingPlan) -> DesignMatrix:
    try:
        base = encode_terms(data, plan_terms(data, plan))
    except DataError as exc:
        raise EncodingError(str(exc)) from None
    return interactions(base, plan.interactions)


def default_plan(data: Dataset) -> EncodingPlan:
    """Every non-outcome column entered raw, categoricals dummy-coded."""
    order = []
    for spec in data.schema:
        if spec.name == data.outcome:
            continue
        order.append(("categorical" if spec.kind == "categorical" else "raw", spec.name))
    return EncodingPlan(categorical=tuple(v for k, v in order if k == "categorical"),
                        raw=tuple(v for k, v in order if k == "raw"), order=tuple(order))


def parse_plan(text: str) -> EncodingPlan:
    traffic, categorical, raw, inter, order = [], [], [], [], []
    intercept = True
    seen = set()
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        directive, _, rest = line.partition(" ")
        rest = rest.strip()
        try:
            if directive == "traffic_light":
                var, sep, thr = rest.partition(":")
                if not sep:
                    raise EncodingError("expected 'traffic_light <var>: t1,t2,...'")
                var = var.strip()
                ts = ThresholdSet(var, tuple(float(t) for t in thr.split(",") if t.strip()))
                traffic.append(ts)
                order.append(("traffic_light", var))
            elif directive in ("categorical", "raw"):
                var = rest
                if not var or " " in var:
                    raise EncodingError(f"expected '{directive} <var>'")
                (categorical if directive == "categorical" else raw).append(var)
                order.append((directive, var))
            elif directive == "interact":
                pair = rest.split()
                if len(pair) != 2:
                    raise EncodingError("expected 'interact <colA> <colB>'")
                inter.append((pair[0], pair[1]))
                continue
            elif directive == "intercept":
                if rest not in ("on", "off"):
                    raise EncodingError("expected 'intercept on' or 'intercept off'")
                intercept = rest == "on"
                continue
            else:
                raise EncodingError(f"unknown directive {directive!r}")
        except ValueError as exc:
            raise EncodingError(f"plan line {lineno}: {exc}") from None
        if order[-1][1] in seen:
            raise EncodingError(f"plan line {lineno}: variable {order[-1][1]!r} encoded twice")
        seen.add(order[-1][1])
    return EncodingPlan(tuple(traffic), tuple(categorical), tuple(raw), tuple(inter),
                        intercept, tuple(order))


def load_plan(path) -> EncodingPlan:
    if isinstance(path, (str, os.PathLike)):
        return parse_plan(Path(path).read_text(encoding="utf-8"))
    return parse_plan(path.read())
