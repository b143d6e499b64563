"""Delimited-table ingestion, sample splitting and synthetic rare-event data.

Column kinds are inferred with a fixed rule unless hinted:

* any non-numeric token -> ``categorical``
* only the values 0 and 1 -> ``binary``
* integer-valued with at most 20 distinct values -> ``ordinal``
* otherwise -> ``continuous``

Synthetic data comes from numpy's PCG64 generator (``numpy.random.default_rng``),
whose output stream is fixed across platforms for a given seed.
"""

from __future__ import annotations

import csv
import io
import math
import os
from dataclasses import dataclass
from pathlib import Path
from typing import IO, Iterable, Mapping, Sequence

import numpy as np

from .glm import probability

KINDS = ("continuous", "ordinal", "categorical", "binary")
MAX_ORDINAL_LEVELS = 20
TABLE_HEADER = "# costcut-table v1"

# distributions used by synth_rare_event, one per column kind
ORDINAL_GRID = np.arange(10)
CATEGORICAL_LEVELS = ("a", "b", "c")


class DataError(ValueError):
    """Malformed or invalid tabular input."""


@dataclass(frozen=True)
class ColumnSpec:
    name: str
    kind: str

    def __post_init__(self):
        if self.kind not in KINDS:
            raise DataError(f"unknown column kind {self.kind!r} for {self.name!r}")


@dataclass(frozen=True)
class SplitSpec:
    train_fraction: float
    seed: int = 0

    def __post_init__(self):
        if not 0.0 < self.train_fraction < 1.0:
            raise DataError("train_fraction must lie strictly between 0 and 1")
        if self.seed < 0:
            raise DataError("seed must be a nonnegative integer")


class Dataset:
    """Immutable column store. Numeric columns are float64, categorical columns str."""

    def __init__(self, schema: Sequence[ColumnSpec], columns: Mapping[str, np.ndarray],
                 outcome: str | None = None):
        schema = tuple(schema)
        names = [c.name for c in schema]
        if len(set(names)) != len(names):
            raise DataError("duplicate column names in schema")
        if set(names) != set(columns):
            raise DataError("schema and columns disagree")
        lengths = {len(columns[n]) for n in names}
        if len(lengths) > 1:
            raise DataError("columns have unequal lengths")
        frozen = {}
        for spec in schema:
            arr = np.array(columns[spec.name],
                           dtype=str if spec.kind == "categorical" else np.float64)
            arr.setflags(write=False)
            frozen[spec.name] = arr
        if outcome is not None:
            if outcome not in frozen:
                raise DataError(f"outcome column {outcome!r} not found")
            y = frozen[outcome]
            bad = np.arange(len(y)) if y.dtype.kind == "U" else np.flatnonzero((y != 0) & (y != 1))
            if len(bad):
                raise DataError(f"non-binary outcome in column {outcome!r} "
                                f"at data row {bad[0] + 1}: {y[bad[0]]!r}")
        self.schema = schema
        self.outcome = outcome
        self._columns = frozen

    @property
    def n(self) -> int:
        return len(self._columns[self.schema[0].name]) if self.schema else 0

    @property
    def names(self) -> list[str]:
        return [c.name for c in self.schema]

    @property
    def y(self) -> np.ndarray:
        if self.outcome is None:
            raise DataError("dataset has no outcome column")
        return self._columns[self.outcome]

    @property
    def prevalence(self) -> float:
        return float(self.y.mean())

    def kind(self, name: str) -> str:
        for spec in self.schema:
            if spec.name == name:
                return spec.kind
        raise DataError(f"unknown column {name!r}")

    def column(self, name: str) -> np.ndarray:
        try:
            return self._columns[name]
        except KeyError:
            raise DataError(f"unknown column {name!r}") from None

    def take(self, indices: Sequence[int]) -> "Dataset":
        idx = np.asarray(indices, dtype=np.intp)
        return Dataset(self.schema, {k: v[idx] for k, v in self._columns.items()},
                       self.outcome)

    def __len__(self):
        return self.n

    def __eq__(self, other):
        if not isinstance(other, Dataset):
            return NotImplemented
        return (self.schema == other.schema and self.outcome == other.outcome
                and all(np.array_equal(self._columns[k], other._columns[k])
                        for k in self._columns))

    def __repr__(self):
        return f"Dataset(n={self.n}, columns={self.names}, outcome={self.outcome!r})"


def _parse_float(token: str) -> float | None:
    try:
        value = float(token)
    except ValueError:
        return None
    return value if math.isfinite(value) else None


def _infer_kind(values: list[float | None]) -> str:
    if any(v is None for v in values):
        return "categorical"
    distinct = set(values)
    if distinct <= {0.0, 1.0}:
        return "binary"
    if all(float(v).is_integer() for v in distinct) and len(distinct) <= MAX_ORDINAL_LEVELS:
        return "ordinal"
    return "continuous"


def _read_text(source) -> str:
    if isinstance(source, (str, os.PathLike)):
        return Path(source).read_text(encoding="utf-8")
    data = source.read()
    return data.decode("utf-8") if isinstance(data, bytes) else data


def load_table(source, outcome_name: str | None, schema_hints: Mapping[str, str] | None = None,
               delimiter: str = ",", allow_empty: bool = False) -> Dataset:
    """Read a delimited table with a header row into a :class:`Dataset`.

    Leading lines starting with ``#`` are skipped (format version lines).
    Missing values are rejected; there is no imputation. ``outcome_name`` may be
    None for feature-only tables such as prediction inputs.
    """
    hints = dict(schema_hints or {})
    lines = _read_text(source).splitlines()
    while lines and lines[0].startswith("#"):
        lines.pop(0)
    rows = list(csv.reader(lines, delimiter=delimiter))
    while rows and not any(cell.strip() for cell in rows[-1]):
        rows.pop()
    if not rows:
        raise DataError("empty table: no header row")
    header = [h.strip() for h in rows[0]]
    if len(set(header)) != len(header):
        raise DataError("duplicate column names in header")
    if outcome_name is not None and outcome_name not in header:
        raise DataError(f"missing outcome column {outcome_name!r}")
    unknown = set(hints) - set(header)
    if unknown:
        raise DataError(f"schema hints name unknown columns: {sorted(unknown)}")
    body = rows[1:]
    if not body and not allow_empty:
        raise DataError("empty table: header but no data rows")
    for i, row in enumerate(body, start=2):
        if len(row) != len(header):
            raise DataError(f"ragged row at line {i}: {len(row)} fields, expected {len(header)}")
        for j, cell in enumerate(row):
            if not cell.strip():
                raise DataError(f"missing value at line {i}, column {header[j]!r}")

    schema, columns = [], {}
    for j, name in enumerate(header):
        tokens = [row[j].strip() for row in body]
        parsed = [_parse_float(t) for t in tokens]
        kind = hints.get(name) or ("binary" if name == outcome_name else _infer_kind(parsed))
        if kind == "categorical":
            columns[name] = np.array(tokens, dtype=str)
        else:
            for i, v in enumerate(parsed):
                if v is None:
                    raise DataError(f"non-numeric value {tokens[i]!r} at line {i + 2}, "
                                    f"column {name!r}")
            columns[name] = np.array(parsed, dtype=np.float64)
        schema.append(ColumnSpec(name, kind))
    return Dataset(schema, columns, outcome_name)


def format_value(value) -> str:
    """Shortest text that reloads to the identical value."""
    if isinstance(value, str):
        return value
    value = float(value)
    if value.is_integer() and abs(value) < 1e15:
        return str(int(value))
    return repr(value)


def write_rows(stream: IO[str], header: Sequence[str], rows: Iterable[Sequence[str]],
               delimiter: str = ",", version_line: str | None = TABLE_HEADER) -> None:
    if version_line:
        stream.write(version_line + "\n")
    writer = csv.writer(stream, delimiter=delimiter, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)


def write_table(data: Dataset, dest, delimiter: str = ",") -> None:
    """Serialize a dataset so that :func:`load_table` restores it exactly."""
    cols = [data.column(n) for n in data.names]
    rows = ([format_value(c[i]) for c in cols] for i in range(data.n))
    if isinstance(dest, (str, os.PathLike)):
        with open(dest, "w", encoding="utf-8", newline="") as fh:
            write_rows(fh, data.names, rows, delimiter)
    else:
        write_rows(dest, data.names, rows, delimiter)


def table_text(data: Dataset, delimiter: str = ",") -> str:
    buf = io.StringIO()
    write_table(data, buf, delimiter)
    return buf.getvalue()


def split(data: Dataset, spec: SplitSpec) -> tuple[Dataset, Dataset]:
    """Random disjoint partition into (train, test); both sides keep input row order.

    The train size is ``round(fraction * n)`` clamped to ``[1, n - 1]``.
    """
    n = data.n
    if n < 2:
        raise DataError("cannot split fewer than 2 rows into two nonempty parts")
    n_train = min(max(int(round(spec.train_fraction * n)), 1), n - 1)
    perm = np.random.default_rng(spec.seed).permutation(n)
    train = np.sort(perm[:n_train])
    test = np.sort(perm[n_train:])
    return data.take(train), data.take(test)


def synth_rare_event(n: int, coefficients: Sequence[float], feature_spec: Sequence[ColumnSpec],
                     seed: int, outcome_name: str = "y") -> Dataset:
    """Generate a logistic-model dataset.

    Features are drawn column by column in schema order: continuous ~ U(0, 1),
    ordinal uniform on the integers 0..9, binary ~ Bernoulli(1/2), categorical
    uniform on levels a/b/c. Categorical features enter the linear predictor
    through a single coefficient times the level index (a=0, b=1, c=2). The
    outcome is 1 when a U(0, 1) draw falls below the inverse-logit of
    ``coefficients[0] + sum(coefficients[j] * x_j)``.
    """
    if n < 1:
        raise DataError("n must be at least 1")
    feature_spec = list(feature_spec)
    coefficients = np.asarray(coefficients, dtype=np.float64)
    if len(coefficients) != 1 + len(feature_spec):
        raise DataError(f"expected {1 + len(feature_spec)} coefficients "
                        f"(intercept + one per feature), got {len(coefficients)}")
    if outcome_name in {c.name for c in feature_spec}:
        raise DataError(f"feature named like the outcome {outcome_name!r}")
    rng = np.random.default_rng(seed)
    eta = np.full(n, coefficients[0])
    columns = {}
    for spec, beta in zip(feature_spec, coefficients[1:]):
        if spec.kind == "continuous":
            x = rng.random(n)
            numeric = x
        elif spec.kind == "ordinal":
            x = rng.choice(ORDINAL_GRID, size=n).astype(np.float64)
            numeric = x
        elif spec.kind == "binary":
            x = (rng.random(n) < 0.5).astype(np.float64)
            numeric = x
        else:
            idx = rng.integers(0, len(CATEGORICAL_LEVELS), size=n)
            x = np.array(CATEGORICAL_LEVELS)[idx]
            numeric = idx.astype(np.float64)
        columns[spec.name] = x
        eta = eta + beta * numeric
    columns[outcome_name] = (rng.random(n) < probability(eta)).astype(np.float64)
    schema = feature_spec + [ColumnSpec(outcome_name, "binary")]
    return Dataset(schema, columns, outcome_name)
