"""Plain-text model files.

Layout (tab separated)::

    # costcut-model v1
    log_likelihood  <value>
    aic             <value>
    ...             (fit record and options, one per line)
    warning         <text>            (zero or more)
    [coefficients]
    column  coefficient  std_error  term
    ...
    [covariance]
    <p rows of p values>

Numbers are written with ``repr`` so they reload bit-for-bit. The ``term``
field tells how to rebuild each column from raw data (``intercept``,
``raw|x``, ``ge|x|t``, ``eq|x|level``, ``mul|<term>|<term>``). The predicted
probability is ``1 / (1 + exp(-(sum of coefficient * column)))``.
"""

from __future__ import annotations

import os
from pathlib import Path

import numpy as np

from .encoding import Provenance
from .glm import FitOptions, LogisticFit

MODEL_HEADER = "# costcut-model v1"


class ModelFileError(ValueError):
    pass


def dumps(fit: LogisticFit) -> str:
    if fit.terms is None:
        raise ModelFileError("fit carries no column provenance; fit it from a DesignMatrix")
    o = fit.options
    lines = [MODEL_HEADER]
    for key, value in (("log_likelihood", repr(fit.log_likelihood)),
                       ("aic", repr(fit.aic)),
                       ("n_obs", str(fit.n_obs)),
                       ("iterations", str(fit.iterations)),
                       ("converged", "true" if fit.converged else "false"),
                       ("max_iterations", str(o.max_iterations)),
                       ("deviance_tolerance", repr(o.deviance_tolerance)),
                       ("ridge", repr(o.ridge)),
                       ("separation_coefficient_bound", repr(o.separation_coefficient_bound))):
        lines.append(f"{key}\t{value}")
    lines += [f"warning\t{w}" for w in fit.warnings]
    lines.append("[coefficients]")
    lines.append("column\tcoefficient\tstd_error\tterm")
    for name, b, se, term in zip(fit.names, fit.coefficients, fit.std_errors, fit.terms):
        lines.append(f"{name}\t{float(b)!r}\t{float(se)!r}\t{term.to_text()}")
    lines.append("[covariance]")
    for row in fit.covariance:
        lines.append("\t".join(repr(float(v)) for v in row))
    return "\n".join(lines) + "\n"


def loads(text: str) -> LogisticFit:
    lines = text.splitlines()
    if not lines or lines[0].strip() != MODEL_HEADER:
        raise ModelFileError(f"not a model file (expected first line {MODEL_HEADER!r})")
    meta, warnings = {}, []
    i = 1
    try:
        while lines[i] != "[coefficients]":
            key, _, value = lines[i].partition("\t")
            if key == "warning":
                warnings.append(value)
            else:
                meta[key] = value
            i += 1
        i += 2  # section marker and column header
        names, coefs, terms = [], [], []
        while lines[i] != "[covariance]":
            name, b, _se, term = lines[i].split("\t")
            names.append(name)
            coefs.append(float(b))
            terms.append(Provenance.from_text(term))
            i += 1
        cov = np.array([[float(v) for v in ln.split("\t")]
                        for ln in lines[i + 1:i + 1 + len(names)]]).reshape(len(names), len(names))
        options = FitOptions(int(meta["max_iterations"]), float(meta["deviance_tolerance"]),
                             float(meta["ridge"]), float(meta["separation_coefficient_bound"]))
        beta = np.array(coefs)
        beta.setflags(write=False)
        cov.setflags(write=False)
        return LogisticFit(names=tuple(names), coefficients=beta,
                           log_likelihood=float(meta["log_likelihood"]),
                           aic=float(meta["aic"]), covariance=cov,
                           iterations=int(meta["iterations"]),
                           converged=meta["converged"] == "true",
                           warnings=tuple(warnings), n_obs=int(meta["n_obs"]),
                           options=options, terms=tuple(terms))
    except (IndexError, KeyError, ValueError) as exc:
        if isinstance(exc, ModelFileError):
            raise
        raise ModelFileError(f"malformed model file near line {i + 1}: {exc}") from None


def save(fit: LogisticFit, path) -> None:
    Path(path).write_text(dumps(fit), encoding="utf-8")


def load(path) -> LogisticFit:
    if isinstance(path, (str, os.PathLike)):
        return loads(Path(path).read_text(encoding="utf-8"))
    return loads(path.read())
