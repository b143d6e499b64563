"""Binary logistic regression fitted by Newton / IRLS.

Conventions
-----------
* log-likelihood ``l = sum(y * eta - log(1 + exp(eta)))`` with ``eta = X @ beta``
* deviance ``-2 l``; convergence when the absolute deviance change drops below
  ``deviance_tolerance``
* ``aic = 2 p - 2 l`` (smaller is better)
* an optional ridge penalty ``ridge / 2 * ||beta||^2`` skips the intercept column
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

MAX_HALVINGS = 10


class FitError(ValueError):
    """The model cannot be fitted to this design/outcome."""


class SingularDesignError(FitError):
    def __init__(self, columns):
        self.columns = list(columns)
        super().__init__("singular information matrix; linearly dependent columns: "
                         + ", ".join(self.columns))


@dataclass(frozen=True)
class FitOptions:
    max_iterations: int = 50
    deviance_tolerance: float = 1e-8
    ridge: float = 0.0
    separation_coefficient_bound: float = 15.0

    def __post_init__(self):
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be at least 1")
        if not self.deviance_tolerance > 0:
            raise ValueError("deviance_tolerance must be positive")
        if self.ridge < 0:
            raise ValueError("ridge must be nonnegative")
        if not self.separation_coefficient_bound > 0:
            raise ValueError("separation_coefficient_bound must be positive")


@dataclass(frozen=True, eq=False)
class LogisticFit:
    names: tuple[str, ...]
    coefficients: np.ndarray
    log_likelihood: float
    aic: float
    covariance: np.ndarray
    iterations: int
    converged: bool
    warnings: tuple[str, ...] = ()
    n_obs: int = 0
    options: FitOptions = field(default_factory=FitOptions)
    terms: tuple | None = None  # column provenance, carried into model files

    @property
    def n_params(self) -> int:
        return len(self.coefficients)

    @property
    def std_errors(self) -> np.ndarray:
        return np.sqrt(np.clip(np.diag(self.covariance), 0.0, None))

    @property
    def deviance(self) -> float:
        return -2.0 * self.log_likelihood


def probability(log_odds):
    """Inverse logit ``exp(z) / (1 + exp(z))``; overflow-free for any finite z."""
    z = np.asarray(log_odds, dtype=np.float64)
    e = np.exp(-np.abs(z))
    out = np.where(z >= 0, 1.0 / (1.0 + e), e / (1.0 + e))
    return float(out) if out.ndim == 0 else out


def logit(p):
    p = np.asarray(p, dtype=np.float64)
    out = np.log(p) - np.log1p(-p)
    return float(out) if out.ndim == 0 else out


def log_odds(fit: LogisticFit, row) -> float | np.ndarray:
    """Linear predictor for one encoded row (1-D) or a matrix of rows (2-D)."""
    x = np.asarray(row, dtype=np.float64)
    if x.shape[-1] != fit.n_params:
        raise ValueError(f"row has {x.shape[-1]} values, model has {fit.n_params} coefficients")
    out = x @ fit.coefficients
    return float(out) if np.ndim(out) == 0 else out


def log_likelihood(probabilities, outcome) -> float:
    p = np.asarray(probabilities, dtype=np.float64)
    y = np.asarray(outcome, dtype=np.float64)
    if p.shape != y.shape:
        raise ValueError(f"length mismatch: {p.size} probabilities, {y.size} outcomes")
    if np.any((p < 0) | (p > 1)):
        raise ValueError("probabilities must lie in [0, 1]")
    if np.any((p == 0) & (y == 1)) or np.any((p == 1) & (y == 0)):
        raise ValueError("log-likelihood is -inf: a certain prediction contradicts an outcome")
    with np.errstate(divide="ignore"):
        pos = np.where(y == 1, np.log(np.where(y == 1, p, 1.0)), 0.0)
        neg = np.where(y == 0, np.log1p(-np.where(y == 0, p, 0.0)), 0.0)
    return float(np.sum(pos + neg))


def _loglik_eta(eta: np.ndarray, y: np.ndarray) -> float:
    return float(np.sum(y * eta - np.logaddexp(0.0, eta)))


def score(X: np.ndarray, y: np.ndarray, beta: np.ndarray) -> np.ndarray:
    """Gradient of the log-likelihood in beta."""
    return X.T @ (y - probability(X @ beta))


def aic(fit: LogisticFit) -> float:
    if not fit.converged:
        raise FitError("AIC requested for an unconverged fit; refit with more iterations "
                       "or a ridge penalty")
    return fit.aic


def _dependent_columns(X: np.ndarray, names) -> list[str]:
    dependent, kept = [], []
    for j in range(X.shape[1]):
        trial = X[:, kept + [j]]
        if np.linalg.matrix_rank(trial) < len(kept) + 1:
            dependent.append(names[j])
        else:
            kept.append(j)
    return dependent


def _intercept_mask(X: np.ndarray) -> np.ndarray:
    return np.all(X == 1.0, axis=0)


def fit(X, y, options: FitOptions | None = None, names=None, terms=None) -> LogisticFit:
    """Maximum-likelihood logistic regression.

    Newton steps that raise the (penalized) deviance are halved up to
    ``MAX_HALVINGS`` times. If any coefficient exceeds
    ``separation_coefficient_bound`` in magnitude the data are treated as
    (quasi-)separated: without a ridge penalty iteration stops with
    ``converged=False``; with one it continues, since the penalty keeps the
    optimum finite. Either way a warning names the column.
    """
    options = options or FitOptions()
    if names is None:
        names = getattr(X, "names", None)
    if terms is None:
        terms = getattr(X, "provenance", None)
    X = np.asarray(getattr(X, "values", X), dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if X.ndim != 2:
        raise FitError("design must be a 2-D matrix")
    n, p = X.shape
    names = tuple(names) if names is not None else tuple(f"x{j}" for j in range(p))
    if len(names) != p:
        raise FitError("names do not match design width")
    if len(y) != n:
        raise FitError(f"design has {n} rows but outcome has {len(y)} values")
    if np.any((y != 0) & (y != 1)):
        raise FitError("outcome must contain only 0 and 1")
    if y.min() == y.max():
        raise FitError(f"outcome is all {int(y[0])}; need at least one 0 and one 1")
    if p == 0:
        raise FitError("design has no columns")

    penalty = np.full(p, options.ridge)
    penalty[_intercept_mask(X)] = 0.0
    if options.ridge == 0.0 or np.any(penalty == 0.0):
        unpenalized = penalty == 0.0
        dependent = _dependent_columns(X[:, unpenalized], [nm for nm, u in zip(names, unpenalized) if u])
        if dependent:
            raise SingularDesignError(dependent)

    def objective(b):
        eta = X @ b
        return -2.0 * _loglik_eta(eta, y) + np.sum(penalty * b * b)

    beta = np.zeros(p)
    dev = objective(beta)
    warnings: list[str] = []
    converged = separated = False
    iterations = 0
    for iterations in range(1, options.max_iterations + 1):
        mu = probability(X @ beta)
        w = mu * (1.0 - mu)
        grad = X.T @ (y - mu) - penalty * beta
        info = (X * w[:, None]).T @ X + np.diag(penalty)
        try:
            step = np.linalg.solve(info, grad)
        except np.linalg.LinAlgError:
            raise SingularDesignError(_dependent_columns(X * np.sqrt(w)[:, None], names)
                                      or list(names)) from None
        new_beta = beta + step
        new_dev = objective(new_beta)
        halvings = 0
        while not new_dev <= dev and halvings < MAX_HALVINGS:
            step = step / 2.0
            new_beta = beta + step
            new_dev = objective(new_beta)
            halvings += 1
        if new_dev <= dev:
            change = dev - new_dev
            beta, dev = new_beta, new_dev
        else:
            # no descent direction survives halving: numerically at the optimum
            change = 0.0
            if new_dev - dev > options.deviance_tolerance:
                warnings.append("step-halving exhausted before the deviance decreased")
        big = np.flatnonzero(np.abs(beta) > options.separation_coefficient_bound)
        if len(big) and not separated:
            separated = True
            warnings.append("separation: |coefficient| exceeded "
                            f"{options.separation_coefficient_bound:g} for "
                            + ", ".join(names[j] for j in big))
            if options.ridge == 0.0:
                break
        if change < options.deviance_tolerance:
            converged = True
            break
    else:
        warnings.append(f"no convergence within {options.max_iterations} iterations")

    if separated and options.ridge == 0.0:
        converged = False

    eta = X @ beta
    mu = probability(eta)
    w = mu * (1.0 - mu)
    info = (X * w[:, None]).T @ X + np.diag(penalty)
    try:
        cov = np.linalg.inv(info)
        cov = (cov + cov.T) / 2.0
    except np.linalg.LinAlgError:
        cov = np.full((p, p), np.nan)
    ll = _loglik_eta(eta, y)
    beta.setflags(write=False)
    cov.setflags(write=False)
    return LogisticFit(names=names, coefficients=beta, log_likelihood=ll,
                       aic=2.0 * p - 2.0 * ll, covariance=cov, iterations=iterations,
                       converged=converged, warnings=tuple(warnings), n_obs=n,
                       options=options, terms=tuple(terms) if terms is not None else None)


def normal_sf(z: float) -> float:
    """Upper tail of the standard normal, via the complementary error function."""
    return 0.5 * math.erfc(z / math.sqrt(2.0))


def wald_p_values(fit: LogisticFit) -> np.ndarray:
    """Two-sided p-values for ``beta_j / se_j`` against the standard normal."""
    if not fit.converged:
        raise FitError("Wald inference needs a converged fit")
    var = np.diag(fit.covariance)
    if not np.all(np.isfinite(var)) or np.any(var <= 0):
        raise FitError("singular covariance matrix")
    z = fit.coefficients / np.sqrt(var)
    return np.array([min(1.0, 2.0 * normal_sf(abs(v))) for v in z])


def wald_group_p_value(fit: LogisticFit, indices) -> float:
    """Joint Wald chi-square test that the indexed coefficients are all zero."""
    from scipy.stats import chi2

    idx = list(indices)
    if len(idx) == 1:
        return float(wald_p_values(fit)[idx[0]])
    b = fit.coefficients[idx]
    v = fit.covariance[np.ix_(idx, idx)]
    try:
        stat = float(b @ np.linalg.solve(v, b))
    except np.linalg.LinAlgError:
        raise FitError("singular covariance matrix") from None
    return float(chi2.sf(stat, df=len(idx)))
