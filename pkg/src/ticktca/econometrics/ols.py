"""Ordinary least squares with classical inference."""

from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np
import pandas as pd
from scipy import linalg, stats

from ..errors import InsufficientDataError, ValidationError


@dataclass(frozen=True)
class RegressionResult:
    names: tuple[str, ...]
    coefficients: np.ndarray
    std_errors: np.ndarray
    t_stats: np.ndarray
    p_values: np.ndarray
    r_squared: float
    adj_r_squared: float
    n_obs: int
    df_resid: int
    residuals: np.ndarray

    def __getitem__(self, name: str) -> float:
        return float(self.coefficients[self.names.index(name)])

    def row(self, name: str) -> dict[str, float]:
        i = self.names.index(name)
        return {"coef": float(self.coefficients[i]), "std_err": float(self.std_errors[i]),
                "t_stat": float(self.t_stats[i]), "p_value": float(self.p_values[i])}

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({"coef": self.coefficients, "std_err": self.std_errors,
                             "t_stat": self.t_stats, "p_value": self.p_values}, index=list(self.names))


def _as_design(X, names):
    if isinstance(X, pd.DataFrame):
        names = list(X.columns) if names is None else list(names)
        X = X.to_numpy(dtype=float)
    else:
        X = np.asarray(X, dtype=float)
        if X.ndim == 1:
            X = X[:, None]
        if names is None:
            names = [f"x{i + 1}" for i in range(X.shape[1])]
    if len(names) != X.shape[1]:
        raise ValidationError(f"{len(names)} names for {X.shape[1]} columns")
    return X, list(names)


def ols(y, X=None, intercept: bool = True, names: Sequence[str] | None = None,
        rank_tol: float = 1e-10) -> RegressionResult:
    """Least-squares fit of ``y`` on the columns of ``X``.

    Parameters
    ----------
    y : array-like, shape (n,)
    X : array-like or DataFrame, shape (n, k), optional
        Regressors. ``None`` means an intercept-only model.
    intercept : bool
        Prepend a constant column named ``const``.
    names : sequence of str, optional
        Column names; taken from the DataFrame when omitted.

    Raises
    ------
    ValidationError
        If the design is rank deficient; the message names the columns that
        are linear combinations of the others.
    InsufficientDataError
        If there are no residual degrees of freedom.
    """
    y = np.asarray(y, dtype=float).ravel()
    n = len(y)
    if X is None:
        X, cols = np.empty((n, 0)), []
    else:
        X, cols = _as_design(X, names)
    if intercept:
        X = np.column_stack([np.ones(n), X])
        cols = ["const"] + cols
    if X.shape[0] != n:
        raise ValidationError(f"y has {n} rows but X has {X.shape[0]}")
    p = X.shape[1]
    if p == 0:
        raise ValidationError("empty design")
    if n <= p:
        raise InsufficientDataError(f"need more than {p} observations for {p} parameters, got {n}")
    if not (np.all(np.isfinite(X)) and np.all(np.isfinite(y))):
        raise ValidationError("non-finite values in regression inputs")

    # column scaling keeps the rank test meaningful for regressors of very different magnitudes
    scale = np.sqrt(np.einsum("ij,ij->j", X, X))
    scale[scale == 0] = 1.0
    q, r, piv = linalg.qr(X / scale, mode="economic", pivoting=True)
    diag = np.abs(np.diag(r))
    rank = int(np.sum(diag > rank_tol * diag[0])) if diag.size and diag[0] > 0 else 0
    if rank < p:
        bad = [cols[j] for j in piv[rank:]]
        raise ValidationError(f"rank-deficient design; collinear column(s): {', '.join(bad)}")

    beta_scaled = np.empty(p)
    beta_scaled[piv] = linalg.solve_triangular(r, q.T @ y)
    beta = beta_scaled / scale
    resid = y - X @ beta
    dof = n - p
    ssr = float(resid @ resid)
    sigma2 = ssr / dof
    rinv = linalg.solve_triangular(r, np.eye(p))
    cov_scaled = np.empty((p, p))
    cov_scaled[np.ix_(piv, piv)] = rinv @ rinv.T
    se = np.sqrt(sigma2 * np.diag(cov_scaled)) / scale
    with np.errstate(divide="ignore", invalid="ignore"):
        tstat = beta / se
    pval = 2.0 * stats.t.sf(np.abs(tstat), dof)

    if intercept:
        centered = y - y.mean()
        sst = float(centered @ centered)
        denom_df = n - 1
    else:
        sst = float(y @ y)
        denom_df = n
    with np.errstate(divide="ignore", invalid="ignore"):
        r2 = 1.0 - ssr / sst if sst > 0 else np.nan
        adj = 1.0 - (1.0 - r2) * denom_df / dof if sst > 0 else np.nan
    return RegressionResult(tuple(cols), beta, se, tstat, pval, float(r2), float(adj), n, dof, resid)
