"""OLS core with measurement-error prediction intervals.

The interval for a query comes from the measurement-error reading of the
classic OLS formula: with G = (XbarT Xbar)^-1 for the intercept-augmented
design Xbar = [1 X],

    point +/- t_{dof; 1-alpha/2} * sqrt(sigma2 * (1 + zbarT G zbar + dbarT G dbar))

where zbar appends a leading 1 to the (answers + imputations) vector z and
dbar appends a leading 0 to the per-feature estimation-error vector delta.
The dbarT G dbar term widens the interval for features that are currently
imputed rather than answered; answered features carry delta = 0.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy import optimize, special

CONDITION_LIMIT = 1e12
RIDGE_EPS = 1e-8


class SingularModelError(ValueError):
    """Design matrix whose Gram is singular beyond repair."""


@dataclass(frozen=True)
class PredictionInterval:
    """Symmetric interval [lower, upper] around the point prediction."""

    point: float
    lower: float
    upper: float
    width: float
    alpha: float

    def __post_init__(self) -> None:
        if not self.lower <= self.point <= self.upper:
            raise ValueError(
                f"interval must bracket the point: {self.lower}, {self.point}, {self.upper}"
            )
        if self.width < 0:
            raise ValueError(f"width must be non-negative, got {self.width}")
        mid = 0.5 * (self.lower + self.upper)
        if abs(mid - self.point) > 1e-9 * max(1.0, abs(self.point)):
            raise ValueError(f"interval is not symmetric: midpoint {mid} vs point {self.point}")


@dataclass(frozen=True)
class TrainedModel:
    """Fitted OLS model plus the pieces the interval formula needs.

    ``beta_hat`` has the intercept first; ``gram_inverse`` is
    (XbarT Xbar)^-1 (after ridge jitter when the design was near-singular,
    in which case ``regularized`` is set); ``dof`` is n - d - 1.
    """

    beta_hat: np.ndarray
    gram_inverse: np.ndarray
    sigma2_hat: float
    dof: int
    feature_ids: tuple[int, ...]
    alpha_default: float = 0.1
    regularized: bool = False

    def __post_init__(self) -> None:
        beta = np.asarray(self.beta_hat, dtype=float)
        gram = np.asarray(self.gram_inverse, dtype=float)
        object.__setattr__(self, "beta_hat", beta)
        object.__setattr__(self, "gram_inverse", gram)
        p = beta.shape[0]
        if gram.shape != (p, p):
            raise ValueError(f"gram_inverse shape {gram.shape} does not match beta {p}")
        sym_err = np.max(np.abs(gram - gram.T))
        if sym_err > 1e-8 * max(1.0, float(np.max(np.abs(gram)))):
            raise ValueError(f"gram_inverse is not symmetric (max asymmetry {sym_err})")
        if self.sigma2_hat < 0:
            raise ValueError(f"sigma2_hat must be non-negative, got {self.sigma2_hat}")
        if self.dof < 1:
            raise ValueError(f"dof must be >= 1, got {self.dof}")
        if len(self.feature_ids) != p - 1:
            raise ValueError(
                f"{len(self.feature_ids)} feature ids for {p - 1} coefficients"
            )

    @property
    def n_features(self) -> int:
        return self.beta_hat.shape[0] - 1

    def predict(self, z: np.ndarray) -> float:
        """Point prediction beta . zbar for a full feature vector z."""
        z = np.asarray(z, dtype=float)
        if z.shape != (self.n_features,):
            raise ValueError(f"z has shape {z.shape}, expected ({self.n_features},)")
        return float(self.beta_hat[0] + self.beta_hat[1:] @ z)

    def to_dict(self) -> dict:
        return {
            "beta_hat": [float(b) for b in self.beta_hat],
            "gram_inverse": [[float(v) for v in row] for row in self.gram_inverse],
            "sigma2_hat": float(self.sigma2_hat),
            "dof": int(self.dof),
            "feature_ids": list(self.feature_ids),
            "alpha_default": float(self.alpha_default),
            "regularized": bool(self.regularized),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "TrainedModel":
        return cls(
            beta_hat=np.array(data["beta_hat"], dtype=float),
            gram_inverse=np.array(data["gram_inverse"], dtype=float),
            sigma2_hat=float(data["sigma2_hat"]),
            dof=int(data["dof"]),
            feature_ids=tuple(int(f) for f in data["feature_ids"]),
            alpha_default=float(data.get("alpha_default", 0.1)),
            regularized=bool(data.get("regularized", False)),
        )

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_dict()), encoding="utf-8")

    @classmethod
    def load(cls, path: str | Path) -> "TrainedModel":
        return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


def _augment(x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.ndim != 2:
        raise ValueError(f"x must be 2-dimensional, got shape {x.shape}")
    return np.column_stack([np.ones(x.shape[0]), x])


def fit_ols(
    x: np.ndarray,
    y: np.ndarray,
    alpha: float = 0.1,
    feature_ids: tuple[int, ...] | None = None,
) -> TrainedModel:
    """Fit ordinary least squares with the intercept-augmented design.

    Near-singular Grams (condition estimate above 1e12) get a ridge jitter of
    RIDGE_EPS * trace / (d+1) on the diagonal and the model is flagged
    ``regularized``; a Gram still singular after jitter raises
    SingularModelError. Requires n > d + 1 so dof >= 1.
    """
    xb = _augment(x)
    y = np.asarray(y, dtype=float)
    n, p = xb.shape
    d = p - 1
    if y.shape != (n,):
        raise ValueError(f"y has shape {y.shape}, expected ({n},)")
    if n <= d + 1:
        raise ValueError(f"need n > d+1 rows to fit, got n={n}, d={d}")

    gram = xb.T @ xb
    regularized = False
    cond = np.linalg.cond(gram)
    if not np.isfinite(cond) or cond > CONDITION_LIMIT:
        jitter = RIDGE_EPS * float(np.trace(gram)) / p
        gram = gram + jitter * np.eye(p)
        regularized = True
        cond = np.linalg.cond(gram)
        if not np.isfinite(cond) or cond > CONDITION_LIMIT:
            raise SingularModelError(
                f"design matrix is singular (condition {cond:.3g} after jitter)"
            )
    gram_inv = np.linalg.inv(gram)
    gram_inv = 0.5 * (gram_inv + gram_inv.T)  # enforce exact symmetry
    beta = gram_inv @ (xb.T @ y)
    resid = y - xb @ beta
    dof = n - d - 1
    sigma2 = float(resid @ resid) / dof
    return TrainedModel(
        beta_hat=beta,
        gram_inverse=gram_inv,
        sigma2_hat=max(sigma2, 0.0),
        dof=dof,
        feature_ids=feature_ids if feature_ids is not None else tuple(range(1, d + 1)),
        alpha_default=alpha,
        regularized=regularized,
    )


def _t_cdf(value: float, dof: float) -> float:
    """Student-t CDF via the regularized incomplete beta function."""
    if value == 0.0:
        return 0.5
    tail = 0.5 * special.betainc(dof / 2.0, 0.5, dof / (dof + value * value))
    return tail if value < 0 else 1.0 - tail


def t_quantile(dof: int, prob: float) -> float:
    """Quantile q with CDF_t(q; dof) = prob, accurate to 1e-10 in probability.

    Computed by bracketed numeric inversion of the incomplete-beta CDF
    representation.
    """
    if dof < 1:
        raise ValueError(f"dof must be >= 1, got {dof}")
    if not 0.0 < prob < 1.0:
        raise ValueError(f"prob must be in (0, 1), got {prob}")
    if prob == 0.5:
        return 0.0
    lo, hi = -2.0, 2.0
    while _t_cdf(lo, dof) > prob:
        lo *= 4.0
    while _t_cdf(hi, dof) < prob:
        hi *= 4.0
    return float(optimize.brentq(lambda q: _t_cdf(q, dof) - prob, lo, hi, xtol=1e-14))


def predict_interval(
    model: TrainedModel, z: np.ndarray, delta: np.ndarray, alpha: float
) -> PredictionInterval:
    """100(1-alpha)% prediction interval at z with estimation errors delta.

    ``delta`` must be zero for answered features and carry the per-feature
    estimation-error magnitude for imputed ones, in the model's column order.
    """
    z = np.asarray(z, dtype=float)
    delta = np.asarray(delta, dtype=float)
    d = model.n_features
    if z.shape != (d,):
        raise ValueError(f"z has shape {z.shape}, expected ({d},)")
    if delta.shape != (d,):
        raise ValueError(f"delta has shape {delta.shape}, expected ({d},)")
    zbar = np.concatenate([[1.0], z])
    dbar = np.concatenate([[0.0], delta])
    g = model.gram_inverse
    qz = float(zbar @ g @ zbar)
    qd = float(dbar @ g @ dbar)
    assert qz > -1e-10 and qd > -1e-10, f"negative quadratic form: {qz}, {qd}"
    radicand = model.sigma2_hat * (1.0 + max(qz, 0.0) + max(qd, 0.0))
    half = t_quantile(model.dof, 1.0 - alpha / 2.0) * math.sqrt(radicand)
    point = model.predict(z)
    return PredictionInterval(
        point=point,
        lower=point - half,
        upper=point + half,
        width=2.0 * half,
        alpha=alpha,
    )


def loocv_error(x: np.ndarray, y: np.ndarray) -> float:
    """Mean squared leave-one-out error via the hat-matrix shortcut.

    Equals the naive refit-n-times procedure; rows with leverage ~1 fall back
    to an explicit refit without that row. Uses the plain (unjittered) Gram
    because the PRESS identity e_i / (1 - h_ii) holds only for the
    unpenalized hat matrix; a singular design raises SingularModelError.
    """
    xb = _augment(x)
    y = np.asarray(y, dtype=float)
    n, p = xb.shape
    if y.shape != (n,):
        raise ValueError(f"y has shape {y.shape}, expected ({n},)")
    if n <= p:
        raise ValueError(f"need n > d+1 rows, got n={n}, d={p - 1}")
    gram = xb.T @ xb
    cond = np.linalg.cond(gram)
    if not np.isfinite(cond) or cond > CONDITION_LIMIT:
        raise SingularModelError(f"design matrix is singular (condition {cond:.3g})")
    gram_inv = np.linalg.inv(gram)
    beta = gram_inv @ (xb.T @ y)
    resid = y - xb @ beta
    leverage = np.einsum("ij,jk,ik->i", xb, gram_inv, xb)

    errors = np.empty(n)
    regular = leverage < 1.0 - 1e-12
    errors[regular] = resid[regular] / (1.0 - leverage[regular])
    for i in np.nonzero(~regular)[0]:
        keep = np.arange(n) != i
        sub_beta, *_ = np.linalg.lstsq(xb[keep], y[keep], rcond=None)
        errors[i] = y[i] - xb[i] @ sub_beta
    return float(np.mean(errors**2))
