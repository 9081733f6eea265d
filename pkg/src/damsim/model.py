"""Binary logistic regression and recursive feature elimination.

Training standardizes features with the training set's mean and standard
deviation, so coefficients are on a common scale and can be ranked by
magnitude.  The optimizer is plain gradient descent with Armijo
backtracking from a zero start, which makes training fully deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from .datapool import Dataset
from .errors import ConfigError, DimensionError, EmptyInputError, ParameterError


@dataclass(frozen=True)
class TrainConfig:
    l2_lambda: float = 1e-4
    max_iters: int = 500
    tolerance: float = 1e-6
    step_rule: str = "fixed_with_backtracking"
    initial_step: float = 1.0

    def __post_init__(self):
        if self.l2_lambda < 0:
            raise ConfigError("l2_lambda", "must be nonnegative")
        if self.max_iters < 1:
            raise ConfigError("max_iters", "must be positive")
        if self.tolerance <= 0:
            raise ConfigError("tolerance", "must be positive")
        if self.initial_step <= 0:
            raise ConfigError("initial_step", "must be positive")
        if self.step_rule != "fixed_with_backtracking":
            raise ConfigError("step_rule", f"unknown step rule {self.step_rule!r}")

    def to_dict(self):
        return {
            "l2_lambda": self.l2_lambda,
            "max_iters": self.max_iters,
            "tolerance": self.tolerance,
            "step_rule": self.step_rule,
            "initial_step": self.initial_step,
        }


@dataclass(frozen=True, eq=False)
class LogisticModel:
    """Linear classifier in standardized feature space.

    ``feature_subset`` selects input columns before standardization; ``mean``
    and ``scale`` are the per-feature standardization constants.
    """

    weights: np.ndarray
    bias: float
    mean: np.ndarray
    scale: np.ndarray
    feature_subset: Optional[tuple] = None
    degenerate: bool = False
    history: tuple = field(default=(), repr=False)

    @classmethod
    def zeros(cls, n_features, feature_subset=None):
        z = np.zeros(n_features)
        return cls(z, 0.0, z.copy(), np.ones(n_features), feature_subset)

    def transform(self, X):
        X = np.asarray(X, dtype=np.float64)
        if self.feature_subset is not None:
            X = X[:, list(self.feature_subset)]
        if X.shape[1] != self.weights.shape[0]:
            raise DimensionError(f"model expects {self.weights.shape[0]} features, data has {X.shape[1]}")
        return (X - self.mean) / self.scale

    def decision_function(self, X):
        return self.transform(X) @ self.weights + self.bias

    def predict_proba(self, X):
        return _sigmoid(self.decision_function(X))

    def predict(self, X):
        return (self.predict_proba(X) >= 0.5).astype(np.int64)

    def to_dict(self):
        return {
            "weights": self.weights.tolist(),
            "bias": float(self.bias),
            "mean": self.mean.tolist(),
            "scale": self.scale.tolist(),
            "feature_subset": None if self.feature_subset is None else list(self.feature_subset),
            "degenerate": self.degenerate,
        }

    @classmethod
    def from_dict(cls, d):
        fs = d.get("feature_subset")
        return cls(
            np.array(d["weights"], dtype=np.float64),
            float(d["bias"]),
            np.array(d["mean"], dtype=np.float64),
            np.array(d["scale"], dtype=np.float64),
            None if fs is None else tuple(fs),
            bool(d.get("degenerate", False)),
        )


def _sigmoid(z):
    out = np.empty_like(z, dtype=np.float64)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def _objective(Xs, y, w, b, lam):
    z = Xs @ w + b
    loss = np.mean(np.logaddexp(0.0, z) - y * z) + 0.5 * lam * (w @ w)
    return loss, z


def _gradient(Xs, y, w, z, lam):
    r = _sigmoid(z) - y
    n = Xs.shape[0]
    return Xs.T @ r / n + lam * w, r.sum() / n


def loss_and_grad(model: LogisticModel, data: Dataset, l2_lambda: float = 0.0):
    """Mean log-loss plus (lam/2)||w||^2 and its gradient.

    The gradient is returned as one vector: the weight components followed
    by the (unregularized) bias component.
    """
    if len(data) == 0:
        raise EmptyInputError("loss of an empty dataset is undefined")
    Xs = model.transform(data.X)
    y = data.y.astype(np.float64)
    loss, z = _objective(Xs, y, model.weights, model.bias, l2_lambda)
    gw, gb = _gradient(Xs, y, model.weights, z, l2_lambda)
    return float(loss), np.append(gw, gb)


def _standardize(X):
    mean = X.mean(axis=0)
    scale = X.std(axis=0)
    scale = np.where(scale > 0, scale, 1.0)
    return mean, scale


def constant_model(n_features, label, n=0, feature_subset=None):
    """Bias-only model predicting ``label`` everywhere."""
    m = LogisticModel.zeros(n_features, feature_subset)
    # logit of a smoothed class frequency keeps the bias finite
    bias = float(np.log(n + 1.0)) if n else 0.0
    if label == 0:
        bias = -max(bias, 1.0)
    return replace(m, bias=bias, degenerate=True)


def train(data: Dataset, cfg: TrainConfig = TrainConfig(), feature_subset=None) -> LogisticModel:
    """Fit L2-regularized logistic regression by backtracking gradient descent.

    Single-class data yields a bias-only model flagged ``degenerate``;
    empty data yields the zero model (p = 0.5 everywhere, predicting 1).
    """
    X = np.asarray(data.X, dtype=np.float64)
    if feature_subset is not None:
        feature_subset = tuple(int(i) for i in feature_subset)
        X = X[:, list(feature_subset)]
    n, d = X.shape
    y = data.y.astype(np.float64)
    if n == 0:
        return replace(LogisticModel.zeros(d, feature_subset), degenerate=True)
    if np.all(y == y[0]):
        return constant_model(d, int(y[0]), n, feature_subset)

    mean, scale = _standardize(X)
    Xs = (X - mean) / scale
    lam = cfg.l2_lambda
    w = np.zeros(d)
    b = 0.0
    loss, z = _objective(Xs, y, w, b, lam)
    history = [loss]
    step = cfg.initial_step
    for _ in range(cfg.max_iters):
        gw, gb = _gradient(Xs, y, w, z, lam)
        gnorm_inf = max(np.max(np.abs(gw), initial=0.0), abs(gb))
        if gnorm_inf < cfg.tolerance:
            break
        gsq = gw @ gw + gb * gb
        step = min(step * 2.0, 1e6)
        while True:
            w_new = w - step * gw
            b_new = b - step * gb
            loss_new, z_new = _objective(Xs, y, w_new, b_new, lam)
            if loss_new <= loss - 0.5 * step * gsq:
                break
            step *= 0.5
            if step < 1e-14:
                break
        if step < 1e-14:
            break
        w, b, loss, z = w_new, b_new, loss_new, z_new
        history.append(loss)
    w.setflags(write=False)
    return LogisticModel(w, float(b), mean, scale, feature_subset, False, tuple(history))


def accuracy(model: LogisticModel, data: Dataset) -> float:
    if len(data) == 0:
        raise EmptyInputError("accuracy of an empty dataset is undefined")
    return float(np.mean(model.predict(data.X) == data.y))


def rfe(data: Dataset, target_k: int = 5, cfg: TrainConfig = TrainConfig()) -> list:
    """Recursive feature elimination down to ``target_k`` features.

    Each round retrains on the surviving features and drops the one with
    the smallest absolute coefficient.  On ties the lower index survives.
    """
    dim = data.dim
    if not 1 <= target_k <= dim:
        raise ParameterError(f"target_k must lie in [1, {dim}], got {target_k}")
    alive = list(range(dim))
    while len(alive) > target_k:
        m = train(data, cfg, feature_subset=alive)
        mag = np.abs(m.weights)
        # reversed scan so argmin picks the highest index among ties
        drop = len(alive) - 1 - int(np.argmin(mag[::-1]))
        del alive[drop]
    return alive
