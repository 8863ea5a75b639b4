"""Participant classifier and ranking metrics."""
from __future__ import annotations

import numpy as np
from scipy.special import expit
from scipy.stats import rankdata
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.utils.validation import check_array, check_is_fitted, check_X_y


def logistic_loss(w, b, X, y, l2):
    """Mean log-loss plus ``l2 / 2 * ||w||^2`` and its gradient ``(dw, db)``."""
    z = X @ w + b
    # log(1 + e^z) - y z, stable for large |z|
    loss = np.mean(np.logaddexp(0.0, z) - y * z) + 0.5 * l2 * (w @ w)
    resid = expit(z) - y
    grad_w = X.T @ resid / len(y) + l2 * w
    grad_b = resid.mean()
    return float(loss), grad_w, float(grad_b)


class LogisticRegressionGD(ClassifierMixin, BaseEstimator):
    """L2-regularized logistic regression trained by full-batch gradient descent.

    Features are min-max scaled with constants learned in :meth:`fit`; the
    scaling is part of the model and is applied again at prediction time.

    Parameters
    ----------
    learning_rate : float
    epochs : int
        Number of full-batch gradient steps.
    l2 : float
        Penalty on the weights (the bias is not penalized).
    seed : int
        Seeds the initial weights when ``init="random"``.
    init : {"zeros", "random"}
    """

    def __init__(self, learning_rate=0.1, epochs=500, l2=1e-4, seed=0, init="zeros"):
        self.learning_rate = learning_rate
        self.epochs = epochs
        self.l2 = l2
        self.seed = seed
        self.init = init

    def _scale(self, X):
        return (X - self.data_min_) / self.data_range_

    def fit(self, X, y):
        X, y = check_X_y(X, y, dtype=np.float64)
        self.classes_ = np.unique(y)
        if len(self.classes_) != 2 or not np.array_equal(self.classes_, [0, 1]):
            raise ValueError("training data needs both classes, labelled 0 and 1")
        y = y.astype(np.float64)
        self.data_min_ = X.min(axis=0)
        span = X.max(axis=0) - self.data_min_
        self.data_range_ = np.where(span == 0.0, 1.0, span)
        Xs = self._scale(X)

        if self.init == "random":
            w = np.random.default_rng(self.seed).normal(scale=0.01, size=X.shape[1])
        else:
            w = np.zeros(X.shape[1])
        b = 0.0
        losses = []
        with np.errstate(over="ignore", invalid="ignore"):
            for _ in range(int(self.epochs)):
                loss, gw, gb = logistic_loss(w, b, Xs, y, self.l2)
                losses.append(loss)
                w = w - self.learning_rate * gw
                b = b - self.learning_rate * gb
            losses.append(logistic_loss(w, b, Xs, y, self.l2)[0])
        if not (np.all(np.isfinite(w)) and np.isfinite(b) and np.all(np.isfinite(losses))):
            raise FloatingPointError("training diverged; lower the learning rate")
        self.coef_ = w
        self.intercept_ = b
        self.loss_curve_ = np.array(losses)
        self.n_features_in_ = X.shape[1]
        return self

    def decision_function(self, X):
        check_is_fitted(self, "coef_")
        X = check_array(X, dtype=np.float64)
        return self._scale(X) @ self.coef_ + self.intercept_

    def predict_proba(self, X):
        p = expit(self.decision_function(X))
        return np.column_stack([1.0 - p, p])

    def predict(self, X):
        return (self.decision_function(X) > 0.0).astype(np.int64)

    # plain-text key/value persistence

    def to_text(self) -> str:
        check_is_fitted(self, "coef_")
        vec = lambda a: " ".join(repr(float(x)) for x in a)  # noqa: E731
        lines = [
            "model = logistic_regression_gd",
            f"learning_rate = {float(self.learning_rate)!r}",
            f"epochs = {int(self.epochs)}",
            f"l2 = {float(self.l2)!r}",
            f"seed = {int(self.seed)}",
            f"init = {self.init}",
            f"coef = {vec(self.coef_)}",
            f"intercept = {float(self.intercept_)!r}",
            f"data_min = {vec(self.data_min_)}",
            f"data_range = {vec(self.data_range_)}",
        ]
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "LogisticRegressionGD":
        kv = {}
        for line in text.splitlines():
            if line.strip() and not line.lstrip().startswith("#"):
                key, _, value = line.partition("=")
                kv[key.strip()] = value.strip()
        if kv.get("model") != "logistic_regression_gd":
            raise ValueError("not a logistic_regression_gd model file")
        vec = lambda s: np.array([float(x) for x in s.split()])  # noqa: E731
        model = cls(
            learning_rate=float(kv["learning_rate"]),
            epochs=int(kv["epochs"]),
            l2=float(kv["l2"]),
            seed=int(kv["seed"]),
            init=kv["init"],
        )
        model.coef_ = vec(kv["coef"])
        model.intercept_ = float(kv["intercept"])
        model.data_min_ = vec(kv["data_min"])
        model.data_range_ = vec(kv["data_range"])
        model.classes_ = np.array([0, 1])
        model.n_features_in_ = len(model.coef_)
        return model


def predict_prob(model, features) -> float:
    """Deceiver probability for a single feature vector."""
    return float(model.predict_proba(np.atleast_2d(features))[0, 1])


def _check_binary(scores, labels):
    s = np.asarray(scores, dtype=np.float64).ravel()
    y = np.asarray(labels).ravel()
    if s.shape != y.shape:
        raise ValueError("scores and labels differ in length")
    if not np.all(np.isin(y, (0, 1))):
        raise ValueError("labels must be 0 or 1")
    y = y.astype(bool)
    if y.all() or not y.any():
        raise ValueError("AUROC needs at least one positive and one negative")
    return s, y


def auroc(scores, labels) -> float:
    """Probability that a random positive outranks a random negative; ties count 1/2."""
    s, y = _check_binary(scores, labels)
    ranks = rankdata(s)  # average ranks for ties
    n_pos = int(y.sum())
    n_neg = y.size - n_pos
    u = ranks[y].sum() - n_pos * (n_pos + 1) / 2.0
    return float(u / (n_pos * n_neg))


def bootstrap_ci(scores, labels, resamples=1000, seed=0, level=0.95, groups=None):
    """Percentile bootstrap interval of the AUROC over resampled examples.

    With ``groups`` (e.g. the cross-validation fold of each example), examples
    are resampled within each group and the statistic is the mean of the
    per-group AUROCs. Resamples that lose a class are redrawn.
    """
    s, y = _check_binary(scores, labels)
    if resamples < 100:
        raise ValueError("use at least 100 resamples")
    if groups is None:
        members = [np.arange(s.size)]
    else:
        groups = np.asarray(groups).ravel()
        if groups.shape != s.shape:
            raise ValueError("groups and scores differ in length")
        members = [np.flatnonzero(groups == g) for g in np.unique(groups)]
        for idx in members:
            _check_binary(s[idx], y[idx])
    rng = np.random.default_rng(seed)
    values = np.empty(resamples)
    for i in range(resamples):
        per_group = []
        for idx in members:
            while True:
                pick = idx[rng.integers(0, idx.size, size=idx.size)]
                yy = y[pick]
                if yy.any() and not yy.all():
                    break
            per_group.append(auroc(s[pick], yy.astype(np.int64)))
        values[i] = np.mean(per_group)
    tail = 100.0 * (1.0 - level) / 2.0
    low, high = np.percentile(values, [tail, 100.0 - tail])
    return float(low), float(high)
