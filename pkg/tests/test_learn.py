import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from sklearn.base import clone

from oracles import auroc_oracle, numeric_grad
from ffdin.learn import (
    LogisticRegressionGD,
    auroc,
    bootstrap_ci,
    logistic_loss,
    predict_prob,
)


def _fixed_model(w, b=0.0):
    model = LogisticRegressionGD()
    model.coef_ = np.asarray(w, dtype=float)
    model.intercept_ = b
    model.data_min_ = np.zeros(len(w))
    model.data_range_ = np.ones(len(w))
    model.classes_ = np.array([0, 1])
    model.n_features_in_ = len(w)
    return model


def test_untrained_zero_model_predicts_half():
    model = LogisticRegressionGD(epochs=0).fit(np.random.default_rng(0).random((6, 3)),
                                                [0, 1, 0, 1, 0, 1])
    np.testing.assert_array_equal(model.predict_proba(np.random.default_rng(1).random((4, 3)))[:, 1],
                                  0.5)
    assert predict_prob(_fixed_model([0.0, 0.0]), [3.0, -2.0]) == 0.5


def test_separable_data_is_fit_exactly():
    X = np.array([[-1.0]] * 10 + [[1.0]] * 10)
    y = np.array([0] * 10 + [1] * 10)
    model = LogisticRegressionGD(l2=0.0, epochs=200).fit(X, y)
    assert (model.predict(X) == y).mean() == 1.0
    assert np.all(np.diff(model.loss_curve_) <= 1e-12)


def test_probability_is_sigmoid_of_score():
    w, x = np.array([0.7, -1.3, 2.0]), np.array([0.4, 0.1, -0.25])
    expected = 1.0 / (1.0 + math.exp(-float(w @ x)))
    assert predict_prob(_fixed_model(w), x) == pytest.approx(expected, abs=1e-15)


def test_probability_rises_along_positive_weight():
    model = _fixed_model([1.5, -0.5])
    probs = [predict_prob(model, [shift, 0.3]) for shift in np.linspace(0, 40, 50)]
    assert np.all(np.diff(probs) >= 0.0)
    assert probs[-1] == pytest.approx(1.0, abs=1e-12)


@pytest.mark.parametrize("seed", range(20))
def test_gradient_matches_finite_differences(seed):
    rng = np.random.default_rng(seed)
    n, d = int(rng.integers(5, 40)), int(rng.integers(1, 6))
    X, y = rng.normal(size=(n, d)), rng.integers(0, 2, n).astype(float)
    w, b, l2 = rng.normal(size=d), float(rng.normal()), float(rng.uniform(0, 0.5))
    _, gw, gb = logistic_loss(w, b, X, y, l2)
    theta = np.append(w, b)
    num = numeric_grad(lambda th: logistic_loss(th[:-1], th[-1], X, y, l2)[0], theta)
    ana = np.append(gw, gb)
    assert np.linalg.norm(ana - num) / max(np.linalg.norm(num), 1e-12) < 1e-5


def test_text_roundtrip():
    rng = np.random.default_rng(3)
    X, y = rng.normal(size=(30, 4)), np.tile([0, 1], 15)
    model = LogisticRegressionGD(epochs=50, init="random", seed=9).fit(X, y)
    text = model.to_text() + "featurizer.beta = 0.85\n"
    back = LogisticRegressionGD.from_text(text)
    np.testing.assert_array_equal(back.predict_proba(X), model.predict_proba(X))
    assert back.get_params() == model.get_params()
    with pytest.raises(ValueError):
        LogisticRegressionGD.from_text("model = something_else\n")


def test_estimator_api():
    model = LogisticRegressionGD(learning_rate=0.5, l2=0.1)
    assert clone(model).get_params() == model.get_params()
    with pytest.raises(ValueError):
        model.fit(np.ones((3, 2)), [1, 1, 1])
    with pytest.raises(Exception):
        model.predict(np.ones((1, 2)))


def test_divergence_is_reported():
    X = np.array([[0.0], [1.0], [0.5], [0.2]])
    with pytest.raises(FloatingPointError):
        LogisticRegressionGD(learning_rate=1e308, epochs=5, l2=0.0).fit(X, [0, 1, 1, 0])


# -- AUROC --------------------------------------------------------------------


def test_auroc_examples():
    assert auroc([0.9, 0.8, 0.1, 0.2], [1, 1, 0, 0]) == 1.0
    assert auroc([0.3] * 6, [1, 0, 1, 0, 0, 1]) == 0.5
    assert auroc([0.9, 0.6, 0.4, 0.2], [1, 0, 1, 0]) == 0.75
    assert float(auroc_oracle([0.9, 0.6, 0.4, 0.2], [1, 0, 1, 0])) == 0.75


def test_auroc_input_checks():
    with pytest.raises(ValueError):
        auroc([0.1, 0.2], [1, 1])
    with pytest.raises(ValueError):
        auroc([0.1, 0.2], [1, 2])
    with pytest.raises(ValueError):
        auroc([0.1, 0.2, 0.3], [1, 0])


@settings(max_examples=300, deadline=None)
@given(st.lists(st.tuples(st.integers(0, 5), st.integers(0, 1)), min_size=2, max_size=50))
def test_auroc_equals_pair_count(pairs):
    scores = [s / 5 for s, _ in pairs]
    labels = [y for _, y in pairs]
    if len(set(labels)) < 2:
        return
    assert auroc(scores, labels) == float(auroc_oracle(scores, labels))


# -- bootstrap ----------------------------------------------------------------


def test_bootstrap_separated_sample():
    scores = np.r_[np.linspace(0.6, 1.0, 100), np.linspace(0.0, 0.4, 100)]
    labels = np.r_[np.ones(100), np.zeros(100)].astype(int)
    assert bootstrap_ci(scores, labels, resamples=200) == (1.0, 1.0)


def test_bootstrap_is_seeded_and_brackets_estimate():
    rng = np.random.default_rng(0)
    labels = rng.integers(0, 2, 300)
    scores = labels * 0.5 + rng.normal(size=300)
    a = bootstrap_ci(scores, labels, resamples=500, seed=11)
    b = bootstrap_ci(scores, labels, resamples=500, seed=11)
    assert a == b
    assert a != bootstrap_ci(scores, labels, resamples=500, seed=12)
    assert a[0] < auroc(scores, labels) < a[1]


def test_grouped_bootstrap_brackets_mean_of_groups():
    rng = np.random.default_rng(1)
    groups = np.repeat(np.arange(4), 80)
    labels = rng.integers(0, 2, groups.size)
    scores = labels * (0.2 + groups * 0.3) + rng.normal(size=groups.size)
    mean_auc = np.mean([auroc(scores[groups == g], labels[groups == g]) for g in range(4)])
    lo, hi = bootstrap_ci(scores, labels, resamples=400, seed=2, groups=groups)
    assert lo < mean_auc < hi


def test_bootstrap_redraws_single_class_resamples():
    # two positives among many negatives: some raw resamples lose the class
    scores = np.arange(40, dtype=float)
    labels = np.zeros(40, dtype=int)
    labels[[5, 30]] = 1
    lo, hi = bootstrap_ci(scores, labels, resamples=300, seed=0)
    assert 0.0 <= lo <= hi <= 1.0


def test_bootstrap_needs_enough_resamples():
    with pytest.raises(ValueError):
        bootstrap_ci([0.1, 0.9], [0, 1], resamples=10)


@settings(max_examples=200, deadline=None)
@given(st.lists(st.tuples(st.integers(-4, 4), st.integers(0, 1)), min_size=2, max_size=40))
def test_auroc_negation_and_monotone_transform(pairs):
    scores = np.array([s for s, _ in pairs], dtype=float)
    labels = [y for _, y in pairs]
    if len(set(labels)) < 2:
        return
    a = auroc(scores, labels)
    assert a + auroc(-scores, labels) == 1.0
    assert auroc(np.exp(scores) * 3 + 1, labels) == a


def test_loss_never_increases_with_small_steps():
    rng = np.random.default_rng(4)
    X = rng.normal(size=(80, 3))
    y = (X[:, 0] + rng.normal(size=80) > 0).astype(int)
    model = LogisticRegressionGD(learning_rate=1e-2, epochs=300).fit(X, y)
    assert np.all(np.diff(model.loss_curve_) <= 0.0)
    probs = model.predict_proba(rng.normal(scale=50, size=(100, 3)))[:, 1]
    assert np.all((probs > 0.0) & (probs < 1.0))


def test_bootstrap_interval_contains_point_estimate():
    rng = np.random.default_rng(6)
    for i in range(50):
        size = int(rng.integers(30, 120))
        labels = rng.integers(0, 2, size)
        labels[:2] = (0, 1)
        scores = labels * rng.uniform(0, 1.5) + rng.normal(size=size)
        lo, hi = bootstrap_ci(scores, labels, resamples=200, seed=i)
        assert lo <= auroc(scores, labels) <= hi
