import math
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from damsim import Dataset, LogisticModel, TrainConfig, accuracy, loss_and_grad, rfe, train
from damsim.errors import ConfigError, DimensionError, EmptyInputError, ParameterError

from conftest import random_dataset
from oracles import central_difference, confusion_accuracy, greedy_rfe


def test_zero_model_balanced_loss_is_log2():
    d = Dataset(np.random.default_rng(0).standard_normal((10, 3)), [0, 1] * 5, np.zeros(10))
    loss, _ = loss_and_grad(LogisticModel.zeros(3), d, 0.0)
    assert loss == pytest.approx(math.log(2), abs=1e-15)


def _random_model(dim, g):
    return LogisticModel(g.standard_normal(dim), float(g.standard_normal()), g.standard_normal(dim), g.uniform(0.5, 2, dim))


@pytest.mark.parametrize("seed", range(20))
def test_gradient_matches_central_differences(seed):
    g = np.random.default_rng(seed)
    d = random_dataset(20, 4, seed=seed + 100)
    m = _random_model(4, g)
    lam = 0.1

    def f(theta):
        return loss_and_grad(replace(m, weights=theta[:-1], bias=theta[-1]), d, lam)[0]

    theta = np.append(m.weights, m.bias)
    _, grad = loss_and_grad(m, d, lam)
    fd = central_difference(f, theta)
    rel = np.linalg.norm(grad - fd) / max(np.linalg.norm(fd), 1e-12)
    assert rel < 1e-5


def test_large_margin_point_has_tiny_loss():
    d = Dataset([[1.0]], [1], [0])
    m = LogisticModel(np.array([10.0]), 0.0, np.zeros(1), np.ones(1))
    loss, _ = loss_and_grad(m, d, 0.0)
    # log(1 + e^-10)
    assert loss == pytest.approx(math.log1p(math.exp(-10)), rel=1e-12)
    assert loss < 1e-3


def test_bias_not_regularized():
    d = random_dataset(15, 2, seed=3)
    m = LogisticModel(np.zeros(2), 3.0, np.zeros(2), np.ones(2))
    l0, _ = loss_and_grad(m, d, 0.0)
    l1, _ = loss_and_grad(m, d, 5.0)
    assert l0 == l1


def test_loss_dimension_mismatch():
    with pytest.raises(DimensionError):
        loss_and_grad(LogisticModel.zeros(3), random_dataset(5, 2, seed=0), 0.0)


def test_separable_blobs_are_learned():
    g = np.random.default_rng(1)
    X = np.vstack([g.normal(-3, 0.5, (50, 2)), g.normal(3, 0.5, (50, 2))])
    y = np.repeat([0, 1], 50)
    d = Dataset(X, y, np.zeros(100))
    m = train(d)
    assert accuracy(m, d) >= 0.99


def test_single_class_gives_degenerate_model():
    d = Dataset(np.random.default_rng(0).standard_normal((8, 3)), np.ones(8), np.zeros(8))
    m = train(d)
    assert m.degenerate
    assert np.all(m.weights == 0)
    assert np.all(m.predict(np.random.default_rng(1).standard_normal((20, 3))) == 1)
    d0 = Dataset(d.X, np.zeros(8), np.zeros(8))
    assert np.all(train(d0).predict(d.X) == 0)


def test_empty_training_set_gives_zero_model():
    m = train(Dataset.empty(3))
    assert m.degenerate and m.bias == 0.0


def test_training_is_bit_deterministic():
    d = random_dataset(80, 5, seed=2, w=np.array([1, -1, 0.5, 0, 0]))
    a, b = train(d), train(d)
    assert a.weights.tobytes() == b.weights.tobytes() and a.bias == b.bias


def test_training_loss_never_increases():
    d = random_dataset(120, 6, seed=5)
    m = train(d, TrainConfig(max_iters=200))
    h = np.array(m.history)
    assert np.all(np.diff(h) <= 0)
    assert h[-1] <= h[0]


def test_train_config_validation():
    with pytest.raises(ConfigError):
        TrainConfig(l2_lambda=-1)
    with pytest.raises(ConfigError):
        TrainConfig(max_iters=0)
    with pytest.raises(ConfigError):
        TrainConfig(step_rule="newton")


def test_accuracy_memorized_point():
    d = Dataset([[2.0, -1.0]], [1], [0])
    assert accuracy(train(d), d) == 1.0


def test_constant_model_accuracy_is_label_frequency():
    g = np.random.default_rng(3)
    y = g.integers(0, 2, 200)
    d = Dataset(g.standard_normal((200, 2)), y, np.zeros(200))
    ones = LogisticModel(np.zeros(2), 1.0, np.zeros(2), np.ones(2))
    assert accuracy(ones, d) == y.mean()


def test_accuracy_matches_confusion_counts():
    d = random_dataset(100, 3, seed=8)
    m = train(random_dataset(100, 3, seed=9, w=np.array([1.0, 0.2, -0.4])))
    assert accuracy(m, d) == confusion_accuracy(m.predict(d.X).tolist(), d.y.tolist())


def test_accuracy_empty():
    with pytest.raises(EmptyInputError):
        accuracy(LogisticModel.zeros(2), Dataset.empty(2))


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10_000))
def test_accuracy_in_unit_interval(seed):
    d = random_dataset(30, 2, seed=seed)
    assert 0.0 <= accuracy(train(d, TrainConfig(max_iters=20)), d) <= 1.0


def test_model_json_roundtrip():
    d = random_dataset(40, 3, seed=1, w=np.array([1.0, 0, 1.0]))
    m = train(d, feature_subset=[0, 2])
    back = LogisticModel.from_dict(m.to_dict())
    np.testing.assert_array_equal(back.predict(d.X), m.predict(d.X))
    assert back.feature_subset == (0, 2)


# -- RFE ---------------------------------------------------------------------


def test_rfe_keeps_everything_at_full_dim():
    d = random_dataset(30, 4, seed=0)
    assert rfe(d, 4) == [0, 1, 2, 3]


def test_rfe_eliminates_noise_feature_first():
    g = np.random.default_rng(0)
    X = g.standard_normal((300, 3))
    y = (X[:, 0] + X[:, 1] > 0).astype(int)
    assert rfe(Dataset(X, y, np.zeros(300)), 2) == [0, 1]


def test_rfe_bad_target():
    with pytest.raises(ParameterError):
        rfe(random_dataset(10, 3, seed=0), 4)
    with pytest.raises(ParameterError):
        rfe(random_dataset(10, 3, seed=0), 0)


@pytest.mark.parametrize("dim, k, seed", [(8, 3, 0), (6, 1, 1), (7, 5, 2), (5, 2, 3), (8, 5, 4)])
def test_rfe_matches_greedy_oracle(dim, k, seed):
    g = np.random.default_rng(seed)
    w = g.standard_normal(dim)
    d = random_dataset(150, dim, seed=seed + 50, w=w)
    cfg = TrainConfig(max_iters=100)
    assert rfe(d, k, cfg) == greedy_rfe(d, k, cfg, train)


def test_rfe_tie_keeps_lower_index():
    # duplicated columns get identical coefficients
    g = np.random.default_rng(2)
    x = g.standard_normal(100)
    z = g.standard_normal(100)
    X = np.column_stack([x, x, z])
    y = (x + 0.1 * z > 0).astype(int)
    assert rfe(Dataset(X, y, np.zeros(100)), 1) == [0]


@settings(max_examples=15, deadline=None)
@given(st.integers(2, 6), st.data())
def test_rfe_output_shape(dim, data):
    k = data.draw(st.integers(1, dim))
    seed = data.draw(st.integers(0, 1000))
    out = rfe(random_dataset(40, dim, seed=seed), k, TrainConfig(max_iters=30))
    assert len(out) == k and out == sorted(set(out)) and all(0 <= i < dim for i in out)
