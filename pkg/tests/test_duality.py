import json

import numpy as np
import pytest

from prodscreen import (FeatureSet, PrimalModel, clamp, duality_gap,
                        logistic_conjugate, primal_basket, primal_logistic,
                        primal_matrix, soft_threshold)


def test_soft_threshold():
    assert soft_threshold(3.0, 1.0) == 2.0
    assert soft_threshold(-3.0, 1.0) == -2.0
    assert soft_threshold(0.5, 1.0) == 0.0
    assert np.allclose(soft_threshold(np.array([2.0, -0.5]), 1.0), [1.0, 0.0])
    assert np.allclose(soft_threshold(np.array([2.0, 2.0]), np.array([0.5, 3.0])),
                       [1.5, 0.0])


def test_clamp():
    assert clamp(1.5, 0.0, 1.0) == 1.0
    assert clamp(-0.2, 0.0, 1.0) == 0.0
    assert np.allclose(clamp(np.array([-1.0, 0.5, 2.0]), 0.0, 1.0), [0, 0.5, 1])
    with pytest.raises(ValueError):
        clamp(0.5, 1.0, 0.0)


def test_logistic_conjugate_values():
    assert logistic_conjugate(0.5, 0.0) == pytest.approx(np.log(0.5))
    # endpoints: 0 log 0 = 0 on both sides
    assert logistic_conjugate(0.0, 0.0) == 0.0
    assert logistic_conjugate(0.0, 1.0) == 0.0
    assert logistic_conjugate(1.0, 0.0) == 0.0
    with pytest.raises(ValueError):
        logistic_conjugate(1.5, 0.0)
    with pytest.raises(ValueError):
        logistic_conjugate(-0.5, 0.0)


# The conjugate identities behind each dual, verified by grid search:
# f*(a) = max_x (a x - f(x)) to within the grid resolution.

def test_logistic_conjugate_is_a_conjugate():
    xs = np.linspace(-12.0, 12.0, 48001)
    base = np.logaddexp(0.0, xs)
    for y in (0.0, 1.0):
        fx = base - y * xs
        for s in (0.05, 0.2, 0.5, 0.8, 0.95):
            a = s - y
            grid = np.max(a * xs - fx)
            assert logistic_conjugate(a, y) == pytest.approx(grid, abs=1e-4)


def test_basket_loss_conjugate_identity():
    """Per-coordinate covering loss l(p) = 0.5 ((tau - p)_+)^2 has conjugate
    tau a + a^2/2 on a <= 0, which is what the dual value uses."""
    tau = 2.0
    xs = np.linspace(-40.0, 40.0, 160001)
    fx = 0.5 * np.maximum(tau - xs, 0.0) ** 2
    for a in (-3.0, -1.0, -0.25, 0.0):
        grid = np.max(a * xs - fx)
        assert tau * a + 0.5 * a * a == pytest.approx(grid, abs=1e-4)


def test_matrix_loss_conjugate_identity():
    """Scalar case of the residual-plus-nuclear loss: f(p) = 0.5 (y - p)^2
    + rho |p| conjugates to min_{|v|<=1} 0.5 (y + m - rho v)^2 - y^2/2."""
    y, rho = 1.3, 0.4
    xs = np.linspace(-60.0, 60.0, 240001)
    fx = 0.5 * (y - xs) ** 2 + rho * np.abs(xs)
    for m in (-2.0, -0.3, 0.0, 0.5, 1.7):
        grid = np.max(m * xs - fx)
        vs = np.linspace(-1.0, 1.0, 4001)
        closed = np.min(0.5 * (y + m - rho * vs) ** 2) - 0.5 * y * y
        assert closed == pytest.approx(grid, abs=1e-4)


def test_primal_basket():
    assert primal_basket(1.5, 1.0, 2.0) == 0.25
    assert primal_basket(0.5, 1.0, 2.0) == 0.0     # inside the dead zone
    assert primal_basket(9.0, 1.0, 2.0) == 1.0     # clamped at the box
    assert np.allclose(primal_basket(np.array([1.5, 0.0]), 1.0, 2.0), [0.25, 0.0])
    with pytest.raises(ValueError):
        primal_basket(1.0, 1.0, 0.0)


def test_primal_logistic():
    assert primal_logistic(2.5, 1.0, 2.0) == 0.75
    assert primal_logistic(-2.5, 1.0, 2.0) == -0.75
    assert primal_logistic(0.5, 1.0, 2.0) == 0.0
    # positive homogeneity: scaling tau scales the coefficient down
    for tau in (0.5, 1.0, 4.0):
        assert primal_logistic(2.5, 1.0, tau) == pytest.approx(1.5 / tau)


def test_primal_matrix():
    W = primal_matrix(np.array([[3.0, 4.0]]), 5.0, 1.0)
    assert np.allclose(W, 0.0)                      # row norm at the threshold
    W = primal_matrix(np.array([[6.0, 8.0]]), 5.0, 1.0)
    assert np.allclose(W, [[3.0, 4.0]])             # shrink by half
    W = primal_matrix(np.array([[6.0, 8.0]]), 0.0, 1.0)
    assert np.allclose(W, [[6.0, 8.0]])             # no shrink at lambda = 0
    W = primal_matrix(np.array([[0.0, 0.0]]), 0.0, 1.0)
    assert np.allclose(W, 0.0)                      # zero row stays zero
    with pytest.raises(ValueError):
        primal_matrix(np.array([[1.0]]), 0.0, -1.0)


def test_duality_gap():
    assert duality_gap(3.0, 2.5) == 0.5


# ------------------------------------------------------------ PrimalModel --

def test_model_drops_zero_rows_and_roundtrips(tmp_path):
    active = (FeatureSet((0,)), FeatureSet((1, 2)), FeatureSet((3,)))
    model = PrimalModel.from_coefficients("logistic", active,
                                          np.array([0.5, 0.0, -1.25]))
    assert model.n_active == 2
    assert [fs.atoms for fs in model.active] == [(0,), (3,)]
    p = tmp_path / "m.json"
    model.save(p)
    loaded = PrimalModel.load(p)
    assert loaded.kind == "logistic"
    assert [fs.atoms for fs in loaded.active] == [(0,), (3,)]
    assert np.allclose(loaded.coefficients, [0.5, -1.25])
    raw = json.loads(p.read_text())
    assert set(raw) == {"kind", "intercept", "entries"}
    assert raw["entries"][0] == {"atoms": [0], "coef": 0.5}


def test_model_matrix_rows(tmp_path):
    active = (FeatureSet((0,)), FeatureSet((1,)))
    coef = np.array([[1.0, 0.0], [0.0, 0.0]])
    model = PrimalModel.from_coefficients("matrix", active, coef,
                                          intercept=np.array([0.5, -0.5]))
    assert model.n_active == 1
    p = tmp_path / "m.json"
    model.save(p)
    loaded = PrimalModel.load(p)
    assert loaded.coefficients.shape == (1, 2)
    assert np.allclose(loaded.intercept, [0.5, -0.5])
    raw = json.loads(p.read_text())
    assert raw["entries"][0]["coef_row"] == [1.0, 0.0]


def test_model_kind_validation():
    with pytest.raises(ValueError):
        PrimalModel("ridge", (), np.zeros(0))
