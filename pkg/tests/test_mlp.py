import numpy as np
import pytest

from rchain.loss import delta_training_loss
from rchain.mlp import (
    DivergenceError,
    Grads,
    ModelParams,
    SgdConfig,
    SgdState,
    Standardizer,
    backward,
    featurize,
    featurize_batch,
    forward,
    init_params,
    load_checkpoint,
    save_checkpoint,
    sgd_step,
)

from conftest import random_sample, sample_from_xy


def fd_gradients(params, loss_fn, h=1e-6):
    """Central finite differences of ``loss_fn()`` w.r.t. every parameter."""
    out = []
    for a in params.arrays():
        g = np.zeros_like(a)
        for i in np.ndindex(a.shape):
            orig = a[i]
            a[i] = orig + h
            up = loss_fn()
            a[i] = orig - h
            down = loss_fn()
            a[i] = orig
            g[i] = (up - down) / (2 * h)
        out.append(g)
    return out


def max_rel_error(analytic, numeric, floor=1e-6):
    worst = 0.0
    for a, n in zip(analytic, numeric):
        den = np.maximum(np.maximum(np.abs(a), np.abs(n)), floor)
        worst = max(worst, float((np.abs(a - n) / den).max(initial=0.0)))
    return worst


def random_network(rng, seed, activation="tanh"):
    n = int(rng.integers(0, 3))
    m = int(rng.integers(1, 4))
    hidden = [int(h) for h in rng.integers(1, 6, size=rng.integers(0, 3))]
    p = init_params([2 * (n + 1), *hidden, 2 * m], seed, activation)
    for b in p.biases:
        b[:] = rng.normal(scale=0.5, size=b.shape)
    return p, m


class TestFeaturize:
    def test_current_only(self):
        s = sample_from_xy([(5, 7)], [(6, 7)])
        np.testing.assert_array_equal(featurize(s), [0, 0])

    def test_relative_coords(self):
        s = sample_from_xy([(-1, 0), (0, 0)], [(1, 0)])
        np.testing.assert_array_equal(featurize(s), [-1, 0, 0, 0])

    def test_translation_invariant(self, rng):
        s = random_sample(rng, 3, 2, dyadic=True)
        np.testing.assert_array_equal(featurize(s.translated(64.0, -32.0)), featurize(s))

    def test_standardizer(self, rng):
        feats = featurize_batch([random_sample(rng, 2, 2) for _ in range(50)])
        std = Standardizer.fit(feats)
        z = std(feats)
        np.testing.assert_allclose(z[:, :-2].mean(axis=0), 0, atol=1e-12)
        np.testing.assert_allclose(z[:, :-2].std(axis=0), 1, atol=1e-12)
        # constant current-point columns pass through unscaled
        np.testing.assert_array_equal(std.std[-2:], 1.0)


class TestInit:
    def test_deterministic(self):
        a, b = init_params([4, 8, 2], 3), init_params([4, 8, 2], 3)
        for x, y in zip(a.arrays(), b.arrays()):
            np.testing.assert_array_equal(x, y)

    def test_biases_zero(self):
        assert all(not b.any() for b in init_params([4, 8, 8, 6], 0).biases)

    def test_weight_bound(self):
        p = init_params([10, 64, 64, 12], 1)
        for w in p.weights:
            bound = np.sqrt(6.0 / (w.shape[0] + w.shape[1]))
            assert np.abs(w).max() <= bound
            # uniform draws should come close to the bound
            assert np.abs(w).max() > 0.9 * bound

    def test_invalid(self):
        with pytest.raises(ValueError):
            init_params([4], 0)


class TestForward:
    def test_zero_network(self):
        p = init_params([6, 5, 4], 0)
        for a in p.arrays():
            a[...] = 0
        np.testing.assert_array_equal(forward(p, np.ones(6)), np.zeros((2, 2)))

    def test_single_layer_hand_case(self):
        w = np.array([[1.0, 2.0, 0.0, -1.0], [0.5, 0.0, 3.0, 1.0]])
        b = np.array([0.25, -1.0])
        p = ModelParams((4, 2), [w], [b])
        x = np.array([1.0, -1.0, 2.0, 4.0])
        # row 0: 1 - 2 + 0 - 4 + 0.25; row 1: 0.5 + 0 + 6 + 4 - 1
        np.testing.assert_array_equal(forward(p, x), [[-4.75, 9.5]])

    def test_batch_matches_rows(self, rng):
        p = init_params([6, 7, 4], 2)
        x = rng.normal(size=(5, 6))
        out = forward(p, x)
        assert out.shape == (5, 2, 2)
        for i in range(5):
            np.testing.assert_allclose(out[i], forward(p, x[i]), rtol=1e-14)

    def test_deterministic(self, rng):
        p = init_params([6, 7, 4], 2)
        x = rng.normal(size=6)
        np.testing.assert_array_equal(forward(p, x), forward(p, x))

    def test_shape_mismatch(self):
        with pytest.raises(ValueError):
            forward(init_params([6, 4], 0), np.zeros(5))


class TestBackward:
    def test_zero_output_gradient(self, rng):
        p = init_params([4, 6, 4], 0)
        g = backward(p, rng.normal(size=4), np.zeros((2, 2)))
        assert all(not a.any() for a in g.arrays())

    def test_linear_squared_loss_hand_case(self):
        w = np.array([[1.0, 2.0], [3.0, -1.0]])
        b = np.array([0.5, 0.0])
        p = ModelParams((2, 2), [w], [b])
        x = np.array([1.0, 2.0])
        y = np.array([4.0, 0.0])
        # loss = sum((Wx + b - y)^2); residual = [5.5-4, 1-0] = [1.5, 1]
        resid = np.array([1.5, 1.0])
        g = backward(p, x, 2 * resid.reshape(1, 2))
        np.testing.assert_allclose(g.weights[0], [[3.0, 6.0], [2.0, 4.0]])
        np.testing.assert_allclose(g.biases[0], [3.0, 2.0])

    def test_shape_mismatch(self):
        with pytest.raises(ValueError):
            backward(init_params([4, 4], 0), np.zeros(4), np.zeros((3, 2)))

    @pytest.mark.parametrize("activation", ["tanh", "identity"])
    def test_finite_differences(self, activation):
        for seed in range(30):
            rng = np.random.default_rng(seed)
            p, m = random_network(rng, seed, activation)
            x = rng.normal(size=(int(rng.integers(1, 4)), p.layer_sizes[0]))
            y = rng.normal(size=(len(x), m, 2))
            _, g = delta_training_loss(y, forward(p, x))
            analytic = backward(p, x, g).arrays()
            numeric = fd_gradients(p, lambda: delta_training_loss(y, forward(p, x))[0])
            assert max_rel_error(analytic, numeric) < 1e-4

    def test_relu_finite_differences(self):
        rng = np.random.default_rng(0)
        p, m = random_network(rng, 0, "relu")
        x = rng.normal(size=(3, p.layer_sizes[0]))
        y = rng.normal(size=(3, m, 2))
        _, g = delta_training_loss(y, forward(p, x))
        numeric = fd_gradients(p, lambda: delta_training_loss(y, forward(p, x))[0])
        assert max_rel_error(backward(p, x, g).arrays(), numeric) < 1e-4


class TestSgd:
    def grads_like(self, p, value):
        return Grads([np.full_like(w, value) for w in p.weights],
                     [np.full_like(b, value) for b in p.biases])

    def test_fixed_point(self):
        p = init_params([4, 3, 2], 0)
        new, _ = sgd_step(p, self.grads_like(p, 0.0), SgdConfig(momentum=0.9))
        for a, b in zip(p.arrays(), new.arrays()):
            np.testing.assert_array_equal(a, b)

    def test_plain_sgd(self):
        p = init_params([4, 3, 2], 0)
        cfg = SgdConfig(learning_rate=0.5, momentum=0.0)
        new, _ = sgd_step(p, self.grads_like(p, 0.25), cfg)
        for a, b in zip(p.arrays(), new.arrays()):
            np.testing.assert_array_equal(b, a - 0.125)

    def test_momentum_two_steps(self):
        p = init_params([4, 3, 2], 0)
        cfg = SgdConfig(learning_rate=0.01, momentum=0.9)
        g = self.grads_like(p, 2.0)
        q, state = sgd_step(p, g, cfg, SgdState())
        q, state = sgd_step(q, g, cfg, state)
        for a, b in zip(p.arrays(), q.arrays()):
            np.testing.assert_allclose(b - a, -0.01 * 2.0 * (1 + 1.9), rtol=1e-12)

    def test_inputs_untouched(self):
        p = init_params([4, 3, 2], 0)
        before = [a.copy() for a in p.arrays()]
        sgd_step(p, self.grads_like(p, 1.0), SgdConfig())
        for a, b in zip(before, p.arrays()):
            np.testing.assert_array_equal(a, b)

    def test_divergence(self):
        p = init_params([4, 3, 2], 0)
        g = self.grads_like(p, 0.0)
        g.biases[0][1] = np.inf
        with pytest.raises(DivergenceError, match="batch 17"):
            sgd_step(p, g, SgdConfig(), batch=17)

    @pytest.mark.parametrize(
        "bad", [dict(learning_rate=0), dict(momentum=1.0), dict(batch_size=0), dict(epochs=0)]
    )
    def test_config_validation(self, bad):
        with pytest.raises(ValueError):
            SgdConfig(**bad).validate()


def test_linear_problem_converges():
    rng = np.random.default_rng(4)
    x = rng.normal(size=(20, 4))
    y = (x @ rng.normal(size=(4, 4)) * 0.5).reshape(20, 2, 2)
    p = init_params([4, 16, 4], 0)
    cfg = SgdConfig(learning_rate=0.05, momentum=0.9)
    state = SgdState()
    initial = delta_training_loss(y, forward(p, x))[0]
    for _ in range(500):
        _, g = delta_training_loss(y, forward(p, x))
        p, state = sgd_step(p, backward(p, x, g), cfg, state)
    final = delta_training_loss(y, forward(p, x))[0]
    assert final <= 0.1 * initial


def test_checkpoint_round_trip(tmp_path, rng):
    p = init_params([6, 5, 5, 4], 9, "relu")
    std = Standardizer(rng.normal(size=6), rng.uniform(0.5, 2, size=6))
    save_checkpoint(tmp_path / "c.npz", p, std, {"scheme": "delta_eq5", "m": 2})
    q, s2, meta = load_checkpoint(tmp_path / "c.npz")
    assert q.layer_sizes == p.layer_sizes and q.activation == "relu"
    for a, b in zip(p.arrays(), q.arrays()):
        np.testing.assert_array_equal(a, b)
    np.testing.assert_array_equal(s2.mean, std.mean)
    np.testing.assert_array_equal(s2.std, std.std)
    assert meta == {"scheme": "delta_eq5", "m": "2"}
