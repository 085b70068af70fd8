import numpy as np
import pytest

from chtdqn import approximator as ap
from chtdqn.approximator import _kernels_np


def small_net(seed, hidden=(4, 5, 4)):
    return ap.init(3, 3, seed, hidden=hidden)


def test_init_deterministic():
    a = ap.init(6, 6, seed=1)
    b = ap.init(6, 6, seed=1)
    for wa, wb in zip(a.weights, b.weights):
        assert np.array_equal(wa, wb)


def test_init_biases_zero_and_scaled_weights():
    params = ap.init(6, 6, seed=1)
    for b in params.biases:
        assert not b.any()
    for w in params.weights:
        assert np.abs(w).max() <= 1.0 / np.sqrt(w.shape[0])


def test_init_rejects_zero_dims():
    with pytest.raises(ValueError):
        ap.init(0, 3, seed=0)


def test_forward_zero_params():
    params = small_net(0)
    for w in params.weights:
        w[:] = 0.0
    assert np.array_equal(ap.forward(params, np.ones(3)), np.zeros(3))


def test_forward_output_bias_shift():
    params = small_net(1)
    x = np.array([0.3, -0.2, 0.9])
    base = ap.forward(params, x)
    params.biases[-1][1] += 2.5
    shifted = ap.forward(params, x)
    assert shifted[1] == pytest.approx(base[1] + 2.5)
    assert shifted[0] == base[0] and shifted[2] == base[2]


def test_forward_shape_checks():
    params = small_net(0)
    with pytest.raises(ValueError):
        ap.forward(params, np.ones(4))


def test_loss_examples():
    params = small_net(2)
    states = np.random.default_rng(0).normal(size=(4, 3))
    q = ap.forward(params, states)
    actions = np.array([0, 1, 2, 0])
    exact = q[np.arange(4), actions]
    assert ap.loss(params, states, actions, exact) == 0.0
    # single item with residual -2 -> loss 4
    single = ap.loss(params, states[:1], actions[:1], exact[:1] + 2.0)
    assert single == pytest.approx(4.0, abs=1e-12)


def test_gradients_zero_at_zero_loss():
    params = small_net(3)
    states = np.random.default_rng(1).normal(size=(5, 3))
    actions = np.array([0, 1, 2, 1, 0])
    targets = ap.forward(params, states)[np.arange(5), actions]
    value, grads = ap.gradients(params, states, actions, targets)
    assert value == 0.0
    for g in grads.weights + grads.biases:
        assert not g.any()


def test_gradient_matches_finite_differences_once():
    rng = np.random.default_rng(7)
    params = small_net(7)
    states = rng.normal(size=(6, 3))
    actions = rng.integers(0, 3, size=6)
    targets = rng.normal(size=6)
    _, grads = ap.gradients(params, states, actions, targets)

    h = 1e-5
    for li, w in enumerate(params.weights):
        for idx in [(0, 0), (w.shape[0] - 1, w.shape[1] - 1)]:
            orig = w[idx]
            w[idx] = orig + h
            up = ap.loss(params, states, actions, targets)
            w[idx] = orig - h
            down = ap.loss(params, states, actions, targets)
            w[idx] = orig
            fd = (up - down) / (2 * h)
            got = grads.weights[li][idx]
            assert got == pytest.approx(fd, rel=1e-4, abs=1e-8)


def test_dead_unit_gradient_zero():
    params = small_net(5)
    # Force one hidden unit dead for a given input: big negative bias.
    params.biases[0][2] = -100.0
    states = np.abs(np.random.default_rng(2).normal(size=(4, 3)))
    actions = np.array([0, 1, 2, 0])
    targets = np.random.default_rng(3).normal(size=4)
    _, grads = ap.gradients(params, states, actions, targets)
    # Weights feeding the dead unit receive no gradient.
    assert not grads.weights[0][:, 2].any()
    assert grads.biases[0][2] == 0.0


def test_sgd_step_examples():
    params = small_net(0)
    zero = ap.MlpParams([np.zeros_like(w) for w in params.weights],
                        [np.zeros_like(b) for b in params.biases])
    unchanged = ap.sgd_step(params, zero, 0.05)
    for w0, w1 in zip(params.weights, unchanged.weights):
        assert np.array_equal(w0, w1)
    _, grads = ap.gradients(
        params, np.ones((1, 3)), np.array([0]), np.array([10.0]))
    same = ap.sgd_step(params, grads, 0.0)
    for w0, w1 in zip(params.weights, same.weights):
        assert np.array_equal(w0, w1)


def test_single_step_decreases_loss():
    params = small_net(9)
    states = np.random.default_rng(4).normal(size=(1, 3))
    actions = np.array([1])
    targets = np.array([5.0])
    before = ap.loss(params, states, actions, targets)
    _, grads = ap.gradients(params, states, actions, targets)
    after_params = ap.sgd_step(params, grads, 1e-4)
    after = ap.loss(after_params, states, actions, targets)
    assert after < before


def test_clip_norm_rescales():
    params = small_net(0)
    states = np.random.default_rng(5).normal(size=(2, 3))
    actions = np.array([0, 1])
    targets = np.array([100.0, -100.0])
    _, grads = ap.gradients(params, states, actions, targets)
    norm = ap.global_grad_norm(grads)
    assert norm > 1.0
    stepped = ap.sgd_step(params, grads, 1.0, clip_norm=1.0)
    moved = ap.MlpParams(
        [w0 - w1 for w0, w1 in zip(params.weights, stepped.weights)],
        [b0 - b1 for b0, b1 in zip(params.biases, stepped.biases)])
    assert ap.global_grad_norm(moved) == pytest.approx(1.0, rel=1e-9)


def test_save_load_roundtrip(tmp_path):
    params = ap.init(4, 4, seed=11)
    path = tmp_path / "net.npz"
    ap.save(params, path)
    back = ap.load(path)
    for w0, w1 in zip(params.weights, back.weights):
        assert np.array_equal(w0, w1)
    for b0, b1 in zip(params.biases, back.biases):
        assert np.array_equal(b0, b1)


def test_backend_parity_with_numpy():
    """Whatever backend is active must agree with the numpy reference."""
    rng = np.random.default_rng(21)
    params = ap.init(5, 5, seed=21, hidden=(8, 8))
    states = np.ascontiguousarray(rng.normal(size=(7, 5)))
    actions = rng.integers(0, 5, size=7)
    targets = rng.normal(size=7)
    q_active = ap.forward(params, states)
    q_np = _kernels_np.forward(params.weights, params.biases, states)
    assert np.array_equal(q_active, q_np)
    value, grads = ap.gradients(params, states, actions, targets)
    l_np, gw_np, gb_np = _kernels_np.backward(params.weights, params.biases,
                                              states, actions, targets)
    assert value == l_np
    for a, b in zip(grads.weights, gw_np):
        assert np.array_equal(a, b)
    for a, b in zip(grads.biases, gb_np):
        assert np.array_equal(a, b)
