import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from e2eslice import nn
from e2eslice.nn import Adam, Lstm, Mlp, RecurrentNet


def reference_mlp(params, x, out_act):
    h = x
    n = len(params) // 2
    for li in range(n):
        W, b = params[2 * li], params[2 * li + 1]
        z = np.array([[sum(h[r, i] * W[i, j] for i in range(W.shape[0])) + b[j] for j in range(W.shape[1])]
                      for r in range(h.shape[0])])
        h = np.maximum(z, 0) if li < n - 1 else (np.tanh(z) if out_act == "tanh" else z)
    return h


def reference_lstm(params, X):
    Wx, Wh, b = params
    H = Wh.shape[0]
    sig = lambda v: 1 / (1 + np.exp(-v))
    h = np.zeros((X.shape[1], H))
    c = np.zeros_like(h)
    out = []
    for x in X:
        z = x @ Wx + h @ Wh + b
        i, f, o, g = sig(z[:, :H]), sig(z[:, H:2 * H]), sig(z[:, 2 * H:3 * H]), np.tanh(z[:, 3 * H:])
        c = f * c + i * g
        h = o * np.tanh(c)
        out.append(h)
    return np.array(out)


def test_zero_weights_give_zero_output():
    net = Mlp([3, 4, 2], "tanh", rng=0)
    for p in net.params:
        p[...] = 0
    assert np.all(net(np.ones((5, 3))) == 0)


def test_identity_layer_passes_input_through():
    net = Mlp([4, 4], "identity", rng=0)
    net.params[0][...] = np.eye(4)
    net.params[1][...] = 0
    x = np.random.default_rng(0).normal(size=(3, 4))
    assert np.array_equal(net(x), x)


@pytest.mark.parametrize("act", ["tanh", "identity"])
def test_forward_matches_reference(act, rng):
    net = Mlp([3, 5, 4, 2], act, rng)
    x = rng.normal(size=(4, 3))
    assert np.allclose(net(x), reference_mlp(net.params, x, act), rtol=1e-12, atol=1e-14)
    assert net(x[None]).shape == (1, 4, 2)


def test_lstm_forward_matches_reference_and_step(rng):
    lstm = Lstm(3, 4, rng)
    X = rng.normal(size=(5, 2, 3))
    hs, _ = lstm.forward(X)
    assert np.allclose(hs, reference_lstm(lstm.params, X), rtol=1e-12, atol=1e-14)
    state = lstm.initial_state(2)
    for t in range(5):
        h, state = lstm.step(X[t], state)
        assert np.allclose(h, hs[t], rtol=1e-12, atol=1e-14)


def test_linear_squared_loss_gradient(rng):
    net = Mlp([3, 2], "identity", rng)
    x, y = rng.normal(size=(1, 3)), rng.normal(size=(1, 2))
    out, cache = net.forward(x)
    grads, _ = net.backward(cache, 2 * (out - y))
    W, b = net.params
    resid = x @ W + b - y
    assert np.allclose(grads[0], 2 * x.T @ resid, rtol=1e-12)
    assert np.allclose(grads[1], 2 * resid[0], rtol=1e-12)


def test_zero_upstream_gives_zero_gradients(rng):
    net = RecurrentNet(3, 4, [5], 2, extra_dim=1, rng=rng)
    X, E = rng.normal(size=(4, 2, 3)), rng.normal(size=(4, 2, 1))
    out, cache = net.forward(X, E)
    grads, dX, dE = net.backward(cache, np.zeros_like(out))
    assert all(not g.any() for g in grads) and not dX.any() and not dE.any()


def test_length_one_bptt_equals_single_step_backward(rng):
    lstm = Lstm(3, 4, rng)
    x = rng.normal(size=(1, 2, 3))
    hs, cache = lstm.forward(x)
    dh = rng.normal(size=hs.shape)
    grads, dX, _ = lstm.backward(cache, dh)

    def loss():
        h, _ = lstm.step(x[0], lstm.initial_state(2))
        return float(np.sum(h * dh[0]))

    num = nn.numerical_gradient(loss, lstm.params + [x])
    assert nn.max_relative_error(grads + [dX], num) < 1e-6


def test_zero_input_zero_state_only_bias_gradients_survive(rng):
    lstm = Lstm(3, 4, rng)
    X = np.zeros((1, 2, 3))
    hs, cache = lstm.forward(X)
    grads, _, _ = lstm.backward(cache, np.ones_like(hs))
    assert not grads[0].any() and not grads[1].any()
    assert grads[2].any()


def test_gradient_checks_meet_tolerance():
    results = nn.run_gradient_checks(20, seed=0)
    assert len(results) == 20
    assert {k for k, _ in results} == {"dense", "lstm"}
    assert max(e for _, e in results) <= 1e-4


@settings(max_examples=20, deadline=None)
@given(seed=st.integers(0, 10 ** 6))
def test_gradient_check_property(seed):
    errs = nn.run_gradient_checks(2, seed=seed)
    assert max(e for _, e in errs) <= 1e-4


def test_skipped_gradients_are_none(rng):
    net = Mlp([3, 4, 2], rng=rng)
    _, cache = net.forward(rng.normal(size=(2, 3)))
    grads, dx = net.backward(cache, np.ones((2, 2)), input_grad=False)
    assert dx is None and grads is not None
    grads, dx = net.backward(cache, np.ones((2, 2)), param_grad=False)
    assert grads is None and dx.shape == (2, 3)


def test_adam_zero_gradient_is_noop():
    p = [np.array([1.0, -2.0])]
    Adam(p, lr=0.1).step(p, [np.zeros(2)])
    assert p[0].tolist() == [1.0, -2.0]


def test_adam_unit_gradient_moves_by_lr():
    p = [np.zeros(3)]
    Adam(p, lr=0.01).step(p, [np.ones(3)])
    assert np.allclose(p[0], -0.01, rtol=1e-6)


def test_adam_matches_reference_recurrence(rng):
    p = [rng.normal(size=(3, 2))]
    ref = p[0].copy()
    opt = Adam(p, lr=1e-2)
    m = np.zeros_like(ref)
    v = np.zeros_like(ref)
    for t in range(1, 21):
        g = rng.normal(size=ref.shape)
        opt.step(p, [g])
        m = 0.9 * m + 0.1 * g
        v = 0.999 * v + 0.001 * g * g
        ref = ref - 1e-2 * (m / (1 - 0.9 ** t)) / (np.sqrt(v / (1 - 0.999 ** t)) + 1e-8)
    assert np.allclose(p[0], ref, rtol=1e-12, atol=1e-15)


def test_adam_rejects_non_finite():
    p = [np.zeros(2)]
    with pytest.raises(FloatingPointError):
        Adam(p).step(p, [np.array([np.nan, 0.0])])


def test_inverse_time_decay():
    assert nn.inverse_time_decay(1e-3, 1e-3, 0) == 1e-3
    assert nn.inverse_time_decay(1e-3, 1e-3, 1000) == pytest.approx(5e-4)


def test_soft_update_limits(rng):
    online, target = Mlp([2, 3, 1], rng=rng), Mlp([2, 3, 1], rng=rng)
    before = [p.copy() for p in target.params]
    nn.soft_update(target, online, 0.0)
    assert all(np.array_equal(a, b) for a, b in zip(before, target.params))
    nn.soft_update(target, online, 1.0)
    assert all(np.array_equal(a, b) for a, b in zip(online.params, target.params))


def test_soft_update_geometric_decay(rng):
    online, target = Mlp([2, 3, 1], rng=rng), Mlp([2, 3, 1], rng=rng)
    gap0 = np.linalg.norm(nn.flatten(target.params) - nn.flatten(online.params))
    for _ in range(1000):
        nn.soft_update(target, online, 0.001)
    gap = np.linalg.norm(nn.flatten(target.params) - nn.flatten(online.params))
    assert gap / gap0 == pytest.approx(0.999 ** 1000, rel=1e-9)
    assert gap / gap0 == pytest.approx(0.368, abs=1e-3)


def test_checkpoint_round_trip_is_bit_identical(tmp_path, rng):
    a = RecurrentNet(3, 4, [5], 2, extra_dim=1, rng=rng)
    b = RecurrentNet(3, 4, [5], 2, extra_dim=1, rng=np.random.default_rng(99))
    X, E = rng.normal(size=(3, 2, 3)), rng.normal(size=(3, 2, 1))
    nn.save_checkpoint(tmp_path / "ck.npz", {"net": a})
    nn.load_checkpoint(tmp_path / "ck.npz", {"net": b})
    assert np.array_equal(a(X, E), b(X, E))
    c = RecurrentNet(3, 5, [5], 2, extra_dim=1, rng=rng)
    with pytest.raises(ValueError):
        nn.load_checkpoint(tmp_path / "ck.npz", {"net": c})


def test_initialisation_ranges(rng):
    net = Mlp([16, 8, 2], "tanh", rng, final_scale=1e-3)
    assert np.all(np.abs(net.params[0]) <= 1 / 4)
    assert np.all(np.abs(net.params[2]) <= 1e-3 / np.sqrt(8))
    lstm = Lstm(3, 4, rng)
    assert np.all(lstm.params[2][4:8] == 1.0)
    assert not lstm.params[2][:4].any()
