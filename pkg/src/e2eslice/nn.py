"""Small float64 neural-network engine with hand-written gradients.

Networks keep their parameters in a flat list (``net.params``) in a fixed
order; every ``backward`` returns gradients in that same order, which is what
:class:`Adam`, :func:`soft_update` and the checkpoint helpers rely on.
"""
from __future__ import annotations

from pathlib import Path

import numpy as np

CHECKPOINT_VERSION = 1


def _sigmoid(x):
    return 0.5 * (1.0 + np.tanh(0.5 * x))


def _uniform(rng, fan_in, shape, scale=1.0):
    lim = scale / np.sqrt(fan_in)
    return rng.uniform(-lim, lim, size=shape)


class Mlp:
    """Dense ReLU network with a ``tanh`` or identity output layer."""

    def __init__(self, sizes, out_act: str = "identity", rng=None, final_scale: float = 1.0):
        if out_act not in ("identity", "tanh"):
            raise ValueError(f"unsupported output activation {out_act!r}")
        rng = np.random.default_rng(rng)
        self.sizes = [int(s) for s in sizes]
        self.out_act = out_act
        self.params: list[np.ndarray] = []
        n_layers = len(self.sizes) - 1
        for li, (fan_in, fan_out) in enumerate(zip(self.sizes[:-1], self.sizes[1:])):
            scale = final_scale if li == n_layers - 1 else 1.0
            self.params.append(_uniform(rng, fan_in, (fan_in, fan_out), scale))
            self.params.append(_uniform(rng, fan_in, (fan_out,), scale))

    @property
    def in_dim(self) -> int:
        return self.sizes[0]

    @property
    def out_dim(self) -> int:
        return self.sizes[-1]

    def forward(self, x):
        x = np.asarray(x, dtype=float)
        lead = x.shape[:-1]
        h = x.reshape(-1, x.shape[-1])
        cache = []
        n_layers = len(self.params) // 2
        for li in range(n_layers):
            W, b = self.params[2 * li], self.params[2 * li + 1]
            z = h @ W + b
            cache.append((h, z))
            if li < n_layers - 1:
                h = np.maximum(z, 0.0)
            elif self.out_act == "tanh":
                h = np.tanh(z)
            else:
                h = z
        return h.reshape(*lead, -1), (lead, cache, h)

    def __call__(self, x):
        return self.forward(x)[0]

    def backward(self, cache, dy, input_grad: bool = True, param_grad: bool = True):
        """Parameter gradients and dL/dx; either can be skipped (returned as None)."""
        lead, layers, out = cache
        g = np.asarray(dy, dtype=float).reshape(-1, self.sizes[-1])
        if self.out_act == "tanh":
            g = g * (1.0 - out ** 2)
        grads = [None] * len(self.params)
        for li in range(len(layers) - 1, -1, -1):
            h, z = layers[li]
            if li < len(layers) - 1:
                g = g * (z > 0)
            W = self.params[2 * li]
            if param_grad:
                grads[2 * li] = h.T @ g
                grads[2 * li + 1] = g.sum(axis=0)
            if li == 0 and not input_grad:
                return (grads if param_grad else None), None
            g = g @ W.T
        return (grads if param_grad else None), g.reshape(*lead, -1)


class Lstm:
    """LSTM layer; gate blocks are ordered input, forget, output, candidate."""

    def __init__(self, in_dim: int, hidden: int, rng=None, forget_bias: float = 1.0):
        rng = np.random.default_rng(rng)
        self.in_dim, self.hidden = int(in_dim), int(hidden)
        H = self.hidden
        Wx = _uniform(rng, in_dim, (in_dim, 4 * H))
        Wh = _uniform(rng, H, (H, 4 * H))
        b = np.zeros(4 * H)
        b[H:2 * H] = forget_bias
        self.params = [Wx, Wh, b]

    def initial_state(self, batch: int):
        return np.zeros((batch, self.hidden)), np.zeros((batch, self.hidden))

    def step(self, x, state):
        Wx, Wh, b = self.params
        h, c = state
        z = x @ Wx + h @ Wh + b
        H = self.hidden
        i, f, o = _sigmoid(z[:, :H]), _sigmoid(z[:, H:2 * H]), _sigmoid(z[:, 2 * H:3 * H])
        g = np.tanh(z[:, 3 * H:])
        c = f * c + i * g
        h = o * np.tanh(c)
        return h, (h, c)

    def forward(self, X, state=None):
        """``X`` is (T, B, D); returns hidden states (T, B, H)."""
        X = np.asarray(X, dtype=float)
        T, B, D = X.shape
        H = self.hidden
        Wx, Wh, b = self.params
        h, c = self.initial_state(B) if state is None else state
        h0, c0 = h, c
        XW = (X.reshape(T * B, D) @ Wx + b).reshape(T, B, 4 * H)
        hs = np.empty((T, B, H))
        cs = np.empty((T, B, H))
        gates = np.empty((T, B, 4 * H))
        for t in range(T):
            z = XW[t] + h @ Wh
            gt = gates[t]
            gt[:, :3 * H] = _sigmoid(z[:, :3 * H])
            gt[:, 3 * H:] = np.tanh(z[:, 3 * H:])
            c = gt[:, H:2 * H] * c + gt[:, :H] * gt[:, 3 * H:]
            h = gt[:, 2 * H:3 * H] * np.tanh(c)
            hs[t], cs[t] = h, c
        return hs, (X, h0, c0, hs, cs, gates)

    def backward(self, cache, dhs, dh_last=None, dc_last=None):
        X, h0, c0, hs, cs, gates = cache
        T, B, D = X.shape
        H = self.hidden
        Wx, Wh, _ = self.params
        dz = np.empty((T, B, 4 * H))
        dh_next = np.zeros((B, H)) if dh_last is None else dh_last
        dc_next = np.zeros((B, H)) if dc_last is None else dc_last
        for t in range(T - 1, -1, -1):
            i, f, o, g = (gates[t][:, k * H:(k + 1) * H] for k in range(4))
            c_prev = cs[t - 1] if t > 0 else c0
            tc = np.tanh(cs[t])
            dh = dhs[t] + dh_next
            dc = dc_next + dh * o * (1.0 - tc ** 2)
            dzt = dz[t]
            dzt[:, :H] = dc * g * i * (1.0 - i)
            dzt[:, H:2 * H] = dc * c_prev * f * (1.0 - f)
            dzt[:, 2 * H:3 * H] = dh * tc * o * (1.0 - o)
            dzt[:, 3 * H:] = dc * i * (1.0 - g ** 2)
            dh_next = dzt @ Wh.T
            dc_next = dc * f
        h_prev = np.concatenate([h0[None], hs[:-1]], axis=0)
        dzf = dz.reshape(T * B, 4 * H)
        dWx = X.reshape(T * B, D).T @ dzf
        dWh = h_prev.reshape(T * B, H).T @ dzf
        db = dzf.sum(axis=0)
        dX = (dzf @ Wx.T).reshape(T, B, D)
        return [dWx, dWh, db], dX, (dh_next, dc_next)


class RecurrentNet:
    """LSTM over an input sequence followed by a dense head on ``[h_t, extra_t]``.

    The critic feeds the current action as ``extra``; the actor uses none.
    """

    def __init__(self, in_dim: int, hidden: int, head_hidden, out_dim: int, extra_dim: int = 0,
                 out_act: str = "identity", rng=None, final_scale: float = 1.0):
        rng = np.random.default_rng(rng)
        self.lstm = Lstm(in_dim, hidden, rng)
        self.extra_dim = int(extra_dim)
        self.head = Mlp([hidden + extra_dim, *head_hidden, out_dim], out_act, rng, final_scale)

    @property
    def params(self):
        return self.lstm.params + self.head.params

    @params.setter
    def params(self, values):
        n = len(self.lstm.params)
        self.lstm.params = list(values[:n])
        self.head.params = list(values[n:])

    def forward(self, X, extra=None, state=None):
        hs, lcache = self.lstm.forward(X, state)
        z = hs if extra is None else np.concatenate([hs, extra], axis=-1)
        out, hcache = self.head.forward(z)
        return out, (lcache, hcache)

    def __call__(self, X, extra=None, state=None):
        return self.forward(X, extra, state)[0]

    def backward(self, cache, dout, through_memory: bool = True):
        """Returns (parameter grads, dX, d extra).

        With ``through_memory=False`` only d extra is computed (the other two
        come back as None), which is all an actor update needs from a critic.
        """
        lcache, hcache = cache
        hgrads, dz = self.head.backward(hcache, dout, param_grad=through_memory)
        H = self.lstm.hidden
        dhs, dextra = dz[..., :H], dz[..., H:]
        if not through_memory:
            return None, None, (dextra if self.extra_dim else None)
        lgrads, dX, _ = self.lstm.backward(lcache, dhs)
        return lgrads + hgrads, dX, (dextra if self.extra_dim else None)

    def step(self, x, state, extra=None):
        """One time step for acting; ``x`` is (B, D)."""
        h, state = self.lstm.step(x, state)
        z = h if extra is None else np.concatenate([h, extra], axis=-1)
        return self.head(z), state


class Adam:
    def __init__(self, params, lr: float = 1e-3, beta1: float = 0.9, beta2: float = 0.999, eps: float = 1e-8):
        self.lr = lr
        self.beta1, self.beta2, self.eps = beta1, beta2, eps
        self.m = [np.zeros_like(p) for p in params]
        self.v = [np.zeros_like(p) for p in params]
        self._buf = [np.empty_like(p) for p in params]
        self.t = 0

    def step(self, params, grads, lr: float | None = None):
        """In-place update; returns ``params`` for convenience."""
        lr = self.lr if lr is None else lr
        self.t += 1
        bc1 = 1.0 - self.beta1 ** self.t
        bc2 = 1.0 - self.beta2 ** self.t
        for p, g, m, v, buf in zip(params, grads, self.m, self.v, self._buf):
            m *= self.beta1
            np.multiply(g, 1.0 - self.beta1, out=buf)
            m += buf
            v *= self.beta2
            np.multiply(g, g, out=buf)
            buf *= 1.0 - self.beta2
            v += buf
            # buf <- m_hat / (sqrt(v_hat) + eps)
            np.sqrt(v, out=buf)
            buf *= 1.0 / np.sqrt(bc2)
            buf += self.eps
            np.divide(m, buf, out=buf)
            buf *= lr / bc1
            p -= buf
            if not np.isfinite(p.sum()):
                raise FloatingPointError("non-finite parameter after Adam step")
        return params


def inverse_time_decay(lr0: float, decay: float, step: int) -> float:
    return lr0 / (1.0 + decay * step)


def soft_update(target, online, tau: float):
    """theta' <- tau * theta + (1 - tau) * theta', in place on ``target.params``."""
    for tp, op in zip(target.params, online.params):
        tp *= 1.0 - tau
        tp += tau * op
    return target


def copy_params(target, online):
    for tp, op in zip(target.params, online.params):
        tp[...] = op
    return target


def flatten(params) -> np.ndarray:
    return np.concatenate([p.ravel() for p in params])


def save_checkpoint(path, nets: dict) -> None:
    """Store the parameters of several networks in one ``.npz`` file."""
    arrays = {"__version__": np.array(CHECKPOINT_VERSION)}
    for name, net in nets.items():
        for idx, p in enumerate(net.params):
            arrays[f"{name}/{idx}"] = p
    np.savez(Path(path), **arrays)


def load_checkpoint(path, nets: dict) -> None:
    with np.load(Path(path)) as data:
        if int(data["__version__"]) != CHECKPOINT_VERSION:
            raise ValueError("unsupported checkpoint version")
        for name, net in nets.items():
            for idx, p in enumerate(net.params):
                stored = data[f"{name}/{idx}"]
                if stored.shape != p.shape:
                    raise ValueError(f"shape mismatch for {name}/{idx}: {stored.shape} vs {p.shape}")
                p[...] = stored


def numerical_gradient(loss_fn, params, h: float = 1e-5):
    """Central finite differences of a scalar ``loss_fn()`` w.r.t. every entry of ``params``."""
    out = []
    for p in params:
        g = np.zeros_like(p)
        it = np.nditer(p, flags=["multi_index"])
        for _ in it:
            idx = it.multi_index
            old = p[idx]
            p[idx] = old + h
            up = loss_fn()
            p[idx] = old - h
            down = loss_fn()
            p[idx] = old
            g[idx] = (up - down) / (2.0 * h)
        out.append(g)
    return out


def max_relative_error(analytic, numeric, floor: float = 1e-7) -> float:
    worst = 0.0
    for a, n in zip(analytic, numeric):
        denom = np.maximum(np.abs(a) + np.abs(n), floor)
        worst = max(worst, float(np.max(np.abs(a - n) / denom)))
    return worst


def _check_dense(rng) -> float:
    sizes = [int(v) for v in rng.integers(2, 7, size=rng.integers(2, 5))]
    net = Mlp(sizes, str(rng.choice(["tanh", "identity"])), rng)
    x = rng.normal(size=(int(rng.integers(1, 5)), sizes[0]))
    w = rng.normal(size=(len(x), sizes[-1]))
    _, cache = net.forward(x)
    grads, dx = net.backward(cache, w)

    def loss():
        return float(np.sum(net(x) * w))

    return max_relative_error(grads + [dx], numerical_gradient(loss, net.params + [x]))


def _check_recurrent(rng) -> float:
    in_dim, hidden, extra = (int(v) for v in rng.integers(1, 5, size=3))
    steps, batch = int(rng.integers(1, 6)), int(rng.integers(1, 4))
    net = RecurrentNet(in_dim, hidden, [int(rng.integers(2, 5))], 2, extra_dim=extra, rng=rng)
    X = rng.normal(size=(steps, batch, in_dim))
    E = rng.normal(size=(steps, batch, extra))
    w = rng.normal(size=(steps, batch, 2))
    _, cache = net.forward(X, E)
    grads, dX, dE = net.backward(cache, w)

    def loss():
        return float(np.sum(net(X, E) * w))

    return max_relative_error(grads + [dX, dE], numerical_gradient(loss, net.params + [X, E]))


def run_gradient_checks(count: int = 20, seed: int = 0) -> list[tuple[str, float]]:
    """Finite-difference checks on random dense and recurrent networks (half each).

    The recurrent networks concatenate an extra input onto the LSTM output, as
    the critic does with the action. Returns ``(kind, max relative error)``.
    """
    rng = np.random.default_rng(seed)
    out = []
    for n in range(count):
        if n % 2 == 0:
            out.append(("dense", _check_dense(rng)))
        else:
            out.append(("lstm", _check_recurrent(rng)))
    return out
