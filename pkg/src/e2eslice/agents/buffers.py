"""Uniform FIFO replay memories for single transitions and whole episodes."""
from __future__ import annotations

import collections

import numpy as np


class ReplayBuffer:
    """Ring buffer of ``(s, a, r, s', done)`` transitions.

    Storage grows on demand up to ``capacity`` so a large nominal capacity
    costs nothing until it is actually used.
    """

    def __init__(self, capacity: int, obs_dim: int, act_dim: int, rng=None):
        if capacity <= 0:
            raise ValueError("capacity must be positive")
        self.capacity = int(capacity)
        self.obs_dim, self.act_dim = obs_dim, act_dim
        self.rng = np.random.default_rng(rng)
        self._alloc = 0
        self._s = np.empty((0, obs_dim))
        self._a = np.empty((0, act_dim))
        self._r = np.empty(0)
        self._s2 = np.empty((0, obs_dim))
        self._d = np.empty(0)
        self._next = 0
        self._size = 0

    def __len__(self) -> int:
        return self._size

    def _grow(self):
        new = min(self.capacity, max(1024, 2 * self._alloc))
        for name in ("_s", "_a", "_r", "_s2", "_d"):
            old = getattr(self, name)
            arr = np.zeros((new, *old.shape[1:]))
            arr[: self._alloc] = old
            setattr(self, name, arr)
        self._alloc = new

    def add(self, s, a, r, s2, done) -> None:
        if self._next >= self._alloc and self._alloc < self.capacity:
            self._grow()
        i = self._next
        self._s[i], self._a[i], self._r[i], self._s2[i], self._d[i] = s, a, r, s2, float(done)
        self._next = (self._next + 1) % self.capacity
        self._size = min(self._size + 1, self.capacity)

    def oldest(self):
        """The transition that would be evicted next."""
        if not self._size:
            raise IndexError("empty buffer")
        i = self._next if self._size == self.capacity else 0
        return self._s[i], self._a[i], self._r[i], self._s2[i], self._d[i]

    def sample(self, batch: int):
        idx = self.rng.integers(0, self._size, size=batch)
        return self._s[idx], self._a[idx], self._r[idx], self._s2[idx], self._d[idx]


class EpisodeBuffer:
    """FIFO store of whole episodes for recurrent training.

    An episode holds ``T + 1`` observations (the last one follows the final
    action), ``T`` actions and ``T`` rewards.
    """

    def __init__(self, capacity: int, rng=None):
        if capacity <= 0:
            raise ValueError("capacity must be positive")
        self.capacity = int(capacity)
        self.rng = np.random.default_rng(rng)
        self._episodes: collections.deque = collections.deque(maxlen=self.capacity)

    def __len__(self) -> int:
        return len(self._episodes)

    def add(self, observations, actions, rewards) -> None:
        obs = np.asarray(observations, float)
        act = np.asarray(actions, float)
        rew = np.asarray(rewards, float)
        if len(obs) != len(act) + 1 or len(act) != len(rew):
            raise ValueError("episode needs T+1 observations, T actions and T rewards")
        self._episodes.append((obs, act, rew))

    def oldest(self):
        return self._episodes[0]

    def sample(self, batch: int):
        """Time-major arrays (T+1, B, obs), (T, B, act), (T, B); episodes share a length."""
        idx = self.rng.integers(0, len(self._episodes), size=batch)
        eps = [self._episodes[i] for i in idx]
        lengths = {len(e[2]) for e in eps}
        if len(lengths) != 1:
            raise ValueError("sampled episodes differ in length")
        obs = np.stack([e[0] for e in eps], axis=1)
        act = np.stack([e[1] for e in eps], axis=1)
        rew = np.stack([e[2] for e in eps], axis=1)
        return obs, act, rew
