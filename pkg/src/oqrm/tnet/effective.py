"""Projected (effective) Hamiltonians and environment caches."""
from __future__ import annotations

import numpy as np

from .mps import MpoOperator, MpsState, _left_env_update, _right_env_update


def apply_two(lenv, w1, w2, renv, theta):
    t = np.tensordot(lenv, theta, axes=([0], [0]))     # (w, d, s1, s2, b)
    t = np.tensordot(t, w1, axes=([0, 2], [0, 3]))      # (d, s2, b, w1r, t1)
    t = np.tensordot(t, w2, axes=([3, 1], [0, 3]))      # (d, b, t1, w2r, t2)
    t = np.tensordot(t, renv, axes=([1, 3], [0, 1]))    # (d, t1, t2, bbar)
    return t


def apply_one(lenv, w, renv, a):
    t = np.tensordot(lenv, a, axes=([0], [0]))         # (w, d, s, b)
    t = np.tensordot(t, w, axes=([0, 2], [0, 3]))       # (d, b, wr, t)
    t = np.tensordot(t, renv, axes=([1, 2], [0, 1]))    # (d, t, bbar)
    return t


def apply_zero(lenv, renv, c):
    t = np.tensordot(lenv, c, axes=([0], [0]))         # (w, d, b)
    return np.tensordot(t, renv, axes=([0, 2], [1, 0]))  # (d, bbar)


class Environments:
    """Left/right environment cache for a state and an MPO.

    ``left[i]`` contracts sites ``< i``; ``right[i]`` contracts sites ``> i``.
    """

    def __init__(self, psi: MpsState, h: MpoOperator):
        n = len(psi)
        self.n = n
        dtype = np.result_type(psi.dtype, *h.tensors)
        self.left = [None] * n
        self.right = [None] * n
        self.left[0] = np.ones((1, 1, 1), dtype=dtype)
        self.right[n - 1] = np.ones((1, 1, 1), dtype=dtype)
        self.rebuild_right(psi, h)

    def rebuild_right(self, psi: MpsState, h: MpoOperator, stop: int = 0):
        for i in range(self.n - 1, stop, -1):
            self.right[i - 1] = _right_env_update(self.right[i], psi.tensors[i], h.tensors[i])

    def rebuild_left(self, psi: MpsState, h: MpoOperator, stop: int | None = None):
        stop = self.n - 1 if stop is None else stop
        for i in range(stop):
            self.left[i + 1] = _left_env_update(self.left[i], psi.tensors[i], h.tensors[i])

    def push_left(self, i, a, w):
        self.left[i + 1] = _left_env_update(self.left[i], a, w)

    def push_right(self, i, b, w):
        self.right[i - 1] = _right_env_update(self.right[i], b, w)
