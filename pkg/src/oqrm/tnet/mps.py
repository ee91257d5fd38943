"""Finite MPS/MPO containers and state algebra.

Index conventions:

* MPS site tensor ``A[left, phys, right]``;
* MPO site tensor ``W[left, right, out, in]`` so that ``<s'|W|s> = W[..., s', s]``;
* environments ``L[ket, mpo, bra]`` and ``R[ket, mpo, bra]``.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import ConfigError


@dataclass
class MpoOperator:
    tensors: list

    def __post_init__(self):
        if not self.tensors:
            raise ConfigError("MPO needs at least one site")
        if self.tensors[0].shape[0] != 1 or self.tensors[-1].shape[1] != 1:
            raise ConfigError("MPO boundary bonds must have dimension 1")
        for i in range(len(self.tensors) - 1):
            if self.tensors[i].shape[1] != self.tensors[i + 1].shape[0]:
                raise ConfigError(f"MPO bond mismatch between sites {i} and {i + 1}")

    def __len__(self):
        return len(self.tensors)

    @property
    def dims(self):
        return [w.shape[2] for w in self.tensors]

    @property
    def bond_dims(self):
        return [w.shape[1] for w in self.tensors[:-1]]

    def to_dense(self) -> np.ndarray:
        """Contract into a full matrix. Only for small instances."""
        acc = self.tensors[0][0]  # (wr, out, in)
        for w in self.tensors[1:]:
            # acc[wr, O, I] * w[wr, wr', o, i] -> [wr', O o, I i]
            t = np.tensordot(acc, w, axes=([0], [0]))  # (O, I, wr', o, i)
            o, i = t.shape[0], t.shape[1]
            t = t.transpose(2, 0, 3, 1, 4)
            acc = t.reshape(t.shape[0], o * t.shape[2], i * t.shape[4])
        return acc[0]


@dataclass
class MpsState:
    tensors: list
    center: int = 0
    max_bond: int = 64
    cutoff: float = 1e-9
    # cumulative discarded weight from truncations applied to this state
    truncation_weight: float = field(default=0.0, compare=False)

    def __post_init__(self):
        if not self.tensors:
            raise ConfigError("MPS needs at least one site")
        if self.tensors[0].shape[0] != 1 or self.tensors[-1].shape[2] != 1:
            raise ConfigError("MPS boundary bonds must have dimension 1")
        for i in range(len(self.tensors) - 1):
            if self.tensors[i].shape[2] != self.tensors[i + 1].shape[0]:
                raise ConfigError(f"MPS bond mismatch between sites {i} and {i + 1}")
        if not 0 <= self.center < len(self.tensors):
            raise ConfigError(f"orthogonality center {self.center} out of range")

    def __len__(self):
        return len(self.tensors)

    @property
    def dims(self):
        return [a.shape[1] for a in self.tensors]

    @property
    def bond_dims(self):
        return [a.shape[2] for a in self.tensors[:-1]]

    @property
    def dtype(self):
        return np.result_type(*self.tensors)

    def copy(self) -> "MpsState":
        return MpsState([a.copy() for a in self.tensors], self.center, self.max_bond,
                        self.cutoff, self.truncation_weight)

    def astype(self, dtype) -> "MpsState":
        out = self.copy()
        out.tensors = [a.astype(dtype) for a in out.tensors]
        return out

    @classmethod
    def product(cls, vectors, max_bond=64, cutoff=1e-9) -> "MpsState":
        """Normalized product state from one local vector per site."""
        tensors = []
        for v in vectors:
            v = np.asarray(v)
            tensors.append((v / np.linalg.norm(v)).reshape(1, -1, 1))
        return cls(tensors, 0, max_bond, cutoff)

    def norm(self) -> float:
        return float(np.sqrt(abs(overlap(self, self))))

    def normalize(self) -> "MpsState":
        c = self.center
        self.tensors[c] = self.tensors[c] / np.linalg.norm(self.tensors[c])
        return self

    def canonicalize(self, center: int = 0) -> "MpsState":
        """Bring every tensor into mixed-canonical form around ``center``."""
        for i in range(center):
            self._shift_right(i)
        for i in range(len(self) - 1, center, -1):
            self._shift_left(i)
        self.center = center
        return self

    def move_center(self, k: int) -> "MpsState":
        if not 0 <= k < len(self):
            raise IndexError(f"site {k} out of range")
        while self.center < k:
            self._shift_right(self.center)
            self.center += 1
        while self.center > k:
            self._shift_left(self.center)
            self.center -= 1
        return self

    def _shift_right(self, i):
        a = self.tensors[i]
        chi_l, d, chi_r = a.shape
        q, r = np.linalg.qr(a.reshape(chi_l * d, chi_r))
        self.tensors[i] = q.reshape(chi_l, d, q.shape[1])
        self.tensors[i + 1] = np.tensordot(r, self.tensors[i + 1], axes=([1], [0]))

    def _shift_left(self, i):
        b = self.tensors[i]
        chi_l, d, chi_r = b.shape
        q, r = np.linalg.qr(b.reshape(chi_l, d * chi_r).T)
        self.tensors[i] = q.T.reshape(q.shape[1], d, chi_r)
        self.tensors[i - 1] = np.tensordot(self.tensors[i - 1], r.T, axes=([2], [0]))

    def to_dense(self) -> np.ndarray:
        acc = self.tensors[0].reshape(-1, self.tensors[0].shape[2])
        for a in self.tensors[1:]:
            acc = np.tensordot(acc, a, axes=([1], [0])).reshape(-1, a.shape[2])
        return acc[:, 0]

    def orthonormality_errors(self):
        """Max deviation from identity of each gauge condition, per site."""
        errs = []
        for i, a in enumerate(self.tensors):
            if i < self.center:
                m = np.tensordot(a.conj(), a, axes=([0, 1], [0, 1]))
            elif i > self.center:
                m = np.tensordot(a, a.conj(), axes=([1, 2], [1, 2]))
            else:
                errs.append(0.0)
                continue
            errs.append(float(np.max(np.abs(m - np.eye(m.shape[0])))))
        return errs


def truncated_svd(theta: np.ndarray, max_bond: int, cutoff: float):
    """SVD of a matrix keeping the smallest rank whose relative discarded weight is <= cutoff.

    Returns ``u, s, vh, discarded`` with ``s`` renormalized to unit norm.
    """
    try:
        u, s, vh = np.linalg.svd(theta, full_matrices=False)
    except np.linalg.LinAlgError:
        import scipy.linalg as la
        u, s, vh = la.svd(theta, full_matrices=False, lapack_driver="gesvd")
    w = s**2
    total = w.sum()
    if total == 0.0:
        return u[:, :1], s[:1], vh[:1], 0.0
    # tail[k] = weight discarded when keeping k values
    tail = np.concatenate([np.cumsum(w[::-1])[::-1], [0.0]]) / total
    keep = int(np.argmax(tail <= cutoff))
    keep = max(1, min(keep, max_bond, s.size))
    discarded = float(tail[keep])
    s = s[:keep]
    return u[:, :keep], s / np.linalg.norm(s), vh[:keep], discarded


def _check_compatible(a: MpsState, b: MpsState):
    if a.dims != b.dims:
        raise ConfigError(f"site dimensions differ: {a.dims} vs {b.dims}")


def overlap(a: MpsState, b: MpsState) -> complex:
    """Return ``<a|b>``."""
    _check_compatible(a, b)
    env = np.ones((1, 1))
    for x, y in zip(a.tensors, b.tensors):
        t = np.tensordot(env, y, axes=([1], [0]))  # (xa, s, yb)
        env = np.tensordot(x.conj(), t, axes=([0, 1], [0, 1]))
    return complex(env[0, 0])


def expect_local(psi: MpsState, op, site: int) -> float:
    """``<psi|O_site|psi> / <psi|psi>`` for a Hermitian single-site operator."""
    if not 0 <= site < len(psi):
        raise IndexError(f"site {site} out of range for {len(psi)} sites")
    op = np.asarray(op)
    if op.shape != (psi.dims[site],) * 2:
        raise ConfigError(f"operator shape {op.shape} does not match site dimension {psi.dims[site]}")
    if site == psi.center:
        a = psi.tensors[site]
        num = np.tensordot(a.conj(), np.tensordot(op, a, axes=([1], [1])), axes=([0, 1, 2], [1, 0, 2]))
        den = np.vdot(a, a)
    else:
        env = np.ones((1, 1))
        num_env = None
        for i, a in enumerate(psi.tensors):
            t = np.tensordot(env, a, axes=([1], [0]))
            if i == site:
                num_env = np.tensordot(a.conj(), np.tensordot(t, op, axes=([1], [1])).transpose(0, 2, 1),
                                       axes=([0, 1], [0, 1]))
            elif num_env is not None:
                tn = np.tensordot(num_env, a, axes=([1], [0]))
                num_env = np.tensordot(a.conj(), tn, axes=([0, 1], [0, 1]))
            env = np.tensordot(a.conj(), t, axes=([0, 1], [0, 1]))
        num, den = num_env[0, 0], env[0, 0]
    val = complex(num / den)
    return val.real


def _left_env_update(env, a, w):
    t = np.tensordot(env, a, axes=([0], [0]))          # (w, d, s, u')
    t = np.tensordot(t, w, axes=([0, 2], [0, 3]))       # (d, u', wr, t)
    return np.tensordot(t, a.conj(), axes=([0, 3], [0, 1]))  # (u', wr, d')


def _right_env_update(env, b, w):
    t = np.tensordot(b, env, axes=([2], [0]))           # (a, s, w, bbar)
    t = np.tensordot(t, w, axes=([1, 2], [3, 1]))       # (a, bbar, wl, t)
    return np.tensordot(t, b.conj(), axes=([1, 3], [2, 1]))  # (a, wl, abar)


def expect_mpo(psi: MpsState, h: MpoOperator) -> float:
    """``<psi|H|psi> / <psi|psi>``; the imaginary part is discarded."""
    if psi.dims != h.dims:
        raise ConfigError(f"site dimensions differ: {psi.dims} vs {h.dims}")
    env = np.ones((1, 1, 1))
    for a, w in zip(psi.tensors, h.tensors):
        env = _left_env_update(env, a, w)
    val = complex(env[0, 0, 0]) / overlap(psi, psi)
    return val.real
