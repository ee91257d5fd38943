"""Dense exact-diagonalization reference for small Hilbert spaces."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as la

from .errors import ConfigError, ResourceError
from .model import DENSE_CAP


@dataclass
class DenseState:
    amplitudes: np.ndarray

    def __post_init__(self):
        self.amplitudes = np.asarray(self.amplitudes, dtype=complex).ravel()

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def expect(self, op) -> float:
        v = self.amplitudes
        return float(np.vdot(v, op @ v).real / np.vdot(v, v).real)

    def overlap(self, other: "DenseState") -> complex:
        return complex(np.vdot(self.amplitudes, other.amplitudes))


@dataclass
class GroundState:
    energy: float
    state: DenseState
    gap: float
    residual: float

    # unpacks as (energy, state)
    def __iter__(self):
        yield self.energy
        yield self.state


def _check_cap(h, cap):
    if h.shape[0] > cap:
        raise ResourceError(f"dense dimension {h.shape[0]} exceeds cap {cap}")


def ed_ground_state(h: np.ndarray, cap: int = DENSE_CAP) -> GroundState:
    """Lowest eigenpair with the gap to the next level; ``residual`` is ``|H v - E v|``."""
    h = np.asarray(h)
    _check_cap(h, cap)
    evals, evecs = la.eigh(h, subset_by_index=[0, min(1, h.shape[0] - 1)])
    v = evecs[:, 0]
    residual = float(np.linalg.norm(h @ v - evals[0] * v))
    gap = float(evals[1] - evals[0]) if evals.size > 1 else float("inf")
    return GroundState(float(evals[0]), DenseState(v), gap, residual)


class _Propagator:
    """Caches the eigendecomposition of the last Hamiltonian seen."""

    def __init__(self):
        self.key = None
        self.evals = None
        self.evecs = None

    def apply(self, h, v, dt, key):
        if key is None or key != self.key:
            self.evals, self.evecs = la.eigh(h)
            self.key = key
        u = self.evecs
        return u @ (np.exp(-1j * dt * self.evals) * (u.conj().T @ v))


def ed_evolve(h_of_t, psi: DenseState, t0: float, t1: float, dt: float, cap: int = DENSE_CAP,
              observer=None) -> DenseState:
    """Propagate ``psi`` from ``t0`` to ``t1`` with midpoint-sampled Hamiltonians.

    ``h_of_t`` is either a fixed matrix or a callable returning the
    Hamiltonian at a given time. Each step applies ``exp(-i H(t + dt/2) dt)``
    computed by exact eigendecomposition; a constant Hamiltonian is
    diagonalized once. The last step is shortened so the run ends at ``t1``.
    ``observer(t, state)`` is called after every step if given.
    """
    if dt <= 0:
        raise ConfigError("dt must be positive")
    if t1 < t0:
        raise ConfigError("t1 must not precede t0")
    constant = not callable(h_of_t)
    v = psi.amplitudes.copy()
    n_steps = int(np.ceil((t1 - t0) / dt - 1e-9))
    prop = _Propagator()
    t = t0
    for k in range(n_steps):
        step = min(dt, t1 - t)
        if step <= 0:
            break
        if constant:
            h, key = h_of_t, "const"
        else:
            h, key = h_of_t(t + 0.5 * step), None
        if k == 0:
            _check_cap(np.asarray(h), cap)
        v = prop.apply(h, v, step, key)
        t = t0 + (k + 1) * dt if k < n_steps - 1 else t1
        if observer is not None:
            observer(t, DenseState(v))
    return DenseState(v)
