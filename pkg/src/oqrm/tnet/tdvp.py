"""Symmetric (second-order) TDVP integration of ``i d/dt |psi> = H |psi>``.

The two-site scheme is used while bonds can still grow; once the bond cap is
reached (or every bond is at its full Hilbert-space dimension) the engine
switches to the one-site scheme, which conserves norm and energy up to the
Krylov tolerance.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import ConfigError, StepError
from .effective import Environments, apply_one, apply_two, apply_zero
from .krylov import expm_krylov
from .mps import MpoOperator, MpsState, truncated_svd


@dataclass
class TdvpStats:
    steps: int = 0
    two_site_steps: int = 0
    one_site_steps: int = 0
    max_bond: int = 0
    truncation_weight: float = 0.0


class TdvpEngine:
    """Evolves one state in place; reuses environments between steps.

    ``scheme`` is ``"auto"``, ``"one"`` or ``"two"``.
    """

    def __init__(self, psi: MpsState, h: MpoOperator, scheme: str = "auto",
                 krylov_tol: float = 1e-10, max_krylov: int = 60):
        if scheme not in ("auto", "one", "two"):
            raise ConfigError(f"unknown TDVP scheme {scheme!r}")
        if psi.dims != h.dims:
            raise ConfigError(f"state dims {psi.dims} incompatible with operator dims {h.dims}")
        self.psi = psi.astype(complex)
        self.psi.canonicalize(0)
        self.h = h
        self.scheme = scheme
        self.krylov_tol = krylov_tol
        self.max_krylov = max_krylov
        self.env = Environments(self.psi, h)
        self.stats = TdvpStats(max_bond=max(self.psi.bond_dims, default=1))
        self.time = 0.0
        d = self.psi.dims
        left = np.cumprod(d)[:-1]
        right = np.cumprod(d[::-1])[::-1][1:]
        self._full_bonds = np.minimum(left, right)

    def set_hamiltonian(self, h: MpoOperator):
        if h is self.h:
            return
        if h.dims != self.h.dims:
            raise ConfigError("new Hamiltonian has different site dimensions")
        self.h = h
        if self.psi.center != 0:
            self.psi.move_center(0)
        self.env.rebuild_right(self.psi, h)

    def use_two_site(self) -> bool:
        if self.scheme != "auto":
            return self.scheme == "two"
        bonds = np.asarray(self.psi.bond_dims)
        if bonds.size == 0:
            return False
        if bonds.max() >= self.psi.max_bond:
            return False
        return bool(np.any(bonds < np.minimum(self._full_bonds, self.psi.max_bond)))

    def step(self, dt: float, h: MpoOperator | None = None) -> MpsState:
        if not dt > 0:
            raise ConfigError("dt must be positive")
        if h is not None:
            self.set_hamiltonian(h)
        if len(self.psi) == 1:
            self._single_site_exact(dt)
        elif self.use_two_site():
            self._sweep_two(dt)
            self.stats.two_site_steps += 1
        else:
            self._sweep_one(dt)
            self.stats.one_site_steps += 1
        self.stats.steps += 1
        self.stats.max_bond = max(self.stats.max_bond, max(self.psi.bond_dims, default=1))
        self.time += dt
        return self.psi

    def _expm(self, matvec, x, tau, site):
        try:
            return expm_krylov(matvec, x, tau, tol=self.krylov_tol, max_krylov=self.max_krylov)
        except (RuntimeError, np.linalg.LinAlgError) as exc:
            raise StepError(f"local integrator failed: {exc}", site=site) from exc

    def _single_site_exact(self, dt):
        w = self.h.tensors[0][0, 0]
        evals, u = np.linalg.eigh(w)
        a = self.psi.tensors[0][0, :, 0]
        self.psi.tensors[0] = (u @ (np.exp(-1j * dt * evals) * (u.conj().T @ a))).reshape(1, -1, 1)

    def _sweep_two(self, dt):
        psi, h, env = self.psi, self.h, self.env
        n = len(psi)
        half = -0.5j * dt
        for i in range(n - 1):
            self._two_site_update(i, half, moving_right=True)
            if i < n - 2:
                self._one_site_evolve(i + 1, -half)
        for i in range(n - 2, -1, -1):
            self._two_site_update(i, half, moving_right=False)
            if i > 0:
                self._one_site_evolve(i, -half)

    def _two_site_update(self, i, tau, moving_right):
        psi, h, env = self.psi, self.h, self.env
        a, b = psi.tensors[i], psi.tensors[i + 1]
        theta = np.tensordot(a, b, axes=([2], [0]))
        shape = theta.shape
        lenv, renv = env.left[i], env.right[i + 1]
        w1, w2 = h.tensors[i], h.tensors[i + 1]

        def matvec(x):
            return apply_two(lenv, w1, w2, renv, x.reshape(shape)).ravel()

        theta = self._expm(matvec, theta.ravel(), tau, i)
        u, s, vh, disc = truncated_svd(theta.reshape(shape[0] * shape[1], -1), psi.max_bond, psi.cutoff)
        psi.truncation_weight += disc
        self.stats.truncation_weight += disc
        k = s.size
        if moving_right:
            psi.tensors[i] = u.reshape(shape[0], shape[1], k)
            psi.tensors[i + 1] = (s[:, None] * vh).reshape(k, shape[2], shape[3])
            psi.center = i + 1
            env.push_left(i, psi.tensors[i], w1)
        else:
            psi.tensors[i] = (u * s).reshape(shape[0], shape[1], k)
            psi.tensors[i + 1] = vh.reshape(k, shape[2], shape[3])
            psi.center = i
            env.push_right(i + 1, psi.tensors[i + 1], w2)

    def _one_site_evolve(self, i, tau):
        psi, env = self.psi, self.env
        a = psi.tensors[i]
        lenv, renv, w = env.left[i], env.right[i], self.h.tensors[i]

        def matvec(x):
            return apply_one(lenv, w, renv, x.reshape(a.shape)).ravel()

        psi.tensors[i] = self._expm(matvec, a.ravel(), tau, i).reshape(a.shape)

    def _zero_site_evolve(self, c, lenv, renv, tau, site):
        def matvec(x):
            return apply_zero(lenv, renv, x.reshape(c.shape)).ravel()

        return self._expm(matvec, c.ravel(), tau, site).reshape(c.shape)

    def _sweep_one(self, dt):
        psi, h, env = self.psi, self.h, self.env
        n = len(psi)
        half = -0.5j * dt
        for i in range(n):
            self._one_site_evolve(i, half)
            if i == n - 1:
                break
            a = psi.tensors[i]
            chi_l, d, chi_r = a.shape
            q, r = np.linalg.qr(a.reshape(chi_l * d, chi_r))
            psi.tensors[i] = q.reshape(chi_l, d, q.shape[1])
            env.push_left(i, psi.tensors[i], h.tensors[i])
            r = self._zero_site_evolve(r, env.left[i + 1], env.right[i], -half, i)
            psi.tensors[i + 1] = np.tensordot(r, psi.tensors[i + 1], axes=([1], [0]))
            psi.center = i + 1
        for i in range(n - 1, -1, -1):
            self._one_site_evolve(i, half)
            if i == 0:
                break
            b = psi.tensors[i]
            chi_l, d, chi_r = b.shape
            q, r = np.linalg.qr(b.reshape(chi_l, d * chi_r).T)
            psi.tensors[i] = q.T.reshape(q.shape[1], d, chi_r)
            env.push_right(i, psi.tensors[i], h.tensors[i])
            c = r.T
            c = self._zero_site_evolve(c, env.left[i], env.right[i - 1], -half, i)
            psi.tensors[i - 1] = np.tensordot(psi.tensors[i - 1], c, axes=([2], [0]))
            psi.center = i - 1


def tdvp_step(psi: MpsState, h: MpoOperator, dt: float, scheme: str = "auto",
              krylov_tol: float = 1e-10) -> MpsState:
    """Advance a copy of ``psi`` by one step of length ``dt``."""
    eng = TdvpEngine(psi, h, scheme=scheme, krylov_tol=krylov_tol)
    return eng.step(dt).copy()
