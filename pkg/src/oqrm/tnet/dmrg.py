"""Two-site DMRG ground-state search."""
from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass, field

import numpy as np

from ..errors import ConfigError
from .effective import Environments, apply_two
from .krylov import lowest_eigenpair
from .mps import MpoOperator, MpsState, truncated_svd

logger = logging.getLogger(__name__)


class DmrgConvergenceWarning(RuntimeWarning):
    pass


@dataclass
class DmrgInfo:
    sweep_energies: list = field(default_factory=list)
    converged: bool = False
    last_delta: float = float("nan")
    max_bond: int = 0
    truncation_weight: float = 0.0


def dmrg_ground_state(h: MpoOperator, psi0: MpsState, sweeps: int = 20, energy_tol: float = 1e-10,
                      eig_tol: float = 1e-13, cutoff: float | None = None, return_info: bool = False):
    """Variational ground state by two-site sweeps.

    Each full sweep (left to right and back) records the energy; iteration
    stops once the change between consecutive sweeps is below ``energy_tol``.
    Running out of sweeps issues a ``DmrgConvergenceWarning`` carrying the
    last energy change instead of raising. ``cutoff`` overrides the state's
    discarded-weight threshold for this search only.
    """
    if psi0.dims != h.dims:
        raise ConfigError(f"state dims {psi0.dims} incompatible with operator dims {h.dims}")
    psi = psi0.copy()
    dtype = np.result_type(psi.dtype, *h.tensors)
    psi.tensors = [a.astype(dtype) for a in psi.tensors]
    psi.canonicalize(0).normalize()
    if cutoff is not None:
        psi.cutoff = cutoff
    n = len(psi)
    info = DmrgInfo()

    if n == 1:
        w = h.tensors[0][0, 0]
        evals, evecs = np.linalg.eigh(0.5 * (w + w.conj().T))
        psi.tensors[0] = evecs[:, 0].reshape(1, -1, 1).astype(dtype)
        info.sweep_energies.append(float(evals[0]))
        info.converged = True
        energy = float(evals[0])
        return (energy, psi, info) if return_info else (energy, psi)

    env = Environments(psi, h)
    energy = np.inf
    for sweep in range(sweeps):
        for i in range(n - 1):
            energy = _optimize_bond(psi, h, env, i, True, eig_tol, info)
        for i in range(n - 2, -1, -1):
            energy = _optimize_bond(psi, h, env, i, False, eig_tol, info)
        info.sweep_energies.append(energy)
        if len(info.sweep_energies) > 1:
            info.last_delta = info.sweep_energies[-2] - energy
            logger.debug("sweep %d: E=%.14f dE=%.3e", sweep, energy, info.last_delta)
            if abs(info.last_delta) < energy_tol:
                info.converged = True
                break
    if not info.converged:
        warnings.warn(f"DMRG not converged after {sweeps} sweeps; last energy change {info.last_delta:.3e}",
                      DmrgConvergenceWarning, stacklevel=2)
    info.max_bond = max(psi.bond_dims, default=1)
    psi.truncation_weight += info.truncation_weight
    psi.cutoff = psi0.cutoff
    return (energy, psi, info) if return_info else (energy, psi)


def _optimize_bond(psi, h, env, i, moving_right, eig_tol, info):
    a, b = psi.tensors[i], psi.tensors[i + 1]
    theta = np.tensordot(a, b, axes=([2], [0]))
    shape = theta.shape
    lenv, renv = env.left[i], env.right[i + 1]
    w1, w2 = h.tensors[i], h.tensors[i + 1]

    def matvec(x):
        return apply_two(lenv, w1, w2, renv, x.reshape(shape)).ravel()

    energy, vec = lowest_eigenpair(matvec, theta.ravel(), tol=eig_tol)
    theta = vec.reshape(shape[0] * shape[1], shape[2] * shape[3])
    u, s, vh, disc = truncated_svd(theta, psi.max_bond, psi.cutoff)
    info.truncation_weight += disc
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
    return energy
