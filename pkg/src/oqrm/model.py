"""Open quantum Rabi Hamiltonian as an MPO and as a dense matrix.

    H = -(delta/2) sx + epsilon sz + omega_0 a^dag a + (c/2)(a + a^dag)^2
        + g sz (a + a^dag) + sum_k w_k b_k^dag b_k
        + sum_k lam_k (a + a^dag)(b_k + b_k^dag)

with ``c`` the bath counterterm. Sites are ordered spin, resonator, then bath
modes by ascending frequency.
"""
from __future__ import annotations

from dataclasses import dataclass, replace
from functools import reduce

import numpy as np
import scipy.sparse as sp

from .bath import DiscretizedBath
from .errors import ConfigError, DomainError, ResourceError
from .tnet.mps import MpoOperator, MpsState

SX = np.array([[0.0, 1.0], [1.0, 0.0]])
SZ = np.array([[1.0, 0.0], [0.0, -1.0]])
ID2 = np.eye(2)

DENSE_CAP = 20_000


@dataclass(frozen=True)
class ModelParams:
    delta: float = 1.0
    omega_0: float = 0.75
    g: float = 0.0
    epsilon: float = 0.0

    def __post_init__(self):
        if not self.delta > 0:
            raise ConfigError(f"delta must be positive, got {self.delta}")
        if not self.omega_0 > 0:
            raise ConfigError(f"omega_0 must be positive, got {self.omega_0}")
        if self.g < 0:
            raise ConfigError(f"g must be nonnegative, got {self.g}")


@dataclass(frozen=True)
class SiteLayout:
    n_modes: int
    d_res: int = 12
    d_bath: int = 6

    def __post_init__(self):
        if self.d_res < 2 or self.d_bath < 2:
            raise ConfigError("bosonic local dimensions must be >= 2")
        if self.n_modes < 0:
            raise ConfigError("n_modes must be >= 0")

    @property
    def dims(self) -> list:
        return [2, self.d_res] + [self.d_bath] * self.n_modes

    @property
    def n_sites(self) -> int:
        return 2 + self.n_modes

    @property
    def hilbert_dim(self) -> int:
        return 2 * self.d_res * self.d_bath**self.n_modes


def with_coupling(params: ModelParams, g_new: float) -> ModelParams:
    if g_new < 0:
        raise DomainError(f"coupling must be nonnegative, got {g_new}")
    return replace(params, g=float(g_new))


def destroy(d: int) -> np.ndarray:
    return np.diag(np.sqrt(np.arange(1, d, dtype=float)), 1)


def number(d: int) -> np.ndarray:
    return np.diag(np.arange(d, dtype=float))


def quadrature(d: int) -> np.ndarray:
    """Truncated ``a + a^dag``."""
    a = destroy(d)
    return a + a.T


def spin_hamiltonian(params: ModelParams) -> np.ndarray:
    return -0.5 * params.delta * SX + params.epsilon * SZ


def resonator_hamiltonian(params: ModelParams, bath: DiscretizedBath, d: int) -> np.ndarray:
    x = quadrature(d)
    return params.omega_0 * number(d) + 0.5 * bath.counterterm * (x @ x)


def _check_layout(bath: DiscretizedBath, layout: SiteLayout):
    if bath.n_modes != layout.n_modes:
        raise ConfigError(f"layout has {layout.n_modes} bath sites but bath has {bath.n_modes} modes")


def build_mpo(params: ModelParams, bath: DiscretizedBath, layout: SiteLayout) -> MpoOperator:
    """MPO of bond dimension 3.

    Channels: 0 = nothing placed yet, 1 = an operator waiting for its partner
    (``sz`` after the spin, ``a + a^dag`` after the resonator), 2 = complete.
    """
    _check_layout(bath, layout)
    ds, dr, db = 2, layout.d_res, layout.d_bath
    n = layout.n_modes
    xr = quadrature(dr)

    w0 = np.zeros((1, 3, ds, ds))
    w0[0, 0] = ID2
    w0[0, 1] = SZ
    w0[0, 2] = spin_hamiltonian(params)

    wr = np.zeros((3, 3, dr, dr))
    wr[0, 0] = np.eye(dr)
    wr[0, 1] = xr
    wr[0, 2] = resonator_hamiltonian(params, bath, dr)
    wr[1, 2] = params.g * xr
    wr[2, 2] = np.eye(dr)

    tensors = [w0, wr]
    xb, nb, ib = quadrature(db), number(db), np.eye(db)
    for k in range(n):
        w = np.zeros((3, 3, db, db))
        w[0, 0] = ib
        w[0, 2] = bath.frequencies[k] * nb
        w[1, 1] = ib
        w[1, 2] = bath.couplings[k] * xb
        w[2, 2] = ib
        tensors.append(w)
    # close the last site onto the "complete" channel
    tensors[-1] = tensors[-1][:, 2:3]
    return MpoOperator(tensors)


def _embed(ops: dict, dims: list):
    """Sparse Kronecker product with identities on the unspecified sites."""
    factors = [sp.csr_matrix(ops[i]) if i in ops else sp.identity(d, format="csr") for i, d in enumerate(dims)]
    return reduce(lambda x, y: sp.kron(x, y, format="csr"), factors)


def build_dense_parts(params: ModelParams, bath: DiscretizedBath, layout: SiteLayout, cap: int = DENSE_CAP):
    """Return dense ``(H0, H1)`` with ``H = H0 + g H1``."""
    _check_layout(bath, layout)
    dims = layout.dims
    dim = layout.hilbert_dim
    if dim > cap:
        raise ResourceError(f"dense dimension {dim} exceeds cap {cap}")
    dr, db = layout.d_res, layout.d_bath
    h0 = _embed({0: spin_hamiltonian(params)}, dims)
    h0 = h0 + _embed({1: resonator_hamiltonian(params, bath, dr)}, dims)
    xb, nb = quadrature(db), number(db)
    for k in range(layout.n_modes):
        h0 = h0 + bath.frequencies[k] * _embed({2 + k: nb}, dims)
        h0 = h0 + bath.couplings[k] * _embed({1: quadrature(dr), 2 + k: xb}, dims)
    h1 = _embed({0: SZ, 1: quadrature(dr)}, dims)
    return h0.toarray(), h1.toarray()


def build_dense(params: ModelParams, bath: DiscretizedBath, layout: SiteLayout, cap: int = DENSE_CAP) -> np.ndarray:
    h0, h1 = build_dense_parts(params, bath, layout, cap)
    return h0 + params.g * h1


def initial_product_state(layout: SiteLayout, max_bond: int = 64, cutoff: float = 1e-9,
                          spin=None) -> MpsState:
    """Spin in ``spin`` (default ``|+x>``), every boson in its vacuum."""
    if spin is None:
        spin = np.array([1.0, 1.0]) / np.sqrt(2.0)
    vecs = [np.asarray(spin, dtype=float)]
    for d in layout.dims[1:]:
        v = np.zeros(d)
        v[0] = 1.0
        vecs.append(v)
    return MpsState.product(vecs, max_bond=max_bond, cutoff=cutoff)
