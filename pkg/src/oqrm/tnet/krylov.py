"""Lanczos kernels for effective Hamiltonians given as matvec closures."""
from __future__ import annotations

import numpy as np
import scipy.linalg as la
from scipy.sparse.linalg import LinearOperator, eigsh

# below this many unknowns the effective operator is materialized densely
DENSE_LIMIT = 24


def _materialize(matvec, n, dtype):
    eye = np.eye(n, dtype=dtype)
    cols = [matvec(eye[:, j]) for j in range(n)]
    h = np.stack(cols, axis=1)
    return 0.5 * (h + h.conj().T)


def lowest_eigenpair(matvec, v0, tol=1e-12, maxiter=None):
    """Lowest eigenpair of a Hermitian operator known only through ``matvec``."""
    v0 = np.asarray(v0).ravel()
    n = v0.size
    dtype = v0.dtype
    if n <= DENSE_LIMIT:
        w, v = np.linalg.eigh(_materialize(matvec, n, dtype))
        return float(w[0]), v[:, 0]
    op = LinearOperator((n, n), matvec=matvec, dtype=dtype)
    start = v0 if np.linalg.norm(v0) > 0 else None
    w, v = eigsh(op, k=1, which="SA", v0=start, tol=tol, maxiter=maxiter)
    return float(w[0]), v[:, 0]


def expm_krylov(matvec, v, tau, tol=1e-10, max_krylov=60):
    """Return ``exp(tau * H) v`` for Hermitian ``H`` and complex scalar ``tau``.

    Lanczos with full reorthogonalization. The subspace is enlarged until the
    standard a-posteriori residual ``beta_m * |[exp(tau T_m)]_{m,0}|`` drops
    below ``tol * |v|``; raises ``RuntimeError`` if ``max_krylov`` is hit
    first.
    """
    v = np.asarray(v, dtype=complex)
    shape = v.shape
    v = v.ravel()
    n = v.size
    nrm = np.linalg.norm(v)
    if nrm == 0.0:
        return v.reshape(shape)
    if n <= DENSE_LIMIT:
        h = _materialize(matvec, n, complex)
        w, u = np.linalg.eigh(h)
        out = u @ (np.exp(tau * w) * (u.conj().T @ v))
        return out.reshape(shape)

    m_max = min(max_krylov, n)
    basis = np.empty((m_max + 1, n), dtype=complex)
    alpha = np.zeros(m_max)
    beta = np.zeros(m_max)
    basis[0] = v / nrm
    for j in range(m_max):
        w = matvec(basis[j])
        alpha[j] = np.vdot(basis[j], w).real
        w = w - alpha[j] * basis[j]
        if j > 0:
            w = w - beta[j - 1] * basis[j - 1]
        # full reorthogonalization against the whole basis
        w = w - basis[: j + 1].T @ (basis[: j + 1].conj() @ w)
        beta[j] = np.linalg.norm(w)
        m = j + 1
        evals, evecs = la.eigh_tridiagonal(alpha[:m], beta[: m - 1])
        coeff = evecs @ (np.exp(tau * evals) * evecs[0].conj())
        err = beta[j] * abs(coeff[-1])
        if beta[j] < 1e-14 * max(1.0, abs(alpha[j])) or err < tol:
            return (nrm * (coeff @ basis[:m])).reshape(shape)
        basis[j + 1] = w / beta[j]
    raise RuntimeError(f"Krylov exponentiation not converged in {m_max} steps (err {err:.2e})")
