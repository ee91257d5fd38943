"""Ohmic bath in star geometry, plus the effective bath seen by the spin.

Conventions (units of the qubit tunneling energy):

* resonator-mode coupling ``sum_k lam_k (a + a^dag)(b_k + b_k^dag)`` with
  ``J(w) = pi * sum_k lam_k**2 * delta(w - w_k)``;
* the ``(x - x_k)**2`` form of the bath coupling produces the positive shift
  ``counterterm * (a + a^dag)**2 / 2`` with ``counterterm = 2 sum_k lam_k**2 / w_k``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, DomainError, StabilityError


@dataclass(frozen=True)
class BathParams:
    alpha: float = 0.2
    omega_c: float = 10.0
    n_modes: int = 60
    grid: str = "linear"

    def __post_init__(self):
        if not self.alpha > 0:
            raise ConfigError(f"alpha must be positive, got {self.alpha}")
        if not self.omega_c > 0:
            raise ConfigError(f"omega_c must be positive, got {self.omega_c}")
        if int(self.n_modes) != self.n_modes or self.n_modes < 1:
            raise ConfigError(f"n_modes must be a positive integer, got {self.n_modes}")
        if self.grid not in ("linear", "log"):
            raise ConfigError(f"unknown grid {self.grid!r}")


@dataclass(frozen=True)
class DiscretizedBath:
    frequencies: np.ndarray
    couplings: np.ndarray
    counterterm: float

    def __post_init__(self):
        w = np.asarray(self.frequencies, dtype=float)
        lam = np.asarray(self.couplings, dtype=float)
        if w.shape != lam.shape or w.ndim != 1:
            raise ConfigError("frequencies and couplings must be 1-d arrays of equal length")
        if w.size and (np.any(w <= 0) or np.any(np.diff(w) <= 0)):
            raise ConfigError("frequencies must be positive and strictly increasing")
        if self.counterterm < 0:
            raise ConfigError("counterterm must be nonnegative")
        object.__setattr__(self, "frequencies", w)
        object.__setattr__(self, "couplings", lam)

    @property
    def n_modes(self) -> int:
        return int(self.frequencies.size)

    @classmethod
    def empty(cls) -> "DiscretizedBath":
        return cls(np.zeros(0), np.zeros(0), 0.0)

    @classmethod
    def from_modes(cls, frequencies, couplings) -> "DiscretizedBath":
        """Build a bath from explicit modes, computing the matching counterterm."""
        w = np.asarray(frequencies, dtype=float)
        lam = np.asarray(couplings, dtype=float)
        return cls(w, lam, counterterm_of(w, lam))


@dataclass(frozen=True)
class EffectiveBath:
    normal_frequencies: np.ndarray
    spin_couplings: np.ndarray
    alpha_eff: float


def counterterm_of(frequencies, couplings) -> float:
    w = np.asarray(frequencies, dtype=float)
    lam = np.asarray(couplings, dtype=float)
    return float(2.0 * np.sum(lam**2 / w)) if w.size else 0.0


def ohmic_density(omega, params: BathParams):
    """``alpha * omega`` below the hard cutoff, zero at and above it."""
    w = np.asarray(omega, dtype=float)
    if np.any(w < 0):
        raise DomainError("spectral density is defined for omega >= 0")
    out = np.where(w < params.omega_c, params.alpha * w, 0.0)
    return float(out) if out.ndim == 0 else out


def discretize_star(params: BathParams) -> DiscretizedBath:
    """Discretize the Ohmic density into ``n_modes`` star-coupled oscillators.

    The default linear midpoint grid integrates the linear density exactly,
    so ``pi * sum(lam**2) == alpha * omega_c**2 / 2`` up to rounding. The
    ``log`` grid places midpoints of logarithmic bins on
    ``[omega_c * 1e-3, omega_c]`` and weights each by its bin width.
    """
    n = params.n_modes
    if n < 1:
        raise ConfigError("n_modes must be >= 1")
    if params.grid == "linear":
        dw = params.omega_c / n
        w = (np.arange(1, n + 1) - 0.5) * dw
        widths = np.full(n, dw)
    else:
        edges = np.geomspace(params.omega_c * 1e-3, params.omega_c, n + 1)
        edges[0] = 0.0
        w = 0.5 * (edges[1:] + edges[:-1])
        widths = np.diff(edges)
    lam = np.sqrt(params.alpha * w * widths / np.pi)
    return DiscretizedBath(w, lam, counterterm_of(w, lam))


def quadratic_form(omega_0: float, bath: DiscretizedBath) -> np.ndarray:
    """Potential matrix of resonator + bath in mass-weighted coordinates.

    Index 0 is the resonator. With the counterterm included the Schur
    complement on the resonator is exactly ``omega_0**2``.
    """
    w = bath.frequencies
    lam = bath.couplings
    n = w.size
    v = np.zeros((n + 1, n + 1))
    v[0, 0] = omega_0**2 + 2.0 * bath.counterterm * omega_0
    v[0, 1:] = v[1:, 0] = 2.0 * lam * np.sqrt(omega_0 * w)
    v[np.arange(1, n + 1), np.arange(1, n + 1)] = w**2
    return v


def normal_modes(omega_0: float, g: float, bath: DiscretizedBath, alpha: float | None = None) -> EffectiveBath:
    """Diagonalize the bosonic sector and return the effective spin bath.

    The spin couples as ``sigma_z * sum_n kappa_n (c_n + c_n^dag)`` with
    ``kappa_n = g * U[0, n] * sqrt(omega_0 / Omega_n)``. ``alpha`` is the
    Ohmic strength used for ``alpha_eff = 4 g**2 alpha / omega_0**2``; if
    omitted it is recovered from the discrete couplings via the sum rule.
    """
    if omega_0 <= 0:
        raise DomainError("omega_0 must be positive")
    v = quadratic_form(omega_0, bath)
    evals, u = np.linalg.eigh(v)
    scale = max(1.0, float(np.max(np.abs(evals))))
    if evals[0] <= 1e-14 * scale:
        raise StabilityError(
            f"quadratic form not positive definite (lowest eigenvalue {evals[0]:.3e}); "
            "counterterm missing or inconsistent"
        )
    omega = np.sqrt(evals)
    # eigenvector signs are arbitrary; the coupling sign is a gauge choice
    kappa = g * np.abs(u[0]) * np.sqrt(omega_0 / omega)
    if alpha is None:
        alpha = _alpha_from_modes(bath)
    alpha_eff = 4.0 * g**2 * alpha / omega_0**2
    return EffectiveBath(omega, kappa, float(alpha_eff))


def _alpha_from_modes(bath: DiscretizedBath) -> float:
    if bath.n_modes == 0:
        return 0.0
    # linear grid: omega_c = n * spacing, pi*sum(lam^2) = alpha omega_c^2 / 2
    w = bath.frequencies
    omega_c = w[-1] + 0.5 * (w[1] - w[0] if w.size > 1 else 2 * w[0])
    return float(2.0 * np.pi * np.sum(bath.couplings**2) / omega_c**2)


def effective_density(eff: EffectiveBath):
    """Reconstruct the effective spectral density on the normal-mode grid.

    Each discrete weight is spread over the local mode spacing. The density
    is normalized as ``(pi/2) * sum_n kappa_n**2 delta(w - Omega_n)`` so that
    its Ohmic low-frequency slope is ``alpha_eff / 2``.
    """
    omega = np.asarray(eff.normal_frequencies)
    if omega.size < 2:
        raise DomainError("need at least two normal modes to reconstruct a density")
    spacing = np.gradient(omega)
    return omega, 0.5 * np.pi * eff.spin_couplings**2 / spacing


def low_frequency_slope(eff: EffectiveBath, omega_max: float = 0.1) -> float:
    """Least-squares slope through the origin of the density below ``omega_max``."""
    omega, dens = effective_density(eff)
    mask = omega <= omega_max
    if mask.sum() < 2:
        raise DomainError(f"fewer than two normal modes below omega={omega_max}")
    x, y = omega[mask], dens[mask]
    return float(np.dot(x, y) / np.dot(x, x))
