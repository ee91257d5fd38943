"""Kibble-Zurek analysis chain.

Freeze-out solvers for power-law and essential-singularity (BKT) critical
slowing down rest on the principal Lambert W branch. Least-squares fitters
cover the relaxation and scaling data; the two-level estimate converts
excitation probabilities into energies.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import least_squares

from .errors import DomainError, FitError, WindowError

# equilibrium critical coupling (world-line QMC) for alpha=0.2, omega_c=10, omega_0=0.75
G_C_EQUILIBRIUM = 0.9165

_INV_E = math.exp(-1.0)


# -- result types --------------------------------------------------------------

@dataclass(frozen=True)
class BktFit:
    A: float
    B: float
    g_c: float
    residual: float = 0.0
    pinned_g_c: bool = False

    def __post_init__(self):
        if not (self.A > 0 and self.B > 0 and self.g_c > 0):
            raise DomainError(f"BKT parameters must be positive, got A={self.A}, B={self.B}, g_c={self.g_c}")

    def tau(self, g):
        g = np.asarray(g, dtype=float)
        return self.A * np.exp(self.B / np.sqrt(np.abs(g - self.g_c)))


@dataclass(frozen=True)
class StretchedFit:
    amplitude: float
    tau: float
    beta: float
    fit_window: tuple
    residual: float = 0.0
    n_points: int = 0


@dataclass(frozen=True)
class SecondOrderKz:
    tau_0: float
    nu: float
    z: float
    d: int = 0

    def __post_init__(self):
        if not self.tau_0 > 0:
            raise DomainError("tau_0 must be positive")
        if not (self.nu > 0 and self.z > 0):
            raise DomainError("nu and z must be positive")
        if int(self.d) != self.d or self.d < 0:
            raise DomainError("d must be a nonnegative integer")


@dataclass(frozen=True)
class FreezeOutResult:
    """``t_f`` is the time left before the ramp reaches ``g_c``."""

    t_f: float
    g_at_freeze: float
    residual: float

    def ramp_time(self, g_f: float, t_q: float) -> float:
        """Absolute time since the start of the ramp at which freeze-out occurs."""
        return self.g_at_freeze * t_q / g_f


@dataclass(frozen=True)
class PowerLawFit:
    mu: float
    amplitude: float
    residual: float
    mu_stderr: float = float("nan")
    n_points: int = 0


@dataclass(frozen=True)
class TwoLevelEstimate:
    C: float
    delta_eff: float
    estimated_energy: float


# -- Lambert W -------------------------------------------------------------------

def lambert_w0(x: float) -> float:
    """Principal branch of the Lambert W function (``w exp(w) = x``, ``w >= -1``).

    Halley iteration started from the branch-point series near ``-1/e``, from
    ``log1p`` for moderate arguments and from the asymptotic expansion for
    large ones.
    """
    x = float(x)
    if math.isnan(x):
        raise DomainError("lambert_w0 of NaN")
    if x < -_INV_E:
        # tolerate the rounding of -1/e itself
        if x < -_INV_E * (1 + 4e-16):
            raise DomainError(f"lambert_w0 requires x >= -1/e, got {x}")
        return -1.0
    if x == 0.0:
        return 0.0
    if math.isinf(x):
        return math.inf
    if x < -0.25:
        p = math.sqrt(max(2.0 * (math.e * x + 1.0), 0.0))
        w = -1.0 + p - p * p / 3.0 + 11.0 / 72.0 * p**3
    elif x < 3.0:
        w = math.log1p(x)
        w = w * (1.0 - math.log1p(w) / (2.0 + w))
    else:
        l1 = math.log(x)
        l2 = math.log(l1)
        w = l1 - l2 + l2 / l1
    if w == -1.0:
        return w
    for _ in range(100):
        ew = math.exp(w)
        f = w * ew - x
        wp1 = w + 1.0
        if wp1 == 0.0:
            break
        denom = ew * wp1 - (w + 2.0) * f / (2.0 * wp1)
        step = f / denom
        w_new = w - step
        if abs(step) <= 4e-16 * (1.0 + abs(w_new)):
            w = w_new
            break
        w = w_new
    return max(w, -1.0)


# -- freeze-out -------------------------------------------------------------------

def freeze_out_bkt(fit: BktFit, g_f: float, t_q: float) -> FreezeOutResult:
    """Closed-form solution of ``A exp(B/sqrt(u)) = (t_q/g_f) u`` with ``u = g_c - g``.

    ``u = (B / (2 W(z)))**2`` with ``z = (B/2) sqrt(t_q / (A g_f))``; the
    residual time is ``t_f = (t_q/g_f) u``.
    """
    if not (t_q > 0 and g_f > 0):
        raise DomainError("t_q and g_f must be positive")
    z = 0.5 * fit.B * math.sqrt(t_q / (fit.A * g_f))
    try:
        w = lambert_w0(z)
    except DomainError as exc:
        raise DomainError(f"freeze-out parameters outside Lambert-W domain: {exc}") from exc
    if w <= 0:
        raise DomainError("freeze-out requires a positive Lambert-W argument")
    u = (fit.B / (2.0 * w)) ** 2
    t_f = t_q / g_f * u
    lhs = fit.A * math.exp(fit.B / math.sqrt(u))
    rhs = t_q / g_f * u
    return FreezeOutResult(t_f, fit.g_c - u, abs(lhs - rhs) / rhs)


def freeze_out_power(kz: SecondOrderKz, g_f: float, t_q: float, g_c: float = 0.0) -> FreezeOutResult:
    """Solve ``tau_0 u**(-nu z) = (t_q/g_f) u``.

    ``g_at_freeze`` is ``g_c - u``; with the default ``g_c = 0`` it is the
    signed offset from the critical point.
    """
    if not (t_q > 0 and g_f > 0):
        raise DomainError("t_q and g_f must be positive")
    nz = kz.nu * kz.z
    rate = t_q / g_f
    t_f = kz.tau_0 ** (1.0 / (1.0 + nz)) * rate ** (nz / (1.0 + nz))
    u = t_f / rate
    lhs = kz.tau_0 * u ** (-nz)
    return FreezeOutResult(t_f, g_c - u, abs(lhs - t_f) / t_f)


def kz_exponents(kz: SecondOrderKz):
    """Magnitudes of the ``t_q`` power laws of ``P_exc`` and ``E_r``."""
    denom = kz.nu * kz.z + 1.0
    return kz.d * kz.nu / denom, (kz.d + kz.z) * kz.nu / denom


# -- fitters ------------------------------------------------------------------------

def _window_arrays(times, values, window):
    t = np.asarray(times, dtype=float)
    y = np.asarray(values, dtype=float)
    t0, t1 = window
    if t1 is None:
        t1 = t[-1]
    if t0 >= t1 or t0 > t[-1] or t1 < t[0]:
        raise WindowError(f"window ({t0}, {t1}) does not overlap data range [{t[0]}, {t[-1]}]")
    m = (t >= t0) & (t <= t1)
    if m.sum() < 4:
        raise WindowError(f"window ({t0}, {t1}) holds fewer than 4 points")
    if np.any(y[m] <= 0):
        raise WindowError(f"non-positive values inside window ({t0}, {t1})")
    if np.any(t[m] <= 0):
        raise WindowError("stretched-exponential window must start after t=0")
    return t[m], y[m], (float(t0), float(t1))


def fit_stretched(series, window=(2.0, None)) -> StretchedFit:
    """Fit ``amplitude * exp(-(t/tau)**beta)`` over ``window``.

    ``series`` is anything with ``times`` and ``values``. The start point
    comes from the line ``log(-log y) = beta log t - beta log tau`` with the
    amplitude fixed to 1 (or just above the largest value if that exceeds 1).
    """
    t, y, win = _window_arrays(series.times, series.values, window)
    a0 = 1.0 if y.max() < 1.0 else 1.05 * y.max()
    ll = np.log(-np.log(y / a0))
    slope, icpt = np.polyfit(np.log(t), ll, 1)
    beta0 = slope if slope > 0 else 1.0
    tau0 = math.exp(-icpt / beta0) if slope > 0 else float(np.mean(t))

    def resid(p):
        a, lt, b = p
        return a * np.exp(-((t / math.exp(lt)) ** b)) - y

    res = least_squares(resid, [a0, math.log(tau0), beta0], bounds=([0, -np.inf, 1e-3], [np.inf, np.inf, 20]),
                        x_scale="jac", xtol=1e-15, ftol=1e-15, gtol=1e-15, max_nfev=5000)
    if not res.success:
        raise FitError(f"stretched-exponential fit failed: {res.message}")
    a, lt, b = res.x
    rms = float(np.sqrt(np.mean(res.fun**2)))
    return StretchedFit(float(a), float(math.exp(lt)), float(b), win, rms, int(t.size))


def fit_bkt(points, g_c: float | None = None) -> BktFit:
    """Fit ``tau = A exp(B / sqrt(g_c - g))`` to ``(g, tau)`` pairs in log space.

    ``g_c`` is free unless given. The start point is the best straight-line
    fit of ``log tau`` against ``(g_c - g)**-0.5`` over a fixed ladder of
    trial ``g_c`` values just above the largest ``g``.
    """
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2:
        raise FitError("points must be a sequence of (g, tau) pairs")
    n_par = 2 if g_c is not None else 3
    if pts.shape[0] < max(4, n_par + 1):
        raise FitError(f"need at least {max(4, n_par + 1)} points, got {pts.shape[0]}")
    g, tau = pts[:, 0], pts[:, 1]
    if np.any(tau <= 0):
        raise FitError("relaxation times must be positive")
    y = np.log(tau)
    gmax = g.max()
    span = max(gmax - g.min(), 1e-3)

    def linear(gc):
        x = 1.0 / np.sqrt(gc - g)
        b, la = np.polyfit(x, y, 1)
        return float(np.sum((la + b * x - y) ** 2)), la, b

    if g_c is not None:
        if g_c <= gmax:
            raise FitError("pinned g_c must exceed every sampled coupling")
        _, la, b = linear(g_c)
        res = least_squares(lambda p: p[0] + p[1] / np.sqrt(g_c - g) - y, [la, b],
                            xtol=1e-15, ftol=1e-15, gtol=1e-15)
        la, b = res.x
        gc = g_c
    else:
        trials = gmax + span * np.geomspace(1e-3, 2.0, 80)
        best = min(trials, key=lambda gc: linear(gc)[0])
        _, la, b = linear(best)
        # parametrize g_c = gmax + exp(s) to keep it above the data
        s0 = math.log(best - gmax)
        res = least_squares(lambda p: p[0] + p[1] / np.sqrt(gmax + np.exp(p[2]) - g) - y, [la, b, s0],
                            xtol=1e-15, ftol=1e-15, gtol=1e-15, max_nfev=10000)
        la, b, s = res.x
        gc = gmax + math.exp(s)
    if not res.success:
        raise FitError(f"BKT fit failed: {res.message}")
    if b <= 0:
        raise FitError(f"BKT fit produced non-positive barrier B={b:.3g}")
    rms = float(np.sqrt(np.mean(res.fun**2)))
    return BktFit(float(math.exp(la)), float(b), float(gc), rms, g_c is not None)


def fit_powerlaw(points) -> PowerLawFit:
    """Straight-line fit of ``log y`` against ``log t``; ``mu`` is minus the slope."""
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2:
        raise FitError("points must be a sequence of (t, y) pairs")
    if pts.shape[0] < 3:
        raise FitError(f"need at least 3 points, got {pts.shape[0]}")
    if np.any(pts <= 0):
        raise DomainError("power-law fit requires positive data")
    x, y = np.log(pts[:, 0]), np.log(pts[:, 1])
    (slope, icpt), cov = np.polyfit(x, y, 1, cov="unscaled")
    r = y - (icpt + slope * x)
    dof = x.size - 2
    s2 = float(r @ r) / dof if dof > 0 else 0.0
    stderr = float(math.sqrt(cov[0, 0] * s2)) if dof > 0 else float("nan")
    return PowerLawFit(float(-slope), float(math.exp(icpt)), float(math.sqrt(np.mean(r**2))), stderr, int(x.size))


# -- two-level estimate ---------------------------------------------------------------

def estimate_excitation_energy(p_exc: float, tau: float, c: float = 1.0) -> TwoLevelEstimate:
    if not 0.0 <= p_exc <= 1.0:
        raise DomainError(f"p_exc must lie in [0, 1], got {p_exc}")
    if not tau > 0:
        raise DomainError(f"tau must be positive, got {tau}")
    delta_eff = c / tau
    return TwoLevelEstimate(float(c), float(delta_eff), float(p_exc * delta_eff))


def rescale_to_first(estimates, measured):
    """Scale ``estimates`` so its first entry equals ``measured[0]``."""
    est = np.asarray(estimates, dtype=float)
    meas = np.asarray(measured, dtype=float)
    if est.shape != meas.shape or est.size == 0:
        raise ValueError("estimates and measured must be non-empty and equally long")
    if est[0] == 0:
        raise DomainError("cannot rescale from a zero first estimate")
    return est * (meas[0] / est[0])


def relaxation_time(series, t_start: float = 0.0) -> StretchedFit:
    """Stretched-exponential relaxation time from the decay of ``series``.

    The window opens at the first sample after ``max(t_start, 0)`` and closes
    at the sample before the first sign change. Underdamped curves are thus
    fitted on their first decaying lobe, and the same rule applies on both
    sides of the coherent-incoherent crossover.
    """
    t = np.asarray(series.times, dtype=float)
    y = np.asarray(series.values, dtype=float)
    inside = np.nonzero((t >= t_start) & (t > 0))[0]
    if not inside.size:
        raise WindowError(f"no samples after t={t_start}")
    t0 = t[inside[0]]
    after = np.nonzero((t >= t0) & (y <= 0))[0]
    t_end = t[after[0] - 1] if after.size else t[-1]
    return fit_stretched(series, window=(t0, t_end))
