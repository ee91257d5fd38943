"""Relaxation and linear-quench protocols on the MPS or ED engine."""
from __future__ import annotations

import logging
import warnings
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from .bath import BathParams, discretize_star
from .errors import ConfigError, ProtocolError, RangeError
from .model import SZ, ModelParams, SiteLayout, build_dense_parts, build_mpo, initial_product_state, with_coupling
from .oracle import DenseState, ed_evolve, ed_ground_state
from .tnet import DmrgConvergenceWarning, TdvpEngine, dmrg_ground_state, expect_local, expect_mpo, overlap

logger = logging.getLogger(__name__)

ENGINES = ("mps", "ed")


@dataclass(frozen=True)
class Numerics:
    d_res: int = 12
    d_bath: int = 6
    max_bond: int = 64
    cutoff: float = 1e-9
    krylov_tol: float = 1e-10
    tdvp_scheme: str = "auto"
    dmrg_sweeps: int = 20
    dmrg_tol: float = 1e-8
    dmrg_cutoff: float = 1e-12
    dense_cap: int = 20_000

    def layout(self, n_modes: int) -> SiteLayout:
        return SiteLayout(n_modes, self.d_res, self.d_bath)


@dataclass(frozen=True)
class RelaxationConfig:
    model: ModelParams
    bath: BathParams
    t_max: float = 20.0
    dt: float = 0.01
    sample_stride: int = 1
    engine: str = "mps"
    numerics: Numerics = field(default_factory=Numerics)

    def __post_init__(self):
        eps = self.model.epsilon
        if not 0 < eps <= 0.1 * self.model.delta:
            raise ConfigError(f"epsilon must satisfy 0 < epsilon <= 0.1*delta, got {eps}")
        if not self.t_max > 0 or not self.dt > 0:
            raise ConfigError("t_max and dt must be positive")
        if self.sample_stride < 1:
            raise ConfigError("sample_stride must be >= 1")
        if self.engine not in ENGINES:
            raise ConfigError(f"engine must be one of {ENGINES}, got {self.engine!r}")


@dataclass(frozen=True)
class QuenchConfig:
    model: ModelParams
    bath: BathParams
    g_f: float
    t_q: float
    dt: float = 0.01
    sample_times: tuple | None = None
    extra_times: tuple = ()
    n_samples: int = 20
    engine: str = "mps"
    numerics: Numerics = field(default_factory=Numerics)

    def __post_init__(self):
        if not self.g_f > 0 or not self.t_q > 0:
            raise ConfigError("g_f and t_q must be positive")
        if not self.dt > 0:
            raise ConfigError("dt must be positive")
        if self.engine not in ENGINES:
            raise ConfigError(f"engine must be one of {ENGINES}, got {self.engine!r}")

    def coupling(self, t):
        return self.g_f * np.asarray(t) / self.t_q

    def resolved_sample_times(self) -> np.ndarray:
        """Requested (or log-spaced) times merged with ``extra_times``; always starts at ``t = 0``."""
        if self.sample_times is not None:
            ts = list(self.sample_times)
        else:
            ts = list(np.geomspace(self.t_q * 1e-2, self.t_q, self.n_samples))
        ts = np.unique(np.concatenate([[0.0], ts, list(self.extra_times)]))
        if ts[0] < 0 or ts[-1] > self.t_q * (1 + 1e-12):
            raise ConfigError("sample times must lie in [0, t_q]")
        return ts


@dataclass
class TimeSeries:
    times: np.ndarray
    values: np.ndarray
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        if self.times.shape != self.values.shape:
            raise ValueError("times and values must have the same length")
        if np.any(np.diff(self.times) <= 0):
            raise ValueError("times must be strictly increasing")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("values must be finite")


@dataclass
class QuenchRecord:
    times: np.ndarray
    coupling: np.ndarray
    energy: np.ndarray
    gs_energy: np.ndarray
    e_r: np.ndarray
    p_exc: np.ndarray
    flagged: list = field(default_factory=list)
    metadata: dict = field(default_factory=dict)

    def check(self, tol: float = 1e-8):
        """Raise ``ProtocolError`` if the physical bounds are violated."""
        if np.any(self.e_r < -tol):
            raise ProtocolError(f"negative residual energy {self.e_r.min():.3e}")
        if np.any(self.p_exc < -tol) or np.any(self.p_exc > 1 + tol):
            raise ProtocolError("excitation probability outside [0, 1]")


@dataclass(frozen=True)
class FreezeOutSample:
    e_exc: float
    p_exc: float
    metadata: dict


# -- relaxation ---------------------------------------------------------------

def run_relaxation(cfg: RelaxationConfig) -> TimeSeries:
    """Prepare the ground state of ``H + eps sz``, then record ``<sz(t)>/<sz(0)>`` with ``eps`` switched off."""
    bath = discretize_star(cfg.bath)
    layout = cfg.numerics.layout(bath.n_modes)
    n_steps = int(round(cfg.t_max / cfg.dt))
    if n_steps < 1:
        raise ConfigError("t_max shorter than one time step")
    prep = cfg.model
    evolve = replace(cfg.model, epsilon=0.0)
    if cfg.engine == "ed":
        times, sz, meta = _relax_ed(prep, evolve, bath, layout, cfg, n_steps)
    else:
        times, sz, meta = _relax_mps(prep, evolve, bath, layout, cfg, n_steps)
    s0 = sz[0]
    if abs(s0) < 1e-12:
        raise ProtocolError("<sz(0)> vanishes; cannot normalize the relaxation function")
    values = np.array(sz) / s0
    values[0] = 1.0
    meta.update(sigma_z0=float(s0), engine=cfg.engine, n_steps=n_steps)
    return TimeSeries(np.array(times), values, meta)


def _relax_ed(prep, evolve, bath, layout, cfg, n_steps):
    num = cfg.numerics
    h0, h1 = build_dense_parts(prep, bath, layout, num.dense_cap)
    gs = ed_ground_state(h0 + prep.g * h1, num.dense_cap)
    sz_full = np.kron(SZ, np.eye(h0.shape[0] // 2))
    # dropping eps only changes the spin term
    h = h0 + prep.g * h1 - prep.epsilon * sz_full
    times, sz = [0.0], [gs.state.expect(sz_full)]
    counter = {"k": 0}

    def observe(t, state):
        counter["k"] += 1
        if counter["k"] % cfg.sample_stride == 0:
            times.append(t)
            sz.append(state.expect(sz_full))

    ed_evolve(h, gs.state, 0.0, n_steps * cfg.dt, cfg.dt, num.dense_cap, observer=observe)
    return times, sz, {"gs_energy": gs.energy, "gap": gs.gap}


def ground_state_mps(params, bath, layout, num: Numerics, psi0=None):
    """DMRG ground state; returns ``(energy, psi, info)``."""
    h = build_mpo(params, bath, layout)
    if psi0 is None:
        psi0 = initial_product_state(layout, num.max_bond, num.cutoff)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", DmrgConvergenceWarning)
        e, psi, info = dmrg_ground_state(h, psi0, sweeps=num.dmrg_sweeps, energy_tol=num.dmrg_tol,
                                         cutoff=num.dmrg_cutoff, return_info=True)
    for w in caught:
        logger.warning("%s", w.message)
    return e, psi, info


def _relax_mps(prep, evolve, bath, layout, cfg, n_steps):
    num = cfg.numerics
    e0, psi, info = ground_state_mps(prep, bath, layout, num)
    psi.cutoff = num.cutoff
    h = build_mpo(evolve, bath, layout)
    eng = TdvpEngine(psi, h, scheme=num.tdvp_scheme, krylov_tol=num.krylov_tol)
    times, sz = [0.0], [expect_local(eng.psi, SZ, 0)]
    for k in range(1, n_steps + 1):
        eng.step(cfg.dt)
        if k % cfg.sample_stride == 0:
            times.append(k * cfg.dt)
            sz.append(expect_local(eng.psi, SZ, 0))
    meta = {
        "gs_energy": e0,
        "dmrg_sweeps": len(info.sweep_energies),
        "dmrg_converged": info.converged,
        "max_bond": eng.stats.max_bond,
        "truncation_weight": eng.stats.truncation_weight + info.truncation_weight,
        "two_site_steps": eng.stats.two_site_steps,
        "one_site_steps": eng.stats.one_site_steps,
    }
    return times, sz, meta


# -- quench -------------------------------------------------------------------

def _time_grid(t_end, dt, samples):
    """Regular grid of spacing ``dt`` with ``samples`` inserted exactly."""
    regular = np.arange(0.0, t_end, dt)
    grid = np.unique(np.concatenate([regular, samples, [t_end]]))
    # drop regular points that sit within rounding of a sample time
    keep = np.concatenate([[True], np.diff(grid) > 1e-12 * max(1.0, t_end)])
    return grid[keep]


def run_quench(cfg: QuenchConfig) -> QuenchRecord:
    """Ramp ``g(t) = g_f t / t_q`` from the ``g = 0`` ground state.

    At every sample time the instantaneous ground state is recomputed to get
    ``E_r = <H(t)> - E_GS(t)`` and ``P_exc = 1 - |<psi|psi_GS>|^2``. The
    coupling is sampled at the midpoint of each step.
    """
    bath = discretize_star(cfg.bath)
    layout = cfg.numerics.layout(bath.n_modes)
    samples = cfg.resolved_sample_times()
    grid = _time_grid(cfg.t_q, cfg.dt, samples)
    start = with_coupling(cfg.model, 0.0)
    if cfg.engine == "ed":
        rows, meta = _quench_ed(cfg, start, bath, layout, grid, samples)
    else:
        rows, meta = _quench_mps(cfg, start, bath, layout, grid, samples)
    t, g, en, egs, pex, flags = zip(*rows)
    en, egs = np.array(en), np.array(egs)
    rec = QuenchRecord(np.array(t), np.array(g), en, egs, en - egs, np.array(pex),
                       [s for s, f in zip(t, flags) if f], meta)
    rec.metadata.update(engine=cfg.engine, g_f=cfg.g_f, t_q=cfg.t_q, dt=cfg.dt)
    return rec


def _is_sample(t, samples):
    return np.any(np.abs(samples - t) <= 1e-12 * max(1.0, abs(t)))


def _quench_ed(cfg, start, bath, layout, grid, samples):
    num = cfg.numerics
    h0, h1 = build_dense_parts(start, bath, layout, num.dense_cap)
    state = ed_ground_state(h0, num.dense_cap).state
    v = state.amplitudes
    rows = []
    for k, t in enumerate(grid):
        if k > 0:
            t_prev = grid[k - 1]
            g_mid = float(cfg.coupling(0.5 * (t_prev + t)))
            v = ed_evolve(h0 + g_mid * h1, DenseState(v), t_prev, t, t - t_prev, num.dense_cap).amplitudes
        if _is_sample(t, samples):
            g = float(cfg.coupling(t))
            h = h0 + g * h1
            gs = ed_ground_state(h, num.dense_cap)
            psi = DenseState(v)
            energy = psi.expect(h)
            p = 1.0 - abs(gs.state.overlap(psi)) ** 2
            rows.append((t, g, energy, gs.energy, p, False))
    return rows, {"hilbert_dim": int(h0.shape[0])}


def _quench_mps(cfg, start, bath, layout, grid, samples):
    num = cfg.numerics
    e0, psi, info = ground_state_mps(start, bath, layout, num)
    psi.cutoff = num.cutoff
    h = build_mpo(start, bath, layout)
    eng = TdvpEngine(psi, h, scheme=num.tdvp_scheme, krylov_tol=num.krylov_tol)
    rows = []
    gs_guess = psi
    for k, t in enumerate(grid):
        if k > 0:
            t_prev = grid[k - 1]
            g_mid = float(cfg.coupling(0.5 * (t_prev + t)))
            eng.step(t - t_prev, build_mpo(with_coupling(start, g_mid), bath, layout))
        if _is_sample(t, samples):
            g = float(cfg.coupling(t))
            params = with_coupling(start, g)
            h_t = build_mpo(params, bath, layout)
            if t == 0.0:
                egs, gs, ok = e0, psi, info.converged
            else:
                egs, gs, ginfo = ground_state_mps(params, bath, layout, num, psi0=gs_guess)
                ok = ginfo.converged
                gs_guess = gs
            energy = expect_mpo(eng.psi, h_t)
            p = 1.0 - abs(overlap(gs, eng.psi)) ** 2
            rows.append((t, g, energy, egs, p, not ok))
    meta = {"max_bond": eng.stats.max_bond, "truncation_weight": eng.stats.truncation_weight}
    return rows, meta


def evaluate_at_freeze_out(record: QuenchRecord, t_f: float) -> FreezeOutSample:
    """Residual energy (linear interpolation) and excitation probability (nearest sample) at ``t_f``."""
    t = record.times
    if not t[0] <= t_f <= t[-1]:
        raise RangeError(f"t_f={t_f} outside recorded range [{t[0]}, {t[-1]}]")
    e = float(np.interp(t_f, t, record.e_r))
    idx = int(np.argmin(np.abs(t - t_f)))
    meta = {"e_exc_method": "linear", "p_exc_method": "nearest", "p_exc_sample_time": float(t[idx])}
    return FreezeOutSample(e, float(record.p_exc[idx]), meta)


def config_dict(cfg) -> dict:
    return asdict(cfg)
