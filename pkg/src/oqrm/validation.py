"""ED-versus-MPS equivalence checks on small random instances."""
from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from .bath import DiscretizedBath
from .model import SZ, ModelParams, SiteLayout, build_dense, build_mpo, initial_product_state
from .oracle import ed_evolve, ed_ground_state
from .tnet import TdvpEngine, dmrg_ground_state, expect_local

GS_RTOL = 1e-8
SZ_ATOL = 1e-3


@dataclass
class EquivalenceCase:
    n_modes: int
    d_res: int
    d_bath: int
    g: float
    gs_energy_ed: float
    gs_energy_mps: float
    gs_rel_err: float
    sz_max_err: float
    t_max: float
    max_bond: int

    @property
    def passed(self) -> bool:
        return self.gs_rel_err < GS_RTOL and self.sz_max_err < SZ_ATOL

    def as_dict(self):
        return {**asdict(self), "passed": self.passed}


def random_bath(n_modes: int, rng: np.random.Generator) -> DiscretizedBath:
    """Random star bath: sorted frequencies in (0.2, 3), couplings in (0.05, 0.4)."""
    w = np.sort(rng.uniform(0.2, 3.0, n_modes))
    lam = rng.uniform(0.05, 0.4, n_modes)
    return DiscretizedBath.from_modes(w, lam)


def equivalence_case(n_modes, d_res, d_bath, g, rng, epsilon=0.05, t_max=10.0, dt=0.05,
                     max_bond=32, omega_0=0.75) -> EquivalenceCase:
    """Compare DMRG vs ED ground energy and TDVP vs ED ``<sz(t)>`` after removing ``epsilon``."""
    bath = random_bath(n_modes, rng)
    layout = SiteLayout(n_modes, d_res, d_bath)
    prep = ModelParams(omega_0=omega_0, g=g, epsilon=epsilon)
    evolve = ModelParams(omega_0=omega_0, g=g)

    h_prep = build_dense(prep, bath, layout)
    h = build_dense(evolve, bath, layout)
    gs_ed = ed_ground_state(h_prep)

    psi0 = initial_product_state(layout, max_bond=max_bond, cutoff=1e-12)
    e_mps, psi = dmrg_ground_state(build_mpo(prep, bath, layout), psi0, sweeps=30, energy_tol=1e-12,
                                   cutoff=1e-14)
    rel = abs(e_mps - gs_ed.energy) / abs(gs_ed.energy)

    sz_full = np.kron(SZ, np.eye(h.shape[0] // 2))
    eng = TdvpEngine(psi, build_mpo(evolve, bath, layout), krylov_tol=1e-12)
    eng.psi.cutoff = 1e-12
    n_steps = int(round(t_max / dt))
    sz_ed = []
    ed_evolve(h, gs_ed.state, 0.0, n_steps * dt, dt, observer=lambda t, s: sz_ed.append(s.expect(sz_full)))
    err = 0.0
    for k in range(n_steps):
        eng.step(dt)
        err = max(err, abs(expect_local(eng.psi, SZ, 0) - sz_ed[k]))
    return EquivalenceCase(n_modes, d_res, d_bath, g, gs_ed.energy, e_mps, rel, err, t_max,
                           eng.stats.max_bond)


def equivalence_suite(seed: int = 7, t_max: float = 10.0, dt: float = 0.05):
    """One to three random bath modes at small local dimensions (``d_res <= 6``, ``d_bath <= 4``)."""
    rng = np.random.default_rng(seed)
    specs = [(1, 6, 4, 0.6), (2, 6, 4, 0.5), (3, 5, 3, 0.7), (3, 6, 4, 0.4)]
    return [equivalence_case(n, dr, db, g, rng, t_max=t_max, dt=dt) for n, dr, db, g in specs]
