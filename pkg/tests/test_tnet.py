import warnings

import numpy as np
import pytest
import scipy.linalg as la
from hypothesis import given, settings
from hypothesis import strategies as st

from oqrm.bath import BathParams, DiscretizedBath, discretize_star
from oqrm.errors import ConfigError, StepError
from oqrm.model import SX, SZ, ModelParams, SiteLayout, build_dense, build_mpo, initial_product_state
from oqrm.oracle import ed_evolve, ed_ground_state
from oqrm.tnet import (
    DmrgConvergenceWarning,
    MpsState,
    TdvpEngine,
    dmrg_ground_state,
    expect_local,
    expect_mpo,
    load_mps,
    overlap,
    save_mps,
    tdvp_step,
    truncated_svd,
)
from oqrm.tnet.krylov import expm_krylov, lowest_eigenpair


def random_mps(dims, chi, rng, complex_=True):
    bonds = [1] + [min(chi, int(np.prod(dims[:i + 1])), int(np.prod(dims[i + 1:]))) for i in range(len(dims) - 1)] + [1]
    tensors = []
    for i, d in enumerate(dims):
        a = rng.normal(size=(bonds[i], d, bonds[i + 1]))
        if complex_:
            a = a + 1j * rng.normal(size=a.shape)
        tensors.append(a)
    psi = MpsState(tensors, 0, max_bond=chi, cutoff=0.0)
    return psi.canonicalize(0).normalize()


def small_instance(n=2, d_res=6, d_bath=4, g=0.5, eps=0.0):
    bath = discretize_star(BathParams(0.2, 10.0, n))
    lay = SiteLayout(n, d_res, d_bath)
    p = ModelParams(g=g, epsilon=eps)
    return p, bath, lay


# -- state algebra -----------------------------------------------------------------

def test_overlap_basics():
    lay = SiteLayout(1, 4, 3)
    plus = initial_product_state(lay)
    assert overlap(plus, plus) == pytest.approx(1.0, abs=1e-14)
    up = initial_product_state(lay, spin=[1.0, 0.0])
    down = initial_product_state(lay, spin=[0.0, 1.0])
    assert abs(overlap(up, down)) < 1e-15


@settings(max_examples=20, deadline=None)
@given(seed=st.integers(0, 2**16), n=st.integers(1, 4), chi=st.integers(1, 6))
def test_overlap_matches_dense(seed, n, chi):
    rng = np.random.default_rng(seed)
    dims = list(rng.integers(2, 4, size=n))
    a, b = random_mps(dims, chi, rng), random_mps(dims, chi, rng)
    assert overlap(a, b) == pytest.approx(np.vdot(a.to_dense(), b.to_dense()), abs=1e-12)


def test_overlap_shape_mismatch():
    rng = np.random.default_rng(0)
    with pytest.raises(ConfigError):
        overlap(random_mps([2, 3], 2, rng), random_mps([2, 2], 2, rng))


def test_expect_local_on_plus_x():
    psi = initial_product_state(SiteLayout(2, 4, 3))
    assert expect_local(psi, SZ, 0) == pytest.approx(0.0, abs=1e-15)
    assert expect_local(psi, SX, 0) == pytest.approx(1.0, abs=1e-15)
    with pytest.raises(IndexError):
        expect_local(psi, SZ, 9)
    with pytest.raises(ConfigError):
        expect_local(psi, np.eye(3), 0)


def test_expect_local_matches_dense():
    rng = np.random.default_rng(3)
    dims = [2, 3, 2, 3]
    psi = random_mps(dims, 4, rng)
    v = psi.to_dense()
    op = rng.normal(size=(3, 3))
    op = op + op.T
    full = np.kron(np.kron(np.eye(2), op), np.eye(6))
    assert expect_local(psi, op, 1) == pytest.approx(np.vdot(v, full @ v).real, abs=1e-12)


def test_expect_mpo_dense_and_gauge_invariance():
    p, bath, lay = small_instance(n=2, d_res=4, d_bath=3, g=0.6, eps=0.03)
    h = build_mpo(p, bath, lay)
    hd = build_dense(p, bath, lay)
    rng = np.random.default_rng(11)
    psi = random_mps(lay.dims, 8, rng)
    v = psi.to_dense()
    e = expect_mpo(psi, h)
    assert e == pytest.approx(np.vdot(v, hd @ v).real, abs=1e-10)
    for c in range(len(psi)):
        assert expect_mpo(psi.copy().move_center(c), h) == pytest.approx(e, abs=1e-12)
    assert max(psi.orthonormality_errors()) < 1e-12


def test_vacuum_energy():
    lay = SiteLayout(3, 4, 3)
    bath = discretize_star(BathParams(0.2, 10.0, 3))
    psi = initial_product_state(lay)
    # the counterterm still contributes c/2 <0|x^2|0> = c/2 in the vacuum
    e = expect_mpo(psi, build_mpo(ModelParams(g=0.0), bath, lay))
    assert e == pytest.approx(-0.5 + 0.5 * bath.counterterm, abs=1e-12)
    e_free = expect_mpo(initial_product_state(SiteLayout(0, 4)), build_mpo(ModelParams(), DiscretizedBath.empty(),
                                                                          SiteLayout(0, 4)))
    assert e_free == pytest.approx(-0.5, abs=1e-14)


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 2**16), m=st.integers(2, 12), n=st.integers(2, 12), chi=st.integers(1, 12),
       cutoff=st.sampled_from([0.0, 1e-6, 1e-2]))
def test_truncated_svd_properties(seed, m, n, chi, cutoff):
    rng = np.random.default_rng(seed)
    theta = rng.normal(size=(m, n))
    u, s, vh, discarded = truncated_svd(theta, chi, cutoff)
    k = s.size
    assert 1 <= k <= min(chi, m, n)
    assert np.linalg.norm(s) == pytest.approx(1.0, rel=1e-12)
    np.testing.assert_allclose(u.conj().T @ u, np.eye(k), atol=1e-12)
    full = la.svdvals(theta)
    assert discarded == pytest.approx(np.sum(full[k:] ** 2) / np.sum(full**2), abs=1e-12)
    assert discarded <= max(cutoff, 0.0) or k == min(chi, m, n)


def test_checkpoint_round_trip(tmp_path):
    rng = np.random.default_rng(5)
    for cplx in (False, True):
        psi = random_mps([2, 4, 3, 3], 5, rng, complex_=cplx).move_center(2)
        psi.max_bond, psi.cutoff = 17, 1e-11
        path = tmp_path / f"state_{cplx}.mps"
        save_mps(psi, path)
        back = load_mps(path)
        assert back.center == 2 and back.max_bond == 17 and back.cutoff == 1e-11
        assert back.dims == psi.dims and back.bond_dims == psi.bond_dims
        for a, b in zip(psi.tensors, back.tensors):
            assert a.dtype == b.dtype
            np.testing.assert_array_equal(a, b)


def test_checkpoint_rejects_garbage(tmp_path):
    path = tmp_path / "bad.mps"
    path.write_bytes(b"not a state file at all, definitely not" * 2)
    with pytest.raises(ValueError):
        load_mps(path)


# -- Krylov kernels -------------------------------------------------------------------

@pytest.mark.parametrize("n", [8, 60])
def test_expm_krylov_matches_expm(n):
    rng = np.random.default_rng(n)
    a = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    h = (a + a.conj().T) / 2
    v = rng.normal(size=n) + 0j
    for tau in (-0.1j, -0.5j):
        ref = la.expm(tau * h) @ v
        out = expm_krylov(lambda x: h @ x, v, tau, tol=1e-12)
        np.testing.assert_allclose(out, ref, atol=1e-9)


@pytest.mark.parametrize("n", [10, 80])
def test_lowest_eigenpair(n):
    rng = np.random.default_rng(n)
    a = rng.normal(size=(n, n))
    h = (a + a.T) / 2
    e, v = lowest_eigenpair(lambda x: h @ x, rng.normal(size=n), tol=1e-12)
    assert e == pytest.approx(np.linalg.eigvalsh(h)[0], abs=1e-10)
    assert np.linalg.norm(h @ v - e * v) < 1e-8


# -- DMRG ------------------------------------------------------------------------------

def test_dmrg_decoupled_exact():
    lay = SiteLayout(0, 6)
    e, psi = dmrg_ground_state(build_mpo(ModelParams(), DiscretizedBath.empty(), lay), initial_product_state(lay))
    assert e == pytest.approx(-0.5, abs=1e-10)


def test_dmrg_matches_ed_small_instance():
    p, bath, lay = small_instance(n=2, d_res=6, d_bath=4, g=0.5)
    e_ed = ed_ground_state(build_dense(p, bath, lay)).energy
    e, psi = dmrg_ground_state(build_mpo(p, bath, lay), initial_product_state(lay, 32, 1e-12), cutoff=1e-14)
    assert abs(e - e_ed) / abs(e_ed) < 1e-8
    assert e >= e_ed - 1e-12
    assert psi.norm() == pytest.approx(1.0, abs=1e-12)


@settings(max_examples=8, deadline=None)
@given(seed=st.integers(0, 2**16), n=st.integers(1, 3), g=st.floats(0.0, 1.2))
def test_dmrg_variational_bound(seed, n, g):
    from oqrm.validation import random_bath

    bath = random_bath(n, np.random.default_rng(seed))
    lay = SiteLayout(n, 4, 3)
    p = ModelParams(g=g, epsilon=0.02)
    e_ed = ed_ground_state(build_dense(p, bath, lay)).energy
    e, _ = dmrg_ground_state(build_mpo(p, bath, lay), initial_product_state(lay, 24, 1e-12), cutoff=1e-14)
    assert e >= e_ed - 1e-12
    assert abs(e - e_ed) < 1e-8 * max(1.0, abs(e_ed))


def test_dmrg_non_convergence_warns():
    p, bath, lay = small_instance(n=3, d_res=6, d_bath=4, g=0.8)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        e, psi, info = dmrg_ground_state(build_mpo(p, bath, lay), initial_product_state(lay, 2, 0.0), sweeps=1,
                                         energy_tol=0.0, return_info=True)
    assert any(issubclass(w.category, DmrgConvergenceWarning) for w in caught)
    assert not info.converged
    assert np.isfinite(info.last_delta) or len(info.sweep_energies) == 1


# -- TDVP --------------------------------------------------------------------------------

def test_tdvp_small_dt_is_near_identity():
    p, bath, lay = small_instance(n=2, d_res=4, d_bath=3, g=0.5)
    h = build_mpo(p, bath, lay)
    psi = initial_product_state(lay, 16, 1e-12)
    for dt in (1e-3, 1e-4):
        out = tdvp_step(psi, h, dt)
        infid = 1 - abs(overlap(psi, out))
        # the change is first order in dt, so the infidelity is second order
        assert infid < 10 * dt**2


def test_tdvp_matches_ed_short_run():
    p, bath, lay = small_instance(n=2, d_res=5, d_bath=3, g=0.6)
    prep = ModelParams(g=0.6, epsilon=0.05)
    e, psi = dmrg_ground_state(build_mpo(prep, bath, lay), initial_product_state(lay, 32, 1e-12), cutoff=1e-14)
    h = build_mpo(p, bath, lay)
    hd = build_dense(p, bath, lay)
    gs = ed_ground_state(build_dense(prep, bath, lay))
    sz = np.kron(SZ, np.eye(hd.shape[0] // 2))
    dt, n_steps = 0.05, 60
    ref = []
    ed_evolve(hd, gs.state, 0.0, n_steps * dt, dt, observer=lambda t, s: ref.append(s.expect(sz)))
    eng = TdvpEngine(psi, h, krylov_tol=1e-12)
    for k in range(n_steps):
        eng.step(dt)
        assert expect_local(eng.psi, SZ, 0) == pytest.approx(ref[k], abs=1e-3)
    assert eng.time == pytest.approx(n_steps * dt)


def test_tdvp_conserves_norm_and_energy():
    p, bath, lay = small_instance(n=3, d_res=5, d_bath=3, g=0.5)
    h = build_mpo(p, bath, lay)
    eng = TdvpEngine(initial_product_state(lay, 16, 1e-10), h)
    e0 = expect_mpo(eng.psi, h)
    for _ in range(100):
        eng.step(0.05)
    assert abs(eng.psi.norm() - 1) < 1e-6
    assert abs(expect_mpo(eng.psi, h) - e0) < 1e-6


def test_tdvp_step_error_carries_site():
    # local problems must exceed the dense fast path so the Lanczos loop runs
    p, bath, lay = small_instance(n=2, d_res=12, d_bath=6, g=0.5)
    psi = random_mps(lay.dims, 4, np.random.default_rng(2))
    eng = TdvpEngine(psi, build_mpo(p, bath, lay), scheme="one", krylov_tol=1e-300, max_krylov=2)
    with pytest.raises(StepError) as info:
        eng.step(5.0)
    assert 0 <= info.value.site < len(lay.dims)


def test_tdvp_rejects_bad_scheme():
    p, bath, lay = small_instance(n=1, d_res=4, d_bath=3)
    with pytest.raises(ConfigError):
        TdvpEngine(initial_product_state(lay), build_mpo(p, bath, lay), scheme="three")


# -- convergence under doubling of the truncation knobs ---------------------------------------

def test_bond_dimension_doubling_converges():
    bath = discretize_star(BathParams(0.2, 10.0, 8))
    lay = SiteLayout(8, 8, 4)
    h = build_mpo(ModelParams(g=0.6), bath, lay)
    energies = [dmrg_ground_state(h, initial_product_state(lay, chi, 0.0), cutoff=0.0)[0] for chi in (4, 8, 16, 32)]
    steps = np.abs(np.diff(energies))
    assert np.all(np.diff(energies) <= 1e-12)
    assert np.all(steps[1:] < steps[:-1])
    assert steps[-1] < 1e-6


@pytest.mark.parametrize("which", ["d_res", "d_bath"])
def test_local_dimension_doubling_converges(which):
    bath = discretize_star(BathParams(0.2, 10.0, 1))
    energies = []
    for d in (3, 6, 12):
        dims = {"d_res": 8, "d_bath": 8, which: d}
        lay = SiteLayout(1, dims["d_res"], dims["d_bath"])
        energies.append(ed_ground_state(build_dense(ModelParams(g=0.5), bath, lay)).energy)
    steps = np.abs(np.diff(energies))
    assert steps[1] < 0.1 * steps[0]
