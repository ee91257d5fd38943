import numpy as np
import pytest

from oqrm.bath import BathParams, discretize_star
from oqrm.errors import ConfigError, ProtocolError, RangeError
from oqrm.model import ModelParams, build_dense_parts
from oqrm.oracle import ed_ground_state
from oqrm.protocols import (
    Numerics,
    QuenchConfig,
    QuenchRecord,
    RelaxationConfig,
    TimeSeries,
    evaluate_at_freeze_out,
    run_quench,
    run_relaxation,
)

SMALL = Numerics(d_res=5, d_bath=3, max_bond=24, cutoff=1e-12, dmrg_tol=1e-12)
BATH2 = BathParams(0.2, 10.0, 2)


def test_relaxation_config_validation():
    with pytest.raises(ConfigError):
        RelaxationConfig(ModelParams(epsilon=0.0), BATH2)
    with pytest.raises(ConfigError):
        RelaxationConfig(ModelParams(epsilon=0.5), BATH2)
    with pytest.raises(ConfigError):
        RelaxationConfig(ModelParams(epsilon=0.01), BATH2, engine="qmc")


def test_relaxation_ed_normalized():
    cfg = RelaxationConfig(ModelParams(g=0.4, epsilon=0.01), BATH2, t_max=3.0, dt=0.05, engine="ed",
                           numerics=SMALL)
    ts = run_relaxation(cfg)
    assert ts.values[0] == 1.0
    assert ts.times[-1] == pytest.approx(3.0)
    assert np.all(np.abs(ts.values) <= 1.0 + 1e-9)
    assert ts.metadata["engine"] == "ed"


def test_relaxation_stride():
    cfg = RelaxationConfig(ModelParams(g=0.4, epsilon=0.01), BATH2, t_max=1.0, dt=0.05, sample_stride=4,
                           engine="ed", numerics=SMALL)
    ts = run_relaxation(cfg)
    np.testing.assert_allclose(np.diff(ts.times), 0.2)


def test_relaxation_mps_matches_ed():
    base = dict(model=ModelParams(g=0.5, epsilon=0.02), bath=BATH2, t_max=4.0, dt=0.05, numerics=SMALL)
    ed = run_relaxation(RelaxationConfig(engine="ed", **base))
    mps = run_relaxation(RelaxationConfig(engine="mps", **base))
    np.testing.assert_allclose(mps.times, ed.times)
    assert np.max(np.abs(mps.values - ed.values)) < 1e-3
    assert mps.metadata["max_bond"] <= SMALL.max_bond


def test_relaxation_vanishing_polarization(monkeypatch):
    import oqrm.protocols as protocols

    monkeypatch.setattr(protocols, "_relax_ed", lambda *a: ([0.0, 0.1], [0.0, 0.0], {}))
    cfg = RelaxationConfig(ModelParams(g=0.4, epsilon=0.01), BATH2, t_max=0.1, dt=0.1, engine="ed",
                           numerics=SMALL)
    with pytest.raises(ProtocolError):
        run_relaxation(cfg)


def test_time_series_validation():
    with pytest.raises(ValueError):
        TimeSeries([0, 1], [1.0])
    with pytest.raises(ValueError):
        TimeSeries([0, 0], [1.0, 1.0])


# -- quench ----------------------------------------------------------------------------

def quench(t_q, engine="ed", **kw):
    kw.setdefault("dt", 0.05)
    cfg = QuenchConfig(ModelParams(), BATH2, g_f=0.5, t_q=t_q, engine=engine, numerics=SMALL, **kw)
    return run_quench(cfg)


def test_quench_starts_in_ground_state():
    rec = quench(5.0, n_samples=6)
    assert rec.times[0] == 0.0
    assert rec.p_exc[0] == pytest.approx(0.0, abs=1e-12)
    assert rec.e_r[0] == pytest.approx(0.0, abs=1e-12)
    rec.check()
    np.testing.assert_allclose(rec.coupling, 0.5 * rec.times / 5.0)


def test_sudden_quench_equals_static_mismatch():
    t_q = 1e-6
    rec = quench(t_q, dt=t_q, sample_times=(t_q,))
    bath = discretize_star(BATH2)
    h0, h1 = build_dense_parts(ModelParams(), bath, SMALL.layout(2))
    psi0 = ed_ground_state(h0).state
    hf = h0 + 0.5 * h1
    expected = psi0.expect(hf) - ed_ground_state(hf).energy
    assert rec.e_r[-1] == pytest.approx(expected, abs=1e-10)


def test_slow_quench_is_adiabatic():
    e_r = [quench(t, dt=0.1, sample_times=(t,)).e_r[-1] for t in (1.0, 10.0, 100.0)]
    assert e_r[0] > e_r[1] > e_r[2] >= 0


def test_quench_mps_matches_ed():
    ed = quench(4.0, n_samples=5)
    mps = quench(4.0, engine="mps", n_samples=5)
    np.testing.assert_allclose(mps.times, ed.times)
    np.testing.assert_allclose(mps.gs_energy, ed.gs_energy, atol=1e-8)
    np.testing.assert_allclose(mps.e_r, ed.e_r, atol=1e-6)
    np.testing.assert_allclose(mps.p_exc, ed.p_exc, atol=1e-6)
    assert mps.flagged == []


def test_sample_times_hit_exactly():
    rec = quench(3.0, sample_times=(0.123, 1.7), extra_times=(2.2222,))
    np.testing.assert_array_equal(rec.times, [0.0, 0.123, 1.7, 2.2222])


# -- freeze-out evaluation -------------------------------------------------------------------

def synthetic_record():
    t = np.array([0.0, 1.0, 2.0, 4.0])
    e_r = np.array([0.0, 0.1, 0.3, 0.35])
    p = np.array([0.0, 0.05, 0.2, 0.25])
    return QuenchRecord(t, t / 4, -1 + e_r, -1 + 0 * t, e_r, p)


def test_freeze_out_at_sample_is_exact():
    s = evaluate_at_freeze_out(synthetic_record(), 2.0)
    assert s.e_exc == 0.3 and s.p_exc == 0.2


def test_freeze_out_between_samples_is_bracketed():
    s = evaluate_at_freeze_out(synthetic_record(), 1.5)
    assert 0.1 <= s.e_exc <= 0.3
    assert s.e_exc == pytest.approx(0.2)


def test_freeze_out_out_of_range():
    with pytest.raises(RangeError):
        evaluate_at_freeze_out(synthetic_record(), 4.5)


def test_freeze_out_matches_rerun_with_exact_sample():
    t_f = 2.37
    coarse = quench(4.0, dt=0.01, sample_times=tuple(np.linspace(0.5, 4.0, 8)))
    exact = quench(4.0, dt=0.01, sample_times=(t_f,))
    interp = evaluate_at_freeze_out(coarse, t_f)
    direct = evaluate_at_freeze_out(exact, t_f)
    assert direct.metadata["p_exc_sample_time"] == pytest.approx(t_f)
    # sample spacing is 0.5, so the interpolant only needs to be close
    assert interp.e_exc == pytest.approx(direct.e_exc, rel=0.1)


def test_record_check_flags_unphysical_values():
    rec = synthetic_record()
    rec.e_r = rec.e_r - 1.0
    with pytest.raises(ProtocolError):
        rec.check()


def test_quench_config_validation():
    with pytest.raises(ConfigError):
        QuenchConfig(ModelParams(), BATH2, g_f=0.0, t_q=1.0)
    with pytest.raises(ConfigError):
        QuenchConfig(ModelParams(), BATH2, g_f=1.0, t_q=1.0, sample_times=(2.0,)).resolved_sample_times()
