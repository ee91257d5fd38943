import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oqrm.bath import (
    BathParams,
    DiscretizedBath,
    counterterm_of,
    discretize_star,
    effective_density,
    low_frequency_slope,
    normal_modes,
    ohmic_density,
    quadratic_form,
)
from oqrm.errors import ConfigError, DomainError, StabilityError

REFERENCE = BathParams(alpha=0.2, omega_c=10.0, n_modes=60)


@pytest.mark.parametrize("omega, expected", [(0.0, 0.0), (1.0, 0.2), (10.5, 0.0)])
def test_ohmic_density_values(omega, expected):
    assert ohmic_density(omega, REFERENCE) == pytest.approx(expected, abs=1e-15)


def test_ohmic_density_rejects_negative_frequency():
    with pytest.raises(DomainError):
        ohmic_density(-0.1, REFERENCE)


def test_single_mode_discretization():
    bath = discretize_star(BathParams(0.2, 10.0, 1))
    assert bath.frequencies[0] == 5.0
    assert bath.couplings[0] == pytest.approx(math.sqrt(0.2 * 5 * 10 / math.pi), rel=1e-14)
    assert bath.couplings[0] == pytest.approx(1.784124, abs=1e-6)


def test_midpoint_grid():
    bath = discretize_star(BathParams(0.2, 10.0, 4))
    np.testing.assert_allclose(bath.frequencies, [1.25, 3.75, 6.25, 8.75])


def test_zero_modes_is_config_error():
    with pytest.raises(ConfigError):
        BathParams(n_modes=0)


@settings(max_examples=60, deadline=None)
@given(
    alpha=st.floats(0.01, 2.0),
    omega_c=st.floats(0.5, 50.0),
    n=st.integers(1, 400),
)
def test_sum_rule_property(alpha, omega_c, n):
    bath = discretize_star(BathParams(alpha, omega_c, n))
    lhs = math.pi * np.sum(bath.couplings**2)
    assert lhs == pytest.approx(alpha * omega_c**2 / 2, rel=1e-12)
    assert bath.counterterm == pytest.approx(counterterm_of(bath.frequencies, bath.couplings))
    assert np.all(np.diff(bath.frequencies) > 0)
    assert bath.frequencies[-1] < omega_c


def test_log_grid_keeps_sum_rule():
    bath = discretize_star(BathParams(0.2, 10.0, 40, grid="log"))
    assert math.pi * np.sum(bath.couplings**2) == pytest.approx(0.2 * 100 / 2, rel=1e-10)


def test_empty_bath_normal_modes():
    eff = normal_modes(0.75, 0.5, DiscretizedBath.empty())
    np.testing.assert_allclose(eff.normal_frequencies, [0.75])
    np.testing.assert_allclose(eff.spin_couplings, [0.5])


def test_vanishing_couplings_decouple():
    w = np.array([0.3, 1.1, 2.5])
    eff = normal_modes(0.75, 0.4, DiscretizedBath.from_modes(w, np.zeros(3)), alpha=0.0)
    np.testing.assert_allclose(np.sort(eff.normal_frequencies), np.sort(np.r_[0.75, w]), atol=1e-12)
    # only the resonator-like mode carries the spin coupling
    assert np.sum(eff.spin_couplings > 1e-12) == 1


@settings(max_examples=40, deadline=None)
@given(n=st.integers(1, 80), omega_0=st.floats(0.2, 3.0), alpha=st.floats(0.01, 1.0))
def test_counterterm_makes_form_positive(n, omega_0, alpha):
    bath = discretize_star(BathParams(alpha, 10.0, n))
    v = quadratic_form(omega_0, bath)
    assert np.allclose(v, v.T)
    # Schur complement of the bath block reproduces the bare resonator frequency
    vbb = v[1:, 1:]
    schur = v[0, 0] - v[0, 1:] @ np.linalg.solve(vbb, v[1:, 0])
    assert schur == pytest.approx(omega_0**2, rel=1e-9)
    assert np.linalg.eigvalsh(v).min() > 0


def test_missing_counterterm_is_unstable():
    bath = discretize_star(BathParams(2.0, 10.0, 30))
    unstable = DiscretizedBath(bath.frequencies, bath.couplings, 0.0)
    with pytest.raises(StabilityError):
        normal_modes(0.2, 0.5, unstable)


def test_alpha_eff_value():
    eff = normal_modes(0.75, 0.5, discretize_star(BathParams(0.2, 10.0, 50)))
    assert eff.alpha_eff == pytest.approx(4 * 0.25 * 0.2 / 0.5625, rel=1e-12)
    assert eff.alpha_eff == pytest.approx(0.3556, abs=1e-4)


def test_effective_density_shape():
    eff = normal_modes(0.75, 0.3, discretize_star(BathParams(0.2, 10.0, 200)))
    omega, j = effective_density(eff)
    assert omega.shape == j.shape
    assert np.all(j >= 0)
    assert np.all(np.diff(omega) > 0)


def test_slope_approaches_half_alpha_eff():
    errs = []
    for n in (200, 400):
        eff = normal_modes(0.75, 0.5, discretize_star(BathParams(0.2, 10.0, n)))
        errs.append(abs(low_frequency_slope(eff) / (eff.alpha_eff / 2) - 1))
    assert errs[-1] < 0.05
