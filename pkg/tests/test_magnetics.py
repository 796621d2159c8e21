import math

import pytest
from hypothesis import given, strategies as st

from disclination_qm import (
    Anharmonic,
    DomainError,
    InverseSquare,
    KinkPoint,
    QuantumNumbers,
    SystemConfig,
    energy,
)
from disclination_qm.magnetics import (
    MagneticReport,
    magnetic_report,
    magnetization_finite_T,
    magnetization_zero_T,
    persistent_current,
    persistent_current_finite_T,
    susceptibility_finite_T,
    susceptibility_zero_T,
)
from disclination_qm.thermo import ThermoInput, free_energy

WORKED = SystemConfig(alpha=0.75, B=1.0, phi=0.75)
POT = Anharmonic(1.0, 1.0)


def level(cfg, pot, qn):
    return energy(cfg, pot, qn).energy


def current_by_difference(cfg, pot, qn, h=1e-5):
    """-(e / 2 pi) dE/dphi by a central difference."""
    up = level(cfg.with_(phi=cfg.phi + h), pot, qn)
    down = level(cfg.with_(phi=cfg.phi - h), pot, qn)
    return -cfg.charge / (2 * math.pi) * (up - down) / (2 * h)


def magnetization_by_difference(cfg, pot, qn, h=1e-5):
    up = level(cfg.with_(B=cfg.B + h), pot, qn)
    down = level(cfg.with_(B=cfg.B - h), pot, qn)
    return -(up - down) / (2 * h)


configs = st.builds(
    lambda alpha, B, phi: SystemConfig(alpha=alpha, B=B, phi=phi),
    st.floats(0.2, 1.0), st.floats(0.1, 4.0), st.floats(-1.5, 1.5),
)
potentials = st.builds(Anharmonic, st.floats(0.1, 3.0), st.floats(0.0, 3.0))
levels = st.builds(QuantumNumbers, st.integers(0, 3), st.integers(-3, 3))


# --- persistent current -----------------------------------------------------------------


@given(configs, potentials, levels)
def test_literal_current_is_flux_derivative_above_the_kink(cfg, pot, qn):
    if qn.ell - cfg.phi < 0.05:
        return
    want = current_by_difference(cfg, pot, qn)
    assert persistent_current(cfg, pot, qn) == pytest.approx(want, rel=1e-6, abs=1e-8)


@given(configs, potentials, levels)
def test_exact_current_is_flux_derivative_on_both_sides(cfg, pot, qn):
    if abs(qn.ell - cfg.phi) < 0.05:
        return
    want = current_by_difference(cfg, pot, qn)
    assert persistent_current(cfg, pot, qn, literal=False) == pytest.approx(want, rel=1e-6, abs=1e-8)


def test_literal_current_below_the_kink_flips_sign():
    cfg, qn = WORKED.with_(phi=1.6), QuantumNumbers(0, 1)
    literal = persistent_current(cfg, POT, qn)
    exact = persistent_current(cfg, POT, qn, literal=False)
    assert literal == pytest.approx(-exact, rel=1e-15)
    assert exact == pytest.approx(current_by_difference(cfg, POT, qn), rel=1e-7)


def test_current_kink():
    with pytest.raises(KinkPoint):
        persistent_current(WORKED.with_(phi=1.0), POT, QuantumNumbers(0, 1))
    with pytest.raises(KinkPoint):
        persistent_current_finite_T(ThermoInput(1.0, WORKED.with_(phi=1.0), POT, 1))
    with pytest.raises(DomainError):
        persistent_current_finite_T(ThermoInput(1.0, WORKED.with_(phi=1.0 - 1e-4), POT, 1))


@pytest.mark.parametrize("alpha, ell, phi", [(0.5, 2, 0.3), (0.9, 0, -0.4), (1.0, 1, 0.0)])
def test_pure_oscillator_current(alpha, ell, phi):
    cfg = SystemConfig(alpha=alpha, phi=phi)
    qn = QuantumNumbers(1, ell)
    p_omega0 = math.sqrt(2 * 1.3)
    # without the inverse-square term j = |ell - phi| / alpha
    assert persistent_current(cfg, Anharmonic(1.3, 0.0), qn) == pytest.approx(
        p_omega0 / (2 * math.pi * alpha), rel=1e-14)


def test_pure_oscillator_current_with_field():
    cfg, pot, qn = SystemConfig(alpha=0.5, B=2.0, phi=0.25), Anharmonic(1.0, 0.0), QuantumNumbers(0, 2)
    omega_c = cfg.omega_c
    omega0 = math.sqrt(2 * 1.0 + omega_c ** 2 / 0.25)
    want = omega_c / (2 * math.pi * 0.25) + omega0 / (2 * math.pi * 0.5)
    assert persistent_current(cfg, pot, qn) == pytest.approx(want, rel=1e-14)


@pytest.mark.parametrize("beta", [0.1, 1.0, 10.0])
@pytest.mark.parametrize("cfg, ell", [(WORKED, 1), (SystemConfig(alpha=0.4, B=2.5, phi=-0.6), -2)])
def test_current_is_temperature_independent(beta, cfg, ell):
    inp = ThermoInput(beta, cfg, POT, ell)
    zero_t = persistent_current(cfg, POT, QuantumNumbers(0, ell), literal=False)
    assert persistent_current_finite_T(inp) == pytest.approx(zero_t, abs=1e-10)


@given(st.floats(0.2, 1.0), st.floats(0.1, 3.0), st.floats(0.05, 0.95))
def test_current_magnitude_symmetric_about_kink(alpha, B, offset):
    above = SystemConfig(alpha=alpha, B=B, phi=1.0 - offset)
    below = SystemConfig(alpha=alpha, B=B, phi=1.0 + offset)
    qn = QuantumNumbers(0, 1)
    assert abs(persistent_current(above, POT, qn)) == pytest.approx(abs(persistent_current(below, POT, qn)),
                                                                   rel=1e-13)


# --- magnetization -------------------------------------------------------------------------


@given(configs, potentials, levels)
def test_magnetization_is_field_derivative(cfg, pot, qn):
    want = magnetization_by_difference(cfg, pot, qn)
    assert magnetization_zero_T(cfg, pot, qn) == pytest.approx(want, rel=1e-6, abs=1e-8)


def test_magnetization_special_points():
    qn = QuantumNumbers(0, 1)
    at_zero_field = magnetization_zero_T(WORKED.with_(B=0.0), POT, qn)
    assert at_zero_field == pytest.approx(-0.25 / (2 * 0.75 ** 2), rel=1e-14)
    # no orbital term when the flux sits on ell
    on_kink = magnetization_zero_T(WORKED.with_(phi=1.0), POT, qn)
    assert on_kink < 0
    assert on_kink == pytest.approx(magnetization_by_difference(WORKED.with_(phi=1.0), POT, qn), rel=1e-7)


@pytest.mark.parametrize("cfg, ell", [(WORKED, 1), (SystemConfig(alpha=0.5, B=2.0, phi=0.3), -1)])
def test_finite_temperature_magnetization_tends_to_ground_state(cfg, ell):
    inp = ThermoInput(60.0, cfg, POT, ell)
    assert magnetization_finite_T(inp) == pytest.approx(
        magnetization_zero_T(cfg, POT, QuantumNumbers(0, ell)), rel=1e-12)


@pytest.mark.parametrize("beta", [0.2, 1.0, 5.0])
def test_finite_temperature_magnetization_is_free_energy_derivative(beta):
    h = 1e-5

    def f(B):
        return free_energy(ThermoInput(beta, WORKED.with_(B=B), POT, 1))

    want = -(f(1.0 + h) - f(1.0 - h)) / (2 * h)
    assert magnetization_finite_T(ThermoInput(beta, WORKED, POT, 1)) == pytest.approx(want, rel=1e-7)


# --- susceptibility -------------------------------------------------------------------------


@given(configs, levels)
def test_no_susceptibility_without_oscillator(cfg, qn):
    assert susceptibility_zero_T(cfg, InverseSquare(1.0), qn) == 0.0


@given(configs, potentials, levels)
def test_susceptibility_is_magnetization_derivative(cfg, pot, qn):
    h = 1e-5
    up = magnetization_zero_T(cfg.with_(B=cfg.B + h), pot, qn)
    down = magnetization_zero_T(cfg.with_(B=cfg.B - h), pot, qn)
    chi = susceptibility_zero_T(cfg, pot, qn)
    assert chi == pytest.approx((up - down) / (2 * h), rel=1e-5, abs=1e-9)
    assert chi < 0


@pytest.mark.parametrize("beta", [0.1, 0.7, 3.0, 20.0])
@pytest.mark.parametrize("cfg, ell", [(WORKED, 1), (SystemConfig(alpha=0.4, B=2.5, phi=-0.6), -2),
                                     (SystemConfig(alpha=0.8, B=0.0, phi=0.2), 0)])
def test_finite_temperature_susceptibility_analytic_vs_difference(beta, cfg, ell):
    inp = ThermoInput(beta, cfg, POT, ell)
    analytic = susceptibility_finite_T(inp)
    numeric = susceptibility_finite_T(inp, method="finite_difference")
    assert analytic == pytest.approx(numeric, rel=1e-6, abs=1e-9)
    if beta >= 3.0:
        # diamagnetic once the ground state dominates
        assert analytic < 0


def test_finite_temperature_susceptibility_limits():
    cold = ThermoInput(60.0, WORKED, POT, 1)
    assert susceptibility_finite_T(cold) == pytest.approx(susceptibility_zero_T(WORKED, POT, QuantumNumbers(0, 1)),
                                                          rel=1e-12)
    # at vanishing field only the 1/omega0 factor varies
    weak = ThermoInput(0.8, WORKED.with_(B=0.0), POT, 1)
    p = weak.params
    k = 1.0 / (4.0 * 0.75 ** 2)
    want = -k * (2.0 * p.a / p.omega0 ** 3) * (p.j + 1.0 / math.tanh(weak.x))
    assert susceptibility_finite_T(weak) == pytest.approx(want, rel=1e-14)


def test_susceptibility_method_validation():
    with pytest.raises(DomainError):
        susceptibility_finite_T(ThermoInput(1.0, WORKED, POT, 1), method="spline")


# --- report ----------------------------------------------------------------------------------


def test_report_zero_and_finite_temperature():
    qn = QuantumNumbers(0, 1)
    zero = magnetic_report(WORKED, POT, qn)
    assert isinstance(zero, MagneticReport) and zero.temperature_tag == "zero"
    assert zero.magnetization == magnetization_zero_T(WORKED, POT, qn)
    warm = magnetic_report(WORKED, POT, qn, beta=0.5)
    assert warm.temperature_tag == "finite(beta=0.5)"
    assert warm.persistent_current == zero.persistent_current
    assert warm.magnetization != zero.magnetization


def test_report_rejects_non_finite():
    with pytest.raises(DomainError):
        MagneticReport(float("nan"), 0.0, 0.0, "zero")
