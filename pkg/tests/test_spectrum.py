import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

import oracles
from disclination_qm import (
    Anharmonic,
    CaseDNeedsField,
    DegenerateConfinement,
    DomainError,
    Harmonic,
    InverseSquare,
    Pseudoharmonic,
    QuantumNumbers,
    ShiftedPseudoharmonic,
    SystemConfig,
    effective_potential,
    energy,
    energy_alpha_derivative,
    energy_general,
    landau_limit,
    wavefunction,
)
from disclination_qm.specialfn import integrate_semiline

WORKED = SystemConfig(alpha=0.75, B=1.0, phi=0.75)

alphas = st.floats(0.2, 1.0)
fields = st.floats(0.0, 3.0)
fluxes = st.floats(-1.0, 1.0)
strengths = st.floats(0.25, 3.0)
ells = st.integers(-2, 2)


def _overlap(sa, sb, alpha):
    scale = max(sa.length_scale(), sb.length_scale())
    return integrate_semiline(lambda r: sa(r) * sb(r) * alpha * r, tol=1e-12, scale=scale).value


# --- energies -----------------------------------------------------------------------------


def test_flat_oscillator_ground_state():
    assert energy(SystemConfig(), Harmonic(1.0), QuantumNumbers(0, 0)).energy == 1.0


def test_worked_point_energy_matches_reference():
    got = energy(WORKED, Anharmonic(1, 1, 0), QuantumNumbers(0, 1))
    want = oracles.energy(0.75, 1, 0.75, 0, 1, 1, 1)
    assert got.case_tag == "general"
    assert got.energy == pytest.approx(float(want), rel=1e-14)
    # Q and the oscillator factor of the worked point
    assert got.energy == pytest.approx(0.222222222 + 1.563472 * (1.452966 + 1), abs=5e-6)


@given(alphas, fields, strengths, ells)
def test_flux_cancellation_gives_omega0(alpha, B, a, ell):
    cfg = SystemConfig(alpha=alpha, B=B, phi=float(ell))
    level = energy(cfg, Anharmonic(a, 0.0, 0.0), QuantumNumbers(0, ell))
    assert level.energy == pytest.approx(math.sqrt(2 * a + (B / 2) ** 2 / alpha ** 2), rel=1e-14)


@pytest.mark.parametrize("potential, tag", [
    (Harmonic(1.3), "A"), (Pseudoharmonic(1.2, 0.8), "B"), (ShiftedPseudoharmonic(1.2, 0.8), "C"),
    (InverseSquare(0.7), "D"),
])
@given(alpha=alphas, B=st.floats(0.1, 3.0), phi=fluxes, n=st.integers(0, 4), ell=ells)
def test_case_formulas_agree_with_general(potential, tag, alpha, B, phi, n, ell):
    cfg, qn = SystemConfig(alpha=alpha, B=B, phi=phi), QuantumNumbers(n, ell)
    level = energy(cfg, potential, qn)
    assert level.case_tag == tag
    assert level.energy == pytest.approx(energy_general(cfg, potential, qn), rel=1e-12, abs=1e-12)


@given(alpha=alphas, B=st.floats(0.1, 3.0), phi=fluxes, b=strengths, n=st.integers(0, 3), ell=ells)
def test_case_d_equals_anharmonic_without_oscillator(alpha, B, phi, b, n, ell):
    cfg, qn = SystemConfig(alpha=alpha, B=B, phi=phi), QuantumNumbers(n, ell)
    assert energy(cfg, InverseSquare(b), qn).energy == pytest.approx(
        energy(cfg, Anharmonic(0.0, b, 0.0), qn).energy, rel=1e-12)


@given(alphas, fields, fluxes, strengths, strengths, ells)
def test_harmonic_mapping_matches_case_a(alpha, B, phi, omega, _, ell):
    cfg, qn = SystemConfig(alpha=alpha, B=B, phi=phi), QuantumNumbers(1, ell)
    direct = energy(cfg, Harmonic(omega), qn).energy
    mapped = energy(cfg, Anharmonic(0.5 * omega ** 2, 0.0, 0.0), qn).energy
    assert direct == pytest.approx(mapped, rel=1e-14)


@given(alphas, fields, fluxes, strengths, strengths, ells, st.integers(0, 5))
def test_ladder_spacing(alpha, B, phi, a, b, ell, n):
    cfg, pot = SystemConfig(alpha=alpha, B=B, phi=phi), Anharmonic(a, b, 0.3)
    e0 = energy(cfg, pot, QuantumNumbers(n, ell)).energy
    e1 = energy(cfg, pot, QuantumNumbers(n + 1, ell)).energy
    omega0 = math.sqrt(2 * a + (B / 2) ** 2 / alpha ** 2)
    assert e1 > e0
    assert e1 - e0 == pytest.approx(2 * omega0, rel=1e-12)


@given(alphas, st.floats(0.1, 3.0), strengths, st.integers(1, 3), st.integers(0, 3))
def test_orbital_sign_symmetry_without_flux(alpha, B, a, m, n):
    cfg, pot = SystemConfig(alpha=alpha, B=B, phi=0.0), Anharmonic(a, 0.0)
    assert energy(cfg, pot, QuantumNumbers(n, m)).energy == energy(cfg, pot, QuantumNumbers(n, -m)).energy


@given(st.floats(0.2, 0.99), st.floats(0.1, 3.0), st.floats(0.1, 0.9), strengths, st.integers(-2, 2))
def test_no_shift_degeneracy_with_flux(alpha, B, phi, a, ell):
    cfg, pot = SystemConfig(alpha=alpha, B=B, phi=phi), Anharmonic(a, 0.0)
    e = energy(cfg, pot, QuantumNumbers(0, ell)).energy
    e_next = energy(cfg, pot, QuantumNumbers(0, ell + 1)).energy
    assert e != e_next


@given(alphas, fields, fluxes, strengths, strengths, ells, st.integers(0, 3))
def test_energy_matches_independent_evaluation(alpha, B, phi, a, b, ell, n):
    got = energy(SystemConfig(alpha=alpha, B=B, phi=phi), Anharmonic(a, b, -0.5), QuantumNumbers(n, ell))
    want = oracles.energy(alpha, B, phi, n, ell, a, b, -0.5)
    assert got.energy == pytest.approx(float(want), rel=1e-13, abs=1e-13)


def test_degenerate_and_case_d_errors():
    with pytest.raises(DegenerateConfinement):
        energy(SystemConfig(B=0.0), Anharmonic(0.0, 1.0), QuantumNumbers())
    with pytest.raises(CaseDNeedsField):
        energy(SystemConfig(B=0.0), InverseSquare(1.0), QuantumNumbers())
    with pytest.raises(CaseDNeedsField):
        wavefunction(SystemConfig(B=0.0), InverseSquare(1.0), QuantumNumbers())


@pytest.mark.parametrize("alpha", [0.3, 0.6, 0.9])
@pytest.mark.parametrize("ell", [-1, 0, 2])
def test_alpha_derivative_vs_finite_difference(alpha, ell):
    pot, qn, h = Anharmonic(1.0, 0.5), QuantumNumbers(1, ell), 1e-6
    cfg = SystemConfig(alpha=alpha, B=1.5, phi=0.3)
    fd = (energy(cfg.with_(alpha=alpha + h), pot, qn).energy
          - energy(cfg.with_(alpha=alpha - h), pot, qn).energy) / (2 * h)
    assert energy_alpha_derivative(cfg, pot, qn) == pytest.approx(fd, rel=1e-7)


# --- Landau limit -------------------------------------------------------------------------


def test_landau_flat_oscillator():
    assert landau_limit(Harmonic(1.0), QuantumNumbers(1, 2), B=0.0, phi=0.0).energy == 5.0


@pytest.mark.parametrize("n, ell", [(0, 1), (1, 2), (2, 1)])
def test_landau_case_d_small_b(n, ell):
    B = 2.0
    got = landau_limit(InverseSquare(1e-12), QuantumNumbers(n, ell), B=B, phi=0.0).energy
    assert got == pytest.approx((B / 2) * (2 * n + 1 + 2 * abs(ell)), rel=1e-10)


def test_landau_continuity():
    pot, qn = Anharmonic(1.0, 1.0), QuantumNumbers(1, 1)
    limit = landau_limit(pot, qn, B=1.0, phi=0.75).energy
    gaps = [abs(energy(SystemConfig(alpha=a, B=1.0, phi=0.75), pot, qn).energy - limit)
            for a in (0.9, 0.99, 0.999)]
    assert gaps[0] > gaps[1] > gaps[2]


# --- wavefunctions ------------------------------------------------------------------------


def test_wavefunction_vanishes_at_origin_when_j_positive():
    st_ = wavefunction(WORKED, Anharmonic(1, 1), QuantumNumbers(0, 1))
    assert st_.j > 0 and st_(0.0) == 0.0


def test_ground_state_has_single_sign():
    st_ = wavefunction(WORKED, Anharmonic(1, 1), QuantumNumbers(0, 1))
    values = st_(np.linspace(1e-3, 8, 4000))
    assert np.all(values > 0)


def test_first_excited_node_position():
    st_ = wavefunction(WORKED, Anharmonic(1, 1), QuantumNumbers(1, 1))
    _, _, j, Omega, _, _ = oracles.derived(0.75, 1, 0.75, 1, 1, 1)
    node = float((1 + j) / Omega) ** 0.5
    assert node == pytest.approx(1.25257, abs=1e-5)
    assert st_(node - 1e-6) * st_(node + 1e-6) < 0
    grid = np.linspace(1e-4, 8, 8001)
    assert np.count_nonzero(np.diff(np.sign(st_(grid))) != 0) == 1


@given(alphas, fields, fluxes, strengths, strengths, ells, st.integers(0, 3),
       st.floats(0.05, 3.0))
def test_wavefunction_matches_independent_evaluation(alpha, B, phi, a, b, ell, n, r):
    got = wavefunction(SystemConfig(alpha=alpha, B=B, phi=phi), Anharmonic(a, b), QuantumNumbers(n, ell))(r)
    want = float(oracles.wavefunction(alpha, B, phi, n, ell, a, b, r))
    assert got == pytest.approx(want, rel=1e-10, abs=1e-280)


def test_wavefunction_log_space_far_tail():
    st_ = wavefunction(SystemConfig(), Harmonic(1.0), QuantumNumbers(2, 0))
    logv, sign = st_.log_abs_and_sign(np.array([50.0]))
    assert np.isfinite(logv[0]) and logv[0] < -1200 and sign[0] != 0
    assert st_(50.0) == 0.0


CASES = [
    (SystemConfig(alpha=0.75, B=1.0, phi=0.75), Anharmonic(1.0, 1.0), 1),
    (SystemConfig(alpha=0.3, B=2.5, phi=-0.4), Anharmonic(0.25, 3.0), -2),
    (SystemConfig(alpha=1.0, B=0.0, phi=0.0), Harmonic(2.0), 0),
    (SystemConfig(alpha=0.5, B=1.0, phi=0.5), Pseudoharmonic(1.0, 2.0), 0),
    (SystemConfig(alpha=0.6, B=2.0, phi=0.75), InverseSquare(1.0), 1),
]


@pytest.mark.parametrize("cfg, pot, ell", CASES)
@pytest.mark.parametrize("n", range(4))
def test_normalization(cfg, pot, ell, n):
    st_ = wavefunction(cfg, pot, QuantumNumbers(n, ell))
    assert _overlap(st_, st_, cfg.alpha) == pytest.approx(1.0, abs=1e-8)


@pytest.mark.parametrize("cfg, pot, ell", CASES)
def test_orthogonality_and_nodes(cfg, pot, ell):
    states = [wavefunction(cfg, pot, QuantumNumbers(n, ell)) for n in range(4)]
    for i in range(4):
        for k in range(i):
            assert abs(_overlap(states[i], states[k], cfg.alpha)) <= 1e-8
    for n, st_ in enumerate(states):
        grid = np.linspace(1e-6, 12 * st_.length_scale() * math.sqrt(n + 1), 20001)
        values = st_(grid)
        values = values[values != 0.0]
        assert np.count_nonzero(np.diff(np.sign(values)) != 0) == n


def test_unnormalized_measure_is_inverse_alpha():
    cfg = SystemConfig(alpha=0.4, B=1.0, phi=0.2)
    st_ = wavefunction(cfg, Anharmonic(1.0, 1.0), QuantumNumbers(2, 1))
    total = integrate_semiline(lambda r: st_(r) ** 2 * r, tol=1e-12, scale=st_.length_scale()).value
    assert total == pytest.approx(1 / 0.4, rel=1e-9)


# --- effective potential ------------------------------------------------------------------


def test_effective_potential_flat():
    assert effective_potential(SystemConfig(), Anharmonic(1, 1), 1.0, 0) == pytest.approx(2.0, abs=1e-15)


@given(st.floats(0.05, 10.0), st.floats(-3, 3), alphas)
def test_effective_potential_constant_when_everything_cancels(r, c, alpha):
    cfg = SystemConfig(alpha=alpha, B=0.0, phi=1.0)
    assert effective_potential(cfg, Anharmonic(0.0, 0.0, c), r, 1) == pytest.approx(c, abs=1e-14)


def test_effective_potential_worked_point():
    got = effective_potential(WORKED, Anharmonic(1, 1, 0), 1.0, 1)
    assert got == pytest.approx(2.5, abs=1e-14)


def test_effective_potential_flux_readings():
    cfg = SystemConfig(alpha=0.75, B=1.0, phi=1.5)
    signed = effective_potential(cfg, Anharmonic(1, 1), 1.0, 1, flux_term="signed")
    absolute = effective_potential(cfg, Anharmonic(1, 1), 1.0, 1, flux_term="absolute")
    # ell - phi = -1/2: the linear term flips sign between readings
    assert absolute - signed == pytest.approx(2 * 0.5 * 0.5 / 0.5625, rel=1e-14)
    r = np.array([0.5, 1.0, 2.0])
    assert np.asarray(effective_potential(cfg, Anharmonic(1, 1), r, 1)).shape == (3,)


def test_effective_potential_domain():
    with pytest.raises(DomainError):
        effective_potential(SystemConfig(), Anharmonic(1, 1), 0.0, 0)
    with pytest.raises(DomainError):
        effective_potential(SystemConfig(), Anharmonic(1, 1), 1.0, 0, flux_term="other")
