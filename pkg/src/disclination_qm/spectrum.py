"""Closed-form energies, normalized radial wavefunctions and effective potentials.

Energies follow

    E = c + (omega_c / alpha^2) |ell - phi| + omega0 (2n + j + 1)

with case-specific spellings for the harmonic (A), pseudoharmonic (B), shifted
pseudoharmonic (C) and inverse-square (D) variants.  Wavefunctions are

    psi(r) = D Omega^{j/2} r^j exp(-Omega r^2 / 2) L_n^{(j)}(Omega r^2),
    ln D   = (ln(2 Omega / alpha) + ln n! - ln Gamma(n + j + 1)) / 2,

normalized so that int_0^inf |psi|^2 alpha r dr = 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import CaseDNeedsField, DomainError
from .model import (
    DerivedParams,
    PotentialSpec,
    QuantumNumbers,
    SystemConfig,
    derive_params,
)
from .specialfn import laguerre, log_gamma

__all__ = [
    "EnergyLevel",
    "RadialState",
    "energy",
    "energy_general",
    "energy_alpha_derivative",
    "wavefunction",
    "effective_potential",
    "landau_limit",
]


@dataclass(frozen=True)
class EnergyLevel:
    qn: QuantumNumbers
    energy: float
    case_tag: str  # "general" | "A" | "B" | "C" | "D"


_CASE_TAGS = {
    "anharmonic": "general",
    "harmonic": "A",
    "pseudoharmonic": "B",
    "shifted_pseudoharmonic": "C",
    "inverse_square": "D",
}


def _check_case_d(config, potential):
    if potential.kind == "inverse_square" and config.B == 0.0:
        raise CaseDNeedsField("inverse-square potential has no bound states without B")


def energy_general(config: SystemConfig, potential: PotentialSpec, qn: QuantumNumbers) -> float:
    """The master formula evaluated on the (a, b, c) image of any variant."""
    _check_case_d(config, potential)
    p = derive_params(config, potential, qn)
    return p.c + p.Q + p.omega0 * (2 * qn.n + p.j + 1.0)


def energy(config: SystemConfig, potential: PotentialSpec, qn: QuantumNumbers) -> EnergyLevel:
    """E_{n,ell} written out per variant."""
    _check_case_d(config, potential)
    derive_params(config, potential, qn)  # validates confinement
    M, alpha, wc = config.mass, config.alpha, config.omega_c
    shift = abs(qn.ell - config.phi)
    n = qn.n
    kind = potential.kind
    if kind == "harmonic":
        w = potential.omega
        value = wc / alpha ** 2 * shift + math.sqrt(w ** 2 + wc ** 2 / alpha ** 2) * (
            2 * n + shift / alpha + 1.0
        )
    elif kind in ("pseudoharmonic", "shifted_pseudoharmonic"):
        De, r0 = potential.De, potential.r0
        value = (
            wc / alpha ** 2 * shift
            + math.sqrt(2 * De / (M * r0 ** 2) + wc ** 2 / alpha ** 2)
            * (2 * n + math.sqrt(shift ** 2 / alpha ** 2 + 2 * M * De * r0 ** 2) + 1.0)
        )
        if kind == "pseudoharmonic":
            value -= 2 * De
    elif kind == "inverse_square":
        b = potential.b
        value = wc / alpha * (
            2 * n + 1.0 + math.sqrt(shift ** 2 / alpha ** 2 + 2 * M * b) + shift / alpha
        )
    else:
        a, b, c = potential.a, potential.b, potential.c
        value = (
            c
            + wc / alpha ** 2 * shift
            + math.sqrt(2 * a / M + wc ** 2 / alpha ** 2)
            * (2 * n + math.sqrt(shift ** 2 / alpha ** 2 + 2 * M * b) + 1.0)
        )
    return EnergyLevel(qn=qn, energy=value, case_tag=_CASE_TAGS[kind])


def energy_alpha_derivative(config: SystemConfig, potential: PotentialSpec, qn: QuantumNumbers) -> float:
    """dE/dalpha at fixed B, phi, potential and quantum numbers."""
    _check_case_d(config, potential)
    p = derive_params(config, potential, qn)
    alpha = config.alpha
    shift = qn.ell - config.phi
    d_q = -2.0 * p.Q / alpha
    d_omega0 = -(p.omega_c ** 2) / (alpha ** 3 * p.omega0)
    d_j = 0.0 if p.j == 0.0 else -(shift ** 2) / (alpha ** 3 * p.j)
    return d_q + d_omega0 * (2 * qn.n + p.j + 1.0) + p.omega0 * d_j


@dataclass(frozen=True)
class RadialState:
    """A normalized bound state; call it (or :meth:`evaluate`) to get psi(r)."""

    qn: QuantumNumbers
    params: DerivedParams
    norm_log: float
    potential: PotentialSpec
    config: SystemConfig

    @property
    def Omega(self) -> float:
        return self.params.Omega

    @property
    def j(self) -> float:
        return self.params.j

    def s(self, r):
        """The oscillator variable s = Omega r^2 (Case D: x = (M omega_c / alpha) r^2)."""
        return self.params.Omega * np.asarray(r, dtype=float) ** 2

    def log_abs_and_sign(self, r):
        """(ln|psi(r)|, sign psi(r)); ln|psi| = -inf at zeros."""
        r = np.asarray(r, dtype=float)
        if np.any(r < 0):
            raise DomainError("radial coordinate must be non-negative")
        s = self.s(r)
        lag = laguerre(self.qn.n, self.j, s)
        with np.errstate(divide="ignore"):
            log_r = np.log(r)
            log_lag = np.log(np.abs(lag))
        if self.j == 0.0:
            power = np.zeros_like(r)
        else:
            power = self.j * log_r
        logv = self.norm_log + 0.5 * self.j * math.log(self.Omega) + power - 0.5 * s + log_lag
        return logv, np.sign(lag)

    def evaluate(self, r):
        logv, sign = self.log_abs_and_sign(r)
        out = sign * np.exp(logv)
        return out if np.ndim(out) else float(out)

    __call__ = evaluate

    def density(self, r):
        """|psi(r)|^2 (without any measure factor)."""
        logv, _ = self.log_abs_and_sign(r)
        out = np.exp(2.0 * logv)
        return out if np.ndim(out) else float(out)

    def length_scale(self) -> float:
        """1 / sqrt(Omega): the width of the oscillator ground state."""
        return 1.0 / math.sqrt(self.Omega)


def wavefunction(config: SystemConfig, potential: PotentialSpec, qn: QuantumNumbers) -> RadialState:
    _check_case_d(config, potential)
    p = derive_params(config, potential, qn)
    norm_log = 0.5 * (
        math.log(2.0 * p.Omega / config.alpha)
        + log_gamma(qn.n + 1.0)
        - log_gamma(qn.n + p.j + 1.0)
    )
    return RadialState(qn=qn, params=p, norm_log=norm_log, potential=potential, config=config)


def effective_potential(config: SystemConfig, potential: PotentialSpec, r, ell: int,
                        flux_term: str = "signed"):
    """Effective radial potential.

    ``flux_term="signed"`` uses (ell - phi) in the term linear in B;
    ``flux_term="absolute"`` uses |ell - phi| as in the spectrum.
    """
    r_arr = np.asarray(r, dtype=float)
    if np.any(r_arr <= 0):
        raise DomainError("effective potential needs r > 0")
    if flux_term not in ("signed", "absolute"):
        raise DomainError(f"flux_term must be 'signed' or 'absolute', got {flux_term!r}")
    M, alpha, e, B = config.mass, config.alpha, config.charge, config.B
    a, b, c = potential.coefficients(M)
    shift = ell - config.phi
    linear = shift if flux_term == "signed" else abs(shift)
    value = (
        (a + e ** 2 * B ** 2 / (8 * M * alpha ** 2)) * r_arr ** 2
        + (b + shift ** 2 / (2 * M * alpha ** 2)) / r_arr ** 2
        + e * B / (2 * M) * linear / alpha ** 2
        + c
    )
    return value if np.ndim(value) else float(value)


def landau_limit(potential: PotentialSpec, qn: QuantumNumbers, B: float, phi: float,
                 mass: float = 1.0, charge: float = 1.0) -> EnergyLevel:
    """The flat-space (alpha = 1) level."""
    config = SystemConfig(alpha=1.0, B=B, phi=phi, mass=mass, charge=charge)
    return energy(config, potential, qn)
