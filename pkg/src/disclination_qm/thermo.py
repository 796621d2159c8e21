"""Canonical thermodynamics of a single orbital tower.

For fixed ``ell`` the levels (with c = 0) are E_n = Q + omega0 (j + 1) + 2 omega0 n,
a geometric tower, so

    ln Z = -beta (omega0 j + Q) - ln(2 sinh(beta omega0)).

Boltzmann's constant is 1; heat capacity and entropy are returned in those
units.  Every quantity is evaluated in log or ratio form so that neither small
nor large beta overflows.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import DomainError, ThermoOverflow
from .model import DerivedParams, PotentialSpec, QuantumNumbers, SystemConfig, derive_params

__all__ = [
    "ThermoInput",
    "log_Z",
    "partition_function",
    "free_energy",
    "mean_energy",
    "heat_capacity",
    "entropy_thermo",
    "thermo_summary",
    "log_two_sinh",
]

_EXP_MAX = 709.0
_EXP_MIN = -745.0
_LN2 = math.log(2.0)


def _log_one_minus_exp(t: float) -> float:
    """ln(1 - e^{-t}) for t > 0, accurate at both ends."""
    if t < _LN2:
        return math.log(-math.expm1(-t))
    return math.log1p(-math.exp(-t))


def log_two_sinh(x: float) -> float:
    """ln(2 sinh x) for x > 0 without overflow."""
    return x + _log_one_minus_exp(2.0 * x)


def _coth(x: float) -> float:
    return 1.0 / math.tanh(x)


@dataclass(frozen=True)
class ThermoInput:
    """Inverse temperature plus the system whose ``ell`` tower is summed.

    The constant ``c`` of the potential is dropped from the levels.
    ``energy_shift`` adds a constant to the levels after the fact; it moves
    F and U (and ln Z by -beta * shift) and leaves C and S unchanged.
    """

    beta: float
    config: SystemConfig
    potential: PotentialSpec
    ell: int = 0
    energy_shift: float = 0.0

    def __post_init__(self):
        if not (math.isfinite(self.beta) and self.beta > 0.0):
            raise DomainError(f"beta must be positive and finite, got {self.beta}")
        if int(self.ell) != self.ell:
            raise DomainError(f"ell must be an integer, got {self.ell!r}")
        if not math.isfinite(self.energy_shift):
            raise DomainError("energy_shift must be finite")
        if self.params.omega0 <= 0.0:
            raise DomainError("omega0 must be positive")

    @property
    def temperature(self) -> float:
        return 1.0 / self.beta

    @property
    def params(self) -> DerivedParams:
        return derive_params(self.config, self.potential, QuantumNumbers(0, int(self.ell)))

    @property
    def x(self) -> float:
        """beta * omega0."""
        return self.beta * self.params.omega0

    def level(self, n: int) -> float:
        """E_n = P + 2 omega0 n (with c = 0, plus ``energy_shift``)."""
        p = self.params
        return p.P + 2.0 * p.omega0 * n + self.energy_shift


def log_Z(inp: ThermoInput) -> float:
    p = inp.params
    return -inp.beta * (p.omega0 * p.j + p.Q + inp.energy_shift) - log_two_sinh(inp.x)


def partition_function(inp: ThermoInput) -> float:
    """Z itself; raises :class:`ThermoOverflow` when it is not a finite float."""
    value = log_Z(inp)
    if value > _EXP_MAX or value < _EXP_MIN:
        raise ThermoOverflow(f"ln Z = {value:.6g} is outside the double range; use log_Z")
    return math.exp(value)


def free_energy(inp: ThermoInput) -> float:
    """F = Q + omega0 j + ln(2 sinh(beta omega0)) / beta."""
    p = inp.params
    return p.Q + p.omega0 * p.j + log_two_sinh(inp.x) / inp.beta + inp.energy_shift


def mean_energy(inp: ThermoInput) -> float:
    """U = Q + omega0 (j + coth(beta omega0))."""
    p = inp.params
    return p.Q + p.omega0 * (p.j + _coth(inp.x)) + inp.energy_shift


def heat_capacity(inp: ThermoInput) -> float:
    """C = x^2 / sinh^2 x with x = beta omega0."""
    x = inp.x
    # x / sinh x = 2 x e^{-x} / (1 - e^{-2x})
    ratio = 2.0 * x * math.exp(-x) / -math.expm1(-2.0 * x)
    return ratio * ratio


def entropy_thermo(inp: ThermoInput) -> float:
    """S = x coth x - ln(2 sinh x) with x = beta omega0."""
    x = inp.x
    # x coth x - ln(2 sinh x), rearranged so neither term cancels at large x
    return 2.0 * x * math.exp(-2.0 * x) / -math.expm1(-2.0 * x) - _log_one_minus_exp(2.0 * x)


def thermo_summary(inp: ThermoInput) -> dict:
    return {
        "beta": inp.beta,
        "log_Z": log_Z(inp),
        "free_energy": free_energy(inp),
        "mean_energy": mean_energy(inp),
        "heat_capacity": heat_capacity(inp),
        "entropy": entropy_thermo(inp),
    }
