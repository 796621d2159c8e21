"""Persistent current, magnetization and susceptibility.

The Aharonov-Bohm flux enters as phi in units of the flux quantum 2 pi / e, so
d/dPhi_AB = (e / 2 pi) d/dphi.  Zero-temperature quantities differentiate a
single level; finite-temperature ones differentiate the free energy of one
``ell`` tower (see :mod:`disclination_qm.thermo`).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

from .errors import DomainError, KinkPoint
from .model import PotentialSpec, QuantumNumbers, SystemConfig, derive_params
from .thermo import ThermoInput, free_energy

__all__ = [
    "MagneticReport",
    "persistent_current",
    "persistent_current_finite_T",
    "magnetization_zero_T",
    "magnetization_finite_T",
    "susceptibility_zero_T",
    "susceptibility_finite_T",
    "magnetic_report",
]


def _reject_kink(config: SystemConfig, ell: int):
    if config.phi == ell:
        raise KinkPoint(f"phi = ell = {ell}: |ell - phi| is not differentiable")


def persistent_current(config: SystemConfig, potential: PotentialSpec, qn: QuantumNumbers,
                       literal: bool = True) -> float:
    """I = -dE/dPhi_AB.

    ``literal=True`` returns e omega_c / (2 pi alpha^2) + |e| |ell - phi| omega0 / (2 pi alpha^2 j),
    which is the derivative only for ell > phi.  ``literal=False`` carries the
    sign(ell - phi) factor of d|ell - phi| into both terms and is the exact
    derivative on either side of the kink.
    """
    _reject_kink(config, qn.ell)
    p = derive_params(config, potential, qn)
    alpha2 = config.alpha ** 2
    shift = qn.ell - config.phi
    first = config.signed_charge * p.omega_c / (2.0 * math.pi * alpha2)
    second = config.charge * abs(shift) * p.omega0 / (2.0 * math.pi * alpha2 * p.j)
    if literal:
        return first + second
    sign = 1.0 if shift > 0 else -1.0
    return sign * (first + second)


def persistent_current_finite_T(inp: ThermoInput, h: float = 1e-3) -> float:
    """-dF/dPhi_AB by a five-point central difference in phi."""
    _reject_kink(inp.config, inp.ell)
    if abs(inp.ell - inp.config.phi) <= 2.0 * h:
        raise DomainError("phi is within the difference stencil of the kink at phi = ell")

    def f(phi):
        cfg = inp.config.with_(phi=phi)
        return free_energy(ThermoInput(inp.beta, cfg, inp.potential, inp.ell, inp.energy_shift))

    phi = inp.config.phi
    dF = (f(phi - 2 * h) - 8.0 * f(phi - h) + 8.0 * f(phi + h) - f(phi + 2 * h)) / (12.0 * h)
    return -inp.config.signed_charge / (2.0 * math.pi) * dF


def magnetization_zero_T(config: SystemConfig, potential: PotentialSpec, qn: QuantumNumbers) -> float:
    """M = -|e||ell - phi| / (2 M alpha^2) - e^2 B (2n + 1 + j) / (4 M^2 alpha^2 omega0)."""
    p = derive_params(config, potential, qn)
    e, M, a2 = config.charge, config.mass, config.alpha ** 2
    return (
        -e * abs(qn.ell - config.phi) / (2.0 * M * a2)
        - e ** 2 * config.B * (2 * qn.n + 1.0 + p.j) / (4.0 * M ** 2 * a2 * p.omega0)
    )


def susceptibility_zero_T(config: SystemConfig, potential: PotentialSpec, qn: QuantumNumbers) -> float:
    """chi = -2 a e^2 (2n + 1 + j) / (4 M^3 alpha^2 omega0^3)."""
    p = derive_params(config, potential, qn)
    e, M, a2 = config.charge, config.mass, config.alpha ** 2
    return -2.0 * p.a * e ** 2 * (2 * qn.n + 1.0 + p.j) / (4.0 * M ** 3 * a2 * p.omega0 ** 3)


def magnetization_finite_T(inp: ThermoInput) -> float:
    """M = -e^2 B (j + coth(beta omega0)) / (4 M^2 alpha^2 omega0) - |e||ell - phi| / (2 M alpha^2)."""
    cfg = inp.config
    p = inp.params
    e, M, a2 = cfg.charge, cfg.mass, cfg.alpha ** 2
    coth = 1.0 / math.tanh(inp.x)
    return (
        -e ** 2 * cfg.B * (p.j + coth) / (4.0 * M ** 2 * a2 * p.omega0)
        - e * abs(inp.ell - cfg.phi) / (2.0 * M * a2)
    )


def susceptibility_finite_T(inp: ThermoInput, method: str = "analytic", h: Optional[float] = None) -> float:
    """dM/dB of :func:`magnetization_finite_T`.

    ``method="analytic"`` differentiates the 1/omega0 and coth factors in
    closed form; ``method="finite_difference"`` takes a central difference
    (one-sided at B = 0, where M is odd in B and the derivative is even).
    """
    cfg = inp.config
    if method == "analytic":
        p = inp.params
        e, M, a2 = cfg.charge, cfg.mass, cfg.alpha ** 2
        k = e ** 2 / (4.0 * M ** 2 * a2)
        x = inp.x
        coth = 1.0 / math.tanh(x)
        csch2 = coth * coth - 1.0
        d_omega0 = k * cfg.B / p.omega0
        # d/dB [B / omega0] = (2a/M) / omega0^3
        d_b_over_w = (2.0 * p.a / M) / p.omega0 ** 3
        d_coth = -inp.beta * csch2 * d_omega0
        return -k * (d_b_over_w * (p.j + coth) + (cfg.B / p.omega0) * d_coth)
    if method == "finite_difference":
        step = h if h is not None else 1e-5 * max(1.0, cfg.B)

        def m(B):
            return magnetization_finite_T(
                ThermoInput(inp.beta, cfg.with_(B=B), inp.potential, inp.ell, inp.energy_shift)
            )

        if cfg.B - step < 0.0:
            return (m(cfg.B + step) - m(cfg.B)) / step if cfg.B > 0 else (m(step) - m(0.0)) / step
        return (m(cfg.B + step) - m(cfg.B - step)) / (2.0 * step)
    raise DomainError(f"method must be 'analytic' or 'finite_difference', got {method!r}")


@dataclass(frozen=True)
class MagneticReport:
    persistent_current: float
    magnetization: float
    susceptibility: float
    temperature_tag: str  # "zero" or "finite(beta=...)"

    def __post_init__(self):
        for name in ("persistent_current", "magnetization", "susceptibility"):
            if not math.isfinite(getattr(self, name)):
                raise DomainError(f"{name} is not finite")


def magnetic_report(config: SystemConfig, potential: PotentialSpec, qn: QuantumNumbers,
                    beta: Optional[float] = None, literal_current: bool = True) -> MagneticReport:
    """All three quantities at T = 0 (``beta=None``) or at inverse temperature ``beta``."""
    current = persistent_current(config, potential, qn, literal=literal_current)
    if beta is None:
        return MagneticReport(
            persistent_current=current,
            magnetization=magnetization_zero_T(config, potential, qn),
            susceptibility=susceptibility_zero_T(config, potential, qn),
            temperature_tag="zero",
        )
    inp = ThermoInput(beta, config, potential, qn.ell)
    return MagneticReport(
        persistent_current=current,
        magnetization=magnetization_finite_T(inp),
        susceptibility=susceptibility_finite_T(inp),
        temperature_tag=f"finite(beta={beta:.12g})",
    )
