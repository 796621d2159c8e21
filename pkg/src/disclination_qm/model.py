"""Domain types and the parameter-derivation layer.

A charged particle of mass ``mass`` and charge magnitude ``charge`` lives on a
cone with deficit parameter ``alpha`` (``alpha = 1`` is flat space), threaded by
an Aharonov-Bohm flux ``phi`` (in units of the flux quantum) and a uniform field
of magnitude ``B``.  The axial wavenumber is fixed to zero.  Natural units
(hbar = 1) throughout.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Optional, Union

from .errors import CaseDNeedsField, DegenerateConfinement, DomainError

__all__ = [
    "SystemConfig",
    "Anharmonic",
    "Harmonic",
    "Pseudoharmonic",
    "ShiftedPseudoharmonic",
    "InverseSquare",
    "PotentialSpec",
    "QuantumNumbers",
    "DerivedParams",
    "derive_params",
    "potential_from_dict",
]


def _finite(name, value):
    if not math.isfinite(value):
        raise DomainError(f"{name} must be finite, got {value!r}")


@dataclass(frozen=True)
class SystemConfig:
    """Physical environment: defect, field, flux, particle.

    ``charge`` is the magnitude |e|; ``charge_sign`` carries the sign of e where
    a formula needs the signed charge (first term of the persistent current).
    """

    alpha: float = 1.0
    B: float = 0.0
    phi: float = 0.0
    mass: float = 1.0
    charge: float = 1.0
    charge_sign: int = 1

    def __post_init__(self):
        for name in ("alpha", "B", "phi", "mass", "charge"):
            _finite(name, getattr(self, name))
        if not 0.0 < self.alpha <= 1.0:
            raise DomainError(f"alpha must lie in (0, 1], got {self.alpha}")
        if self.mass <= 0.0:
            raise DomainError(f"mass must be positive, got {self.mass}")
        if self.charge <= 0.0:
            raise DomainError(f"charge magnitude must be positive, got {self.charge}")
        if self.B < 0.0:
            raise DomainError(f"B is a magnitude and must be >= 0, got {self.B}")
        if self.charge_sign not in (1, -1):
            raise DomainError(f"charge_sign must be +1 or -1, got {self.charge_sign}")

    @property
    def omega_c(self) -> float:
        """Cyclotron frequency |e| B / (2 M)."""
        return self.charge * self.B / (2.0 * self.mass)

    @property
    def signed_charge(self) -> float:
        return self.charge_sign * self.charge

    def with_(self, **changes) -> "SystemConfig":
        return replace(self, **changes)


# --- potential variants -----------------------------------------------------


@dataclass(frozen=True)
class Anharmonic:
    """V(r) = a r^2 + b / r^2 + c."""

    a: float
    b: float
    c: float = 0.0
    kind: str = field(default="anharmonic", init=False, repr=False)

    def __post_init__(self):
        for name in ("a", "b", "c"):
            _finite(name, getattr(self, name))
        if self.a < 0 or self.b < 0:
            raise DomainError(f"anharmonic needs a >= 0 and b >= 0, got a={self.a}, b={self.b}")

    def coefficients(self, mass: float):
        return self.a, self.b, self.c


@dataclass(frozen=True)
class Harmonic:
    """V(r) = M omega^2 r^2 / 2."""

    omega: float
    kind: str = field(default="harmonic", init=False, repr=False)

    def __post_init__(self):
        _finite("omega", self.omega)
        if self.omega <= 0:
            raise DomainError(f"omega must be positive, got {self.omega}")

    def coefficients(self, mass: float):
        return 0.5 * mass * self.omega ** 2, 0.0, 0.0


@dataclass(frozen=True)
class Pseudoharmonic:
    """V(r) = De (r/r0 - r0/r)^2."""

    De: float
    r0: float
    kind: str = field(default="pseudoharmonic", init=False, repr=False)

    def __post_init__(self):
        _finite("De", self.De)
        _finite("r0", self.r0)
        if self.De <= 0 or self.r0 <= 0:
            raise DomainError(f"pseudoharmonic needs De > 0 and r0 > 0, got {self.De}, {self.r0}")

    def coefficients(self, mass: float):
        return self.De / self.r0 ** 2, self.De * self.r0 ** 2, -2.0 * self.De


@dataclass(frozen=True)
class ShiftedPseudoharmonic:
    """V(r) = De (r/r0 - r0/r)^2 + 2 De."""

    De: float
    r0: float
    kind: str = field(default="shifted_pseudoharmonic", init=False, repr=False)

    def __post_init__(self):
        _finite("De", self.De)
        _finite("r0", self.r0)
        if self.De <= 0 or self.r0 <= 0:
            raise DomainError(
                f"shifted pseudoharmonic needs De > 0 and r0 > 0, got {self.De}, {self.r0}"
            )

    def coefficients(self, mass: float):
        return self.De / self.r0 ** 2, self.De * self.r0 ** 2, 0.0


@dataclass(frozen=True)
class InverseSquare:
    """V(r) = b / r^2 (no oscillator term: confinement comes from B alone)."""

    b: float
    kind: str = field(default="inverse_square", init=False, repr=False)

    def __post_init__(self):
        _finite("b", self.b)
        if self.b <= 0:
            raise DomainError(f"inverse-square needs b > 0, got {self.b}")

    def coefficients(self, mass: float):
        return 0.0, self.b, 0.0


PotentialSpec = Union[Anharmonic, Harmonic, Pseudoharmonic, ShiftedPseudoharmonic, InverseSquare]

_POTENTIALS = {
    "anharmonic": (Anharmonic, ("a", "b", "c")),
    "harmonic": (Harmonic, ("omega",)),
    "pseudoharmonic": (Pseudoharmonic, ("De", "r0")),
    "shifted_pseudoharmonic": (ShiftedPseudoharmonic, ("De", "r0")),
    "inverse_square": (InverseSquare, ("b",)),
}


def potential_from_dict(kind: str, params: dict) -> PotentialSpec:
    """Build a potential variant from its tag and a parameter mapping.

    Keys not used by the variant are ignored; missing keys raise ``DomainError``.
    """
    key = kind.replace("-", "_").lower()
    if key not in _POTENTIALS:
        raise DomainError(f"unknown potential {kind!r}; expected one of {sorted(_POTENTIALS)}")
    cls, names = _POTENTIALS[key]
    kwargs = {}
    for name in names:
        if params.get(name) is None:
            if name == "c":
                continue
            raise DomainError(f"potential {key} requires parameter {name!r}")
        kwargs[name] = float(params[name])
    return cls(**kwargs)


def potential_params(potential: PotentialSpec) -> dict:
    cls, names = _POTENTIALS[potential.kind]
    return {name: getattr(potential, name) for name in names}


# --- quantum numbers and derived parameters ---------------------------------


@dataclass(frozen=True)
class QuantumNumbers:
    n: int = 0
    ell: int = 0

    def __post_init__(self):
        for name in ("n", "ell"):
            value = getattr(self, name)
            if isinstance(value, bool) or int(value) != value:
                raise DomainError(f"{name} must be an integer, got {value!r}")
            object.__setattr__(self, name, int(value))
        if self.n < 0:
            raise DomainError(f"n must be >= 0, got {self.n}")


@dataclass(frozen=True)
class DerivedParams:
    """Coefficients of the reduced radial equation and the thermal bundle.

    ``Lambda`` is only populated when an energy was supplied to
    :func:`derive_params`.
    """

    a: float
    b: float
    c: float
    omega_c: float
    ell_prime: float
    Omega: float
    j: float
    omega0: float
    Q: float
    P: float
    Lambda: Optional[float] = None

    def lambda_of(self, energy: float, mass: float) -> float:
        """Lambda = 2M(E - c) - 2M omega_c ell' / alpha, with alpha folded into Q."""
        # omega_c * ell' / alpha == Q
        return 2.0 * mass * (energy - self.c) - 2.0 * mass * self.Q


def derive_params(
    config: SystemConfig,
    potential: PotentialSpec,
    qn: QuantumNumbers,
    energy: Optional[float] = None,
) -> DerivedParams:
    """Compute omega_c, ell', Omega, j, omega0, Q, P (and Lambda if ``energy`` given).

    Raises
    ------
    DegenerateConfinement
        when Omega vanishes (a = 0 and B = 0).  The inverse-square variant raises
        the subclass :class:`CaseDNeedsField`.
    """
    M, alpha = config.mass, config.alpha
    a, b, c = potential.coefficients(M)
    omega_c = config.omega_c
    shift = qn.ell - config.phi
    ell_prime = abs(shift) / alpha
    j = math.sqrt(shift * shift / (alpha * alpha) + 2.0 * M * b)
    Omega = math.sqrt(2.0 * M * a + (M * omega_c / alpha) ** 2)
    if Omega == 0.0:
        if potential.kind == "inverse_square":
            raise CaseDNeedsField("inverse-square potential has no bound states without B")
        raise DegenerateConfinement("a = 0 and B = 0: no confining term")
    omega0 = math.sqrt(2.0 * a / M + (omega_c / alpha) ** 2)
    Q = omega_c * abs(shift) / alpha ** 2
    P = Q + omega0 * (j + 1.0)
    params = DerivedParams(
        a=a, b=b, c=c, omega_c=omega_c, ell_prime=ell_prime, Omega=Omega, j=j,
        omega0=omega0, Q=Q, P=P,
    )
    if energy is not None:
        params = replace(params, Lambda=params.lambda_of(energy, M))
    return params
