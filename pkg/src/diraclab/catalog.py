"""Quantum-number algebra and model parameter sets.

Everything downstream (analytic spectra, oracle problems, crossings, CLI)
reads model data from here. All objects are immutable.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field, replace
from enum import Enum
from fractions import Fraction
from typing import Mapping


class Variant(str, Enum):
    CoulombI = "CoulombI"
    OscillatorI = "OscillatorI"
    OscillatorII = "OscillatorII"
    CoulombII = "CoulombII"
    OscillatorIII = "OscillatorIII"
    OscillatorToy = "OscillatorToy"
    CoulombToy = "CoulombToy"


class Classification(str, Enum):
    RealBound = "RealBound"
    FlownAway = "FlownAway"
    Collapsed = "Collapsed"


class PrincipalNumberError(ValueError):
    """A state violates the positivity condition on its principal number."""


class EffectiveAngularMomentumError(ValueError):
    """The effective angular momentum of a state is not real."""


# coupling name -> (complex allowed, must be strictly positive)
_COUPLINGS: dict[Variant, dict[str, tuple[bool, bool]]] = {
    Variant.CoulombI: {"a": (False, False), "b": (True, False)},
    Variant.OscillatorI: {"b": (False, True)},
    Variant.OscillatorII: {"a": (False, False), "B": (False, True)},
    Variant.CoulombII: {"alpha1": (True, False), "alpha2": (True, False)},
    Variant.OscillatorIII: {"beta1": (False, False), "beta2": (False, True)},
    Variant.OscillatorToy: {"A": (False, True), "B": (False, True)},
    Variant.CoulombToy: {"A": (False, True), "B": (False, True)},
}

TOY_VARIANTS = (Variant.OscillatorToy, Variant.CoulombToy)


def coupling_names(variant: Variant) -> tuple[str, ...]:
    return tuple(_COUPLINGS[Variant(variant)])


def is_complex_coupling(variant: Variant, name: str) -> bool:
    return _COUPLINGS[Variant(variant)][name][0]


@dataclass(frozen=True, order=True)
class QuantumNumbers:
    """Labels of one radial state.

    ``two_j`` stores 2j so that half-integer comparisons stay exact.
    """

    n_r: int
    ell: int
    two_j: int
    kappa: int
    q: int = 1

    def __post_init__(self):
        for name in ("n_r", "ell", "two_j", "kappa", "q"):
            if not isinstance(getattr(self, name), int) or isinstance(getattr(self, name), bool):
                raise TypeError(f"{name} must be an int")
        if self.n_r < 0 or self.ell < 0:
            raise ValueError("n_r and ell must be non-negative")
        if self.two_j <= 0 or self.two_j % 2 != 1:
            raise ValueError("j must be a positive half-integer")
        if self.kappa == 0:
            raise ValueError("kappa must be nonzero")
        if self.two_j == 2 * self.ell + 1:
            expected = -(self.ell + 1)
        elif self.two_j == 2 * self.ell - 1:
            expected = self.ell
        else:
            raise ValueError(f"j={self.two_j}/2 incompatible with ell={self.ell}")
        if self.kappa != expected:
            raise ValueError(f"kappa={self.kappa} inconsistent with ell={self.ell}, j={self.two_j}/2")
        if self.q not in (1, -1):
            raise ValueError("quasi-parity q must be +1 or -1")

    @classmethod
    def from_kappa(cls, n_r: int, kappa: int, q: int = 1) -> QuantumNumbers:
        if kappa == 0:
            raise ValueError("kappa must be nonzero")
        ell = -kappa - 1 if kappa < 0 else kappa
        return cls(n_r, ell, 2 * abs(kappa) - 1, kappa, q)

    @property
    def j(self) -> Fraction:
        return Fraction(self.two_j, 2)

    @property
    def aligned(self) -> bool:
        """True for j = ell + 1/2."""
        return self.two_j == 2 * self.ell + 1

    @property
    def big_lambda(self) -> int:
        """The oscillator combination 2 n_r + ell."""
        return 2 * self.n_r + self.ell

    def with_q(self, q: int) -> QuantumNumbers:
        return replace(self, q=q)

    def __str__(self):
        return f"(n_r={self.n_r}, l={self.ell}, j={self.two_j}/2, kappa={self.kappa}, q={self.q:+d})"


def make_quantum_numbers(n_r: int, ell: int, aligned: bool, q: int = 1) -> QuantumNumbers:
    """Build consistent labels: aligned selects j = ell + 1/2, otherwise j = ell - 1/2."""
    if n_r < 0 or ell < 0:
        raise ValueError("n_r and ell must be non-negative")
    if aligned:
        return QuantumNumbers(n_r, ell, 2 * ell + 1, -(ell + 1), q)
    if ell == 0:
        raise ValueError("j = ell - 1/2 requires ell >= 1 (kappa = 0 is excluded)")
    return QuantumNumbers(n_r, ell, 2 * ell - 1, ell, q)


def toy_labels(n_r: int, q: int) -> QuantumNumbers:
    """Labels for the free-field toys, where only n_r and q carry meaning."""
    return QuantumNumbers(n_r, 0, 1, -1, q)


def _coerce(value) -> complex:
    if isinstance(value, str):
        value = complex(value.replace(" ", ""))
    z = complex(value)
    if not (math.isfinite(z.real) and math.isfinite(z.imag)):
        raise ValueError(f"coupling must be finite, got {value!r}")
    return z


@dataclass(frozen=True)
class ModelSpec:
    """One of the supported models plus its couplings (natural units).

    Couplings are stored as complex numbers throughout; only ``CoulombI.b``
    and ``CoulombII.alpha1/alpha2`` may carry an imaginary part.
    """

    variant: Variant
    m: float
    couplings: tuple[tuple[str, complex], ...] = field(default=())

    def __post_init__(self):
        object.__setattr__(self, "variant", Variant(self.variant))
        if not math.isfinite(self.m) or self.m < 0:
            raise ValueError("mass m must be finite and >= 0")
        table = _COUPLINGS[self.variant]
        given = dict(self.couplings)
        missing = set(table) - set(given)
        extra = set(given) - set(table)
        if missing:
            raise ValueError(f"{self.variant.value} requires couplings {sorted(missing)}")
        if extra:
            raise ValueError(f"{self.variant.value} does not accept couplings {sorted(extra)}")
        normalized = []
        for name in table:
            z = _coerce(given[name])
            allow_complex, positive = table[name]
            if z.imag != 0 and not allow_complex:
                raise ValueError(f"{self.variant.value}.{name} must be real")
            if positive and not z.real > 0:
                raise ValueError(f"{self.variant.value}.{name} must be > 0")
            normalized.append((name, z))
        object.__setattr__(self, "couplings", tuple(normalized))

    @classmethod
    def create(cls, variant: Variant | str, m: float = 1.0, **couplings) -> ModelSpec:
        return cls(Variant(variant), float(m), tuple(couplings.items()))

    def __getitem__(self, name: str):
        z = dict(self.couplings)[name]
        return z if is_complex_coupling(self.variant, name) else z.real

    def as_dict(self) -> Mapping[str, complex]:
        return dict(self.couplings)

    def with_coupling(self, name: str, value) -> ModelSpec:
        if name == "m":
            return replace(self, m=float(value))
        new = dict(self.couplings)
        if name not in new:
            raise KeyError(name)
        new[name] = value
        return ModelSpec(self.variant, self.m, tuple(new.items()))

    @property
    def is_real(self) -> bool:
        return all(z.imag == 0 for _, z in self.couplings)

    @property
    def is_toy(self) -> bool:
        return self.variant in TOY_VARIANTS


@dataclass(frozen=True)
class EnergyLevel:
    """A (possibly complex) energy in units of m, with its reality class."""

    value: complex
    classification: Classification
    labels: QuantumNumbers | None = None
    branch: str = "+"
    lam: complex | None = None
    note: str = ""

    def __post_init__(self):
        z = complex(self.value)
        object.__setattr__(self, "value", z)
        finite = math.isfinite(z.real) and math.isfinite(z.imag)
        if self.classification is Classification.RealBound and not (finite and z.imag == 0):
            raise ValueError("RealBound levels need a finite real value")
        if self.classification is Classification.Collapsed and z.imag == 0:
            raise ValueError("Collapsed levels carry a nonzero imaginary part")

    @property
    def is_real(self) -> bool:
        return self.classification is Classification.RealBound

    @property
    def energy(self) -> float:
        if not self.is_real:
            raise ValueError(f"level is {self.classification.value}, not real")
        return self.value.real


FLOWN_AWAY_VALUE = complex(math.nan, math.nan)


def snap_real(z: complex, rel: float = 1e-14) -> complex:
    """Drop an imaginary part that is pure round-off."""
    z = complex(z)
    if abs(z.imag) <= rel * max(1.0, abs(z.real)):
        return complex(z.real, 0.0)
    return z


def level_from_radicand(radicand: complex, sign: int, labels=None, branch="+", lam=None,
                        note="") -> EnergyLevel:
    """E = sign * sqrt(radicand) with the reality class read off the radicand."""
    radicand = snap_real(radicand)
    if radicand.imag == 0 and radicand.real >= 0:
        value = complex(sign * math.sqrt(radicand.real), 0.0)
        cls = Classification.RealBound
    else:
        value = sign * cmath.sqrt(radicand)
        cls = Classification.Collapsed
    return EnergyLevel(value, cls, labels, branch, lam, note)


def effective_kappa(spec: ModelSpec, qn: QuantumNumbers) -> float:
    """kappa + a for the two models with A(r) = a/r."""
    if spec.variant not in (Variant.CoulombI, Variant.OscillatorII):
        raise ValueError(f"effective kappa is defined for CoulombI/OscillatorII, not {spec.variant.value}")
    half = (qn.two_j + 1) // 2
    return spec["a"] + (half if qn.kappa > 0 else -half)


def coulomb2_L(ell: int, alpha1: complex, alpha2: complex) -> float:
    """Effective angular momentum of Coulomb-II; raises if it is not real."""
    rad = snap_real(complex((ell + 0.5) ** 2) - complex(alpha1) ** 2 + complex(alpha2) ** 2)
    if rad.imag != 0 or rad.real < 0:
        raise EffectiveAngularMomentumError(
            f"(l+1/2)^2 - alpha1^2 + alpha2^2 = {rad} is not a non-negative real")
    return -0.5 + math.sqrt(rad.real)


def coulomb2_L_complex(ell: int, alpha1: complex, alpha2: complex) -> complex:
    """Principal-branch continuation of the Coulomb-II angular momentum."""
    return -0.5 + cmath.sqrt((ell + 0.5) ** 2 - complex(alpha1) ** 2 + complex(alpha2) ** 2)


def oscillator3_L(ell: int, beta1: float) -> float:
    return -0.5 + math.sqrt((ell + 0.5) ** 2 + beta1 ** 2)


def quasi_sigma(A: float, omega: int, q: int) -> float:
    """Quasi-angular momentum sigma = -1/2 + q (A + omega/2)."""
    return -0.5 + q * (A + omega / 2)


def _positive(value: float, what: str) -> float:
    if not value > 0:
        raise PrincipalNumberError(f"{what} = {value} must be > 0")
    return value


def principal_numbers(spec: ModelSpec, qn: QuantumNumbers, omega: int = 1) -> float:
    """The model's principal number for a state.

    CoulombI: n_r + kappa~ + 1; OscillatorII: 2 n_r + kappa~ + 3/2;
    CoulombII: n_r + L + 1; OscillatorIII: 2 n_r + L~ + 3/2;
    OscillatorI: 2 n_r + l + kappa + 1 (may be zero); toys: n_r + sigma + 1.
    """
    v = spec.variant
    if v is Variant.CoulombI:
        return _positive(qn.n_r + effective_kappa(spec, qn) + 1, "n~")
    if v is Variant.OscillatorII:
        return _positive(2 * qn.n_r + effective_kappa(spec, qn) + 1.5, "N~")
    if v is Variant.OscillatorI:
        return float(2 * qn.n_r + qn.ell + qn.kappa + 1)
    if v is Variant.CoulombII:
        L = coulomb2_L(qn.ell, spec["alpha1"], spec["alpha2"])
        return _positive(qn.n_r + L + 1, "N")
    if v is Variant.OscillatorIII:
        return _positive(2 * qn.n_r + oscillator3_L(qn.ell, spec["beta1"]) + 1.5, "2n_r + L~ + 3/2")
    sigma = quasi_sigma(spec["A"], omega, qn.q)
    return _positive(qn.n_r + sigma + 1, "n_breve")
