"""Closed-form energies for the seven models.

Every function returns an ``EnergyLevel``; complex values are carried
through so that collapse diagnostics can report the imaginary part.
Energies are absolute (not divided by m).
"""
from __future__ import annotations

import cmath
import logging
import math

from scipy.optimize import brentq

from diraclab.catalog import (
    FLOWN_AWAY_VALUE,
    Classification,
    EffectiveAngularMomentumError,
    EnergyLevel,
    ModelSpec,
    PrincipalNumberError,
    QuantumNumbers,
    Variant,
    coulomb2_L,
    coulomb2_L_complex,
    effective_kappa,
    level_from_radicand,
    oscillator3_L,
    principal_numbers,
    snap_real,
)
from diraclab.susy import coulomb_toy_lambda, coulomb_toy_n_breve, oscillator_toy_lambda, toy_energies

logger = logging.getLogger(__name__)

FLOWN_AWAY_RTOL = 1e-12
OSC2_AGREEMENT = 1e-9


def _sign(branch: str) -> int:
    if branch in ("+", "plus"):
        return 1
    if branch in ("-", "minus"):
        return -1
    raise ValueError(f"branch must be '+' or '-', got {branch!r}")


def _flown_away(labels, branch, note):
    return EnergyLevel(FLOWN_AWAY_VALUE, Classification.FlownAway, labels, branch, note=note)


def _finish(value: complex, m: float, labels, branch, note="") -> EnergyLevel:
    value = snap_real(value)
    if value.imag == 0:
        return EnergyLevel(value, Classification.RealBound, labels, branch, value.real**2 - m * m, note)
    return EnergyLevel(value, Classification.Collapsed, labels, branch, value * value - m * m, note)


def coulomb1_energy(m: float, b: complex, n_tilde: float, labels: QuantumNumbers | None = None) -> EnergyLevel:
    """E = m (n~^2 - b^2)/(n~^2 + b^2); an imaginary b = -i b0 gives the PT form."""
    if not n_tilde > 0:
        raise PrincipalNumberError(f"n~ = {n_tilde} must be > 0")
    b = complex(b)
    n2 = n_tilde * n_tilde
    den = n2 + b * b
    if den == 0 or abs(den) <= FLOWN_AWAY_RTOL * (n2 + abs(b) ** 2):
        return _flown_away(labels, "+", f"n~ = |b0| = {n_tilde:.12g}")
    level = _finish(m * (n2 - b * b) / den, m, labels, "+")
    if b.imag == 0 and b.real > 0:
        # 2b(E+m)/r is repulsive for every E > -m
        level = EnergyLevel(level.value, level.classification, labels, "+", level.lam,
                            "repulsive 1/r tail (b > 0): formula root has no normalizable state")
    return level


def oscillator1_energy(m: float, b: float, qn: QuantumNumbers, branch: str = "+") -> EnergyLevel:
    """E = +-sqrt(m^2 + b(2 n_r + l + kappa + 1))."""
    if not b > 0:
        raise ValueError("b must be > 0")
    radicand = m * m + b * (2 * qn.n_r + qn.ell + qn.kappa + 1)
    return level_from_radicand(radicand, _sign(branch), qn, branch, radicand - m * m)


def oscillator2_threshold(m: float, B: float) -> float:
    """N~ below which the inner square root of the Cardano form turns imaginary."""
    return math.sqrt(8 * m**3 / 27) / B


def oscillator2_closed_form(m: float, B: float, N: float) -> complex:
    """Cardano solution E = -m + (xi^(1/3)/3 + 2m xi^(-1/3))^2 of (E^2 - m^2) = 2B sqrt(E+m) N.

    xi is real above threshold (real cube root taken). Below threshold xi is
    complex and the principal cube root yields the trigonometric real root.
    """
    disc = -24 * m**3 + 81 * B * B * N * N
    if disc >= 0:
        xi = 27 * B * N + 3 * math.sqrt(disc)
        c = math.copysign(abs(xi) ** (1 / 3), xi)
    else:
        xi = 27 * B * N + 3 * cmath.sqrt(disc)
        c = xi ** (1 / 3)
    s = c / 3 + 2 * m / c
    return snap_real(-m + s * s, 1e-12)


def oscillator2_trig_form(m: float, B: float, N: float) -> float:
    """Trigonometric root s = 2 sqrt(2m/3) cos(arccos(...)/3) for sub-threshold N~."""
    p = math.sqrt(2 * m / 3)
    arg = (3 * B * N / (2 * m)) * math.sqrt(3 / (2 * m))
    s = 2 * p * math.cos(math.acos(min(1.0, arg)) / 3)
    return s * s - m


def oscillator2_root(m: float, B: float, N: float) -> float:
    """Positive root of s^3 - 2 m s - 2 B N = 0 (s = sqrt(E+m)) by bracketing; E = s^2 - m."""
    c = 2 * B * N
    f = lambda s: s**3 - 2 * m * s - c  # noqa: E731
    s_hi = 1.0 + math.sqrt(2 * m) + c ** (1 / 3)
    s = brentq(f, 0.0, s_hi, xtol=1e-15, rtol=4 * 2.0**-52, maxiter=500)
    return s * s - m


def oscillator2_residual(m: float, B: float, N: float, E: float) -> float:
    return abs(E * E - m * m - 2 * B * math.sqrt(E + m) * N)


def oscillator2_energy_from_N(m: float, B: float, N: float, labels=None) -> EnergyLevel:
    """The root finder is the authority; the closed form is cross-checked against it."""
    if not B > 0:
        raise ValueError("B must be > 0")
    if not N > 0:
        raise PrincipalNumberError(f"N~ = {N} must be > 0")
    E = oscillator2_root(m, B, N)
    closed = oscillator2_closed_form(m, B, N)
    notes = []
    if N < oscillator2_threshold(m, B):
        notes.append("below the Cardano threshold; real root from the trigonometric branch")
    if abs(closed - E) > OSC2_AGREEMENT * (1 + abs(E)):
        logger.warning("closed form %s disagrees with root %s (N~=%g)", closed, E, N)
        notes.append(f"closed form gave {closed}")
    return EnergyLevel(complex(E, 0.0), Classification.RealBound, labels, "+", E * E - m * m,
                       "; ".join(notes))


def oscillator2_energy(m: float, B: float, a: float, qn: QuantumNumbers) -> EnergyLevel:
    spec = ModelSpec.create(Variant.OscillatorII, m, a=a, B=B)
    return oscillator2_energy_from_N(m, B, principal_numbers(spec, qn), qn)


def coulomb2_energy(m: float, alpha1: complex, alpha2: complex, N: complex, branch: str = "+",
                    labels: QuantumNumbers | None = None) -> EnergyLevel:
    """General complex evaluation of E/m = -a1 a2/(N^2+a1^2) +- sqrt((a1 a2/(N^2+a1^2))^2 + (N^2-a2^2)/(N^2+a1^2))."""
    a1, a2, N = complex(alpha1), complex(alpha2), complex(N)
    if a1.imag == 0 and a2.imag == 0 and N.imag == 0 and not N.real > 0:
        raise PrincipalNumberError(f"N = {N.real} must be > 0")
    den = N * N + a1 * a1
    if den == 0 or abs(den) <= FLOWN_AWAY_RTOL * (abs(N) ** 2 + abs(a1) ** 2):
        return _flown_away(labels, branch, f"N^2 + alpha1^2 = 0 at N = {N}")
    p = -a1 * a2 / den
    root = cmath.sqrt(snap_real(p * p + (N * N - a2 * a2) / den))
    level = _finish(m * (p + _sign(branch) * root), m, labels, branch)
    if level.is_real and a1.imag == 0 and a2.imag == 0 and a1.real * level.energy + a2.real * m > 0:
        level = EnergyLevel(level.value, level.classification, labels, branch, level.lam,
                            "repulsive 1/r tail: formula root has no normalizable state")
    return level


def coulomb2_special_case(m: float, alpha1: complex, alpha2: complex, N: complex, branch: str = "+") -> complex:
    """The three reduced forms (a1 = 0; a2 = 0; a1 = a2); raises for other couplings."""
    a1, a2, N = complex(alpha1), complex(alpha2), complex(N)
    s = _sign(branch)
    if a1 == 0 and a2 != 0:
        return m * s * cmath.sqrt(snap_real(1 - a2 * a2 / (N * N)))
    if a2 == 0 and a1 != 0:
        return m * s * cmath.sqrt(snap_real(1 / (1 + a1 * a1 / (N * N))))  # branch of the general form
    if a1 == a2 and a1 != 0:
        return m * (-a1 * a1 + s * N * N) / (N * N + a1 * a1)
    raise ValueError("couplings do not match a reduced case")


def oscillator3_energy(m: float, beta1: float, beta2: float, qn: QuantumNumbers, branch: str = "+") -> EnergyLevel:
    """E = +-sqrt(beta2 (4 n_r + 2 L~ + 3) + 2 beta1 beta2); m is absorbed into M(r)."""
    if not beta2 > 0:
        raise ValueError("beta2 must be > 0")
    Lt = oscillator3_L(qn.ell, beta1)
    radicand = beta2 * (4 * qn.n_r + 2 * Lt + 3) + 2 * beta1 * beta2
    return level_from_radicand(radicand, _sign(branch), qn, branch, radicand - m * m)


def _toy_n_breve(spec, qn, omega):
    A = spec["A"]
    if spec.variant is Variant.OscillatorToy:
        return None
    return coulomb_toy_n_breve(A, omega, qn.q, qn.n_r)


def classify_reality(spec: ModelSpec, qn: QuantumNumbers, branch: str = "+") -> Classification:
    """Reality class from the published conditions, without evaluating E."""
    v = spec.variant
    m = spec.m
    if v is Variant.CoulombI:
        b = complex(spec["b"])
        n_t = principal_numbers(spec, qn)
        if b.real == 0 and b.imag != 0:
            return Classification.FlownAway if n_t == abs(b.imag) else Classification.RealBound
        return Classification.RealBound if b.imag == 0 else Classification.Collapsed
    if v is Variant.OscillatorI:
        rad = m * m + spec["b"] * (2 * qn.n_r + qn.ell + qn.kappa + 1)
        return Classification.RealBound if rad >= 0 else Classification.Collapsed
    if v is Variant.OscillatorII:
        principal_numbers(spec, qn)
        return Classification.RealBound
    if v is Variant.CoulombII:
        a1, a2 = complex(spec["alpha1"]), complex(spec["alpha2"])
        try:
            L = coulomb2_L(qn.ell, a1, a2)
        except EffectiveAngularMomentumError:
            return Classification.Collapsed
        N = qn.n_r + L + 1
        den = N * N + a1 * a1
        if abs(den) <= FLOWN_AWAY_RTOL * (N * N + abs(a1) ** 2):
            return Classification.FlownAway
        p = -a1 * a2 / den
        rad = snap_real(p * p + (N * N - a2 * a2) / den)
        real = snap_real(p).imag == 0 and rad.imag == 0 and rad.real >= 0
        return Classification.RealBound if real else Classification.Collapsed
    if v is Variant.OscillatorIII:
        Lt = oscillator3_L(qn.ell, spec["beta1"])
        rad = spec["beta2"] * (4 * qn.n_r + 2 * Lt + 3 + 2 * spec["beta1"])
        return Classification.RealBound if rad >= 0 else Classification.Collapsed
    omega = _sign(branch)
    A, B = spec["A"], spec["B"]
    if v is Variant.OscillatorToy:
        lam = oscillator_toy_lambda(A, B, omega, qn.q, qn.n_r)
        return Classification.RealBound if m * m + lam >= 0 else Classification.Collapsed
    d = _toy_n_breve(spec, qn, omega)
    if d == 0:
        return Classification.FlownAway
    return Classification.Collapsed if m * m + B * B < (A * B / d) ** 2 else Classification.RealBound


def energy_levels(spec: ModelSpec, qn: QuantumNumbers, branch: str = "both") -> list[EnergyLevel]:
    """All requested branches for one state, plus branch first."""
    v = spec.variant
    if branch == "both":
        if v in (Variant.CoulombI, Variant.OscillatorII):
            branches = ["+"]
        else:
            branches = ["+", "-"]
    else:
        branches = [branch]
    m = spec.m
    out = []
    for br in branches:
        if v is Variant.CoulombI:
            out.append(coulomb1_energy(m, spec["b"], principal_numbers(spec, qn), qn))
        elif v is Variant.OscillatorI:
            out.append(oscillator1_energy(m, spec["b"], qn, br))
        elif v is Variant.OscillatorII:
            out.append(oscillator2_energy_from_N(m, spec["B"], principal_numbers(spec, qn), qn))
        elif v is Variant.CoulombII:
            a1, a2 = spec["alpha1"], spec["alpha2"]
            try:
                N = principal_numbers(spec, qn)
            except EffectiveAngularMomentumError:
                N = qn.n_r + coulomb2_L_complex(qn.ell, a1, a2) + 1
            out.append(coulomb2_energy(m, a1, a2, N, br, qn))
        elif v is Variant.OscillatorIII:
            out.append(oscillator3_energy(m, spec["beta1"], spec["beta2"], qn, br))
        else:
            out.append(toy_energies(v, spec["A"], spec["B"], m, (br, qn.q), qn.n_r))
    return out


def toy_lambda(spec: ModelSpec, omega: int, q: int, n_r: int) -> float:
    if spec.variant is Variant.OscillatorToy:
        return oscillator_toy_lambda(spec["A"], spec["B"], omega, q, n_r)
    if spec.variant is Variant.CoulombToy:
        return coulomb_toy_lambda(spec["A"], spec["B"], omega, q, n_r)
    raise ValueError("not a toy model")


__all__ = [
    "classify_reality",
    "coulomb1_energy",
    "coulomb2_energy",
    "coulomb2_special_case",
    "effective_kappa",
    "energy_levels",
    "oscillator1_energy",
    "oscillator2_closed_form",
    "oscillator2_energy",
    "oscillator2_energy_from_N",
    "oscillator2_residual",
    "oscillator2_root",
    "oscillator2_threshold",
    "oscillator2_trig_form",
    "oscillator3_energy",
    "toy_lambda",
]
