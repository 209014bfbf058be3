"""Decoupling of the radial Dirac pair into Schrodinger-like problems.

Fields are radial functions with (preferably analytic) first and second
derivatives. All model fields are sums of power laws, so ``PowerLaw``
carries exact derivatives; ``RadialField`` falls back to central
differences with step 1e-5 (1 + r).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.integrate import cumulative_trapezoid


class SingularGaugeError(ValueError):
    """zeta vanishes on the working domain, so the gauge transform is singular."""


def _fd_step(r):
    return 1e-5 * (1.0 + np.abs(r))


class RadialField:
    """A radial function with first/second derivatives.

    Missing derivatives are taken by central differences.
    """

    def __init__(self, f: Callable, d1: Callable | None = None, d2: Callable | None = None,
                 constant: bool = False):
        self._f, self._d1, self._d2 = f, d1, d2
        self.constant = constant

    def __call__(self, r):
        return self._f(np.asarray(r, dtype=float))

    def d1(self, r):
        r = np.asarray(r, dtype=float)
        if self._d1 is not None:
            return self._d1(r)
        h = _fd_step(r)
        return (self._f(r + h) - self._f(r - h)) / (2 * h)

    def d2(self, r):
        r = np.asarray(r, dtype=float)
        if self._d2 is not None:
            return self._d2(r)
        if self._d1 is not None:
            h = _fd_step(r)
            return (self._d1(r + h) - self._d1(r - h)) / (2 * h)
        h = 1e-4 * (1.0 + np.abs(r))
        return (self._f(r + h) - 2 * self._f(r) + self._f(r - h)) / h**2

    def scaled(self, c) -> RadialField:
        return RadialField(lambda r: c * self(r), lambda r: c * self.d1(r),
                           lambda r: c * self.d2(r), self.constant)

    def __add__(self, other: RadialField) -> RadialField:
        return RadialField(lambda r: self(r) + other(r), lambda r: self.d1(r) + other.d1(r),
                           lambda r: self.d2(r) + other.d2(r), self.constant and other.constant)

    def __neg__(self):
        return self.scaled(-1)

    def __sub__(self, other):
        return self + (-other)


class PowerLaw(RadialField):
    """sum_k c_k r^p_k with exact derivatives."""

    def __init__(self, terms: dict[float, complex] | None = None):
        self.terms = {float(p): c for p, c in (terms or {}).items() if c != 0}
        super().__init__(self._value, self._deriv1, self._deriv2,
                         constant=all(p == 0 for p in self.terms))

    @classmethod
    def const(cls, c) -> PowerLaw:
        return cls({0.0: c})

    def _eval(self, r, order):
        r = np.asarray(r, dtype=float)
        dtype = complex if any(isinstance(c, complex) and c.imag for c in self.terms.values()) else float
        out = np.zeros_like(r, dtype=dtype)
        for p, c in self.terms.items():
            coef = c.real if dtype is float else c
            if order == 0:
                out = out + coef * r**p
            elif order == 1 and p != 0:
                out = out + coef * p * r ** (p - 1)
            elif order == 2 and p not in (0.0, 1.0):
                out = out + coef * p * (p - 1) * r ** (p - 2)
        return out

    def _value(self, r):
        return self._eval(r, 0)

    def _deriv1(self, r):
        return self._eval(r, 1)

    def _deriv2(self, r):
        return self._eval(r, 2)

    def __add__(self, other):
        if isinstance(other, PowerLaw):
            merged = dict(self.terms)
            for p, c in other.terms.items():
                merged[p] = merged.get(p, 0) + c
            return PowerLaw(merged)
        return RadialField.__add__(self, other)

    def scaled(self, c):
        return PowerLaw({p: c * v for p, v in self.terms.items()})


ZERO = PowerLaw()


@dataclass(frozen=True)
class FieldSet:
    """Lorentz vector V, combined mass profile M = m(r) + S(r), radial A, and kappa.

    ``kg_gauge=True`` replaces A by -zeta2'/(2 zeta2), which is energy dependent.
    """

    V: RadialField = ZERO
    M: RadialField = ZERO
    A: RadialField = ZERO
    kappa: float = -1
    kg_gauge: bool = False


@dataclass(frozen=True)
class EigenvalueMap:
    """lambda = E^2 - m^2, inverted on the branch E = sign * sqrt(m^2 + lambda)."""

    m: float
    sign: int = 1

    def to_lambda(self, E):
        return E * E - self.m * self.m

    def to_energy(self, lam: float) -> float:
        rad = self.m * self.m + lam
        if rad < 0:
            raise ValueError(f"m^2 + lambda = {rad} < 0 has no real energy")
        return self.sign * math.sqrt(rad)


@dataclass(frozen=True)
class EffectiveProblem:
    """-phi'' + [c/r^2 + U(r; E)] phi = lambda phi, with lambda <-> E given by the map.

    ``core_exponent`` is the near-origin power s (phi ~ r^s) of the labelled
    solution; None means the regular one.
    """

    centrifugal_strength: float
    potential: Callable[[np.ndarray, float], np.ndarray]
    eigenvalue_map: EigenvalueMap
    energy_dependent: bool
    component: str = "upper"
    core_exponent: float | None = None
    length_scale: float = 1.0
    energy_scale: float = 1.0
    label: str = ""

    def full_potential(self, r, E):
        r = np.asarray(r, dtype=float)
        return self.centrifugal_strength / r**2 + self.potential(r, E)

    def with_core(self, strength: float, exponent: float | None = None, **changes) -> EffectiveProblem:
        """Move (strength - c)/r^2 out of U and into the centrifugal term."""
        shift = strength - self.centrifugal_strength
        base = self.potential

        def potential(r, E):
            return base(r, E) - shift / np.asarray(r, dtype=float) ** 2

        params = dict(self.__dict__)
        params.update(centrifugal_strength=strength, potential=potential,
                      core_exponent=exponent, **changes)
        return EffectiveProblem(**params)


@dataclass(frozen=True)
class RadialWavefunction:
    grid: np.ndarray
    phi: np.ndarray
    gauge_exponent: np.ndarray = field(default=None)

    def __post_init__(self):
        if self.gauge_exponent is None:
            object.__setattr__(self, "gauge_exponent", np.zeros_like(self.phi))

    def physical(self) -> np.ndarray:
        """g = phi2 exp(-P2/2) (or f from phi1); gauge_exponent holds P/2."""
        return self.phi * np.exp(-self.gauge_exponent)


def zeta_functions(fields: FieldSet, m: float, E) -> tuple[RadialField, RadialField]:
    """zeta1 = (E - m) - V - M and zeta2 = (E + m) - V + M."""
    zeta1 = PowerLaw.const(E - m) - fields.V - fields.M
    zeta2 = PowerLaw.const(E + m) - fields.V + fields.M
    return zeta1, zeta2


def _check_nonzero(values, r, name):
    values = np.asarray(values)
    if np.any(values == 0) or not np.all(np.isfinite(values)):
        raise SingularGaugeError(f"{name} vanishes or is non-finite on the domain")
    if np.isrealobj(values) or np.all(values.imag == 0):
        re = np.real(values)
        flips = np.nonzero(np.sign(re[1:]) != np.sign(re[:-1]))[0]
        if flips.size:
            raise SingularGaugeError(f"{name} changes sign near r = {r[flips[0]]:.6g}")


def _energy_dependent(fields: FieldSet) -> bool:
    # -zeta1 zeta2 carries 2 E V(r); the gauge terms carry E through zeta2/zeta1
    return not (fields.V.constant and fields.M.constant)


def _symbol_A(fields: FieldSet, zeta2: RadialField, r):
    kap = fields.kappa
    if fields.kg_gauge:
        z, z1, z2 = zeta2(r), zeta2.d1(r), zeta2.d2(r)
        g = z1 / z
        A, dA = -g / 2, -(z2 / z - g**2) / 2
    else:
        A, dA = fields.A(r), fields.A.d1(r)
    return kap / r + A, -kap / r**2 + dA


def _gauge_terms(zeta, z, r, At, sign, name):
    """sign*g*At + 3g^2/4 - zeta''/(2 zeta) with g = zeta'/zeta; identically zero for constant zeta."""
    if zeta.constant:
        return np.zeros_like(r)
    _check_nonzero(z, r, name)
    g = zeta.d1(r) / z
    return sign * g * At + 0.75 * g**2 - 0.5 * zeta.d2(r) / z


def build_upper_problem(fields: FieldSet, m: float) -> EffectiveProblem:
    """Operator -d2 + At^2 - At' + U2 - zeta1 zeta2 on phi2, eigenvalue E^2 - m^2."""
    kap = fields.kappa
    c = kap * (kap + 1)

    def potential(r, E):
        r = np.asarray(r, dtype=float)
        zeta1, zeta2 = zeta_functions(fields, m, E)
        z2 = zeta2(r)
        At, dAt = _symbol_A(fields, zeta2, r)
        U2 = _gauge_terms(zeta2, z2, r, At, 1, "zeta2")
        return At**2 - dAt + U2 - zeta1(r) * z2 + (E * E - m * m) - c / r**2

    return EffectiveProblem(c, potential, EigenvalueMap(m), _energy_dependent(fields), "upper")


def build_lower_problem(fields: FieldSet, m: float) -> EffectiveProblem:
    """Operator -d2 + At^2 + At' + U1 - zeta1 zeta2 on phi1 (not used for verification)."""
    kap = fields.kappa
    c = kap * (kap - 1)  # At^2 + At' has core kappa(kappa - 1)/r^2

    def potential(r, E):
        r = np.asarray(r, dtype=float)
        zeta1, zeta2 = zeta_functions(fields, m, E)
        z1 = zeta1(r)
        At, dAt = _symbol_A(fields, zeta2, r)
        U1 = _gauge_terms(zeta1, z1, r, At, -1, "zeta1")
        return At**2 + dAt + U1 - z1 * zeta2(r) + (E * E - m * m) - c / r**2

    return EffectiveProblem(c, potential, EigenvalueMap(m), _energy_dependent(fields), "lower")


def build_kg_problem(fields: FieldSet, m: float) -> EffectiveProblem:
    """Klein-Gordon form -d2 + kappa(kappa+1)/r^2 - zeta1 zeta2 reached with A = -zeta2'/(2 zeta2).

    This is the closed form of ``build_upper_problem`` for ``kg_gauge`` fields
    and needs no zeta2 != 0 condition.
    """
    kap = fields.kappa
    c = kap * (kap + 1)

    def potential(r, E):
        r = np.asarray(r, dtype=float)
        zeta1, zeta2 = zeta_functions(fields, m, E)
        return -zeta1(r) * zeta2(r) + (E * E - m * m)

    return EffectiveProblem(c, potential, EigenvalueMap(m), not fields.V.constant, "upper")


def gauge_derivative(fields: FieldSet, m: float, E: float, component: str, r):
    """P2' = (V' - M')/zeta2 or P1' = (V' + M')/zeta1."""
    r = np.asarray(r, dtype=float)
    zeta1, zeta2 = zeta_functions(fields, m, E)
    if component == "upper":
        num, den, name = fields.V.d1(r) - fields.M.d1(r), zeta2(r), "zeta2"
    elif component == "lower":
        num, den, name = fields.V.d1(r) + fields.M.d1(r), zeta1(r), "zeta1"
    else:
        raise ValueError("component must be 'upper' or 'lower'")
    _check_nonzero(den, r, name)
    return num / den


def gauge_exponent(fields: FieldSet, m: float, E: float, component: str, grid) -> np.ndarray:
    """P(r) on the grid by cumulative trapezoid, normalised to P(r_min) = 0."""
    grid = np.asarray(grid, dtype=float)
    if np.any(grid <= 0) or np.any(np.diff(grid) <= 0):
        raise ValueError("grid must be strictly increasing and positive")
    return cumulative_trapezoid(gauge_derivative(fields, m, E, component, grid), grid, initial=0.0)


def susy_partner_pair(At: Callable, dAt: Callable) -> tuple[Callable, Callable]:
    """V_omega = At^2 + omega At' for omega = +1, -1 (free fields)."""

    def v_plus(r):
        return At(r) ** 2 + dAt(r)

    def v_minus(r):
        return At(r) ** 2 - dAt(r)

    return v_plus, v_minus
