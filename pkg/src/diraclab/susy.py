"""Free-field partner problems and quasi-parity spectra of the two toy models.

Branch conventions: omega = +1 / -1 labels the partner potential
A~^2 + omega A~', and the Dirac energy built from lambda_omega carries the
sign of omega.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

from diraclab.catalog import (
    FLOWN_AWAY_VALUE,
    Classification,
    EnergyLevel,
    Variant,
    level_from_radicand,
    quasi_sigma,
    toy_labels,
)

ANALYTIC_ZERO_TOL = 1e-12
ORACLE_ZERO_TOL = 1e-5


class Verdict(str, Enum):
    ExactIsospectral = "ExactIsospectral"
    MissingLowestState = "MissingLowestState"
    ZeroModeBreaksPairing = "ZeroModeBreaksPairing"
    NoSpectralPairing = "NoSpectralPairing"


@dataclass(frozen=True)
class QuasiLabel:
    omega: int
    q: int
    sigma: float

    @classmethod
    def for_toy(cls, A: float, omega: int, q: int) -> QuasiLabel:
        _check_pm(omega, "omega")
        _check_pm(q, "q")
        return cls(omega, q, quasi_sigma(A, omega, q))

    def core_residual(self, A: float) -> float:
        """|sigma(sigma+1) - A(A+omega)|, zero up to rounding."""
        return abs(self.sigma * (self.sigma + 1) - A * (A + self.omega))


def _check_pm(x, name):
    if x not in (1, -1):
        raise ValueError(f"{name} must be +1 or -1, got {x!r}")


def _check_AB(A, B):
    if not (A > 0 and B > 0):
        raise ValueError("A and B must be > 0")


def oscillator_toy_lambda(A: float, B: float, omega: int, q: int, n_r: int) -> float:
    """lambda = (B/2)(4 n_r + 2qA + omega q + 2) - B(A - omega/2), in split form.

    The split form makes the q = -1 branches bitwise identical.
    """
    _check_AB(A, B)
    _check_pm(omega, "omega")
    _check_pm(q, "q")
    if n_r < 0:
        raise ValueError("n_r must be >= 0")
    if q == -1:
        return 2 * B * (n_r - A + 0.5)
    return 2 * B * (n_r + 1) if omega == 1 else 2 * B * n_r


def coulomb_toy_n_breve(A: float, omega: int, q: int, n_r: int) -> float:
    """n_r + sigma + 1, written per branch so that zero modes come out exactly zero."""
    # integer parts first, so lambda_a(n) and lambda_b(n + 1) evaluate identical expressions
    if q == 1:
        return (n_r + 1) + A if omega == 1 else n_r + A
    return n_r - A if omega == 1 else (n_r + 1) - A


def coulomb_toy_lambda(A: float, B: float, omega: int, q: int, n_r: int) -> float:
    """lambda = B^2 (1 - A^2 / n^2) with n = n_r + sigma + 1; raises where n vanishes."""
    _check_AB(A, B)
    _check_pm(omega, "omega")
    _check_pm(q, "q")
    if n_r < 0:
        raise ValueError("n_r must be >= 0")
    nb = coulomb_toy_n_breve(A, omega, q, n_r)
    if nb == 0:
        raise ZeroDivisionError(f"vanishing denominator n_r + sigma + 1 at n_r = {n_r}")
    return B * B * (1 - (A / nb) ** 2)


def _lambda_fn(model: Variant):
    model = Variant(model)
    if model is Variant.OscillatorToy:
        return oscillator_toy_lambda
    if model is Variant.CoulombToy:
        return coulomb_toy_lambda
    raise ValueError(f"{model.value} is not a toy model")


def _parse_branch(branch) -> tuple[int, int]:
    sign, q = branch
    if isinstance(sign, str):
        sign = {"+": 1, "plus": 1, "-": -1, "minus": -1}[sign]
    _check_pm(sign, "branch sign")
    _check_pm(q, "q")
    return sign, q


def toy_energies(model, A: float, B: float, m: float, branch, n_r: int) -> EnergyLevel:
    """E = sign sqrt(m^2 + lambda_{sign,q}); Collapsed when m^2 + lambda < 0."""
    omega, q = _parse_branch(branch)
    tag = "+" if omega == 1 else "-"
    labels = toy_labels(n_r, q)
    try:
        lam = _lambda_fn(model)(A, B, omega, q, n_r)
    except ZeroDivisionError as exc:
        return EnergyLevel(FLOWN_AWAY_VALUE, Classification.FlownAway, labels, tag, note=str(exc))
    return level_from_radicand(m * m + lam, omega, labels, tag, lam)


PAIRINGS: dict[str, tuple[tuple[int, int], tuple[int, int]]] = {
    "even": ((1, 1), (-1, 1)),
    "odd": ((1, -1), (-1, -1)),
    "cross-odd-even": ((1, -1), (-1, 1)),
    "cross-even-odd": ((1, 1), (-1, -1)),
}


def branch_name(omega: int, q: int) -> str:
    return f"lambda({'+' if omega == 1 else '-'},q={q:+d})"


@dataclass(frozen=True)
class Match:
    n_r: int
    lambda_a: float
    lambda_b: float
    residual: float


@dataclass(frozen=True)
class SignatureReport:
    """Outcome of comparing two toy branches.

    ``shift`` k means lambda_a(n) = lambda_b(n + k); ``evidence`` holds the
    compared pairs at that shift (or at k = 0 if none worked).
    """

    model: Variant
    pairing: tuple[tuple[int, int], tuple[int, int]]
    verdict: Verdict
    shift: int | None
    evidence: tuple[Match, ...]
    zero_modes: tuple[bool, bool]
    tolerance: float = ANALYTIC_ZERO_TOL
    pairing_name: str = ""
    skipped: tuple[tuple[str, int], ...] = field(default=())

    @property
    def unpaired_branch(self) -> str | None:
        """Which branch holds the extra lowest state for a MissingLowestState verdict."""
        if self.verdict is not Verdict.MissingLowestState:
            return None
        a, b = self.pairing
        return branch_name(*b) if self.shift == 1 else branch_name(*a)


def _resolve_pairing(pairing):
    if isinstance(pairing, str):
        if pairing not in PAIRINGS:
            raise ValueError(f"unknown pairing {pairing!r}; choose from {sorted(PAIRINGS)}")
        return pairing, PAIRINGS[pairing]
    try:
        (wa, qa), (wb, qb) = pairing
        for x in (wa, qa, wb, qb):
            _check_pm(x, "pairing entry")
    except (TypeError, ValueError) as exc:
        raise ValueError(f"unknown pairing {pairing!r}") from exc
    key = ((wa, qa), (wb, qb))
    name = next((k for k, v in PAIRINGS.items() if v == key), "")
    return name, key


def _spectrum(fn, A, B, omega, q, count):
    values = {}
    for n in range(count):
        try:
            values[n] = fn(A, B, omega, q, n)
        except ZeroDivisionError:
            values[n] = None
    return values


def check_susy_signature(model, A: float, B: float, pairing, depth: int = 6) -> SignatureReport:
    """Classify how two branches pair up over the first ``depth`` levels."""
    if depth < 3:
        raise ValueError("depth must be >= 3")
    model = Variant(model)
    fn = _lambda_fn(model)
    name, (a, b) = _resolve_pairing(pairing)
    lam_a = _spectrum(fn, A, B, *a, depth + 1)
    lam_b = _spectrum(fn, A, B, *b, depth + 1)
    tol = ANALYTIC_ZERO_TOL * max(1.0, B * B)
    skipped = tuple(sorted({(branch_name(*a), n) for n, v in lam_a.items() if v is None}
                           | {(branch_name(*b), n) for n, v in lam_b.items() if v is None}))

    def compare(shift):
        rows = []
        for n in range(depth):
            k = n + shift
            if k < 0 or k > depth:
                continue
            x, y = lam_a[n], lam_b[k]
            if x is None or y is None:
                continue
            rows.append(Match(n, x, y, abs(x - y)))
        return rows

    zero = (lam_a[0] is not None and abs(lam_a[0]) <= tol,
            lam_b[0] is not None and abs(lam_b[0]) <= tol)
    for shift, verdict in ((0, Verdict.ExactIsospectral), (1, Verdict.MissingLowestState),
                           (-1, Verdict.MissingLowestState)):
        rows = compare(shift)
        if len(rows) >= 3 and all(r.residual <= tol for r in rows):
            return SignatureReport(model, (a, b), verdict, shift, tuple(rows), zero, tol, name, skipped)
    verdict = Verdict.ZeroModeBreaksPairing if any(zero) else Verdict.NoSpectralPairing
    return SignatureReport(model, (a, b), verdict, None, tuple(compare(0)), zero, tol, name, skipped)


def all_signatures(model, A: float, B: float, depth: int = 6) -> list[SignatureReport]:
    return [check_susy_signature(model, A, B, key, depth) for key in PAIRINGS]


def zero_modes(model, A: float, B: float) -> dict[tuple[int, int], bool]:
    """Which (omega, q) branches carry an analytic lambda = 0 at n_r = 0."""
    fn = _lambda_fn(model)
    out = {}
    for omega in (1, -1):
        for q in (1, -1):
            try:
                out[(omega, q)] = abs(fn(A, B, omega, q, 0)) <= ANALYTIC_ZERO_TOL * max(1.0, B * B)
            except ZeroDivisionError:
                out[(omega, q)] = False
    return out
