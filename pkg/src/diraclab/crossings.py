"""Energy-level crossings from exact integer conditions, with a brute-force cross-check.

Each enumerator emits every equal-energy pair within the bounds. Pairs that
satisfy the published selection rule carry that rule as their condition id;
the remaining ones (same-kappa-sign coincidences, reflected toy labels) carry
their own id.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations

from diraclab.catalog import (
    EnergyLevel,
    ModelSpec,
    PrincipalNumberError,
    QuantumNumbers,
    Variant,
    toy_labels,
)
from diraclab.spectra import energy_levels

ANALYTIC_RTOL = 1e-12
BRUTE_RTOL = 1e-10
# near threshold E crowds onto m; equal levels must also agree in E^2 - m^2
BRUTE_LAMBDA_RTOL = 1e-8

# condition identifiers
C1_PUBLISHED = "n_r2-n_r1=j1+j2+1"
C1_SAME_SIGN = "equal n~ (same kappa sign)"
O1_PUBLISHED = "Lambda2-Lambda1=j1+j2+2"
O1_EQUAL = "equal 2n_r+l+kappa+1"
O2_PUBLISHED = "n_r2-n_r1=(j1+j2+1)/2"
O2_SAME_SIGN = "equal N~ (same kappa sign)"
OT_PLUS = "n_r2-n_r1=A+1/2"
OT_MINUS = "n_r4-n_r3=A-1/2"
CT_PLUS = "n_r2-n_r1=2A+1"
CT_MINUS = "n_r4-n_r3=2A-1"
CT_PLUS_REFLECT = "n_r+n_r'=2A (q=-1, reflected)"
CT_MINUS_REFLECT = "n_r+n_r'=2A-2 (q=-1, reflected)"


@dataclass(frozen=True)
class SearchBounds:
    n_r_max: int = 8
    two_j_max: int = 7
    ell_max: int | None = None

    def __post_init__(self):
        if self.n_r_max < 0 or self.two_j_max < 1 or self.two_j_max % 2 != 1:
            raise ValueError("need n_r_max >= 0 and two_j_max a positive odd integer")

    @property
    def kappa_max(self) -> int:
        return (self.two_j_max + 1) // 2


@dataclass(frozen=True, order=True)
class CrossingPair:
    state_a: QuantumNumbers
    branch_a: str
    state_b: QuantumNumbers
    branch_b: str
    condition: str = field(compare=False)
    energy: EnergyLevel | None = field(default=None, compare=False)

    @property
    def key(self):
        return (self.state_a, self.branch_a, self.state_b, self.branch_b)


def _pair(a, br_a, b, br_b, condition, energy):
    if (b, br_b) < (a, br_a):
        a, br_a, b, br_b = b, br_b, a, br_a
    return CrossingPair(a, br_a, b, br_b, condition, energy)


def dirac_states(bounds: SearchBounds) -> list[QuantumNumbers]:
    """All (n_r, kappa) with j <= j_max (and l <= l_max if set), sorted."""
    out = []
    for n in range(bounds.n_r_max + 1):
        for k in range(1, bounds.kappa_max + 1):
            for kappa in (-k, k):
                qn = QuantumNumbers.from_kappa(n, kappa)
                if bounds.ell_max is None or qn.ell <= bounds.ell_max:
                    out.append(qn)
    return sorted(out)


def doublet_states(bounds: SearchBounds) -> list[QuantumNumbers]:
    """(n_r, l) levels for models blind to the kappa sign; one representative per doublet."""
    ell_max = bounds.ell_max if bounds.ell_max is not None else bounds.n_r_max
    return [QuantumNumbers.from_kappa(n, -(ell + 1)) for n in range(bounds.n_r_max + 1)
            for ell in range(ell_max + 1)]


def toy_states(bounds: SearchBounds) -> list[QuantumNumbers]:
    return [toy_labels(n, q) for n in range(bounds.n_r_max + 1) for q in (1, -1)]


def _level(spec, qn, branch):
    try:
        (lvl,) = energy_levels(spec, qn, branch)
    except PrincipalNumberError:
        return None
    return lvl


def _real_level(spec, qn, branch):
    lvl = _level(spec, qn, branch)
    return lvl if lvl is not None and lvl.is_real else None


def _by_key(spec, states, key_fn, branch, name_fn):
    """Group states by an exact key and emit all pairs inside each group."""
    groups: dict = {}
    for qn in states:
        lvl = _real_level(spec, qn, branch)
        if lvl is None:
            continue
        k = key_fn(qn)
        if k is not None:
            groups.setdefault(k, []).append((qn, lvl))
    out = []
    for members in groups.values():
        for (a, la), (b, _) in combinations(sorted(members, key=lambda t: t[0]), 2):
            out.append(_pair(a, branch, b, branch, name_fn(a, b), la))
    return out


def _dedupe(pairs):
    seen = {}
    for p in pairs:
        seen.setdefault(p.key, p)
    return [seen[k] for k in sorted(seen)]


def coulomb1_crossings(spec: ModelSpec, bounds: SearchBounds = SearchBounds()) -> list[CrossingPair]:
    """Pairs with equal n~ = n_r + kappa~ + 1 > 0; E is injective in n~ for b != 0."""
    if spec.variant is not Variant.CoulombI:
        raise ValueError("CoulombI spec required")
    if complex(spec["b"]) == 0:
        raise ValueError("b = 0 makes every level equal to m")

    def key(qn):
        # a cancels in comparisons; use the integer part n_r + kappa
        return qn.n_r + qn.kappa

    def name(a, b):
        return C1_PUBLISHED if (a.kappa > 0) != (b.kappa > 0) else C1_SAME_SIGN

    return _dedupe(_by_key(spec, dirac_states(bounds), key, "+", name))


def _osc1_radicand_int(qn):
    return 2 * qn.n_r + qn.ell + qn.kappa + 1


def oscillator1_crossings(spec: ModelSpec, bounds: SearchBounds = SearchBounds(),
                          branches=("+", "-")) -> list[CrossingPair]:
    """Pairs with equal 2n_r + l + kappa + 1, inside each energy-sign set."""
    if spec.variant is not Variant.OscillatorI:
        raise ValueError("OscillatorI spec required")

    def name(a, b):
        return O1_PUBLISHED if satisfies_oscillator1_published(a, b) else O1_EQUAL

    out = []
    for br in branches:
        out += _by_key(spec, dirac_states(bounds), _osc1_radicand_int, br, name)
    return _dedupe(out)


def satisfies_oscillator1_published(a: QuantumNumbers, b: QuantumNumbers) -> bool:
    """Lambda2 - Lambda1 = j1 + j2 + 2 with state 1 of kappa > 0 and state 2 of kappa < 0."""
    for s1, s2 in ((a, b), (b, a)):
        if s1.kappa > 0 > s2.kappa and s2.big_lambda - s1.big_lambda == s1.j + s2.j + 2:
            return True
    return False


def oscillator1_published_pairs(bounds: SearchBounds = SearchBounds()) -> list[CrossingPair]:
    """Every pair the published Oscillator-I rule selects, whether or not the energies agree."""
    states = dirac_states(bounds)
    out = []
    for s1 in states:
        for s2 in states:
            if s1.kappa > 0 > s2.kappa and s2.big_lambda - s1.big_lambda == s1.j + s2.j + 2:
                out.append(_pair(s1, "+", s2, "+", O1_PUBLISHED, None))
    return _dedupe(out)


@dataclass(frozen=True)
class DegeneracySolution:
    b1: float
    b2: float | None
    feasible: bool
    realizable: bool
    energy_gap: float | None
    note: str = ""


@dataclass(frozen=True)
class DegeneracyRelation:
    """b2 * coef_b2 = b1 * coef_b1, pairing a kappa > 0 state (Lambda1, j1) with a kappa < 0 state (Lambda2, j2).

    ``convention="published"`` uses the kappa < 0 radicand Lambda - j - 1/2;
    ``"corrected"`` uses Lambda - j + 1/2, which is what 2n_r + l + kappa + 1 gives.
    """

    lambda1: int
    j1: Fraction
    lambda2: int
    j2: Fraction
    coef_b1: Fraction
    coef_b2: Fraction
    convention: str
    case: str

    def solve_b2(self, b1: float, m: float = 1.0) -> DegeneracySolution:
        if not b1 > 0:
            raise ValueError("b1 must be > 0")
        realizable = _realizable(self.lambda1, self.j1, 1) and _realizable(self.lambda2, self.j2, -1)
        if self.coef_b2 <= 0 or self.coef_b1 <= 0:
            return DegeneracySolution(b1, None, False, realizable, None,
                                      "no positive b2 solves the relation")
        b2 = b1 * float(self.coef_b1) / float(self.coef_b2)
        e1 = math.sqrt(m * m + b1 * float(self.lambda1 + self.j1 + Fraction(3, 2)))
        true_rad = m * m + b2 * float(self.lambda2 - self.j2 + Fraction(1, 2))
        gap = abs(e1 - math.sqrt(true_rad)) if true_rad >= 0 else None
        note = "" if realizable else "Lambda and l have different parity for at least one state"
        return DegeneracySolution(b1, b2, True, realizable, gap, note)


def _realizable(Lam, j, sign):
    ell = j + Fraction(1, 2) if sign > 0 else j - Fraction(1, 2)
    diff = Lam - ell
    return diff >= 0 and diff.denominator == 1 and diff.numerator % 2 == 0


def oscillator1_degeneracy_b(lambda1: int, j1, lambda2: int, j2,
                             convention: str = "published") -> DegeneracyRelation:
    j1, j2 = Fraction(j1), Fraction(j2)
    for j in (j1, j2):
        if j <= 0 or (2 * j).denominator != 1 or (2 * j).numerator % 2 != 1:
            raise ValueError("j must be a positive half-integer")
    if lambda1 == lambda2 and j1 != j2:
        case = "equal-Lambda"
    elif lambda1 != lambda2 and j1 == j2:
        case = "equal-j"
    else:
        raise ValueError("need Lambda1 = Lambda2 with j1 != j2, or Lambda1 != Lambda2 with j1 = j2")
    if convention == "published":
        coef2 = lambda2 - j2 - Fraction(1, 2)
    elif convention == "corrected":
        coef2 = lambda2 - j2 + Fraction(1, 2)
    else:
        raise ValueError("convention must be 'published' or 'corrected'")
    return DegeneracyRelation(lambda1, j1, lambda2, j2, lambda1 + j1 + Fraction(3, 2), coef2,
                              convention, case)


def oscillator1_split_radicand(m: float, b: float, Lam: int, j, kappa_sign: int,
                               convention: str = "published") -> float:
    """m^2 + b (Lambda + j + 3/2) for kappa > 0; for kappa < 0 the printed (- j - 1/2) or corrected (- j + 1/2) form."""
    j = Fraction(j)
    if kappa_sign > 0:
        return m * m + b * float(Lam + j + Fraction(3, 2))
    shift = Fraction(-1, 2) if convention == "published" else Fraction(1, 2)
    return m * m + b * float(Lam - j + shift)


def oscillator2_crossings(spec: ModelSpec, bounds: SearchBounds = SearchBounds()) -> list[CrossingPair]:
    """Pairs with equal N~ = 2n_r + kappa~ + 3/2; E grows strictly with N~."""
    if spec.variant is not Variant.OscillatorII:
        raise ValueError("OscillatorII spec required")

    def key(qn):
        return 2 * qn.n_r + qn.kappa

    def name(a, b):
        return O2_PUBLISHED if (a.kappa > 0) != (b.kappa > 0) else O2_SAME_SIGN

    return _dedupe(_by_key(spec, dirac_states(bounds), key, "+", name))


def oscillator2_infeasible_j(bounds: SearchBounds = SearchBounds()) -> list[tuple[Fraction, Fraction]]:
    """(j1, j2) whose published offset (j1 + j2 + 1)/2 is not an integer."""
    js = [Fraction(k, 2) for k in range(1, bounds.two_j_max + 1, 2)]
    return [(j1, j2) for j1 in js for j2 in js if (j1 + j2 + 1) % 2 != 0]


def _integer_offset(x: float) -> int | None:
    k = round(x)
    return k if abs(x - k) <= 1e-12 * max(1.0, abs(x)) else None


def toy_crossings(spec: ModelSpec, bounds: SearchBounds = SearchBounds()) -> list[CrossingPair]:
    """Cross-parity crossings inside each partner set, plus the Coulomb-toy reflections."""
    if not spec.is_toy:
        raise ValueError("toy spec required")
    A = spec["A"]
    N = bounds.n_r_max
    out = []

    def emit(n1, q1, n2, q2, br, cond):
        if not (0 <= n1 <= N and 0 <= n2 <= N) or (n1, q1) == (n2, q2):
            return
        a, b = toy_labels(n1, q1), toy_labels(n2, q2)
        la, lb = _real_level(spec, a, br), _real_level(spec, b, br)
        if la is not None and lb is not None:
            out.append(_pair(a, br, b, br, cond, la))

    if spec.variant is Variant.OscillatorToy:
        rules = (("+", A + 0.5, OT_PLUS), ("-", A - 0.5, OT_MINUS))
        for br, off, cond in rules:
            d = _integer_offset(off)
            if d is not None and d >= 0:
                for n1 in range(N + 1):
                    emit(n1, 1, n1 + d, -1, br, cond)
        return _dedupe(out)
    for br, off, cond in (("+", 2 * A + 1, CT_PLUS), ("-", 2 * A - 1, CT_MINUS)):
        d = _integer_offset(off)
        if d is not None and d >= 0:
            for n1 in range(N + 1):
                emit(n1, 1, n1 + d, -1, br, cond)
    for br, total, cond in (("+", 2 * A, CT_PLUS_REFLECT), ("-", 2 * A - 2, CT_MINUS_REFLECT)):
        t = _integer_offset(total)
        if t is not None:
            for n in range(N + 1):
                emit(n, -1, t - n, -1, br, cond)
    return _dedupe(out)


def _states_and_branches(spec, bounds):
    v = spec.variant
    if v in (Variant.CoulombI, Variant.OscillatorII):
        return dirac_states(bounds), ("+",)
    if v is Variant.OscillatorI:
        return dirac_states(bounds), ("+", "-")
    if v in (Variant.CoulombII, Variant.OscillatorIII):
        return doublet_states(bounds), ("+", "-")
    return toy_states(bounds), ("+", "-")


def _same_lambda(ea: float, eb: float, m: float) -> bool:
    la, lb = ea * ea - m * m, eb * eb - m * m
    return abs(la - lb) <= BRUTE_LAMBDA_RTOL * max(abs(la), abs(lb))


def brute_force_crossings(spec: ModelSpec, bounds: SearchBounds = SearchBounds(),
                          rtol: float = BRUTE_RTOL) -> list[CrossingPair]:
    """All RealBound pairs with equal energy inside one branch set, by direct comparison."""
    states, branches = _states_and_branches(spec, bounds)
    out = []
    for br in branches:
        levels = [(qn, lvl) for qn in states if (lvl := _real_level(spec, qn, br)) is not None]
        levels.sort(key=lambda t: t[1].energy)
        for i, (a, la) in enumerate(levels):
            for b, lb in levels[i + 1:]:
                scale = max(abs(la.energy), abs(lb.energy), spec.m, 1e-300)
                if lb.energy - la.energy > rtol * scale:
                    break
                if not _same_lambda(la.energy, lb.energy, spec.m):
                    continue
                out.append(_pair(a, br, b, br, "brute-force", la))
    return _dedupe(out)


def crossings(spec: ModelSpec, bounds: SearchBounds = SearchBounds()) -> list[CrossingPair]:
    """Dispatch to the model's condition-based enumerator."""
    v = spec.variant
    if v is Variant.CoulombI:
        return coulomb1_crossings(spec, bounds)
    if v is Variant.OscillatorI:
        return oscillator1_crossings(spec, bounds)
    if v is Variant.OscillatorII:
        return oscillator2_crossings(spec, bounds)
    if spec.is_toy:
        return toy_crossings(spec, bounds)
    raise NotImplementedError(f"{v.value} has no crossing enumerator")


def relative_gap(pair: CrossingPair, spec: ModelSpec) -> float:
    la = _level(spec, pair.state_a, pair.branch_a)
    lb = _level(spec, pair.state_b, pair.branch_b)
    if la is None or lb is None or not (la.is_real and lb.is_real):
        return math.inf
    return abs(la.energy - lb.energy) / max(abs(la.energy), abs(lb.energy), spec.m, 1e-300)
