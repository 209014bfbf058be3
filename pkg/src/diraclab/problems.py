"""EffectiveProblem instances for each model, built through the decoupling.

The near-origin exponent attached to each problem is the one implied by the
state's labels (kappa~ + 1, L + 1, sigma + 1, ...), so the oracle imposes the
same Frobenius branch the closed form assumes.
"""
from __future__ import annotations

import math

from diraclab.catalog import (
    ModelSpec,
    QuantumNumbers,
    Variant,
    coulomb2_L,
    effective_kappa,
    oscillator3_L,
    quasi_sigma,
)
from diraclab.effective import (
    EffectiveProblem,
    FieldSet,
    PowerLaw,
    build_kg_problem,
    build_lower_problem,
    build_upper_problem,
)


def _real(spec: ModelSpec, name: str) -> float:
    z = complex(spec[name])
    if z.imag != 0:
        raise ValueError(f"the oracle needs real couplings; {name} = {z}")
    return z.real


def coulomb1_problem(spec: ModelSpec, qn: QuantumNumbers) -> EffectiveProblem:
    a, b, m = spec["a"], _real(spec, "b"), spec.m
    kt = effective_kappa(spec, qn)
    fields = FieldSet(V=PowerLaw({-1: b}), M=PowerLaw({-1: b}), A=PowerLaw({-1: a}), kappa=qn.kappa)
    base = build_upper_problem(fields, m)
    return base.with_core(kt * (kt + 1), kt + 1, energy_scale=max(m * m, 1e-12),
                          length_scale=1.0, label=f"CoulombI {qn}")


def oscillator1_problem(spec: ModelSpec, qn: QuantumNumbers) -> EffectiveProblem:
    b, m = spec["b"], spec.m
    fields = FieldSet(A=PowerLaw({1: b / 2}), kappa=qn.kappa)
    base = build_upper_problem(fields, m)
    return base.with_core(qn.ell * (qn.ell + 1), qn.ell + 1, energy_scale=b,
                          length_scale=1 / math.sqrt(b), label=f"OscillatorI {qn}")


def oscillator2_problem(spec: ModelSpec, qn: QuantumNumbers) -> EffectiveProblem:
    a, B, m = spec["a"], spec["B"], spec.m
    kt = effective_kappa(spec, qn)
    M = PowerLaw({2: B * B / 2})
    fields = FieldSet(V=M, M=M, A=PowerLaw({-1: a}), kappa=qn.kappa)
    base = build_upper_problem(fields, m)
    return base.with_core(kt * (kt + 1), kt + 1, energy_scale=B * max(1.0, math.sqrt(m)),
                          length_scale=1 / math.sqrt(B), label=f"OscillatorII {qn}")


def coulomb2_problem(spec: ModelSpec, qn: QuantumNumbers) -> EffectiveProblem:
    a1, a2, m = _real(spec, "alpha1"), _real(spec, "alpha2"), spec.m
    L = coulomb2_L(qn.ell, a1, a2)
    fields = FieldSet(V=PowerLaw({-1: a1}), M=PowerLaw({-1: a2}), kappa=qn.kappa, kg_gauge=True)
    base = build_kg_problem(fields, m)
    return base.with_core(L * (L + 1), L + 1, energy_scale=max(m * m, 1e-12),
                          length_scale=1.0, label=f"CoulombII {qn}")


def oscillator3_problem(spec: ModelSpec, qn: QuantumNumbers) -> EffectiveProblem:
    b1, b2, m = spec["beta1"], spec["beta2"], spec.m
    Lt = oscillator3_L(qn.ell, b1)
    fields = FieldSet(M=PowerLaw({-1: b1, 1: b2, 0: -m}), kappa=qn.kappa, kg_gauge=True)
    base = build_kg_problem(fields, m)
    return base.with_core(Lt * (Lt + 1), Lt + 1, energy_scale=b2,
                          length_scale=1 / math.sqrt(b2), label=f"OscillatorIII {qn}")


def toy_problem(spec: ModelSpec, omega: int, q: int) -> EffectiveProblem:
    """-d2 + A~^2 + omega A~' with A~ = -A/r + (B r/2 | B); omega = -1 is the upper component."""
    A, B, m = spec["A"], spec["B"], spec.m
    tail = PowerLaw({1: B / 2}) if spec.variant is Variant.OscillatorToy else PowerLaw.const(B)
    # kappa carries the -A/r part of A~ so the builders produce the A(A + omega)/r^2 core
    fields = FieldSet(A=tail, kappa=-A)
    base = build_upper_problem(fields, m) if omega == -1 else build_lower_problem(fields, m)
    sigma = quasi_sigma(A, omega, q)
    scale = B if spec.variant is Variant.OscillatorToy else B * B
    length = 1 / math.sqrt(B) if spec.variant is Variant.OscillatorToy else 1 / B
    return base.with_core(A * (A + omega), sigma + 1, energy_scale=scale, length_scale=length,
                          label=f"{spec.variant.value} omega={omega:+d} q={q:+d}")


def model_problem(spec: ModelSpec, qn: QuantumNumbers, branch: str = "+") -> EffectiveProblem:
    """The effective radial problem whose lambda = E^2 - m^2 the closed form predicts.

    ``branch`` fixes the sign of E in the eigenvalue map (for the toys it also
    selects omega).
    """
    sign = 1 if branch in ("+", "plus") else -1
    v = spec.variant
    if v is Variant.CoulombI:
        problem = coulomb1_problem(spec, qn)
    elif v is Variant.OscillatorI:
        problem = oscillator1_problem(spec, qn)
    elif v is Variant.OscillatorII:
        problem = oscillator2_problem(spec, qn)
    elif v is Variant.CoulombII:
        problem = coulomb2_problem(spec, qn)
    elif v is Variant.OscillatorIII:
        problem = oscillator3_problem(spec, qn)
    else:
        problem = toy_problem(spec, sign, qn.q)
    if sign == -1:
        from dataclasses import replace

        problem = replace(problem, eigenvalue_map=replace(problem.eigenvalue_map, sign=-1))
    return problem
