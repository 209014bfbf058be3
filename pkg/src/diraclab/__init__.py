"""Closed-form spectra, crossings and SUSY signatures of the radial Dirac
equation with position-dependent mass, checked against a finite-difference
Sturm-Liouville oracle."""

__version__ = "0.1.0"

from diraclab.catalog import (
    Classification,
    EnergyLevel,
    ModelSpec,
    QuantumNumbers,
    Variant,
    effective_kappa,
    make_quantum_numbers,
    principal_numbers,
)

__all__ = [
    "Classification",
    "EnergyLevel",
    "ModelSpec",
    "QuantumNumbers",
    "Variant",
    "effective_kappa",
    "make_quantum_numbers",
    "principal_numbers",
]
