import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from diraclab.catalog import Classification, EnergyLevel, ModelSpec, QuantumNumbers
from diraclab.effective import EffectiveProblem, EigenvalueMap
from diraclab.oracle import (
    GridPolicy,
    GridSpec,
    OracleError,
    TridiagonalOperator,
    assemble_operator,
    decay_radius,
    eigenvalues_by_index,
    lowest_eigenvalues,
    select_exponent,
    self_consistent_energy,
    sturm_count,
    verify_level,
)
from diraclab.problems import model_problem
from diraclab.spectra import energy_levels


def free_problem(c=0.0, potential=None, exponent=None, **kw):
    pot = potential or (lambda r, E: np.zeros_like(r))
    return EffectiveProblem(c, pot, EigenvalueMap(1.0), False, core_exponent=exponent, **kw)


def box_errors(n):
    grid = GridSpec(1e-12, math.pi + 1e-12, n)
    op = assemble_operator(free_problem(), 0.0, grid)
    vals = np.array(lowest_eigenvalues(op, 3))
    return grid.h, np.abs(vals - np.array([1.0, 4.0, 9.0]))


def random_tridiagonal(rng, n):
    diag = rng.normal(size=n) * 10
    off = rng.normal(size=n - 1)
    return TridiagonalOperator(diag, off, np.arange(n, dtype=float), "dirichlet")


def dense(op):
    return np.diag(op.diag) + np.diag(op.off, 1) + np.diag(op.off, -1)


# --- discretisation -------------------------------------------------------------

def test_dirichlet_stencil_is_second_difference():
    grid = GridSpec(1.0, 2.0, 101)
    op = assemble_operator(free_problem(potential=lambda r, E: r), 0.0, grid)
    h = grid.h
    assert op.size == 99
    np.testing.assert_allclose(op.diag, 2 / h**2 + grid.nodes[1:-1])
    np.testing.assert_allclose(op.off, -1 / h**2)


def test_box_eigenvalues_converge_at_second_order():
    h1, e1 = box_errors(401)
    h2, e2 = box_errors(801)
    order = np.log(e1 / e2) / np.log(h1 / h2)
    assert np.all(np.abs(order - 2.0) < 0.1)
    assert np.all(e1 < 9 * np.array([1, 4, 9]) ** 2 * h1**2 / 12 * 1.1)


def test_factored_scheme_is_symmetric_positive_for_free_core():
    grid = GridSpec.cell_centred(30.0, 600)
    prob = free_problem(c=2.0, potential=lambda r, E: 0.25 * r**2, exponent=2.0)
    op = assemble_operator(prob, 0.0, grid, scheme="factored", exponent=2.0)
    assert op.scheme == "factored"
    assert np.all(op.off < 0)
    # 3D oscillator with frequency 1/2: lambda = 2 n_r + l + 3/2
    vals = np.array(lowest_eigenvalues(op, 3))
    np.testing.assert_allclose(vals, [2.5, 4.5, 6.5], rtol=1e-3)


def test_factored_scheme_error_quarters_under_halving():
    prob = free_problem(c=2.0, potential=lambda r, E: 0.25 * r**2, exponent=2.0)
    errors = []
    for n in (400, 800, 1600):
        op = assemble_operator(prob, 0.0, GridSpec.cell_centred(16.0, n), scheme="factored", exponent=2.0)
        errors.append(abs(lowest_eigenvalues(op, 1)[0] - 2.5))
    ratios = [errors[0] / errors[1], errors[1] / errors[2]]
    assert all(3.8 <= q <= 4.2 for q in ratios), ratios


def test_factored_scheme_needs_exponent():
    with pytest.raises(ValueError):
        assemble_operator(free_problem(), 0.0, GridSpec.cell_centred(1.0, 200), scheme="factored")


def test_unknown_scheme_rejected():
    with pytest.raises(ValueError):
        assemble_operator(free_problem(), 0.0, GridSpec(0.1, 1.0, 200), scheme="spectral")


def test_complex_potential_rejected():
    prob = free_problem(potential=lambda r, E: 1j * r)
    with pytest.raises(OracleError):
        assemble_operator(prob, 0.0, GridSpec(0.1, 1.0, 200))


def test_grid_validation():
    with pytest.raises(ValueError):
        GridSpec(0.0, 1.0, 200)
    with pytest.raises(ValueError):
        GridSpec(0.1, 1.0, 10)
    g = GridSpec.cell_centred(2.0, 200)
    assert g.refined().n_points == 400
    assert math.isclose(g.refined().h, g.h / 2)


# --- Sturm counting ---------------------------------------------------------------

@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), n=st.integers(2, 60))
def test_sturm_count_equals_dense_count(seed, n):
    rng = np.random.default_rng(seed)
    op = random_tridiagonal(rng, n)
    exact = np.linalg.eigvalsh(dense(op))
    gaps = np.diff(exact)
    probes = exact[:-1] + gaps / 2
    counts = sturm_count(op, probes)
    np.testing.assert_array_equal(counts, np.arange(1, n))
    assert sturm_count(op, exact[0] - 1.0) == 0
    assert sturm_count(op, exact[-1] + 1.0) == n


def test_sturm_count_on_discrete_laplacian_is_exact():
    n = 500
    grid = GridSpec(1e-12, 1.0 + 1e-12, n + 2)
    op = assemble_operator(free_problem(), 0.0, grid)
    k = np.arange(1, n + 1)
    exact = 4 / grid.h**2 * np.sin(k * np.pi / (2 * (n + 1))) ** 2
    mids = (exact[:-1] + exact[1:]) / 2
    np.testing.assert_array_equal(sturm_count(op, mids), k[:-1])


def test_eigenvalues_by_index_certified(rng):
    op = random_tridiagonal(rng, 80)
    exact = np.linalg.eigvalsh(dense(op))
    np.testing.assert_allclose(eigenvalues_by_index(op, 10, 20), exact[10:21], atol=1e-10)
    with pytest.raises(ValueError):
        eigenvalues_by_index(op, 5, 100)


# --- core exponents and radii -------------------------------------------------------

def test_select_exponent_regular():
    s, note = select_exponent(2.0, None)
    assert s == 2.0 and note == "regular"


def test_select_exponent_fall_to_centre():
    s, note = select_exponent(-0.3, None)
    assert s is None and "fall to the centre" in note


def test_select_exponent_second_root_branches():
    c = 1.3 * 0.3  # roots 1.3 and -0.3
    s, note = select_exponent(c, -0.3)
    assert math.isclose(s, -0.3) and "non-Friedrichs" in note
    s, note = select_exponent(2.0, -1.0)  # integer gap
    assert s == 2.0 and "integer" in note
    c = 1.7 * 0.7  # roots 1.7 and -0.7
    s, note = select_exponent(c, -0.7)
    assert s is None and "square integrable" in note


def test_select_exponent_rejects_non_root():
    with pytest.raises(ValueError):
        select_exponent(2.0, 0.5)


def test_decay_radius_for_oscillator():
    prob = free_problem(potential=lambda r, E: r**2)
    r_max = decay_radius(prob, 0.0, 3.0)
    # integral of sqrt(r^2 - 3) from sqrt 3 reaches 20 near r ~ 6.6
    assert 6.0 < r_max < 7.5


def test_decay_radius_unbound():
    prob = free_problem(potential=lambda r, E: -1 / r)
    with pytest.raises(OracleError):
        decay_radius(prob, 0.0, 0.5)
    with pytest.raises(OracleError):
        decay_radius(free_problem(potential=lambda r, E: np.full_like(r, 5.0)), 0.0, 1.0)


# --- verification -------------------------------------------------------------------

def coulomb_level(n_r, kappa, b=-1.0, a=0.0):
    spec = ModelSpec.create("CoulombI", 1.0, a=a, b=b)
    qn = QuantumNumbers.from_kappa(n_r, kappa)
    return spec, qn, energy_levels(spec, qn)[0]


def test_verify_level_hydrogen_like():
    spec, qn, level = coulomb_level(2, -1)
    rep = verify_level(model_problem(spec, qn), level)
    assert rep.converged
    assert math.isclose(rep.analytic_lambda, -0.64)
    assert rep.rel_residual < 1e-8


def test_verify_level_detects_wrong_energy():
    spec, qn, level = coulomb_level(2, -1)
    wrong = EnergyLevel(0.65, Classification.RealBound, qn)
    rep = verify_level(model_problem(spec, qn), wrong)
    assert not rep.converged
    assert "no numerical eigenvalue" in rep.diagnostic


def test_verify_level_needs_real_level():
    spec, qn, _ = coulomb_level(2, -1)
    level = EnergyLevel(complex(0.5, 0.1), Classification.Collapsed, qn)
    with pytest.raises(ValueError):
        verify_level(model_problem(spec, qn), level)


def test_verify_level_dirichlet_policy():
    spec = ModelSpec.create("OscillatorI", 1.0, b=1.0)
    qn = QuantumNumbers.from_kappa(0, -1)
    level = energy_levels(spec, qn, "+")[0]
    rep = verify_level(model_problem(spec, qn), level,
                       GridPolicy(scheme="dirichlet", tol=1e-5, n_points=4000, r_max=12.0))
    assert rep.converged


def test_self_consistent_energy_reaches_fixed_point():
    spec, qn, level = coulomb_level(2, -1)
    E = self_consistent_energy(model_problem(spec, qn), 1, 0.55, GridPolicy(n_points=2000))
    assert abs(E - 0.6) < 1e-5


def test_self_consistent_energy_energy_independent_single_step():
    spec = ModelSpec.create("OscillatorI", 1.0, b=2.0)
    qn = QuantumNumbers.from_kappa(1, 1)
    level = energy_levels(spec, qn, "+")[0]
    E = self_consistent_energy(model_problem(spec, qn), 1, 1.0, GridPolicy(n_points=2000))
    assert abs(E - level.energy) < 1e-5
