"""Finite-difference Sturm-Liouville oracle for the effective radial problems.

Two discretisations share one symmetric tridiagonal back end:

* ``dirichlet``: the plain 3-point Laplacian on the interior nodes with
  phi = 0 at both ends of the grid.
* ``factored``: phi = r^s chi on a cell-centred grid, which turns the
  problem into -(r^2s chi')' + r^2s W chi = lambda r^2s chi with a
  zero-flux condition at r = 0. s picks the near-origin root, including the
  non-Friedrichs one when both roots are square integrable.

Eigenvalues come from LAPACK bisection and are certified against an
independent Sturm-sequence count.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import eigh_tridiagonal

from diraclab.catalog import Classification, EnergyLevel
from diraclab.effective import EffectiveProblem, RadialWavefunction

logger = logging.getLogger(__name__)


class OracleError(RuntimeError):
    pass


class ConvergenceError(OracleError):
    def __init__(self, message, trace):
        super().__init__(message)
        self.trace = list(trace)


@dataclass(frozen=True)
class GridSpec:
    r_min: float
    r_max: float
    n_points: int

    def __post_init__(self):
        if not (0 < self.r_min < self.r_max):
            raise ValueError("need 0 < r_min < r_max")
        if self.n_points < 100:
            raise ValueError("n_points must be >= 100")

    @classmethod
    def cell_centred(cls, r_max: float, n_points: int) -> GridSpec:
        """n cells of width r_max/n covering [0, r_max]; nodes at cell centres."""
        h = r_max / n_points
        return cls(h / 2, r_max - h / 2, n_points)

    @property
    def h(self) -> float:
        return (self.r_max - self.r_min) / (self.n_points - 1)

    @property
    def nodes(self) -> np.ndarray:
        return np.linspace(self.r_min, self.r_max, self.n_points)

    def refined(self) -> GridSpec:
        """Same domain, cell width halved (cell-centred layout)."""
        r_edge = self.r_max + self.h / 2
        return GridSpec.cell_centred(r_edge, 2 * self.n_points)


@dataclass(frozen=True)
class TridiagonalOperator:
    diag: np.ndarray
    off: np.ndarray
    nodes: np.ndarray
    scheme: str
    exponent: float | None = None

    @property
    def size(self) -> int:
        return self.diag.size


def _sample(problem: EffectiveProblem, r, E):
    values = problem.centrifugal_strength / r**2 + np.asarray(problem.potential(r, E))
    if np.iscomplexobj(values):
        if np.any(values.imag != 0):
            raise OracleError("oracle needs a real potential")
        values = values.real
    bad = ~np.isfinite(values)
    if bad.any():
        raise OracleError(f"non-finite potential at r = {r[bad][0]:.6g}")
    return values


def assemble_operator(problem: EffectiveProblem, E_probe: float, grid: GridSpec,
                      scheme: str = "dirichlet", exponent: float | None = None) -> TridiagonalOperator:
    """Symmetric tridiagonal discretisation of -d2 + c/r^2 + U(r; E_probe)."""
    E = E_probe if problem.energy_dependent else (0.0 if E_probe is None else E_probe)
    h = grid.h
    if scheme == "dirichlet":
        r = grid.nodes[1:-1]
        diag = 2.0 / h**2 + _sample(problem, r, E)
        off = np.full(r.size - 1, -1.0 / h**2)
        return TridiagonalOperator(diag, off, r, scheme)
    if scheme != "factored":
        raise ValueError(f"unknown scheme {scheme!r}")
    if exponent is None:
        raise ValueError("factored scheme needs the core exponent s")
    s = exponent
    r = grid.nodes
    if grid.r_min - h / 2 < -1e-12 * h:
        raise ValueError("factored scheme needs r_min >= h/2")
    faces = r + h / 2
    log_r, log_f = np.log(r), np.log(faces)
    up = np.exp(2 * s * (log_f - log_r))  # p_{i+1/2} / w_i
    up[-1] *= 2.0  # Dirichlet on the outer face via antisymmetric ghost node
    down = np.zeros_like(up)
    down[1:] = np.exp(2 * s * (log_f[:-1] - log_r[1:]))  # p_{i-1/2} / w_i; zero flux at the inner face
    c = problem.centrifugal_strength
    U = _sample(problem, r, E) - c / r**2  # the pure potential part
    diag = (up + down) / h**2 + U + (c - s * (s - 1)) / r**2
    off = -np.exp(2 * s * (log_f[:-1] - 0.5 * (log_r[:-1] + log_r[1:]))) / h**2
    if not np.all(np.isfinite(diag)) or not np.all(np.isfinite(off)):
        raise OracleError("factored operator overflowed; reduce r_max or the core exponent")
    return TridiagonalOperator(diag, off, r, scheme, s)


def sturm_count(op: TridiagonalOperator, x) -> np.ndarray | int:
    """Number of eigenvalues strictly below x, by counting negative LDL^T pivots."""
    scalar = np.ndim(x) == 0
    x = np.atleast_1d(np.asarray(x, dtype=float))
    d, e2 = op.diag, op.off**2
    # a vanishing pivot is nudged negative before it is counted (as LAPACK's pivmin)
    pivmin = np.finfo(float).tiny * max(1.0, float(e2.max(initial=0.0)))
    q = d[0] - x
    q = np.where(np.abs(q) < pivmin, -pivmin, q)
    count = (q < 0).astype(int)
    for i in range(1, d.size):
        q = d[i] - x - e2[i - 1] / q
        q = np.where(np.abs(q) < pivmin, -pivmin, q)
        count += q < 0
    return int(count[0]) if scalar else count


def _bisect(op, index, lo, hi, tol):
    while hi - lo > tol * max(1.0, abs(lo), abs(hi)):
        mid = 0.5 * (lo + hi)
        if sturm_count(op, mid) > index:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


def eigenvalues_by_index(op: TridiagonalOperator, lo: int, hi: int) -> np.ndarray:
    """Eigenvalues lo..hi (inclusive, ascending), each certified by Sturm counts."""
    if lo < 0 or hi >= op.size or lo > hi:
        raise ValueError(f"index range {lo}..{hi} outside matrix of size {op.size}")
    vals = eigh_tridiagonal(op.diag, op.off, eigvals_only=True, select="i", select_range=(lo, hi))
    vals = np.sort(vals)
    norm = np.abs(op.diag).max() + 2 * np.abs(op.off).max()
    # pivot rounding in the Sturm recurrence is of order eps * ||T||
    delta = 1e-9 * np.maximum(1.0, np.abs(vals)) + 100 * np.finfo(float).eps * norm
    below = sturm_count(op, vals - delta)
    above = sturm_count(op, vals + delta)
    idx = np.arange(lo, hi + 1)
    ok = (below <= idx) & (above >= idx + 1)
    if not ok.all():
        for k in np.nonzero(~ok)[0]:
            logger.warning("eigenvalue %d failed Sturm certification; re-bisecting", idx[k])
            vals[k] = _bisect(op, idx[k], -norm, norm, 1e-14)
    return vals


def lowest_eigenvalues(op: TridiagonalOperator, k: int) -> list[float]:
    if k < 1:
        raise ValueError("k must be >= 1")
    if k > op.size:
        raise ValueError(f"k = {k} exceeds matrix dimension {op.size}")
    return eigenvalues_by_index(op, 0, k - 1).tolist()


def select_exponent(c: float, s_label: float | None) -> tuple[float | None, str]:
    """Which near-origin power to impose for a labelled solution.

    Returns (s, note); s is None when the labelled solution is not square
    integrable at the origin.
    """
    if c < -0.25:
        return None, "centrifugal strength below -1/4: fall to the centre"
    s_reg = 0.5 + math.sqrt(c + 0.25)
    if s_label is None or abs(s_label - s_reg) <= 1e-9 * (1 + abs(s_reg)):
        return s_reg, "regular"
    s_irr = 1.0 - s_reg
    if abs(s_label - s_irr) > 1e-9 * (1 + abs(s_irr)):
        raise ValueError(f"core exponent {s_label} does not solve s(s-1) = {c}")
    gap = s_reg - s_irr
    if abs(gap - round(gap)) < 1e-9:
        return s_reg, "label uses the second root at an integer root gap; regular branch imposed"
    if s_irr <= -0.5:
        return None, f"labelled solution ~ r^{s_irr:.4g} is not square integrable at the origin"
    return s_irr, "non-Friedrichs branch"


def decay_radius(problem: EffectiveProblem, E: float, lam: float, target: float = 20.0) -> float:
    """Outer radius where the WKB decay integral beyond the last turning point reaches target."""
    r = np.geomspace(1e-6, 1e6, 40001) * problem.length_scale
    with np.errstate(all="ignore"):
        V = problem.full_potential(r, E)
    if np.iscomplexobj(V):
        V = V.real
    allowed = np.nonzero(V < lam)[0]
    if allowed.size == 0:
        raise OracleError(f"lambda = {lam:.6g} lies below the effective potential everywhere")
    i_t = allowed[-1]
    if i_t >= r.size - 2:
        raise OracleError(f"lambda = {lam:.6g} is not below the potential at large r (unbound)")
    kappa = np.sqrt(np.maximum(V[i_t:] - lam, 0.0))
    integral = np.concatenate([[0.0], np.cumsum(0.5 * (kappa[1:] + kappa[:-1]) * np.diff(r[i_t:]))])
    j = np.searchsorted(integral, target)
    r_max = r[min(i_t + j, r.size - 1)]
    return float(max(r_max, 1.5 * r[i_t]))


@dataclass(frozen=True)
class GridPolicy:
    n_points: int = 4000
    n_max: int = 64000
    tol: float = 1e-6
    r_max: float | None = None
    scheme: str = "factored"
    decay_target: float = 20.0


@dataclass(frozen=True)
class OracleReport:
    analytic_lambda: float
    matched_lambda: float
    abs_residual: float
    rel_residual: float
    grid: GridSpec | None
    converged: bool
    level_index: int
    coarse_lambda: float = math.nan
    fine_lambda: float = math.nan
    core_exponent: float | None = None
    tolerance: float = 1e-6
    diagnostic: str = ""


def _failure(lam, diagnostic, tol, grid=None, s=None):
    return OracleReport(lam, math.nan, math.inf, math.inf, grid, False, -1,
                        core_exponent=s, tolerance=tol, diagnostic=diagnostic)


def _nearest(op, lam):
    idx = sturm_count(op, lam)
    lo, hi = max(0, idx - 1), min(op.size - 1, idx)
    vals = eigenvalues_by_index(op, lo, hi)
    k = int(np.argmin(np.abs(vals - lam)))  # argmin keeps the lower index on ties
    return lo + k, float(vals[k])


def _scheme_args(policy, s):
    if policy.scheme == "dirichlet":
        return {"scheme": "dirichlet"}
    return {"scheme": "factored", "exponent": s}


def _grid_for(policy, r_max, n):
    if policy.scheme == "dirichlet":
        return GridSpec(1e-9 * r_max, r_max, n)
    return GridSpec.cell_centred(r_max, n)


def verify_level(problem: EffectiveProblem, level: EnergyLevel,
                 grid_policy: GridPolicy | None = None) -> OracleReport:
    """Fixed-point check: put E into U(r; E), diagonalise, match lambda(E).

    Grids of n and 2n cells are Richardson-extrapolated; n doubles until the
    relative residual meets the tolerance or ``n_max`` is reached.
    """
    policy = grid_policy or GridPolicy()
    if level.classification is not Classification.RealBound:
        raise ValueError("verify_level needs a RealBound level")
    E = level.energy
    lam = float(problem.eigenvalue_map.to_lambda(E))
    tol = policy.tol
    s, note = select_exponent(problem.centrifugal_strength, problem.core_exponent)
    if s is None:
        return _failure(lam, note, tol)
    try:
        r_max = policy.r_max or decay_radius(problem, E, lam, policy.decay_target)
    except OracleError as exc:
        return _failure(lam, str(exc), tol, s=s)
    scale = max(abs(lam), problem.energy_scale)
    n = policy.n_points
    grid = _grid_for(policy, r_max, n)
    try:
        idx_c, lam_c = _nearest(assemble_operator(problem, E, grid, **_scheme_args(policy, s)), lam)
        while True:
            fine = _grid_for(policy, r_max, 2 * n)
            idx_f, lam_f = _nearest(assemble_operator(problem, E, fine, **_scheme_args(policy, s)), lam)
            lam_r = (4 * lam_f - lam_c) / 3
            abs_res = abs(lam_r - lam)
            rel_res = abs_res / scale
            richardson_ok = abs(lam_r - lam_f) <= 1e-3 * scale and idx_c == idx_f
            if (rel_res <= tol and richardson_ok) or 4 * n > policy.n_max:
                break
            if richardson_ok and abs_res > 100 * abs(lam_r - lam_f) and rel_res > 10 * tol:
                break  # grids agree on a different eigenvalue; refining will not help
            n, grid, idx_c, lam_c = 2 * n, fine, idx_f, lam_f
    except OracleError as exc:
        return _failure(lam, str(exc), tol, s=s)
    converged = rel_res <= tol and richardson_ok
    diagnostic = "" if note == "regular" else note
    if rel_res > 10 * tol:
        diagnostic = (diagnostic + "; " if diagnostic else "") + "no numerical eigenvalue within 10x tolerance"
    return OracleReport(lam, lam_r, abs_res, rel_res, fine, converged, idx_f, lam_c, lam_f, s, tol,
                        diagnostic)


def _richardson_lambda(problem, E, r_max, n, index, s, policy):
    out = []
    for cells in (n, 2 * n):
        op = assemble_operator(problem, E, _grid_for(policy, r_max, cells), **_scheme_args(policy, s))
        out.append(float(eigenvalues_by_index(op, index, index)[0]))
    return (4 * out[1] - out[0]) / 3


def self_consistent_energy(problem: EffectiveProblem, level_index: int, E_init: float,
                           grid_policy: GridPolicy | None = None, damping: float = 0.5,
                           max_iter: int = 200, rtol: float = 1e-8) -> float:
    """Damped iteration E <- map^-1(lambda_index(E)) for energy-dependent problems."""
    policy = grid_policy or GridPolicy()
    s, note = select_exponent(problem.centrifugal_strength, problem.core_exponent)
    if s is None:
        raise OracleError(note)
    trace = [E_init]

    def step(E):
        try:
            return problem.eigenvalue_map.to_energy(lam_of(E))
        except (ValueError, OracleError) as exc:
            raise ConvergenceError(f"iteration left the branch at E = {E}: {exc}", trace) from exc

    r_max = policy.r_max
    if r_max is None:
        provisional = 40.0 * problem.length_scale
        lam0 = _richardson_lambda(problem, E_init, provisional, policy.n_points // 2, level_index, s, policy)
        try:
            r_max = decay_radius(problem, E_init, lam0, policy.decay_target) * 1.5
        except OracleError as exc:
            raise ConvergenceError(str(exc), trace) from exc

    def lam_of(E):
        return _richardson_lambda(problem, E, r_max, policy.n_points, level_index, s, policy)

    if not problem.energy_dependent:
        return step(E_init)
    E = E_init
    for _ in range(max_iter):
        E_new = (1 - damping) * E + damping * step(E)
        trace.append(E_new)
        if abs(E_new - E) <= rtol * (1 + abs(E)):
            return E_new
        E = E_new
    raise ConvergenceError(f"no fixed point after {max_iter} iterations", trace)


def bound_state(problem: EffectiveProblem, E: float, index: int, grid_policy: GridPolicy | None = None,
                r_max: float | None = None) -> RadialWavefunction:
    """Eigenvector ``index`` as phi on the grid, normalised to unit L2 norm."""
    policy = grid_policy or GridPolicy()
    s, note = select_exponent(problem.centrifugal_strength, problem.core_exponent)
    if s is None:
        raise OracleError(note)
    grid = _grid_for(policy, r_max or 40.0 * problem.length_scale, policy.n_points)
    op = assemble_operator(problem, E, grid, **_scheme_args(policy, s))
    _, vec = eigh_tridiagonal(op.diag, op.off, select="i", select_range=(index, index))
    v = vec[:, 0]
    if op.scheme == "factored":
        v = v * (op.nodes / op.nodes[-1]) ** s  # undo the symmetric scaling: phi = r^s chi
    v = v / math.sqrt(np.sum(v * v) * grid.h)
    return RadialWavefunction(op.nodes, v)
