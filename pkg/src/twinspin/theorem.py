"""Twinned spin-1 pairs are forced into the singlet.

Two spin-1 systems are twinned when spin-zero measurements along any common
direction ``n`` always agree.  In operator form the state must be
annihilated by the defect ``D(n) = (n.L)**2 - (n.S)**2`` for every ``n``.
This module computes that joint kernel and the supporting operator
identities, in both backends, and folds the results into a
:class:`TheoremReport`.

The universal quantifier over ``n`` is discharged by a finite certifying
set: the three axes fix the ``i == j`` anticommutator constraints and the
three diagonal bisectors fix the ``i != j`` ones.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from . import linop
from .correlations import DensityMatrix, as_density
from .linop import (ConvergenceError, DEFAULT_TOL, Matrix, NotHermitianError, Vector,
                    residual_norm)
from .scalar import EXACT, FLOAT, ExactScalar, SQRT2, get_backend
from .spin import (AXES, LS_EIGENVALUE, TWO_SPINS, Direction, component_along, dot_LS, embed,
                   j_projectors, make_spin, singlet, total_J, two_spins)

AXIS_PAIRS = tuple(itertools.combinations_with_replacement(range(3), 2))


@dataclass(frozen=True)
class DirectionSet:
    directions: tuple

    def __post_init__(self):
        dirs = tuple(self.directions)
        if not dirs:
            raise ValueError("a direction set needs at least one direction")
        object.__setattr__(self, "directions", dirs)

    def __iter__(self):
        return iter(self.directions)

    def __len__(self):
        return len(self.directions)

    def __getitem__(self, k):
        return self.directions[k]

    @property
    def exact(self) -> bool:
        return all(d.exact for d in self.directions)

    def on(self, backend) -> "DirectionSet":
        return DirectionSet(tuple(d.on(backend) for d in self.directions))

    def __add__(self, other: "DirectionSet") -> "DirectionSet":
        return DirectionSet(self.directions + other.directions)


def certifying_set(backend=EXACT) -> DirectionSet:
    """Axes plus the bisectors (e1+e2)/sqrt2, (e2+e3)/sqrt2, (e1+e3)/sqrt2."""
    h = 1 / SQRT2
    dirs = [Direction.axis(a) for a in AXES]
    dirs += [Direction(h, h, 0), Direction(0, h, h), Direction(h, 0, h)]
    return DirectionSet(tuple(d.on(backend) for d in dirs))


def random_set(count: int, rng: np.random.Generator) -> DirectionSet:
    return DirectionSet(tuple(Direction.random(rng) for _ in range(count)))


def _square_along(n: Direction, backend) -> Matrix:
    ns = component_along(make_spin(1, backend), n)
    return ns @ ns


def defect(n: Direction, backend=None) -> Matrix:
    """``D(n) = (n.L)**2 - (n.S)**2`` on the two-spin space."""
    backend = get_backend(backend if backend is not None else n.backend)
    sq = _square_along(n, backend)
    return embed(sq, 0, TWO_SPINS) - embed(sq, 1, TWO_SPINS)


def twin_functional(rho, n: Direction):
    """``Tr(rho D(n)**2)``; nonnegative, zero iff ``D(n) rho = 0``.

    Returns a float, or a real ExactScalar for exact states.
    """
    rho = as_density(rho)
    if rho.shape != TWO_SPINS:
        raise linop.ShapeError(f"twin functional needs a two-spin state, got {rho.shape.dims}")
    d = defect(n, rho.backend)
    d2 = d @ d
    value = linop._sum(rho.entries.T * d2.entries, rho.backend)
    if rho.exact:
        return value.real()
    return float(value.real)


def anticommutator_residual(psi: Vector, i, j) -> Vector:
    """``[(S_i S_j + S_j S_i) - (L_i L_j + L_j L_i)] |psi>``."""
    L, S = two_spins(psi.backend)
    i = AXES.index(i) if isinstance(i, str) else i
    j = AXES.index(j) if isinstance(j, str) else j
    op = linop.anticommutator(S[i], S[j]) - linop.anticommutator(L[i], L[j])
    return op @ psi


def max_anticommutator_residual(psi: Vector) -> float:
    """Largest of the six anticommutator residual norms, relative to ``||psi||``."""
    norm = psi.norm()
    if norm == 0.0:
        return 0.0
    return max(residual_vec_norm(anticommutator_residual(psi, i, j)) for i, j in AXIS_PAIRS) / norm


def residual_vec_norm(v: Vector) -> float:
    if v.exact:
        return 0.0 if v.is_zero() else max(v.norm(), 5e-324)
    return v.norm()


def contraction_operators(backend=FLOAT) -> dict:
    """Operators on both sides of the contracted anticommutator identity.

    ``sum_ij L_i L_j {S_i, S_j}`` against ``2 (L.S)**2 + L.S``, and
    ``sum_ij L_i L_j {L_i, L_j}`` against ``2 (L**2)**2 - L**2`` and ``6 I``.
    """
    backend = get_backend(backend)
    L, S = two_spins(backend)
    x = dot_LS(backend)
    l2 = L.casimir()
    mixed = None
    same = None
    for i in range(3):
        for j in range(3):
            lilj = L[i] @ L[j]
            m = lilj @ linop.anticommutator(S[i], S[j])
            s = lilj @ linop.anticommutator(L[i], L[j])
            mixed = m if mixed is None else mixed + m
            same = s if same is None else same + s
    two = backend.scalar(2)
    return {
        "lhs_sum": mixed,
        "lhs_closed": x @ x * two + x,
        "rhs_sum": same,
        "rhs_closed": l2 @ l2 * two - l2,
        "rhs_value": linop.identity(TWO_SPINS, backend) * backend.scalar(6),
    }


def contraction_identity_check(backend=FLOAT) -> tuple:
    """Frobenius gaps ``(residual_lhs, residual_rhs)``; both exactly 0.0 in the exact backend."""
    ops = contraction_operators(backend)
    lhs = residual_norm(ops["lhs_sum"] - ops["lhs_closed"])
    rhs = max(residual_norm(ops["rhs_sum"] - ops["rhs_closed"]),
              residual_norm(ops["rhs_closed"] - ops["rhs_value"]))
    return lhs, rhs


def joint_kernel(dirs: DirectionSet, tol: float = DEFAULT_TOL, backend=None) -> list:
    """Basis of the common kernel of ``D(n)`` over ``dirs``.

    Exact: elimination on the stacked ``9k x 9`` system, unnormalized basis.
    Float: orthonormal kernel of ``sum_n D(n)**2``.
    """
    backend = get_backend(backend if backend is not None else (EXACT if dirs.exact else FLOAT))
    dirs = dirs.on(backend)
    if backend.exact:
        stacked = np.vstack([defect(n, backend).entries for n in dirs])
        return linop.exact_null_space(stacked, TWO_SPINS)
    total = None
    for n in dirs:
        d = defect(n, backend)
        total = d @ d if total is None else total + d @ d
    return linop.null_space(total, tol)


def in_joint_kernel(psi: Vector, dirs: DirectionSet, tol: float = DEFAULT_TOL) -> bool:
    """``max_n ||D(n) psi|| <= tol ||psi||`` (exactly zero for exact vectors)."""
    dirs = dirs.on(psi.backend)
    if psi.exact:
        return all((defect(n, psi.backend) @ psi).is_zero() for n in dirs)
    norm = psi.norm()
    return all((defect(n, psi.backend) @ psi).norm() <= tol * norm for n in dirs)


def satisfies_anticommutator_constraints(psi: Vector, tol: float = DEFAULT_TOL) -> bool:
    if psi.exact:
        return all(anticommutator_residual(psi, i, j).is_zero() for i, j in AXIS_PAIRS)
    return max_anticommutator_residual(psi) <= tol


def singlet_overlap(basis: Sequence[Vector]):
    """``<Phi| P_K |Phi> / <Phi|Phi>`` for the span ``K`` of ``basis``; 1 iff the singlet lies in it.

    For a one-dimensional kernel this is ``|<Phi|k>|**2 / (<k|k> <Phi|Phi>)``.
    Exact bases give an exact real value.
    """
    if not basis:
        return 0.0
    backend = basis[0].backend
    phi = singlet(backend)
    proj = linop.projector_onto(list(basis))
    value = phi.inner(proj @ phi) / phi.norm_squared()
    return value.real() if backend.exact else float(value.real)


def _to_float(x) -> float:
    return x.to_float().real if isinstance(x, ExactScalar) else float(x)


@dataclass
class TheoremReport:
    """Outcome of the full verification run.

    Residuals are Frobenius norms.  In the exact backend each residual is
    0.0 iff the corresponding identity holds exactly, and the pass threshold
    is 0; in the float backend the threshold is ``tol``.
    """

    backend: str
    tol: float
    n_directions: int
    casimir_gap: Optional[float] = None
    commutator_gap: Optional[float] = None
    kernel_anticommutator_gap: Optional[float] = None
    contraction_gap: Optional[float] = None
    spectrum_gap: Optional[float] = None
    projector_gap: Optional[float] = None
    elimination_gap: Optional[float] = None
    singlet_defect_residual: Optional[float] = None
    elimination_factors: dict = field(default_factory=dict)
    kernel_dimension: Optional[int] = None
    singlet_overlap: Optional[float] = None
    spectrum: list = field(default_factory=list)
    subspace_dims: dict = field(default_factory=dict)
    errors: dict = field(default_factory=dict)

    RESIDUALS = ("casimir_gap", "commutator_gap", "kernel_anticommutator_gap", "contraction_gap",
                 "spectrum_gap", "projector_gap", "elimination_gap", "singlet_defect_residual")

    @property
    def threshold(self) -> float:
        return 0.0 if self.backend == "exact" else self.tol

    @property
    def failing_checks(self) -> list:
        failing = []
        for name in self.RESIDUALS:
            value = getattr(self, name)
            if value is None or not value <= self.threshold:
                failing.append(name)
        if self.kernel_dimension != 1:
            failing.append("kernel_dimension")
        if self.singlet_overlap is None or not self.singlet_overlap >= 1 - self.threshold:
            failing.append("singlet_overlap")
        if self.subspace_dims != {2: 5, 1: 3, 0: 1}:
            failing.append("subspace_dims")
        for name in self.errors:
            if name not in failing:
                failing.append(name)
        return failing

    @property
    def passed(self) -> bool:
        return not self.failing_checks

    @property
    def verdict(self) -> str:
        return "pass" if self.passed else "fail"

    def to_dict(self) -> dict:
        out = {name: getattr(self, name) for name in self.RESIDUALS}
        out.update(
            backend=self.backend,
            tol=self.tol,
            n_directions=self.n_directions,
            kernel_dimension=self.kernel_dimension,
            singlet_overlap=self.singlet_overlap,
            spectrum=[[v, m] for v, m in self.spectrum],
            subspace_dims={str(k): v for k, v in sorted(self.subspace_dims.items(), reverse=True)},
            elimination_factors={str(k): v for k, v in sorted(self.elimination_factors.items(), reverse=True)},
            errors=dict(self.errors),
            failing_checks=self.failing_checks,
            verdict=self.verdict,
        )
        return out


def casimir_gap(backend=FLOAT) -> float:
    L, S = two_spins(backend)
    two = linop.identity(TWO_SPINS, backend) * get_backend(backend).scalar(2)
    return max(residual_norm(L.casimir() - two), residual_norm(S.casimir() - two))


def commutator_residuals(backend=FLOAT) -> dict:
    """Norms of ``[A_x, A_y] - i A_z`` (cyclic) for ``A = L, S, J`` and of ``[L_i, S_j]``."""
    backend = get_backend(backend)
    L, S = two_spins(backend)
    J = total_J(backend)
    out = {}
    for name, t in (("L", L), ("S", S), ("J", J)):
        for a, b, c in ((0, 1, 2), (1, 2, 0), (2, 0, 1)):
            key = f"[{name}{AXES[a]},{name}{AXES[b]}]-i{name}{AXES[c]}"
            out[key] = residual_norm(linop.commutator(t[a], t[b]) - t[c] * backend.i)
    for a in range(3):
        for b in range(3):
            out[f"[L{AXES[a]},S{AXES[b]}]"] = residual_norm(linop.commutator(L[a], S[b]))
    return out


def projector_residuals(backend=FLOAT) -> dict:
    """Idempotence, hermiticity, orthogonality, completeness, and commutation with ``L.S``."""
    backend = get_backend(backend)
    P = j_projectors(backend)
    x = dot_LS(backend)
    out = {}
    for j, p in zip((0, 1, 2), P):
        out[f"p{j}^2-p{j}"] = residual_norm(p @ p - p)
        out[f"p{j}-p{j}^H"] = residual_norm(p - p.adjoint())
        out[f"[p{j},L.S]"] = residual_norm(linop.commutator(p, x))
        out[f"L.S p{j}-({LS_EIGENVALUE[j]})p{j}"] = residual_norm(x @ p - p * backend.scalar(LS_EIGENVALUE[j]))
    for (a, pa), (b, pb) in itertools.combinations(enumerate(P), 2):
        out[f"p{a}p{b}"] = residual_norm(pa @ pb)
    out["p0+p1+p2-I"] = residual_norm(P.p0 + P.p1 + P.p2 - linop.identity(TWO_SPINS, backend))
    return out


def subspace_dims(backend=FLOAT) -> dict:
    """``{j: trace(p_j)}``, the dimension of each total-j subspace."""
    out = {}
    for j, p in zip((0, 1, 2), j_projectors(backend)):
        tr = linop.trace(p)
        if isinstance(tr, ExactScalar):
            if not (tr.is_rational() and tr.coefficients[0].denominator == 1):
                raise ValueError(f"projector trace {tr} is not an integer")
            out[j] = int(tr.coefficients[0])
        else:
            out[j] = int(round(tr.real))
    return out


def ls_spectrum(backend=FLOAT, tol: float = DEFAULT_TOL) -> tuple:
    """``([(eigenvalue, multiplicity)], gap)`` for ``L.S``.

    Float: Jacobi eigenvalues, gap = max distance to {1, -1, -2}.  Exact:
    multiplicities from projector traces, gap = ``max ||L.S p_j - lambda_j p_j||``.
    """
    backend = get_backend(backend)
    if backend.exact:
        dims = subspace_dims(backend)
        res = projector_residuals(backend)
        gap = max(v for k, v in res.items() if k.startswith("L.S"))
        return sorted((float(LS_EIGENVALUE[j]), dims[j]) for j in dims), gap
    eig = linop.hermitian_eigen(dot_LS(backend), tol).eigenvalues
    expected = np.array(sorted([1.0] * 5 + [-1.0] * 3 + [-2.0]))
    gap = float(np.max(np.abs(eig - expected)))
    return linop.spectrum(dot_LS(backend), tol), gap


def elimination_factors(backend=FLOAT) -> tuple:
    """How ``2 (L.S)**2 + L.S - 6`` acts on each total-j subspace.

    Returns ``({j: c_j}, gap)`` where ``E p_j = c_j p_j``; ``c_2 = -3`` and
    ``c_1 = -5`` are nonzero, so those projections of a kernel state must
    vanish, while ``c_0 = 0`` leaves the singlet free.
    """
    backend = get_backend(backend)
    x = dot_LS(backend)
    e = x @ x * backend.scalar(2) + x - linop.identity(TWO_SPINS, backend) * backend.scalar(6)
    factors = {}
    gap = 0.0
    for j, p in zip((0, 1, 2), j_projectors(backend)):
        c = linop.trace(e @ p) / linop.trace(p)
        gap = max(gap, residual_norm(e @ p - p * c))
        if j == 0:
            gap = max(gap, abs(_to_float(c.real() if isinstance(c, ExactScalar) else c.real)))
        factors[j] = _to_float(c.real() if isinstance(c, ExactScalar) else c.real)
    return factors, gap


def verify_strong_theorem(dirs: Optional[DirectionSet] = None, tol: float = DEFAULT_TOL,
                          backend=None) -> TheoremReport:
    """Run every check and collect a :class:`TheoremReport`; failures are recorded, not raised."""
    if dirs is None:
        dirs = certifying_set(backend if backend is not None else EXACT)
    backend = get_backend(backend if backend is not None else (EXACT if dirs.exact else FLOAT))
    dirs = dirs.on(backend)
    report = TheoremReport(backend=backend.name, tol=tol, n_directions=len(dirs))

    def attempt(name, fn):
        try:
            return fn()
        except (ConvergenceError, NotHermitianError, ArithmeticError, ValueError) as exc:
            report.errors[name] = f"{type(exc).__name__}: {exc}"
            return None

    report.casimir_gap = attempt("casimir_gap", lambda: casimir_gap(backend))
    comm = attempt("commutator_gap", lambda: commutator_residuals(backend))
    report.commutator_gap = max(comm.values()) if comm else None
    contraction = attempt("contraction_gap", lambda: contraction_identity_check(backend))
    report.contraction_gap = max(contraction) if contraction else None
    proj = attempt("projector_gap", lambda: projector_residuals(backend))
    report.projector_gap = max(proj.values()) if proj else None
    report.subspace_dims = attempt("subspace_dims", lambda: subspace_dims(backend)) or {}
    spectral = attempt("spectrum_gap", lambda: ls_spectrum(backend, tol))
    if spectral:
        report.spectrum, report.spectrum_gap = spectral
    elim = attempt("elimination_gap", lambda: elimination_factors(backend))
    if elim:
        report.elimination_factors, report.elimination_gap = elim
        if min(abs(report.elimination_factors[1]), abs(report.elimination_factors[2])) <= report.threshold:
            report.errors["elimination_factors"] = "2(L.S)^2 + L.S - 6 vanishes on a j != 0 subspace"

    phi = singlet(backend)
    report.singlet_defect_residual = attempt(
        "singlet_defect_residual",
        lambda: max(residual_vec_norm(defect(n, backend) @ phi) for n in dirs) / phi.norm())
    basis = attempt("kernel_dimension", lambda: joint_kernel(dirs, tol, backend))
    if basis is not None:
        report.kernel_dimension = len(basis)
        report.singlet_overlap = _to_float(singlet_overlap(basis)) if basis else 0.0
        report.kernel_anticommutator_gap = max((max_anticommutator_residual(v) for v in basis), default=0.0)
    return report


@dataclass
class TwinVerdict:
    twinned: bool
    max_functional: float
    witness: Optional[Direction]
    singlet_gap: Optional[float]
    conclusion_holds: Optional[bool]
    functionals: list

    @property
    def label(self) -> str:
        return "TWINNED" if self.twinned else "NOT_TWINNED"


def classify_twin_state(rho, dirs: Optional[DirectionSet] = None, tol: float = DEFAULT_TOL) -> TwinVerdict:
    """Decide whether ``rho`` passes the twin test on every direction in ``dirs``.

    When it does, the gap ``||rho - |Phi><Phi| ||_F`` is reported and
    ``conclusion_holds`` says whether it is within ``tol`` (exactly zero
    for exact states).  Otherwise the direction with the largest functional
    is returned as a witness.
    """
    rho = as_density(rho)
    if dirs is None:
        dirs = certifying_set(rho.backend)
    dirs = dirs.on(rho.backend)
    values = [twin_functional(rho, n) for n in dirs]
    floats = [_to_float(v) for v in values]
    if rho.exact:
        twinned = all(v.is_zero() for v in values)
    else:
        twinned = max(floats) <= tol
    k = int(np.argmax(floats))
    if not twinned:
        return TwinVerdict(False, floats[k], dirs[k], None, None, floats)
    phi = singlet(rho.backend)
    gap = residual_norm(rho.matrix - phi.outer(phi) / phi.norm_squared())
    holds = gap == 0.0 if rho.exact else gap <= tol
    return TwinVerdict(True, floats[k], None, gap, holds, floats)
