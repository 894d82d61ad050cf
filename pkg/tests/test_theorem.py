import math

import numpy as np
import pytest
import sympy as sp
from conftest import NP_PHI, np_defect, np_random_density, np_random_state, np_unit

from twinspin import linop
from twinspin.correlations import DensityMatrix
from twinspin.linop import Vector, residual_norm
from twinspin.scalar import EXACT, FLOAT, SQRT2
from twinspin.spin import TWO_SPINS, Direction, dot_LS, j_projectors, product_state, singlet
from twinspin.theorem import (AXIS_PAIRS, DirectionSet, anticommutator_residual, certifying_set,
                              classify_twin_state, contraction_identity_check, contraction_operators,
                              defect, elimination_factors, in_joint_kernel, joint_kernel, random_set,
                              satisfies_anticommutator_constraints, singlet_overlap, twin_functional,
                              verify_strong_theorem)

H = 1 / SQRT2
XZ = Direction(H, 0, H)


def sympy_kernel_of_certifying_set():
    """Independent exact oracle: sympy nullspace of the stacked 54 x 9 defect system."""
    r = 1 / sp.sqrt(2)
    sx = r * sp.Matrix([[0, 1, 0], [1, 0, 1], [0, 1, 0]])
    sy = r * sp.Matrix([[0, -sp.I, 0], [sp.I, 0, -sp.I], [0, sp.I, 0]])
    sz = sp.diag(1, 0, -1)
    eye = sp.eye(3)
    dirs = [(1, 0, 0), (0, 1, 0), (0, 0, 1), (r, r, 0), (0, r, r), (r, 0, r)]
    blocks = []
    for nx, ny, nz in dirs:
        ns = nx * sx + ny * sy + nz * sz
        sq = sp.expand(ns * ns)
        blocks.append(sp.kronecker_product(sq, eye) - sp.kronecker_product(eye, sq))
    return sp.Matrix.vstack(*blocks).nullspace()


def test_sympy_oracle_agrees_with_exact_kernel():
    ref = sympy_kernel_of_certifying_set()
    assert len(ref) == 1
    ref = [sp.nsimplify(x) for x in ref[0]]
    ours = joint_kernel(certifying_set(EXACT))
    assert len(ours) == 1
    k = ours[0]
    # both bases are rays: compare after scaling to k[4] = ref[4]
    scale = sp.nsimplify(ref[4]) / int(k.entries[4].coefficients[0])
    assert [sp.nsimplify(int(v.coefficients[0]) * scale) for v in k.entries] == ref
    assert all(v.is_rational() for v in k.entries)


def test_defect_z_is_diagonal(backend):
    d = defect(Direction.axis("z"), backend)
    assert d == linop.diag([0, 1, 0, -1, 0, -1, 0, 1, 0], shape=TWO_SPINS, backend=backend)


def test_defect_random_properties(rng):
    phi = singlet()
    for _ in range(100):
        v = np_unit(rng)
        d = defect(Direction(*v))
        assert np.max(np.abs(d.entries - np_defect(v))) < 1e-14
        assert linop.hermiticity_gap(d) < 1e-14
        assert abs(linop.trace(d)) < 1e-14
        assert (d @ phi).norm() < 1e-14


def test_defect_annihilates_singlet_exactly():
    phi = singlet(EXACT)
    for n in certifying_set(EXACT):
        assert (defect(n) @ phi).is_zero()
        assert linop.trace(defect(n)) == 0


def test_twin_functional_examples(backend):
    rho_phi = DensityMatrix.from_vector(singlet(backend))
    for n in certifying_set(backend):
        value = twin_functional(rho_phi, n)
        assert value == 0 if backend == "exact" else abs(value) < 1e-15
    value = twin_functional(DensityMatrix.from_vector(product_state(0, 0, backend)), XZ.on(backend))
    if backend == "exact":
        assert value == EXACT.scalar(1) / 2
    else:
        assert abs(value - 0.5) < 1e-12
    mixed = DensityMatrix.maximally_mixed(TWO_SPINS, backend)
    value = twin_functional(mixed, Direction.axis("z", backend))
    if backend == "exact":
        assert value == EXACT.scalar(4) / 9
    else:
        assert abs(value - 4 / 9) < 1e-15


def test_twin_functional_matches_oracle(rng):
    for _ in range(50):
        v = np_unit(rng)
        rho = np_random_density(9, rng)
        d = np_defect(v)
        expected = np.trace(rho @ d @ d).real
        got = twin_functional(DensityMatrix(linop.Matrix(rho, shape=TWO_SPINS)), Direction(*v))
        assert got >= 0
        assert abs(got - expected) < 1e-12
        # zero on the singlet at every sampled direction
        assert twin_functional(singlet(), Direction(*v)) < 1e-14


def test_twin_functional_rejects_wrong_shape():
    with pytest.raises(linop.ShapeError):
        twin_functional(DensityMatrix.maximally_mixed((3, 3, 3)), Direction.axis("z"))


def test_anticommutator_residual_examples(backend):
    phi = singlet(backend)
    for i, j in AXIS_PAIRS:
        assert anticommutator_residual(phi, i, j).is_zero(1e-14)
    zero = Vector(np.zeros(9), shape=TWO_SPINS)
    assert anticommutator_residual(zero, "x", "y").is_zero()
    r = anticommutator_residual(product_state(0, 0, backend), "x", "z")
    # Lx**2 + Lz**2 acts identically on both factors of |00>, so r = -2 D((x+z)/sqrt2)|00>
    t = twin_functional(DensityMatrix.from_vector(product_state(0, 0, backend)), XZ.on(backend))
    if backend == "exact":
        assert r.norm_squared() == 4 * t
    else:
        assert abs(r.norm_squared() - 4 * t) < 1e-12
    assert abs(r.norm() ** 2 - 2) < 1e-12


def test_anticommutator_residual_matches_direct_application():
    psi = np.zeros(9, dtype=complex)
    psi[4] = 1
    # literal-matrix oracle for the twin functional value 1/2
    d = np_defect(np.array([1, 0, 1]) / math.sqrt(2))
    assert abs(np.linalg.norm(d @ psi) ** 2 - 0.5) < 1e-12


def test_contraction_identities(backend):
    lhs, rhs = contraction_identity_check(backend)
    if backend == "exact":
        assert lhs == 0.0 and rhs == 0.0
    else:
        assert lhs < 1e-12 and rhs < 1e-12
    ops = contraction_operators(FLOAT)
    w = linop.hermitian_eigen(ops["lhs_closed"]).eigenvalues
    assert np.allclose(w, [1, 1, 1, 3, 3, 3, 3, 3, 6], atol=1e-10)


def test_elimination_factors(backend):
    factors, gap = elimination_factors(backend)
    assert factors == pytest.approx({0: 0.0, 1: -5.0, 2: -3.0}, abs=1e-12)
    assert gap <= (0.0 if backend == "exact" else 1e-12)


def test_elimination_operator_singular_values():
    x = dot_LS()
    e = x @ x * 2 + x - linop.identity(TWO_SPINS) * 6
    p = j_projectors()
    for proj, floor in ((p.p2, 3), (p.p1, 5)):
        basis = linop.null_space(linop.identity(TWO_SPINS) - proj)
        restricted = np.column_stack([(e @ v).entries for v in basis])
        assert np.min(np.linalg.svd(restricted, compute_uv=False)) >= floor - 1e-10
    assert residual_norm(e @ p.p0) < 1e-12


def test_joint_kernel_examples(rng):
    assert len(joint_kernel(DirectionSet((Direction.axis("z"),)))) == 5
    ker = joint_kernel(certifying_set(EXACT))
    assert len(ker) == 1 and singlet_overlap(ker) == 1
    ker = joint_kernel(random_set(50, rng))
    assert len(ker) == 1
    k = ker[0]
    assert abs(np.vdot(NP_PHI, k.entries)) ** 2 / k.norm() ** 2 >= 1 - 1e-10


def test_axes_alone_do_not_certify():
    axes = DirectionSet(tuple(Direction.axis(a) for a in "xyz"))
    assert len(joint_kernel(axes)) > 1


@pytest.mark.parametrize("trial", range(4))
def test_kernel_equivalence_property(rng, trial):
    dirs = certifying_set(FLOAT)
    phi = singlet()
    for _ in range(25):
        psi = Vector(np_random_state(9, rng), shape=TWO_SPINS)
        assert in_joint_kernel(psi, dirs) == satisfies_anticommutator_constraints(psi)
        assert not in_joint_kernel(psi, dirs)
        # near-singlet states: both sides must flip together
        for eps in (0.0, 1e-13, 1e-6):
            mixed = phi + psi * eps
            assert in_joint_kernel(mixed, dirs) == satisfies_anticommutator_constraints(mixed)


def test_kernel_equivalence_exact():
    dirs = certifying_set(EXACT)
    for m1 in (1, 0, -1):
        for m2 in (1, 0, -1):
            psi = product_state(m1, m2, EXACT)
            assert in_joint_kernel(psi, dirs) == satisfies_anticommutator_constraints(psi) is False
    phi = singlet(EXACT)
    assert in_joint_kernel(phi, dirs) and satisfies_anticommutator_constraints(phi)


def test_verify_strong_theorem_exact():
    report = verify_strong_theorem()
    assert report.verdict == "pass", report.failing_checks
    assert report.kernel_dimension == 1 and report.singlet_overlap == 1
    for name in report.RESIDUALS:
        assert getattr(report, name) == 0.0
    assert report.subspace_dims == {0: 1, 1: 3, 2: 5}


def test_verify_strong_theorem_single_axis_fails():
    report = verify_strong_theorem(DirectionSet((Direction.axis("z"),)))
    assert report.verdict == "fail"
    assert report.kernel_dimension == 5
    assert "kernel_dimension" in report.failing_checks


def test_verify_strong_theorem_float(rng):
    report = verify_strong_theorem(random_set(50, rng), tol=1e-10)
    assert report.verdict == "pass", report.failing_checks
    assert report.singlet_overlap >= 1 - 1e-10


def test_verify_strong_theorem_too_tight_tolerance_fails(rng):
    report = verify_strong_theorem(random_set(50, rng), tol=1e-30)
    assert report.verdict == "fail"


def test_classify_twin_state(backend):
    verdict = classify_twin_state(DensityMatrix.from_vector(singlet(backend)))
    assert verdict.label == "TWINNED" and verdict.conclusion_holds
    assert verdict.singlet_gap <= (0.0 if backend == "exact" else 1e-12)
    verdict = classify_twin_state(DensityMatrix.maximally_mixed(TWO_SPINS, backend))
    assert verdict.label == "NOT_TWINNED" and verdict.witness is not None
    verdict = classify_twin_state(DensityMatrix.from_vector(product_state(0, 0, backend)))
    assert verdict.label == "NOT_TWINNED"
    assert verdict.max_functional == pytest.approx(0.5, abs=1e-12)


def test_classify_near_singlet_mixture():
    phi = np.outer(NP_PHI, NP_PHI.conj())
    rho = DensityMatrix(linop.Matrix(0.999 * phi + 0.001 * np.eye(9) / 9, shape=TWO_SPINS))
    verdict = classify_twin_state(rho, tol=1e-10)
    assert verdict.label == "NOT_TWINNED"
    assert verdict.witness is not None
    # linearity: functional = 0.001 * Tr(D**2) / 9, and Tr(D(z)**2) = 4
    assert verdict.functionals[2] == pytest.approx(0.001 * 4 / 9, rel=1e-9)


def test_direction_set_validation():
    with pytest.raises(ValueError):
        DirectionSet(())
    assert len(certifying_set() + certifying_set()) == 12
    assert certifying_set().exact and not certifying_set(FLOAT).exact
