"""Acceptance criteria, one test per criterion.

Each test logs a ``PASS``/``FAIL`` line (with wall time) that the terminal
summary prints under "acceptance criteria"; the same line is also printed
to stdout, visible with ``pytest -s``.
"""
import contextlib
import math
import time
from fractions import Fraction

import numpy as np
import pytest
from conftest import NP_PHI

from twinspin import linop
from twinspin.correlations import (DensityMatrix, factorization_gap, joint_spin_zero_distribution,
                                   max_agreement_probability, product_state, sample_outcomes)
from twinspin.linop import Matrix, Vector, residual_norm
from twinspin.scalar import EXACT, FLOAT, SQRT2, SQRT3
from twinspin.spin import (TWO_SPINS, Direction, component_along, dot_LS, j_projectors, rotation,
                           singlet, singlet_projector, total_J, two_spins)
from twinspin.theorem import (certifying_set, classify_twin_state, commutator_residuals,
                              contraction_identity_check, in_joint_kernel, joint_kernel, random_set,
                              satisfies_anticommutator_constraints, singlet_overlap, twin_functional)


@contextlib.contextmanager
def criterion(log, number, title, limit=None):
    start = time.perf_counter()
    status = "FAIL"
    detail = ""
    try:
        yield
        elapsed = time.perf_counter() - start
        if limit is not None and elapsed >= limit:
            detail = f" (runtime {elapsed:.2f}s exceeds {limit}s)"
            raise AssertionError(f"criterion {number} took {elapsed:.2f}s, limit {limit}s")
        status = "PASS"
    finally:
        elapsed = time.perf_counter() - start
        line = f"[{status}] criterion {number:>2}: {title} ({elapsed:.2f}s){detail}"
        log.append(line)
        print(line)


def test_criterion_01_twin_condition_on_singlet(acceptance_log):
    with criterion(acceptance_log, 1, "twin functional vanishes on the singlet", limit=1.0):
        rho = DensityMatrix.from_vector(singlet(EXACT))
        for n in certifying_set(EXACT):
            assert twin_functional(rho, n) == 0
        rho_f = DensityMatrix(singlet_projector(FLOAT), validate=False)
        rng = np.random.default_rng(1)
        worst = max(twin_functional(rho_f, Direction.random(rng)) for _ in range(1000))
        assert worst < 1e-12


def test_criterion_02_strong_theorem_kernel(acceptance_log):
    with criterion(acceptance_log, 2, "joint kernel is exactly the singlet ray", limit=1.0):
        basis = joint_kernel(certifying_set(EXACT))
        assert len(basis) == 1
        assert singlet_overlap(basis) == 1
        basis = joint_kernel(random_set(50, np.random.default_rng(2)), tol=1e-10)
        assert len(basis) == 1
        assert singlet_overlap(basis) >= 1 - 1e-10


def test_criterion_03_ls_spectrum(acceptance_log):
    with criterion(acceptance_log, 3, "L.S spectrum {1 x5, -1 x3, -2 x1} and projector traces 5, 3, 1"):
        w = linop.hermitian_eigen(dot_LS(FLOAT), 1e-10).eigenvalues
        expected = np.array([-2, -1, -1, -1, 1, 1, 1, 1, 1], dtype=float)
        assert np.max(np.abs(w - expected)) < 1e-10
        p = j_projectors(EXACT)
        assert [linop.trace(p.p2), linop.trace(p.p1), linop.trace(p.p0)] == [5, 3, 1]


def test_criterion_04_contraction_identities(acceptance_log):
    with criterion(acceptance_log, 4, "contraction identities (exact zero, float < 1e-12)"):
        lhs, rhs = contraction_identity_check(EXACT)
        assert lhs == 0.0 and rhs == 0.0
        lhs, rhs = contraction_identity_check(FLOAT)
        assert lhs < 1e-12 and rhs < 1e-12


def test_criterion_05_commutators_and_casimir(acceptance_log):
    with criterion(acceptance_log, 5, "commutation relations and L^2 = S^2 = 2I hold exactly"):
        L, S = two_spins(EXACT)
        two = linop.identity(TWO_SPINS, EXACT) * 2
        assert L.casimir() == two and S.casimir() == two
        residuals = commutator_residuals(EXACT)
        mixed = [k for k in residuals if k.startswith("[L") and ",S" in k]
        assert len(mixed) == 9
        assert all(v == 0.0 for v in residuals.values())


def test_criterion_06_kernel_equivalence(acceptance_log):
    with criterion(acceptance_log, 6, "kernel membership <=> anticommutator constraints, 200 random states"):
        rng = np.random.default_rng(6)
        dirs = certifying_set(FLOAT)
        p0 = j_projectors(FLOAT).p0
        inside = 0
        for _ in range(200):
            raw = rng.standard_normal(9) + 1j * rng.standard_normal(9)
            psi = Vector(raw / np.linalg.norm(raw), shape=TWO_SPINS)
            projected = p0 @ psi
            for state in (psi, projected):
                a = in_joint_kernel(state, dirs, 1e-10)
                b = satisfies_anticommutator_constraints(state, 1e-10)
                assert a == b
                inside += a
        # both directions exercised: all projected states are inside, generic ones outside
        assert inside == 200


def test_criterion_07_counterexamples(acceptance_log):
    with criterion(acceptance_log, 7, "|00>, I/9 and the 0.999-singlet mixture are not twinned"):
        zz = np.zeros(9, dtype=complex)
        zz[4] = 1
        n = Direction(1 / math.sqrt(2), 0.0, 1 / math.sqrt(2))
        assert abs(twin_functional(Vector(zz, shape=TWO_SPINS), n) - 0.5) <= 1e-12
        mixed = DensityMatrix.maximally_mixed(TWO_SPINS)
        verdict = classify_twin_state(mixed, tol=1e-10)
        assert verdict.label == "NOT_TWINNED" and verdict.witness is not None
        near = 0.999 * np.outer(NP_PHI, NP_PHI.conj()) + 0.001 * np.eye(9) / 9
        verdict = classify_twin_state(DensityMatrix(Matrix(near, shape=TWO_SPINS)), tol=1e-10)
        assert verdict.label == "NOT_TWINNED" and verdict.witness is not None


def test_criterion_08_independence_and_agreement_bound(acceptance_log):
    with criterion(acceptance_log, 8, "pure twins are independent of a third spin; max agreement 2/3"):
        twins_exact = DensityMatrix.from_vector(singlet(EXACT))
        rho_c = DensityMatrix(Matrix([[Fraction(1, 2), Fraction(1, 6), 0], [Fraction(1, 6), Fraction(1, 3), 0],
                                      [0, 0, Fraction(1, 6)]], backend=EXACT))
        assert factorization_gap(product_state(twins_exact, rho_c)) == 0.0

        rng = np.random.default_rng(8)
        twins = DensityMatrix(singlet_projector(FLOAT), validate=False)
        for _ in range(10):
            g = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
            c = g @ g.conj().T
            rho = product_state(twins, DensityMatrix(Matrix(c / np.trace(c).real)))
            assert factorization_gap(rho) < 1e-12
            dirs = [Direction.random(rng) for _ in range(3)]
            dist = joint_spin_zero_distribution(rho, dirs)
            assert dist.independence_gap([0, 1], [2]) < 1e-12
            assert dist.independence_gap([0], [2]) < 1e-12

        h = 1 / SQRT2
        for n0 in (Direction(h, 0, h), Direction(SQRT3 / 3, SQRT3 / 3, SQRT3 / 3)):
            bound = max_agreement_probability(n0)
            assert abs(bound.value.to_float() - 2 / 3) <= 1e-12
            assert not bound.cloning_feasible
        assert abs(max_agreement_probability(Direction.random(rng)).value - 2 / 3) <= 1e-12

        n = Direction(h, 0, h)
        pair = joint_spin_zero_distribution(twins_exact, [n, n])
        assert pair.outcomes == {"yy": Fraction(1, 3), "nn": Fraction(2, 3), "yn": 0, "ny": 0}
        assert pair.discord() == 0
        assert joint_spin_zero_distribution(twins_exact, [n, None])["y"] == Fraction(1, 3)


def test_criterion_09_monte_carlo(acceptance_log):
    with criterion(acceptance_log, 9, "10^5 seeded samples: no discord, yy frequency near 1/3", limit=5.0):
        rho = DensityMatrix(singlet_projector(FLOAT), validate=False)
        n = Direction.random(np.random.default_rng(9))
        stats = sample_outcomes(rho, [n, n], 100_000, seed=9)
        assert stats.discord_count() == 0
        bound = 3 * math.sqrt((1 / 3) * (2 / 3) / 100_000)
        assert abs(stats.frequency("yy") - 1 / 3) < bound


def test_criterion_10_rotation_invariance(acceptance_log):
    with criterion(acceptance_log, 10, "singlet is annihilated by n.J and invariant under rotations"):
        phi = singlet(EXACT)
        J = total_J(EXACT)
        h = 1 / SQRT2
        field_dirs = list(certifying_set(EXACT)) + [
            Direction(SQRT3 / 3, SQRT3 / 3, -SQRT3 / 3),
            Direction(Fraction(3, 5), 0, Fraction(4, 5)),
            Direction(h / 2 * SQRT3, h / 2, h),
        ]
        for n in field_dirs:
            assert (component_along(J, n) @ phi).is_zero()
        rng = np.random.default_rng(10)
        phi_f = singlet(FLOAT)
        for _ in range(100):
            u = rotation(Direction.random(rng), rng.uniform(-2 * math.pi, 2 * math.pi))
            assert (u @ phi_f - phi_f).norm() < 1e-10
