"""Density matrices, marginals, and spin-zero measurement statistics.

The point of this module is the independence statement: once the twins'
joint state is pure, any state of twins plus an outside spin is a product,
so the outside spin's answers carry no information about the twins'.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from . import linop
from .linop import DEFAULT_TOL, Matrix, SpaceShape, Vector, as_shape
from .scalar import EXACT, FLOAT, ExactScalar, get_backend
from .spin import Direction, make_spin, singlet_projector, spin_zero_projector

# eigenvalues down to -PSD_TOL are float noise, not invalidity
PSD_TOL = 1e-10
# probabilities at or below this are treated as zero when sampling
SAMPLE_CLIP = 1e-12


class InvalidStateError(ValueError):
    """Matrix is not a density matrix (not Hermitian, wrong trace, or not PSD)."""


def _real(x):
    """Real part as float (float backend) or as a real ExactScalar (exact backend)."""
    if isinstance(x, ExactScalar):
        return x.real()
    return float(complex(x).real)


class DensityMatrix:
    """Hermitian, unit-trace, positive semidefinite operator on a tensor space."""

    __slots__ = ("matrix",)

    def __init__(self, matrix: Matrix, tol: float = PSD_TOL, validate: bool = True):
        if not isinstance(matrix, Matrix):
            matrix = Matrix(matrix)
        if validate:
            _validate(matrix, tol)
        object.__setattr__(self, "matrix", matrix)

    def __setattr__(self, name, value):
        raise AttributeError("DensityMatrix is immutable")

    @classmethod
    def from_vector(cls, psi: Vector) -> "DensityMatrix":
        """``|psi><psi| / <psi|psi>``; exact for unnormalized exact vectors."""
        n2 = psi.norm_squared()
        if (n2.is_zero() if isinstance(n2, ExactScalar) else abs(n2) == 0.0):
            raise InvalidStateError("cannot build a state from the zero vector")
        return cls(psi.outer(psi) / n2, validate=False)

    @classmethod
    def maximally_mixed(cls, shape, backend=FLOAT) -> "DensityMatrix":
        shape = as_shape(shape)
        backend = get_backend(backend)
        return cls(linop.identity(shape, backend) * backend.scalar(Fraction(1, shape.total)), validate=False)

    @property
    def shape(self) -> SpaceShape:
        return self.matrix.shape

    @property
    def backend(self):
        return self.matrix.backend

    @property
    def exact(self) -> bool:
        return self.matrix.exact

    @property
    def entries(self) -> np.ndarray:
        return self.matrix.entries

    def to_float(self) -> "DensityMatrix":
        return DensityMatrix(self.matrix.to_float(), validate=False)

    def __repr__(self):
        return f"DensityMatrix(dims={self.shape.dims}, backend={self.backend.name})"


def _validate(m: Matrix, tol: float) -> None:
    if m.exact:
        if not (m - m.adjoint()).is_zero():
            raise InvalidStateError("density matrix is not Hermitian")
        if linop.trace(m) != 1:
            raise InvalidStateError(f"density matrix has trace {linop.trace(m)}, expected 1")
    else:
        gap = linop.hermiticity_gap(m)
        if gap > tol:
            raise InvalidStateError(f"density matrix is not Hermitian (gap {gap:.3g})")
        tr = linop.trace(m)
        if abs(tr - 1) > tol:
            raise InvalidStateError(f"density matrix has trace {tr.real:.17g}, expected 1")
    fm = m.to_float()
    herm = linop.Matrix._wrap((fm.entries + fm.entries.conj().T) / 2, fm.shape)
    lowest = linop.hermitian_eigen(herm, 1e-13).eigenvalues[0]
    if lowest < -tol:
        raise InvalidStateError(f"density matrix has negative eigenvalue {lowest:.3g}")


def as_density(state) -> DensityMatrix:
    if isinstance(state, DensityMatrix):
        return state
    if isinstance(state, Vector):
        return DensityMatrix.from_vector(state)
    return DensityMatrix(state)


def product_state(*rhos: DensityMatrix) -> DensityMatrix:
    return DensityMatrix(linop.tensor_all([r.matrix for r in rhos]), validate=False)


def _site_array(rho: DensityMatrix) -> np.ndarray:
    dims = rho.shape.dims
    return rho.entries.reshape(dims + dims)


def permute_sites(rho: DensityMatrix, order: Sequence[int]) -> DensityMatrix:
    """Reorder tensor factors so that new site ``k`` is old site ``order[k]``."""
    dims = rho.shape.dims
    order = tuple(order)
    if sorted(order) != list(range(len(dims))):
        raise ValueError(f"{order} is not a permutation of the sites of {dims}")
    n = len(dims)
    arr = _site_array(rho).transpose(order + tuple(n + k for k in order))
    shape = SpaceShape(tuple(dims[k] for k in order))
    return DensityMatrix(Matrix._wrap(arr.reshape(shape.total, shape.total).copy(), shape), validate=False)


def partial_trace(rho: DensityMatrix, keep) -> DensityMatrix:
    """Reduced state on the sites in ``keep`` (kept in ascending order)."""
    dims = rho.shape.dims
    keep = list(keep)
    if not keep or len(set(keep)) != len(keep) or any(not 0 <= k < len(dims) for k in keep):
        raise ValueError(f"bad site set {keep} for shape {dims}")
    keep.sort()
    drop = [k for k in range(len(dims)) if k not in keep]
    moved = permute_sites(rho, keep + drop)
    kd = math.prod(dims[k] for k in keep)
    td = math.prod(dims[k] for k in drop)
    arr = moved.entries.reshape(kd, td, kd, td)
    out = arr[:, 0, :, 0].copy()
    for t in range(1, td):
        out = out + arr[:, t, :, t]
    shape = SpaceShape(tuple(dims[k] for k in keep))
    return DensityMatrix(Matrix._wrap(out, shape), validate=False)


def purity(rho: DensityMatrix):
    """``Tr(rho**2)``: float, or a real ExactScalar in the exact backend."""
    # Tr(rho^2) = sum |rho_ij|^2 for Hermitian rho
    return _real(linop.frobenius_norm_squared(rho.matrix))


def is_pure(rho: DensityMatrix, tol: float = DEFAULT_TOL) -> bool:
    p = purity(rho)
    if isinstance(p, ExactScalar):
        return p == 1
    return p >= 1 - tol


def factorization_gap(rho_abc: DensityMatrix, cut=((0, 1), (2,))) -> float:
    """``|| rho - rho_block (x) rho_rest ||_F`` across a bipartition of the sites.

    Exact inputs give 0.0 iff the state is exactly a product.
    """
    block, rest = (tuple(sorted(part)) for part in cut)
    n = rho_abc.shape.sites
    if sorted(block + rest) != list(range(n)) or not block or not rest:
        raise ValueError(f"{cut} is not a bipartition of {n} sites")
    ordered = permute_sites(rho_abc, block + rest)
    product = linop.tensor(partial_trace(rho_abc, block).matrix, partial_trace(rho_abc, rest).matrix)
    return linop.residual_norm(ordered.matrix - product)


@dataclass(frozen=True)
class JointDistribution:
    """Probabilities of yes/no spin-zero answers, keyed by strings like ``"yn"``.

    ``sites`` lists which tensor factors were measured, in key order.
    """

    sites: tuple
    outcomes: dict

    def __getitem__(self, key: str):
        return self.outcomes[key]

    def marginal(self, positions: Sequence[int]) -> "JointDistribution":
        """Marginal over a subset of the measured sites (indices into the key)."""
        positions = tuple(positions)
        out = {}
        for key, p in self.outcomes.items():
            sub = "".join(key[k] for k in positions)
            out[sub] = out[sub] + p if sub in out else p
        return JointDistribution(tuple(self.sites[k] for k in positions), out)

    def discord(self):
        """Probability that not all measured sites give the same answer."""
        total = None
        for key, p in self.outcomes.items():
            if len(set(key)) > 1:
                total = p if total is None else total + p
        return total if total is not None else 0

    def agreement(self):
        """Probability that every measured site gives the same answer."""
        total = None
        for key, p in self.outcomes.items():
            if len(set(key)) == 1:
                total = p if total is None else total + p
        return total if total is not None else 0

    def as_floats(self) -> dict:
        return {k: (v.to_float().real if isinstance(v, ExactScalar) else float(v))
                for k, v in self.outcomes.items()}

    def independence_gap(self, left: Sequence[int], right: Sequence[int]) -> float:
        """``max |P(a, c) - P(a) P(c)|`` between two groups of measured sites.

        For exact probabilities the result is 0.0 iff every pair factorizes exactly.
        """
        pa = self.marginal(left).outcomes
        pc = self.marginal(right).outcomes
        joint = self.marginal(tuple(left) + tuple(right)).outcomes
        gap = 0.0
        for a, p_a in pa.items():
            for c, p_c in pc.items():
                diff = joint.get(a + c, 0) - p_a * p_c
                if isinstance(diff, ExactScalar):
                    size = 0.0 if diff.is_zero() else max(abs(diff.to_float()), 5e-324)
                else:
                    size = abs(diff)
                gap = max(gap, size)
        return gap


def joint_spin_zero_distribution(rho, dirs: Sequence[Optional[Direction]]) -> JointDistribution:
    """Born-rule distribution of spin-zero answers, one direction per site.

    A ``None`` direction leaves that site unmeasured.  Keys use ``y`` for
    "spin component is zero" and ``n`` otherwise.
    """
    rho = as_density(rho)
    dims = rho.shape.dims
    if len(dirs) != len(dims):
        raise linop.ShapeError(f"got {len(dirs)} directions for {len(dims)} sites")
    backend = rho.backend
    s = make_spin(1, backend)
    sites = []
    options = []
    for k, n in enumerate(dirs):
        eye = linop.identity(dims[k], backend)
        if n is None:
            options.append([eye])
            continue
        if dims[k] != 3:
            raise linop.ShapeError(f"site {k} has dimension {dims[k]}, spin-zero measurement needs 3")
        p0 = spin_zero_projector(s, n)
        sites.append(k)
        options.append([p0, eye - p0])
    outcomes = {}
    rho_t = rho.entries.T
    for combo in itertools.product(*options):
        key = "".join("y" if c is opt[0] else "n" for c, opt in zip(combo, options) if len(opt) == 2)
        proj = linop.tensor_all(list(combo))
        # Tr(rho P) = sum_ij rho_ji P_ij
        prob = linop._sum(rho_t * proj.entries, backend)
        outcomes[key] = _real(prob)
    return JointDistribution(tuple(sites), outcomes)


@dataclass(frozen=True)
class AgreementBound:
    value: object
    p_third_yes: object
    p_twins_yes: object
    argmax: str
    cloning_feasible: bool


def agreement_probability(rho_c: DensityMatrix, n0: Direction) -> object:
    """Probability that a third spin in state ``rho_c`` matches singlet twins, all measured along ``n0``."""
    backend = rho_c.backend
    rho = product_state(DensityMatrix(singlet_projector(backend), validate=False), rho_c)
    return joint_spin_zero_distribution(rho, [n0, n0, n0]).agreement()


def max_agreement_probability(n0: Direction, backend=None) -> AgreementBound:
    """Best chance that a third spin echoes twinned spins' answer along ``n0``.

    Twinned spins are in the singlet, so the third spin is independent of
    them and the agreement ``q*p + (1 - q)*(1 - p)`` is linear in its own
    yes-probability ``p``; ``q`` is the twins' yes-probability.  The maximum
    sits at an endpoint of ``[0, 1]``.
    """
    backend = get_backend(backend if backend is not None else n0.backend)
    twins = joint_spin_zero_distribution(DensityMatrix(singlet_projector(backend), validate=False),
                                         [n0, n0])
    q = twins["yy"]
    one = backend.scalar(1) if backend.exact else 1.0
    candidates = [(one - q, backend.scalar(0) if backend.exact else 0.0), (q, one)]
    best, p = max(candidates, key=lambda c: c[0].to_float().real if isinstance(c[0], ExactScalar) else c[0])
    pf = p.to_float().real if isinstance(p, ExactScalar) else p
    if pf == 0:
        argmax = "any third-spin state with <P0(n0)> = 0, i.e. supported on the m = +1/-1 states along n0"
    else:
        argmax = "the m = 0 state along n0"
    bf = best.to_float().real if isinstance(best, ExactScalar) else best
    return AgreementBound(best, p, q, argmax, cloning_feasible=bf >= 1.0)


@dataclass
class SampleStats:
    counts: dict
    total: int
    seed: int
    probabilities: dict = field(default_factory=dict)

    def frequency(self, key: str) -> float:
        return self.counts.get(key, 0) / self.total

    def discord_count(self) -> int:
        return sum(c for k, c in self.counts.items() if len(set(k)) > 1)


def sample_distribution(dist: JointDistribution, count: int, seed: int) -> SampleStats:
    if count < 1:
        raise ValueError("count must be >= 1")
    keys = sorted(dist.outcomes)
    probs = np.array([dist.as_floats()[k] for k in keys])
    if np.any(probs < -PSD_TOL):
        raise InvalidStateError("distribution has negative probabilities")
    probs = np.where(probs <= SAMPLE_CLIP, 0.0, probs)
    probs = probs / probs.sum()
    cdf = np.cumsum(probs)
    rng = np.random.default_rng(seed)
    idx = np.searchsorted(cdf, rng.random(count), side="right")
    # u beyond a cdf total rounded below 1 goes to the last outcome with mass
    idx = np.minimum(idx, int(np.flatnonzero(probs)[-1]))
    hits = np.bincount(idx, minlength=len(keys))
    counts = {k: int(c) for k, c in zip(keys, hits)}
    return SampleStats(counts, count, seed, dict(zip(keys, probs.tolist())))


def sample_outcomes(rho, dirs: Sequence[Optional[Direction]], count: int, seed: int) -> SampleStats:
    """I.i.d. samples of spin-zero answers, reproducible from ``seed``."""
    return sample_distribution(joint_spin_zero_distribution(rho, dirs), count, seed)
