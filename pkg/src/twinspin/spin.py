"""Spin operators, directions, and the two-spin-1 angular momentum toolkit.

Conventions: ``sz`` is diagonal with entries ``j, j-1, ..., -j`` and the
ladder operators follow Condon-Shortley phases, so ``sx = (J+ + J-)/2`` and
``sy = (J+ - J-)/(2i)`` have real nonnegative ``J+`` entries.  On the two
spin space the first factor carries ``L`` and the second ``S``.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

from . import linop
from .linop import Matrix, SpaceShape, Vector, as_shape
from .scalar import EXACT, FLOAT, Backend, ExactScalar, get_backend, parse_exact

TWO_SPINS = SpaceShape((3, 3))
THREE_SPINS = SpaceShape((3, 3, 3))
SINGLET_NORM_SQUARED = Fraction(3)

AXES = ("x", "y", "z")


class Direction:
    """Real unit 3-vector with exact or floating components."""

    __slots__ = ("components", "backend")

    def __init__(self, nx, ny, nz, backend=None, atol: float = 1e-12):
        comps = (nx, ny, nz)
        if backend is None:
            exact = any(isinstance(c, (ExactScalar, str, Fraction)) for c in comps) and \
                not any(isinstance(c, float) for c in comps)
            backend = EXACT if exact else FLOAT
        backend = get_backend(backend)
        if backend.exact:
            comps = tuple(parse_exact(c) if isinstance(c, str) else ExactScalar.coerce(c) for c in comps)
            if not all(c.is_real() for c in comps):
                raise ValueError("direction components must be real")
            if sum((c * c for c in comps), ExactScalar.from_rational(0)) != 1:
                raise ValueError("exact direction is not a unit vector")
        else:
            comps = tuple(float(c.to_float().real) if isinstance(c, ExactScalar) else float(c) for c in comps)
            if not all(math.isfinite(c) for c in comps):
                raise ValueError("direction components must be finite")
            if abs(sum(c * c for c in comps) - 1.0) > atol:
                raise ValueError("direction is not a unit vector")
        object.__setattr__(self, "components", comps)
        object.__setattr__(self, "backend", backend)

    def __setattr__(self, name, value):
        raise AttributeError("Direction is immutable")

    @classmethod
    def from_vector(cls, v) -> "Direction":
        """Normalize a nonzero float triple."""
        v = np.asarray(v, dtype=float)
        norm = float(np.linalg.norm(v))
        if norm == 0.0:
            raise ValueError("cannot normalize the zero vector")
        return cls(*(v / norm), backend=FLOAT)

    @classmethod
    def random(cls, rng: np.random.Generator) -> "Direction":
        """Uniform on the sphere: a normalized standard Gaussian triple."""
        while True:
            v = rng.standard_normal(3)
            if np.linalg.norm(v) > 1e-8:
                return cls.from_vector(v)

    @classmethod
    def axis(cls, name: str, backend=EXACT) -> "Direction":
        comps = [0, 0, 0]
        comps[AXES.index(name)] = 1
        return cls(*comps, backend=backend)

    @property
    def nx(self):
        return self.components[0]

    @property
    def ny(self):
        return self.components[1]

    @property
    def nz(self):
        return self.components[2]

    @property
    def exact(self) -> bool:
        return self.backend.exact

    def to_float(self) -> "Direction":
        if not self.exact:
            return self
        return Direction(*(c.to_float().real for c in self.components), backend=FLOAT)

    def as_floats(self) -> tuple:
        return tuple(c.to_float().real if isinstance(c, ExactScalar) else c for c in self.components)

    def on(self, backend) -> "Direction":
        backend = get_backend(backend)
        if backend.exact and not self.exact:
            raise TypeError("a float direction cannot be used with the exact backend")
        return self.to_float() if not backend.exact else self

    def __eq__(self, other):
        if not isinstance(other, Direction):
            return NotImplemented
        return self.backend == other.backend and self.components == other.components

    def __hash__(self):
        return hash((self.backend.name, self.components))

    def __repr__(self):
        if self.exact:
            return "Direction({})".format(", ".join(repr(str(c)) for c in self.components))
        return "Direction({:.17g}, {:.17g}, {:.17g})".format(*self.components)


@dataclass(frozen=True)
class SpinTriple:
    j: Fraction
    sx: Matrix
    sy: Matrix
    sz: Matrix

    @property
    def components(self) -> tuple:
        return self.sx, self.sy, self.sz

    @property
    def backend(self) -> Backend:
        return self.sz.backend

    def __getitem__(self, axis) -> Matrix:
        if isinstance(axis, str):
            axis = AXES.index(axis)
        return self.components[axis]

    def casimir(self) -> Matrix:
        return self.sx @ self.sx + self.sy @ self.sy + self.sz @ self.sz

    def dot(self, other: "SpinTriple") -> Matrix:
        return sum((a @ b for a, b in zip(self.components[1:], other.components[1:])),
                   self.sx @ other.sx)


def _parse_j(j) -> Fraction:
    if isinstance(j, float):
        j = Fraction(j)
    j = Fraction(j)
    if j < 0 or (2 * j).denominator != 1:
        raise ValueError(f"spin must be a nonnegative integer or half-integer, got {j}")
    return j


@lru_cache(maxsize=None)
def _make_spin(j: Fraction, backend_name: str) -> SpinTriple:
    backend = get_backend(backend_name)
    dim = int(2 * j + 1)
    ms = [j - k for k in range(dim)]
    raise_ = backend.zeros((dim, dim))
    for k in range(1, dim):
        m = ms[k]
        raise_[k - 1, k] = backend.sqrt(j * (j + 1) - m * (m + 1))
    jp = Matrix._wrap(raise_, as_shape(dim))
    jm = linop.adjoint(jp)
    half = Fraction(1, 2)
    sx = (jp + jm) * backend.scalar(half)
    # 1/(2i) = -i/2
    sy = (jp - jm) * (backend.i * backend.scalar(-half))
    sz = linop.diag(ms, backend=backend)
    return SpinTriple(j, sx, sy, sz)


def make_spin(j, backend=FLOAT) -> SpinTriple:
    """Spin-``j`` operators in units of hbar.

    The exact backend only supports ``j`` whose ladder coefficients have square
    roots in the field (``j <= 2`` and a few more).
    """
    return _make_spin(_parse_j(j), get_backend(backend).name)


def component_along(s: SpinTriple, n: Direction) -> Matrix:
    """``n . S``."""
    nx, ny, nz = n.on(s.backend).components
    b = s.backend
    return s.sx * b.scalar(nx) + s.sy * b.scalar(ny) + s.sz * b.scalar(nz)


def spin_zero_projector(s: SpinTriple, n: Direction) -> Matrix:
    """Projector ``I - (n.S)**2`` onto the m = 0 state along ``n`` (spin 1 only)."""
    if s.j != 1:
        raise ValueError("spin-zero projector is defined for spin 1 only")
    ns = component_along(s, n)
    return linop.identity(3, s.backend) - ns @ ns


def embed(op: Matrix, site: int, shape) -> Matrix:
    """``I x ... x op x ... x I`` with ``op`` acting on ``site``."""
    shape = as_shape(shape)
    if not 0 <= site < shape.sites:
        raise IndexError(f"site {site} out of range for {shape.dims}")
    if op.dim != shape.dims[site]:
        raise linop.ShapeError(f"operator of dimension {op.dim} cannot act on site of dimension {shape.dims[site]}")
    factors = [op if k == site else linop.identity(d, op.backend) for k, d in enumerate(shape.dims)]
    return linop.tensor_all(factors)


def embed_triple(s: SpinTriple, site: int, shape) -> SpinTriple:
    return SpinTriple(s.j, *(embed(c, site, shape) for c in s.components))


@lru_cache(maxsize=None)
def _two_spins(backend_name: str) -> tuple:
    s = make_spin(1, backend_name)
    return embed_triple(s, 0, TWO_SPINS), embed_triple(s, 1, TWO_SPINS)


def two_spins(backend=FLOAT) -> tuple:
    """``(L, S)``: spin-1 triples embedded on the first and second factor of the 9-dim space."""
    return _two_spins(get_backend(backend).name)


def total_J(backend=FLOAT) -> SpinTriple:
    """``J = L + S``.  The triple is reducible (j = 2, 1, 0); ``j`` records the largest."""
    L, S = two_spins(backend)
    return SpinTriple(Fraction(2), *(a + b for a, b in zip(L.components, S.components)))


@lru_cache(maxsize=None)
def _dot_LS(backend_name: str) -> Matrix:
    L, S = _two_spins(backend_name)
    return L.dot(S)


def dot_LS(backend=FLOAT) -> Matrix:
    """``L . S`` on two spin-1 sites; eigenvalues 1 (x5), -1 (x3), -2 (x1)."""
    return _dot_LS(get_backend(backend).name)


@dataclass(frozen=True)
class SubspaceProjectors:
    p0: Matrix
    p1: Matrix
    p2: Matrix

    def __getitem__(self, j: int) -> Matrix:
        return (self.p0, self.p1, self.p2)[j]

    def __iter__(self):
        return iter((self.p0, self.p1, self.p2))


# L.S eigenvalue on the total-j subspace, from J^2 = 4 + 2 L.S
LS_EIGENVALUE = {2: 1, 1: -1, 0: -2}


@lru_cache(maxsize=None)
def _j_projectors(backend_name: str) -> SubspaceProjectors:
    backend = get_backend(backend_name)
    x = dot_LS(backend)
    eye = linop.identity(TWO_SPINS, backend)
    out = {}
    for j, lam in LS_EIGENVALUE.items():
        p = eye
        for other in LS_EIGENVALUE.values():
            if other != lam:
                p = (p @ (x - eye * backend.scalar(other))) * backend.scalar(Fraction(1, lam - other))
        out[j] = p
    return SubspaceProjectors(out[0], out[1], out[2])


def j_projectors(backend=FLOAT) -> SubspaceProjectors:
    """Projectors onto total j = 0, 1, 2, as Lagrange polynomials in ``L . S``."""
    return _j_projectors(get_backend(backend).name)


# basis index of |m1, m2> with m descending 1, 0, -1, first factor slowest
def basis_index(m1: int, m2: int) -> int:
    return (1 - m1) * 3 + (1 - m2)


def product_state(m1: int, m2: int, backend=FLOAT) -> Vector:
    return linop.basis_vector(TWO_SPINS, basis_index(m1, m2), backend)


def singlet(backend=FLOAT) -> Vector:
    """Two-spin-1 singlet ``(|0,0> - |1,-1> - |-1,1>)/sqrt3``.

    The exact backend returns the unnormalized integer representative; its
    squared norm is :data:`SINGLET_NORM_SQUARED`.
    """
    backend = get_backend(backend)
    amps = backend.zeros(9)
    amps[basis_index(0, 0)] = backend.one
    amps[basis_index(1, -1)] = -backend.one
    amps[basis_index(-1, 1)] = -backend.one
    vec = Vector._wrap(amps, TWO_SPINS)
    if backend.exact:
        return vec
    return vec / math.sqrt(3)


def singlet_projector(backend=FLOAT) -> Matrix:
    phi = singlet(backend)
    return phi.outer(phi) / phi.norm_squared()


def rotation(n: Direction, theta: float, backend=FLOAT, tol: float = linop.DEFAULT_TOL) -> Matrix:
    """``exp(-i theta n.J)`` on the two-spin space (float only)."""
    nj = component_along(total_J(FLOAT), n.to_float())
    return linop.spectral_apply(nj, lambda x: cmath.exp(-1j * theta * x), tol)


def rotation_on(s: SpinTriple, n: Direction, theta: float, tol: float = linop.DEFAULT_TOL) -> Matrix:
    """``exp(-i theta n.S)`` for a single float spin."""
    ns = component_along(s, n.to_float()) if not s.backend.exact else component_along(s, n).to_float()
    return linop.spectral_apply(ns, lambda x: cmath.exp(-1j * theta * x), tol)
