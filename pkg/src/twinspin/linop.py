"""Dense complex linear algebra over either scalar backend.

Matrices and vectors carry a :class:`SpaceShape` naming the tensor factors
(``(3,)``, ``(3, 3)``, ``(3, 3, 3)``).  Entries live in a read-only numpy
array: ``complex128`` for the float backend, ``object`` holding
:class:`~twinspin.scalar.ExactScalar` for the exact one.  The basis of a
composite space is the row-major product of the factor bases, first factor
slowest.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .scalar import EXACT, FLOAT, Backend, ExactScalar, get_backend

DEFAULT_TOL = 1e-10
MAX_SWEEPS = 100


class ShapeError(ValueError):
    """Operands have incompatible tensor shapes."""


class NotHermitianError(ValueError):
    pass


class ConvergenceError(ArithmeticError):
    pass


@dataclass(frozen=True)
class SpaceShape:
    dims: tuple

    def __post_init__(self):
        dims = tuple(int(d) for d in self.dims)
        if not dims or any(d < 1 for d in dims):
            raise ShapeError(f"site dimensions must be >= 1, got {self.dims!r}")
        object.__setattr__(self, "dims", dims)

    @property
    def total(self) -> int:
        return math.prod(self.dims)

    @property
    def sites(self) -> int:
        return len(self.dims)

    def __add__(self, other: "SpaceShape") -> "SpaceShape":
        return SpaceShape(self.dims + other.dims)


def as_shape(shape) -> SpaceShape:
    if isinstance(shape, SpaceShape):
        return shape
    if isinstance(shape, int):
        return SpaceShape((shape,))
    return SpaceShape(tuple(shape))


def _backend_of(arr: np.ndarray) -> Backend:
    return EXACT if arr.dtype == object else FLOAT


def _freeze(arr: np.ndarray) -> np.ndarray:
    arr.setflags(write=False)
    return arr


class _Tensor:
    __slots__ = ("shape", "entries", "backend")

    def __init__(self, entries, shape=None, backend=None):
        if backend is not None:
            backend = get_backend(backend)
            arr = backend.array(entries) if not (
                isinstance(entries, np.ndarray) and entries.dtype == backend.dtype) else entries
        elif isinstance(entries, np.ndarray) and entries.dtype in (object, np.complex128):
            arr = entries
        else:
            arr = np.asarray(entries)
            arr = arr.astype(object if arr.dtype == object else np.complex128)
        if arr.dtype == object:
            arr = EXACT.array(arr)
        elif not np.all(np.isfinite(arr)):
            raise ValueError("non-finite entries are not allowed")
        self.entries = _freeze(np.array(arr, copy=True))
        self.backend = _backend_of(self.entries)
        n = self._check_dims(self.entries)
        self.shape = as_shape(shape if shape is not None else n)
        if self.shape.total != n:
            raise ShapeError(f"shape {self.shape.dims} does not match dimension {n}")

    @classmethod
    def _wrap(cls, arr: np.ndarray, shape: SpaceShape):
        obj = object.__new__(cls)
        obj.entries = _freeze(arr)
        obj.backend = _backend_of(arr)
        obj.shape = shape
        return obj

    @property
    def dim(self) -> int:
        return self.shape.total

    @property
    def exact(self) -> bool:
        return self.backend.exact

    def to_float(self):
        if not self.exact:
            return self
        out = np.empty(self.entries.shape, dtype=np.complex128)
        for idx, v in np.ndenumerate(self.entries):
            out[idx] = v.to_float()
        return type(self)._wrap(out, self.shape)

    def to_exact(self):
        if self.exact:
            return self
        raise TypeError("float data cannot be promoted to the exact backend")

    def is_zero(self, tol: float = 0.0) -> bool:
        if self.exact:
            return all(not v for v in self.entries.flat)
        return frobenius_norm(self) <= tol

    def __neg__(self):
        return type(self)._wrap(-self.entries, self.shape)

    def __add__(self, other):
        _check_same(self, other)
        return type(self)._wrap(self.entries + other.entries, self.shape)

    def __sub__(self, other):
        _check_same(self, other)
        return type(self)._wrap(self.entries - other.entries, self.shape)

    def __mul__(self, c):
        return scale(self, c)

    __rmul__ = __mul__

    def __truediv__(self, c):
        if self.exact:
            c = ExactScalar.coerce(c)
            return type(self)._wrap(np.array([v / c for v in self.entries.flat],
                                             dtype=object).reshape(self.entries.shape), self.shape)
        return type(self)._wrap(self.entries / complex(c), self.shape)


class Vector(_Tensor):
    """State vector, possibly unnormalized (exact kernels are returned unnormalized)."""

    @staticmethod
    def _check_dims(arr):
        if arr.ndim != 1:
            raise ShapeError(f"vector entries must be 1-d, got shape {arr.shape}")
        return arr.shape[0]

    def __repr__(self):
        return f"Vector(dims={self.shape.dims}, backend={self.backend.name})"

    def __eq__(self, other):
        if not isinstance(other, Vector):
            return NotImplemented
        return self.shape == other.shape and bool(np.all(self.entries == other.entries))

    __hash__ = None

    def conj(self) -> "Vector":
        return Vector._wrap(np.conjugate(self.entries) if not self.exact else
                            np.array([v.conjugate() for v in self.entries], dtype=object), self.shape)

    def inner(self, other: "Vector"):
        """<self|other>, conjugate-linear in self."""
        _check_same(self, other)
        return _sum(self.conj().entries * other.entries, self.backend)

    def norm_squared(self):
        return self.inner(self)

    def norm(self) -> float:
        return math.sqrt(abs(_as_float(self.norm_squared())))

    def outer(self, other: "Vector") -> "Matrix":
        _check_same(self, other)
        return Matrix._wrap(np.outer(self.entries, other.conj().entries), self.shape)


class Matrix(_Tensor):
    """Square operator on a tensor-product space."""

    @staticmethod
    def _check_dims(arr):
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
            raise ShapeError(f"matrix entries must be square, got shape {arr.shape}")
        return arr.shape[0]

    def __repr__(self):
        return f"Matrix(dims={self.shape.dims}, backend={self.backend.name})"

    def __eq__(self, other):
        if not isinstance(other, Matrix):
            return NotImplemented
        return self.shape == other.shape and bool(np.all(self.entries == other.entries))

    __hash__ = None

    def __matmul__(self, other):
        return matmul(self, other)

    def adjoint(self) -> "Matrix":
        return adjoint(self)

    @property
    def H(self) -> "Matrix":
        return adjoint(self)

    def trace(self):
        return trace(self)


def _check_same(a, b):
    if a.shape != b.shape:
        raise ShapeError(f"shape mismatch: {a.shape.dims} vs {b.shape.dims}")
    if a.backend != b.backend:
        raise TypeError("cannot mix exact and float operands; convert with to_float()")


def _sum(values, backend: Backend):
    if backend.exact:
        out = backend.zero
        for v in values.flat:
            out = out + v
        return out
    return complex(np.sum(values))


def _as_float(x) -> complex:
    return x.to_float() if isinstance(x, ExactScalar) else complex(x)


def identity(shape, backend=FLOAT) -> Matrix:
    backend = get_backend(backend)
    shape = as_shape(shape)
    arr = backend.zeros((shape.total, shape.total))
    for k in range(shape.total):
        arr[k, k] = backend.one
    return Matrix._wrap(arr, shape)


def zeros(shape, backend=FLOAT) -> Matrix:
    backend = get_backend(backend)
    shape = as_shape(shape)
    return Matrix._wrap(backend.zeros((shape.total, shape.total)), shape)


def basis_vector(shape, index: int, backend=FLOAT) -> Vector:
    backend = get_backend(backend)
    shape = as_shape(shape)
    arr = backend.zeros(shape.total)
    arr[index] = backend.one
    return Vector._wrap(arr, shape)


def diag(values, shape=None, backend=FLOAT) -> Matrix:
    backend = get_backend(backend)
    values = list(values)
    arr = backend.zeros((len(values), len(values)))
    for k, v in enumerate(values):
        arr[k, k] = backend.scalar(v)
    return Matrix._wrap(arr, as_shape(shape if shape is not None else len(values)))


def matmul(a: Matrix, b):
    """Matrix-matrix or matrix-vector product."""
    _check_same(a, b)
    if a.exact:
        out = _exact_matmul(a.entries, b.entries)
    else:
        out = a.entries @ b.entries
    return type(b)._wrap(out, b.shape)


def _exact_matmul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    # operators here are sparse; skipping zero products is the main cost saving
    vec = b.ndim == 1
    b2 = b.reshape(-1, 1) if vec else b
    b_rows = [[(j, v) for j, v in enumerate(row) if v] for row in b2]
    out = EXACT.zeros((a.shape[0], b2.shape[1]))
    for i, row in enumerate(a):
        acc = {}
        for k, x in enumerate(row):
            if not x:
                continue
            for j, y in b_rows[k]:
                prod = x * y
                acc[j] = acc[j] + prod if j in acc else prod
        for j, v in acc.items():
            out[i, j] = v
    return out.reshape(-1) if vec else out


def add(a: Matrix, b: Matrix) -> Matrix:
    return a + b


def scale(a, c):
    if a.exact:
        c = ExactScalar.coerce(c)
        arr = np.empty(a.entries.shape, dtype=object)
        for idx, v in np.ndenumerate(a.entries):
            arr[idx] = v * c
        return type(a)._wrap(arr, a.shape)
    if isinstance(c, ExactScalar):
        c = c.to_float()
    return type(a)._wrap(a.entries * complex(c), a.shape)


def adjoint(m: Matrix) -> Matrix:
    if m.exact:
        arr = np.empty(m.entries.shape, dtype=object)
        for (r, c), v in np.ndenumerate(m.entries):
            arr[c, r] = v.conjugate()
        return Matrix._wrap(arr, m.shape)
    return Matrix._wrap(m.entries.conj().T.copy(), m.shape)


def trace(m: Matrix):
    return _sum(np.diagonal(m.entries), m.backend)


def frobenius_norm_squared(m):
    """Sum of |entry|^2; exact in the exact backend (a real field element)."""
    if m.exact:
        out = EXACT.zero
        for v in m.entries.flat:
            if v:
                out = out + v * v.conjugate()
        return out
    return float(np.sum(np.abs(m.entries) ** 2))


def frobenius_norm(m) -> float:
    return math.sqrt(abs(_as_float(frobenius_norm_squared(m))))


def residual_norm(m) -> float:
    """Frobenius norm as a float that is exactly 0.0 iff ``m`` is exactly zero."""
    if m.exact:
        if m.is_zero():
            return 0.0
        return max(frobenius_norm(m), 5e-324)
    return frobenius_norm(m)


def tensor(a, b):
    """Kronecker product; the result's shape concatenates the operand shapes."""
    if type(a) is not type(b):
        raise TypeError("tensor needs two matrices or two vectors")
    if a.backend != b.backend:
        raise TypeError("cannot mix exact and float operands")
    if a.exact:
        if isinstance(a, Vector):
            arr = np.array([x * y for x in a.entries for y in b.entries], dtype=object)
        else:
            na, nb = a.dim, b.dim
            arr = np.empty((na * nb, na * nb), dtype=object)
            for (i, j), x in np.ndenumerate(a.entries):
                for (k, l), y in np.ndenumerate(b.entries):
                    arr[i * nb + k, j * nb + l] = x * y
    else:
        arr = np.kron(a.entries, b.entries)
    return type(a)._wrap(arr, a.shape + b.shape)


def tensor_all(items: Sequence):
    out = items[0]
    for item in items[1:]:
        out = tensor(out, item)
    return out


def commutator(a: Matrix, b: Matrix) -> Matrix:
    return a @ b - b @ a


def anticommutator(a: Matrix, b: Matrix) -> Matrix:
    return a @ b + b @ a


def hermiticity_gap(m: Matrix) -> float:
    return residual_norm(m - adjoint(m))


@dataclass(frozen=True)
class EigenDecomposition:
    eigenvalues: np.ndarray
    eigenvectors: Matrix

    def vectors(self) -> list:
        cols = self.eigenvectors.entries
        return [Vector._wrap(cols[:, k].copy(), self.eigenvectors.shape) for k in range(cols.shape[1])]

    def reconstruct(self) -> Matrix:
        v = self.eigenvectors.entries
        return Matrix._wrap((v * self.eigenvalues) @ v.conj().T, self.eigenvectors.shape)


def _jacobi(a: np.ndarray, tol: float) -> tuple:
    """Cyclic complex Jacobi on a Hermitian array; returns (eigenvalues, eigenvectors)."""
    n = a.shape[0]
    a = a.copy()
    v = np.eye(n, dtype=np.complex128)
    converged = False
    for _ in range(MAX_SWEEPS):
        off = float(np.linalg.norm(a - np.diag(np.diag(a))))
        # convergence is quadratic, so one sweep past tol reaches rounding level
        if converged or off == 0.0:
            w = np.real(np.diag(a)).copy()
            order = np.argsort(w, kind="stable")
            return w[order], v[:, order]
        for p in range(n - 1):
            for q in range(p + 1, n):
                b = a[p, q]
                beta = abs(b)
                if beta == 0.0:
                    continue
                phase = b / beta
                theta = 0.5 * math.atan2(2.0 * beta, a[p, p].real - a[q, q].real)
                c, s = math.cos(theta), math.sin(theta)
                # columns p, q of the 2x2 unitary diag(1, conj(phase)) @ [[c, -s], [s, c]]
                u = np.array([[c, -s], [s * phase.conjugate(), c * phase.conjugate()]])
                idx = [p, q]
                a[:, idx] = a[:, idx] @ u
                a[idx, :] = u.conj().T @ a[idx, :]
                a[p, q] = a[q, p] = 0.0
                a[p, p] = a[p, p].real
                a[q, q] = a[q, q].real
                v[:, idx] = v[:, idx] @ u
        converged = off < tol
    raise ConvergenceError(f"Jacobi did not converge to {tol:g} within {MAX_SWEEPS} sweeps")


def hermitian_eigen(m: Matrix, tol: float = DEFAULT_TOL) -> EigenDecomposition:
    """Eigendecomposition of a Hermitian matrix, eigenvalues ascending.

    Exact matrices are converted to floats first.
    """
    m = m.to_float()
    if hermiticity_gap(m) >= max(tol, 1e-300):
        raise NotHermitianError(f"matrix is not Hermitian (gap {hermiticity_gap(m):.3g})")
    w, v = _jacobi(m.entries, tol)
    return EigenDecomposition(w, Matrix._wrap(v, m.shape))


def spectrum(m: Matrix, tol: float = DEFAULT_TOL) -> list:
    """Eigenvalues grouped into (value, multiplicity) pairs, clustering within ``1e3 * tol``."""
    w = hermitian_eigen(m, tol).eigenvalues
    groups = []
    for x in w:
        if groups and abs(x - groups[-1][0][-1]) <= 1e3 * tol:
            groups[-1][0].append(x)
        else:
            groups.append(([x], None))
    return [(float(np.mean(g)), len(g)) for g, _ in groups]


def spectral_apply(m: Matrix, f: Callable, tol: float = DEFAULT_TOL) -> Matrix:
    """``V f(Lambda) V^dagger`` for Hermitian ``m``."""
    eig = hermitian_eigen(m, tol)
    v = eig.eigenvectors.entries
    fw = np.array([complex(f(x)) for x in eig.eigenvalues])
    return Matrix._wrap((v * fw) @ v.conj().T, m.shape)


def _rref_null_space(rows: np.ndarray) -> list:
    """Exact kernel basis of a (possibly rectangular) object array by Gaussian elimination.

    One basis vector per free column, with that column set to 1.
    """
    a = [list(r) for r in rows]
    nrows, ncols = len(a), rows.shape[1]
    pivots = []
    r = 0
    for c in range(ncols):
        piv = next((k for k in range(r, nrows) if a[k][c]), None)
        if piv is None:
            continue
        a[r], a[piv] = a[piv], a[r]
        inv = a[r][c].inverse()
        a[r] = [x * inv if x else x for x in a[r]]
        for k in range(nrows):
            if k != r and a[k][c]:
                f = a[k][c]
                a[k] = [x - f * y if y else x for x, y in zip(a[k], a[r])]
        pivots.append(c)
        r += 1
        if r == nrows:
            break
    free = [c for c in range(ncols) if c not in pivots]
    basis = []
    for fc in free:
        vec = [EXACT.zero] * ncols
        vec[fc] = EXACT.one
        for row, pc in enumerate(pivots):
            vec[pc] = -a[row][fc]
        basis.append(np.array(vec, dtype=object))
    return basis


def exact_null_space(rows: np.ndarray, shape) -> list:
    """Kernel of a stacked exact system, returned as unnormalized vectors."""
    return [Vector._wrap(v, as_shape(shape)) for v in _rref_null_space(EXACT.array(rows))]


def null_space(m: Matrix, tol: float = DEFAULT_TOL) -> list:
    """Kernel basis of ``m``.

    Float: orthonormal eigenvectors ``v`` of ``m^dagger m`` kept when
    ``||m v|| <= tol * ||m||_F``.  Exact: ``tol`` is ignored and the basis from
    exact elimination is returned unnormalized.
    """
    if m.exact:
        return exact_null_space(m.entries, m.shape)
    gram = adjoint(m) @ m
    scale = frobenius_norm(m)
    eig = hermitian_eigen(gram, max(1e-14 * scale * scale, 1e-300))
    return [v for v in eig.vectors() if (m @ v).norm() <= tol * scale]


def orthogonalize(vectors: Sequence[Vector]) -> list:
    """Gram-Schmidt without normalization, so exact vectors stay in the field."""
    out = []
    for v in vectors:
        w = v
        for u in out:
            w = w - u * (u.inner(w) / u.norm_squared())
        out.append(w)
    return out


def projector_onto(vectors: Sequence[Vector]) -> Matrix:
    """Orthogonal projector onto the span of linearly independent vectors."""
    if not vectors:
        raise ValueError("projector_onto needs at least one vector")
    basis = orthogonalize(vectors)
    out = None
    for u in basis:
        term = u.outer(u) / u.norm_squared()
        out = term if out is None else out + term
    return out
