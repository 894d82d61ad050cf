"""Scalars: exact arithmetic in Q(i, sqrt2, sqrt3) and a floating complex backend.

An :class:`ExactScalar` is ``a + b*sqrt2 + c*sqrt3 + d*sqrt6`` where each of
``a, b, c, d`` is a Gaussian rational.  Every numeric constant needed for two
and three spin-1 systems (``1/sqrt2``, ``1/sqrt3``, ``i``) lives in this field,
so identities can be checked with zero tolerance.

The rest of the package is written against :class:`Backend`, which hides the
choice between exact object arrays and ``complex128`` arrays.
"""
from __future__ import annotations

import math
import re
from decimal import Decimal, localcontext
from fractions import Fraction
from typing import Union

import numpy as np

Rational = Fraction
FloatComplex = complex

# basis index of sqrt(p) for p in (1, 2, 3, 6); product table e_k * e_l = m * e_n
_RADICANDS = (1, 2, 3, 6)
_PRODUCT = {}
for _k, _p in enumerate(_RADICANDS):
    for _l, _q in enumerate(_RADICANDS):
        _g = math.gcd(_p, _q)
        _PRODUCT[_k, _l] = (_g, _RADICANDS.index(_p * _q // (_g * _g)))

Number = Union[int, Fraction, "ExactScalar"]


def _frac(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    raise TypeError(f"expected an int or Fraction, got {type(x).__name__}")


class ExactScalar:
    """Element of Q(i, sqrt2, sqrt3), immutable.

    Stored as eight integer numerators ``(a.re, a.im, b.re, b.im, c.re, c.im,
    d.re, d.im)`` over one positive denominator, for ``a + b*sqrt2 + c*sqrt3
    + d*sqrt6``.  Numerators and denominator share no common factor, so the
    representation is canonical and ``==`` is exact.
    """

    __slots__ = ("_n", "_d")

    def __init__(self, coeffs=(0, 0, 0, 0, 0, 0, 0, 0)):
        if len(coeffs) != 8:
            raise ValueError("ExactScalar needs exactly 8 rational coefficients")
        fr = [_frac(x) for x in coeffs]
        den = math.lcm(*(f.denominator for f in fr))
        self._n, self._d = _reduce(tuple(f.numerator * (den // f.denominator) for f in fr), den)

    @classmethod
    def _raw(cls, nums: tuple, den: int = 1) -> "ExactScalar":
        obj = object.__new__(cls)
        obj._n, obj._d = nums, den
        return obj

    @classmethod
    def _make(cls, nums: tuple, den: int) -> "ExactScalar":
        return cls._raw(*_reduce(nums, den))

    @classmethod
    def from_parts(cls, a=0, b=0, c=0, d=0) -> "ExactScalar":
        """Build from Gaussian-rational parts; each part is a rational or a (re, im) pair."""
        out = []
        for part in (a, b, c, d):
            if isinstance(part, tuple):
                out.extend(part)
            else:
                out.extend((part, 0))
        return cls(out)

    @classmethod
    def from_rational(cls, q) -> "ExactScalar":
        q = _frac(q)
        return cls._raw((q.numerator, 0, 0, 0, 0, 0, 0, 0), q.denominator)

    @classmethod
    def coerce(cls, x) -> "ExactScalar":
        if isinstance(x, ExactScalar):
            return x
        if isinstance(x, (int, Fraction)) and not isinstance(x, bool):
            return cls.from_rational(x)
        raise TypeError(f"cannot convert {type(x).__name__} to ExactScalar exactly")

    @classmethod
    def sqrt_rational(cls, q) -> "ExactScalar":
        """Exact square root of a nonnegative rational, when it lies in the field.

        Succeeds iff ``q = r**2 * k`` with rational ``r`` and ``k`` in {1, 2, 3, 6}.
        """
        q = _frac(q)
        if q < 0:
            raise ValueError("sqrt_rational needs a nonnegative argument")
        if q == 0:
            return ZERO
        # sqrt(n/m) = sqrt(n*m)/m
        n = q.numerator * q.denominator
        for k, p in enumerate(_RADICANDS):
            if n % p:
                continue
            s = math.isqrt(n // p)
            if s * s * p == n:
                nums = [0] * 8
                nums[2 * k] = s
                return cls._make(tuple(nums), q.denominator)
        raise ValueError(f"sqrt({q}) is not in Q(i, sqrt2, sqrt3)")

    @property
    def coefficients(self) -> tuple:
        """The eight rational coefficients, as Fractions."""
        return tuple(Fraction(v, self._d) for v in self._n)

    # gaussian parts a, b, c, d as (re, im)
    def part(self, k: int) -> tuple:
        return Fraction(self._n[2 * k], self._d), Fraction(self._n[2 * k + 1], self._d)

    def is_zero(self) -> bool:
        return not any(self._n)

    def is_real(self) -> bool:
        n = self._n
        return not (n[1] or n[3] or n[5] or n[7])

    def is_rational(self) -> bool:
        return not any(self._n[1:])

    def __bool__(self) -> bool:
        return any(self._n)

    def __eq__(self, other) -> bool:
        if isinstance(other, ExactScalar):
            return self._d == other._d and self._n == other._n
        if isinstance(other, (int, Fraction)):
            return self.is_rational() and Fraction(self._n[0], self._d) == other
        return NotImplemented

    def __hash__(self) -> int:
        if self.is_rational():
            return hash(Fraction(self._n[0], self._d))
        return hash((self._n, self._d))

    def __repr__(self) -> str:
        return f"ExactScalar({str(self)!r})"

    def __str__(self) -> str:
        names = ("", "sqrt2", "sqrt3", "sqrt6")
        terms = []
        for k in range(4):
            re_, im_ = self.part(k)
            for coef, unit in ((re_, ""), (im_, "i")):
                if not coef:
                    continue
                factors = [f for f in (unit, names[k]) if f]
                if factors and abs(coef) == 1:
                    body = "*".join(factors)
                else:
                    body = "*".join([str(abs(coef))] + factors)
                terms.append(("-" if coef < 0 else "+", body))
        if not terms:
            return "0"
        head_sign, head = terms[0]
        out = ("-" if head_sign == "-" else "") + head
        for sign, body in terms[1:]:
            out += f" {sign} {body}"
        return out

    def __neg__(self) -> "ExactScalar":
        return ExactScalar._raw(tuple(-x for x in self._n), self._d)

    def __pos__(self) -> "ExactScalar":
        return self

    def __add__(self, other) -> "ExactScalar":
        if isinstance(other, (int, Fraction)):
            other = ExactScalar.from_rational(other)
        elif not isinstance(other, ExactScalar):
            return NotImplemented
        if not any(other._n):
            return self
        if not any(self._n):
            return other
        d1, d2 = self._d, other._d
        if d1 == d2:
            return ExactScalar._make(tuple(x + y for x, y in zip(self._n, other._n)), d1)
        return ExactScalar._make(tuple(x * d2 + y * d1 for x, y in zip(self._n, other._n)), d1 * d2)

    __radd__ = __add__

    def __sub__(self, other) -> "ExactScalar":
        if isinstance(other, (ExactScalar, int, Fraction)):
            return self + (-other)
        return NotImplemented

    def __rsub__(self, other) -> "ExactScalar":
        return (-self) + other

    def __mul__(self, other) -> "ExactScalar":
        if isinstance(other, (int, Fraction)):
            other = ExactScalar.from_rational(other)
        elif not isinstance(other, ExactScalar):
            return NotImplemented
        x, y = self._n, other._n
        out = [0] * 8
        for k in range(4):
            xr, xi = x[2 * k], x[2 * k + 1]
            if not (xr or xi):
                continue
            for l in range(4):
                yr, yi = y[2 * l], y[2 * l + 1]
                if not (yr or yi):
                    continue
                m, n = _PRODUCT[k, l]
                out[2 * n] += m * (xr * yr - xi * yi)
                out[2 * n + 1] += m * (xr * yi + xi * yr)
        return ExactScalar._make(tuple(out), self._d * other._d)

    __rmul__ = __mul__

    def conjugate(self) -> "ExactScalar":
        """Complex conjugation: i -> -i, radicals fixed."""
        return ExactScalar._raw(tuple(v if k % 2 == 0 else -v for k, v in enumerate(self._n)), self._d)

    conj = conjugate

    def _galois(self, flip2: bool, flip3: bool) -> "ExactScalar":
        n = list(self._n)
        signs = (1, -1 if flip2 else 1, -1 if flip3 else 1, -1 if flip2 != flip3 else 1)
        for k, s in enumerate(signs):
            if s < 0:
                n[2 * k], n[2 * k + 1] = -n[2 * k], -n[2 * k + 1]
        return ExactScalar._raw(tuple(n), self._d)

    def inverse(self) -> "ExactScalar":
        if self.is_zero():
            raise ZeroDivisionError("inverse of zero in Q(i, sqrt2, sqrt3)")
        others = self._galois(True, False) * self._galois(False, True) * self._galois(True, True)
        norm = self * others
        # norm is fixed by both radical flips, so it lies in Q(i)
        assert not any(norm._n[2:]), "norm escaped Q(i)"
        nr, ni, d = norm._n[0], norm._n[1], norm._d
        # 1/((nr + i ni)/d) = d (nr - i ni) / (nr^2 + ni^2)
        return others * ExactScalar._make((d * nr, -d * ni, 0, 0, 0, 0, 0, 0), nr * nr + ni * ni)

    def __truediv__(self, other) -> "ExactScalar":
        if isinstance(other, (int, Fraction)):
            if not other:
                raise ZeroDivisionError("division by zero in Q(i, sqrt2, sqrt3)")
            other = ExactScalar.from_rational(other)
        elif not isinstance(other, ExactScalar):
            return NotImplemented
        if other.is_rational():
            q = Fraction(other._n[0], other._d)
            if not q:
                raise ZeroDivisionError("division by zero in Q(i, sqrt2, sqrt3)")
            sign = 1 if q > 0 else -1
            return ExactScalar._make(tuple(sign * v * q.denominator for v in self._n),
                                     self._d * abs(q.numerator))
        return self * other.inverse()

    def __rtruediv__(self, other) -> "ExactScalar":
        return ExactScalar.coerce(other) * self.inverse()

    def __pow__(self, n: int) -> "ExactScalar":
        if not isinstance(n, int):
            return NotImplemented
        base = self if n >= 0 else self.inverse()
        out, n = ONE, abs(n)
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    def abs_squared(self) -> "ExactScalar":
        return self * self.conjugate()

    def real(self) -> "ExactScalar":
        return ExactScalar._make(tuple(v if k % 2 == 0 else 0 for k, v in enumerate(self._n)), self._d)

    def imag(self) -> "ExactScalar":
        return ExactScalar._make(tuple(self._n[k + 1] if k % 2 == 0 else 0 for k in range(8)), self._d)

    def to_float(self) -> complex:
        """Nearest complex double, evaluated at 50 digits before rounding."""
        if self.is_rational():
            return complex(self._n[0] / self._d, 0.0)
        with localcontext() as ctx:
            ctx.prec = 50
            roots = [Decimal(p).sqrt() for p in _RADICANDS]
            d = Decimal(self._d)
            re_ = sum(Decimal(v) * r for v, r in zip(self._n[0::2], roots)) / d
            im_ = sum(Decimal(v) * r for v, r in zip(self._n[1::2], roots)) / d
            return complex(float(re_), float(im_))

    __complex__ = to_float


def _reduce(nums: tuple, den: int) -> tuple:
    if den < 0:
        nums, den = tuple(-v for v in nums), -den
    g = math.gcd(den, *nums)
    if g == 0 or not any(nums):
        return (0, 0, 0, 0, 0, 0, 0, 0), 1
    if g != 1:
        nums, den = tuple(v // g for v in nums), den // g
    return nums, den


ZERO = ExactScalar.from_rational(0)
ONE = ExactScalar.from_rational(1)
I = ExactScalar.from_parts(a=(0, 1))
SQRT2 = ExactScalar.from_parts(b=1)
SQRT3 = ExactScalar.from_parts(c=1)
SQRT6 = ExactScalar.from_parts(d=1)


def to_float(x) -> complex:
    """Convert any supported scalar to a Python complex."""
    if isinstance(x, ExactScalar):
        return x.to_float()
    value = complex(x)
    if not (math.isfinite(value.real) and math.isfinite(value.imag)):
        raise ValueError(f"non-finite scalar {value!r}")
    return value


_TOKEN = re.compile(r"\s*(?:(\d+)|(sqrt2|sqrt3|sqrt6|i)|([-+*/()]))")


def parse_exact(text: str) -> ExactScalar:
    """Parse a field element such as ``"-1/sqrt3"`` or ``"(1 + i)/2"``.

    Grammar: integers, ``sqrt2``, ``sqrt3``, ``sqrt6``, ``i``, the binary
    operators ``+ - * /``, unary minus and parentheses.  Juxtaposition is
    not multiplication; write ``2*sqrt2``.
    """
    tokens = []
    pos = 0
    text = text.strip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise ValueError(f"bad exact literal {text!r} at offset {pos}")
        pos = m.end()
        tokens.append(m.group(1) or m.group(2) or m.group(3))
    if not tokens:
        raise ValueError("empty exact literal")
    constants = {"sqrt2": SQRT2, "sqrt3": SQRT3, "sqrt6": SQRT6, "i": I}
    idx = 0

    def peek():
        return tokens[idx] if idx < len(tokens) else None

    def take():
        nonlocal idx
        tok = peek()
        if tok is None:
            raise ValueError(f"unexpected end of exact literal {text!r}")
        idx += 1
        return tok

    def expr():
        value = term()
        while peek() in ("+", "-"):
            value = value + term() if take() == "+" else value - term()
        return value

    def term():
        value = unary()
        while peek() in ("*", "/"):
            value = value * unary() if take() == "*" else value / unary()
        return value

    def unary():
        if peek() == "-":
            take()
            return -unary()
        if peek() == "+":
            take()
            return unary()
        return atom()

    def atom():
        tok = take()
        if tok == "(":
            value = expr()
            if take() != ")":
                raise ValueError(f"unbalanced parentheses in {text!r}")
            return value
        if tok in constants:
            return constants[tok]
        if tok.isdigit():
            return ExactScalar.from_rational(int(tok))
        raise ValueError(f"unexpected token {tok!r} in {text!r}")

    value = expr()
    if idx != len(tokens):
        raise ValueError(f"trailing tokens in exact literal {text!r}")
    return value


class Backend:
    """Scalar backend: ``exact`` (object arrays of ExactScalar) or ``float`` (complex128)."""

    def __init__(self, name: str):
        if name not in ("exact", "float"):
            raise ValueError(f"unknown backend {name!r}")
        self.name = name
        self.exact = name == "exact"
        self.dtype = object if self.exact else np.complex128
        self.zero = ZERO if self.exact else 0j
        self.one = ONE if self.exact else 1 + 0j
        self.i = I if self.exact else 1j

    def __repr__(self) -> str:
        return f"Backend({self.name!r})"

    def __eq__(self, other) -> bool:
        return isinstance(other, Backend) and other.name == self.name

    def __hash__(self) -> int:
        return hash(self.name)

    def scalar(self, x):
        """Bring an int, Fraction, ExactScalar (or float, for the float backend) into this backend."""
        if self.exact:
            return ExactScalar.coerce(x)
        if isinstance(x, ExactScalar):
            return x.to_float()
        if isinstance(x, Fraction):
            return complex(float(x))
        return to_float(x)

    def sqrt(self, q):
        """Square root of a nonnegative rational."""
        if self.exact:
            return ExactScalar.sqrt_rational(q)
        return complex(math.sqrt(float(q)))

    def array(self, rows) -> np.ndarray:
        if self.exact:
            arr = np.empty(np.shape(rows), dtype=object)
            for idx, v in np.ndenumerate(np.asarray(rows, dtype=object)):
                arr[idx] = ExactScalar.coerce(v)
            return arr
        return np.asarray(rows, dtype=np.complex128)

    def zeros(self, shape) -> np.ndarray:
        if self.exact:
            arr = np.empty(shape, dtype=object)
            arr.fill(ZERO)
            return arr
        return np.zeros(shape, dtype=np.complex128)

    def is_zero(self, x, tol: float = 0.0) -> bool:
        if self.exact:
            return ExactScalar.coerce(x).is_zero()
        return abs(x) <= tol


EXACT = Backend("exact")
FLOAT = Backend("float")


def get_backend(backend) -> Backend:
    if isinstance(backend, Backend):
        return backend
    return Backend(backend)
