"""Scalar arithmetic shared by every module.

Two scalar modes are supported.  The default is IEEE double complex.  The
exact mode uses :class:`Gaussian`, a complex number whose real and imaginary
parts are :class:`fractions.Fraction`.  Arrays in exact mode are numpy arrays
of ``dtype=object`` holding Gaussian (or plain ``int``/``Fraction``) entries,
so the same numpy code paths serve both modes.
"""

from __future__ import annotations

import math
from fractions import Fraction
from numbers import Rational
from typing import Any, Iterable

import numpy as np

EPS = np.finfo(float).eps


def _sqrt_fraction(q: Fraction) -> Fraction | None:
    """Exact square root of a nonnegative rational, or None if irrational."""
    if q < 0:
        raise ValueError("negative radicand")
    rn, rd = math.isqrt(q.numerator), math.isqrt(q.denominator)
    if rn * rn == q.numerator and rd * rd == q.denominator:
        return Fraction(rn, rd)
    return None


class Gaussian:
    """Complex number with exact rational real and imaginary parts."""

    __slots__ = ("re", "im")

    def __init__(self, re: Any = 0, im: Any = 0):
        if isinstance(re, Gaussian):
            re, im = re.re, re.im + Fraction(im)
        if isinstance(re, complex) or isinstance(im, complex):
            raise TypeError("construct Gaussian from real parts, or use as_exact()")
        self.re = Fraction(re)
        self.im = Fraction(im)

    # -- coercion ------------------------------------------------------
    @staticmethod
    def _coerce(other: Any) -> "Gaussian | None":
        if isinstance(other, Gaussian):
            return other
        if isinstance(other, (int, Rational)) and not isinstance(other, bool):
            return Gaussian(other)
        return None

    # -- arithmetic ----------------------------------------------------
    def __add__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return Gaussian(self.re + o.re, self.im + o.im)

    __radd__ = __add__

    def __sub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return Gaussian(self.re - o.re, self.im - o.im)

    def __rsub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return o - self

    def __mul__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return Gaussian(self.re * o.re - self.im * o.im, self.re * o.im + self.im * o.re)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        d = o.abs2()
        if d == 0:
            raise ZeroDivisionError("Gaussian division by zero")
        num = self * o.conjugate()
        return Gaussian(num.re / d, num.im / d)

    def __rtruediv__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return o / self

    def __neg__(self):
        return Gaussian(-self.re, -self.im)

    def __pos__(self):
        return self

    def __pow__(self, k: int):
        if not isinstance(k, (int, np.integer)):
            return NotImplemented
        k = int(k)
        if k < 0:
            return Gaussian(1) / (self ** (-k))
        result, base = Gaussian(1), self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def conjugate(self) -> "Gaussian":
        return Gaussian(self.re, -self.im)

    def abs2(self) -> Fraction:
        return self.re * self.re + self.im * self.im

    def __abs__(self):
        r = _sqrt_fraction(self.abs2())
        return r if r is not None else math.sqrt(self.abs2())

    # -- comparison / conversion ------------------------------------------
    def __eq__(self, other):
        o = self._coerce(other)
        if o is None:
            if isinstance(other, (float, complex)):
                return complex(self) == other
            return NotImplemented
        return self.re == o.re and self.im == o.im

    def __hash__(self):
        if self.im == 0:
            return hash(self.re)
        return hash((self.re, self.im))

    def __bool__(self):
        return bool(self.re) or bool(self.im)

    def __complex__(self):
        return complex(float(self.re), float(self.im))

    @property
    def real(self) -> Fraction:
        return self.re

    @property
    def imag(self) -> Fraction:
        return self.im

    def __repr__(self):
        return f"Gaussian({self.re}, {self.im})"

    def __str__(self):
        if self.im == 0:
            return str(self.re)
        sign = "+" if self.im >= 0 else "-"
        return f"{self.re}{sign}{abs(self.im)}i"


def as_exact(z: Any) -> Gaussian:
    """Convert ``z`` to a Gaussian without rounding (floats convert exactly)."""
    if isinstance(z, Gaussian):
        return z
    if isinstance(z, str):
        return parse_scalar(z, exact=True)
    if isinstance(z, (complex, np.complexfloating)):
        return Gaussian(Fraction(float(z.real)), Fraction(float(z.imag)))
    return Gaussian(Fraction(z))


def parse_scalar(text: str, exact: bool = False):
    """Parse ``"re"`` or ``"re,im"`` where each part is a decimal or ``p/q``."""
    parts = [p.strip() for p in text.split(",")]
    if len(parts) not in (1, 2) or not parts[0]:
        raise ValueError(f"cannot parse scalar {text!r}")
    re = Fraction(parts[0])
    im = Fraction(parts[1]) if len(parts) == 2 else Fraction(0)
    if exact:
        return Gaussian(re, im)
    return complex(float(re), float(im))


def is_exact(z: Any) -> bool:
    return isinstance(z, (Gaussian, Fraction, int)) and not isinstance(z, bool)


def modulus(z: Any):
    """|z|, exact (a Fraction) whenever that is possible."""
    if isinstance(z, Gaussian):
        return abs(z)
    if isinstance(z, (int, Fraction)):
        return abs(Fraction(z))
    return abs(complex(z))


def conj(z: Any):
    if isinstance(z, (int, Fraction)):
        return z
    return z.conjugate()


def array(values: Iterable, exact: bool) -> np.ndarray:
    """1-d coefficient array in the requested scalar mode."""
    vals = list(values)
    if exact:
        out = np.empty(len(vals), dtype=object)
        for i, v in enumerate(vals):
            out[i] = as_exact(v)
        return out
    return np.asarray([complex(v) for v in vals], dtype=complex)


def zeros(shape, exact: bool) -> np.ndarray:
    if exact:
        out = np.empty(shape, dtype=object)
        out.fill(Gaussian(0))
        return out
    return np.zeros(shape, dtype=complex)


def to_exact_array(a: np.ndarray) -> np.ndarray:
    out = np.empty(a.shape, dtype=object)
    flat_in, flat_out = a.reshape(-1), out.reshape(-1)
    for i, v in enumerate(flat_in):
        flat_out[i] = as_exact(v)
    return out


def array_is_exact(a: np.ndarray) -> bool:
    return a.dtype == object


def abs_array(a: np.ndarray) -> np.ndarray:
    """Elementwise modulus; exact arrays give an object array of rationals where possible."""
    if a.dtype == object:
        out = np.empty(a.shape, dtype=object)
        flat_in, flat_out = a.reshape(-1), out.reshape(-1)
        for i, v in enumerate(flat_in):
            flat_out[i] = modulus(v)
        return out
    return np.abs(a)


def max_abs(a: np.ndarray):
    """max |a| over all entries (0 for an empty array).

    In exact mode the comparison is done on squared moduli so that the result
    is exact whenever the winning modulus is rational.
    """
    if a.size == 0:
        return Fraction(0) if a.dtype == object else 0.0
    if a.dtype == object:
        best, best2 = None, Fraction(-1)
        for v in a.reshape(-1):
            g = as_exact(v)
            m2 = g.abs2()
            if m2 > best2:
                best, best2 = g, m2
        return modulus(best)
    return float(np.max(np.abs(a)))


def sum_abs(a: np.ndarray):
    if a.dtype == object:
        total = Fraction(0)
        inexact = 0.0
        for v in a.reshape(-1):
            m = modulus(v)
            if isinstance(m, Fraction):
                total += m
            else:
                inexact += m
        return total if inexact == 0.0 else float(total) + inexact
    return float(np.sum(np.abs(a)))


def powers(z: Any, n: int, exact: bool) -> np.ndarray:
    """Array (z**0, ..., z**n) with 0**0 = 1."""
    if exact:
        g = as_exact(z)
        out = np.empty(n + 1, dtype=object)
        acc = Gaussian(1)
        for k in range(n + 1):
            out[k] = acc
            acc = acc * g
        return out
    z = complex(z)
    if n < 0:
        return np.zeros(0, dtype=complex)
    out = np.empty(n + 1, dtype=complex)
    out[0] = 1.0
    if n:
        out[1:] = np.cumprod(np.full(n, z))
    return out


def to_float(x) -> float:
    return float(x)
