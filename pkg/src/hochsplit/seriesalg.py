"""Truncated l1(Z+) convolution algebra with certified tails.

A :class:`TruncatedSeries` stores the coefficients ``a_0..a_deg`` of an
element of l1(Z+) together with an upper bound ``tail`` on the l1 mass of the
coefficients that were not stored.  Every operation propagates that bound, so
norms are always reported as a rigorous interval ``[norm_lower, norm_upper]``.

The disc-specific machinery lives here too: evaluation of characters, the
Blaschke factor ``b(z) = (z - lam) / (1 - conj(lam) z)``, the projection onto
the maximal ideal at ``lam`` and division by ``b`` inside that ideal.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, NamedTuple

import numpy as np

from . import scalars
from .errors import NotInIdeal
from .scalars import Gaussian

DEFAULT_IDEAL_TOL = 1e-10


class Bounded(NamedTuple):
    """A computed scalar together with a rigorous bound on its error."""

    value: Any
    error: Any


@dataclass(frozen=True)
class DiscPoint:
    """A point of the closed unit disc, i.e. a character of l1(Z+)."""

    lam: Any

    def __post_init__(self):
        lam = self.lam
        if isinstance(lam, str):
            lam = scalars.parse_scalar(lam, exact=True)
        elif not isinstance(lam, Gaussian):
            if isinstance(lam, Fraction):
                lam = Gaussian(lam)
            else:
                lam = complex(lam)
        object.__setattr__(self, "lam", lam)
        if isinstance(lam, Gaussian):
            if lam.abs2() > 1:
                raise ValueError(f"|lambda| > 1: {lam}")
        elif abs(lam) > 1 + 1e-15:
            raise ValueError(f"|lambda| > 1: {lam}")

    @property
    def exact(self) -> bool:
        return isinstance(self.lam, Gaussian)

    @property
    def interior(self) -> bool:
        if self.exact:
            return self.lam.abs2() < 1
        return abs(self.lam) < 1

    @property
    def radius(self):
        return scalars.modulus(self.lam)

    def exactly(self) -> "DiscPoint":
        return DiscPoint(scalars.as_exact(self.lam))


class TruncatedSeries:
    """Element of l1(Z+) stored up to degree ``deg`` plus a certified tail."""

    __slots__ = ("coeffs", "tail")

    def __init__(self, coeffs, tail=0.0):
        arr = np.asarray(coeffs)
        if arr.dtype != object:
            arr = np.array(arr, dtype=complex)
            if not np.all(np.isfinite(arr)):
                raise ValueError("coefficients must be finite")
        else:
            arr = arr.copy()
        if arr.ndim != 1 or arr.size == 0:
            raise ValueError("coefficients must be a nonempty 1-d array")
        if tail < 0:
            raise ValueError("tail must be nonnegative")
        arr.flags.writeable = False
        self.coeffs = arr
        self.tail = tail

    @classmethod
    def delta(cls, j: int, exact: bool = False) -> "TruncatedSeries":
        c = scalars.zeros(j + 1, exact)
        c[j] = Gaussian(1) if exact else 1.0
        return cls(c, Fraction(0) if exact else 0.0)

    @classmethod
    def zero(cls, exact: bool = False) -> "TruncatedSeries":
        return cls(scalars.zeros(1, exact), Fraction(0) if exact else 0.0)

    @property
    def exact(self) -> bool:
        return self.coeffs.dtype == object

    @property
    def deg(self) -> int:
        return self.coeffs.size - 1

    @property
    def norm_lower(self):
        return scalars.sum_abs(self.coeffs)

    @property
    def norm_upper(self):
        return self.norm_lower + self.tail

    def padded(self, n: int) -> np.ndarray:
        """Coefficients a_0..a_{n-1}, zero-padded or cut."""
        out = scalars.zeros(n, self.exact)
        k = min(n, self.coeffs.size)
        out[:k] = self.coeffs[:k]
        return out

    def as_float(self) -> "TruncatedSeries":
        if not self.exact:
            return self
        return TruncatedSeries(np.array([complex(c) for c in self.coeffs]), float(self.tail))

    def __add__(self, other: "TruncatedSeries") -> "TruncatedSeries":
        a, b = _common_mode(self, other)
        n = max(a.coeffs.size, b.coeffs.size)
        return TruncatedSeries(a.padded(n) + b.padded(n), a.tail + b.tail)

    def __sub__(self, other: "TruncatedSeries") -> "TruncatedSeries":
        a, b = _common_mode(self, other)
        n = max(a.coeffs.size, b.coeffs.size)
        return TruncatedSeries(a.padded(n) - b.padded(n), a.tail + b.tail)

    def scale(self, c) -> "TruncatedSeries":
        return TruncatedSeries(self.coeffs * c, self.tail * scalars.modulus(c))

    def to_json(self) -> dict:
        if self.exact:
            pairs = [[str(scalars.as_exact(c).re), str(scalars.as_exact(c).im)] for c in self.coeffs]
            return {"coeffs": pairs, "tail": str(self.tail)}
        return {"coeffs": [[c.real, c.imag] for c in self.coeffs.tolist()], "tail": float(self.tail)}

    @classmethod
    def from_json(cls, data: dict) -> "TruncatedSeries":
        pairs = data["coeffs"]
        if pairs and isinstance(pairs[0][0], str):
            return cls(scalars.array([Gaussian(Fraction(r), Fraction(i)) for r, i in pairs], True),
                       Fraction(data["tail"]))
        return cls(np.array([complex(r, i) for r, i in pairs]), float(data["tail"]))

    def __repr__(self):
        return f"TruncatedSeries(deg={self.deg}, tail={self.tail!r})"


def _common_mode(a: TruncatedSeries, b: TruncatedSeries):
    if a.exact == b.exact:
        return a, b
    return a.as_float(), b.as_float()


def convolve(a: TruncatedSeries, b: TruncatedSeries, budget: int) -> TruncatedSeries:
    """Cauchy product of ``a`` and ``b`` keeping degrees ``<= budget``.

    The l1 mass of the discarded product terms is moved into the tail, together
    with the cross terms contributed by the operands' own tails.
    """
    if budget < 0:
        raise ValueError("budget must be nonnegative")
    a, b = _common_mode(a, b)
    full = np.convolve(a.coeffs, b.coeffs)
    kept = full[: budget + 1]
    dropped = scalars.sum_abs(full[budget + 1:])
    tail = dropped + a.norm_lower * b.tail + b.norm_lower * a.tail + a.tail * b.tail
    return TruncatedSeries(kept, tail)


def horner(coeffs: np.ndarray, z):
    acc = coeffs[-1]
    for c in coeffs[-2::-1]:
        acc = acc * z + c
    return acc


def evaluate_char(a: TruncatedSeries, p: DiscPoint) -> Bounded:
    """Gelfand transform of ``a`` at ``p``; the error bound is ``a.tail`` since |lam| <= 1."""
    lam = p.lam
    if a.exact and not p.exact:
        a = a.as_float()
    coeffs = a.coeffs
    if not a.exact and p.exact:
        lam = complex(lam)
    return Bounded(horner(coeffs, lam), a.tail)


def blaschke(p: DiscPoint, M: int) -> TruncatedSeries:
    """Taylor coefficients of the Blaschke factor at ``p`` up to degree ``M``.

    ``b(z) = -lam + sum_{n>=1} (1 - |lam|^2) conj(lam)^(n-1) z^n``; the omitted
    terms have l1 mass exactly ``(1 + |lam|) |lam|^M``.
    """
    if not p.interior:
        raise ValueError("blaschke factor needs |lambda| < 1")
    if M < 0:
        raise ValueError("M must be nonnegative")
    lam, exact = p.lam, p.exact
    one_minus = (1 - lam.abs2()) if exact else 1.0 - abs(lam) ** 2
    coeffs = scalars.zeros(M + 1, exact)
    coeffs[0] = -lam
    if M >= 1:
        coeffs[1:] = scalars.powers(scalars.conj(lam), M - 1, exact) * one_minus
    r = p.radius
    tail = (1 + r) * r ** M
    return TruncatedSeries(coeffs, tail)


def blaschke_cutoff(p: DiscPoint, tol: float = 1e-10, cap: int = 5000) -> int:
    """Smallest M >= 1 with (1+2r)(1+r) r^M <= tol, capped at ``cap``."""
    r = float(p.radius)
    if r == 0.0:
        return 1
    if r >= 1.0:
        return cap
    scale = (1 + 2 * r) * (1 + r)
    M = max(1, math.ceil(math.log(tol / scale) / math.log(r)))
    while M > 1 and scale * r ** (M - 1) <= tol:
        M -= 1
    while scale * r ** M > tol and M < cap:
        M += 1
    return min(M, cap)


def maximal_ideal_project(f: TruncatedSeries, p: DiscPoint) -> TruncatedSeries:
    """``f - f(lam) * 1``, the projection of the algebra onto the ideal at ``p``."""
    value = evaluate_char(f, p).value
    coeffs = f.coeffs.copy() if f.exact else np.array(f.coeffs, dtype=complex)
    if not f.exact and p.exact:
        value = complex(value)
    coeffs[0] = coeffs[0] - value
    return TruncatedSeries(coeffs, 2 * f.tail)


def in_ideal(f: TruncatedSeries, p: DiscPoint, tol: float = DEFAULT_IDEAL_TOL) -> bool:
    value = evaluate_char(f, p).value
    return float(scalars.modulus(value)) <= tol * (1 + float(f.norm_upper))


def blaschke_divide(f: TruncatedSeries, p: DiscPoint, tol: float = DEFAULT_IDEAL_TOL) -> TruncatedSeries:
    """Return ``g`` with ``b * g = f`` for a polynomial ``f`` vanishing at ``lam``.

    ``f`` is deflated by the root ``lam`` (synthetic division by ``z - lam``)
    and the quotient is multiplied by ``1 - conj(lam) z``, so ``deg g <= deg f``.
    """
    if f.tail != 0:
        raise ValueError("blaschke_divide needs a polynomial input (tail 0)")
    if not p.interior:
        raise ValueError("blaschke_divide needs |lambda| < 1")
    if f.exact != p.exact:
        f = TruncatedSeries(scalars.to_exact_array(f.coeffs), Fraction(0)) if p.exact else f.as_float()
    if not in_ideal(f, p, tol):
        value = evaluate_char(f, p).value
        raise NotInIdeal(f"|f(lambda)| = {float(scalars.modulus(value)):.3e} exceeds tolerance")
    lam, exact = p.lam, p.exact
    d = f.deg
    if d == 0:
        return TruncatedSeries.zero(exact)
    q = scalars.zeros(d, exact)
    q[d - 1] = f.coeffs[d]
    for k in range(d - 1, 0, -1):
        q[k - 1] = f.coeffs[k] + lam * q[k]
    g = scalars.zeros(d + 1, exact)
    g[:d] = q
    g[1:] = g[1:] - scalars.conj(lam) * q
    return TruncatedSeries(g, Fraction(0) if exact else 0.0)


def quotient_of_basis(p: DiscPoint, j: int) -> TruncatedSeries:
    """Closed form of ``blaschke_divide(z^j - lam^j)``.

    Coefficients ``lam^(j-1)``, ``(1-|lam|^2) lam^(j-1-k)`` for ``1 <= k <= j-1``
    and ``-conj(lam)`` in degree ``j``; the zero series for ``j = 0``.
    """
    exact = p.exact
    if j == 0:
        return TruncatedSeries.zero(exact)
    lam = p.lam
    pw = scalars.powers(lam, j - 1, exact)
    one_minus = (1 - lam.abs2()) if exact else 1.0 - abs(lam) ** 2
    c = scalars.zeros(j + 1, exact)
    c[0] = pw[j - 1]
    if j >= 2:
        c[1:j] = pw[j - 2::-1] * one_minus
    c[j] = -scalars.conj(lam)
    return TruncatedSeries(c, Fraction(0) if exact else 0.0)


def quotient_matrix(p: DiscPoint, n: int) -> np.ndarray:
    """Row ``j`` holds the coefficients of ``quotient_of_basis(p, j)``, ``0 <= j <= n``."""
    G = scalars.zeros((n + 1, n + 1), p.exact)
    for j in range(1, n + 1):
        G[j, : j + 1] = quotient_of_basis(p, j).coeffs
    return G


class TensorSeries:
    """Element of l1(Z+) (x) l1(Z+) = l1(Z+ x Z+), dense on a rectangle.

    ``tail`` bounds the l1 mass outside the stored rectangle.
    """

    __slots__ = ("values", "tail")

    def __init__(self, values: np.ndarray, tail=0.0):
        values = np.asarray(values)
        if values.ndim != 2:
            raise ValueError("tensor values must be 2-d")
        values = values.copy()
        values.flags.writeable = False
        self.values = values
        self.tail = tail

    @classmethod
    def elementary(cls, x: TruncatedSeries, y: TruncatedSeries) -> "TensorSeries":
        x, y = _common_mode(x, y)
        tail = x.norm_lower * y.tail + y.norm_lower * x.tail + x.tail * y.tail
        return cls(np.multiply.outer(x.coeffs, y.coeffs), tail)

    @property
    def norm_lower(self):
        return scalars.sum_abs(self.values)

    @property
    def norm_upper(self):
        return self.norm_lower + self.tail

    def contract(self) -> TruncatedSeries:
        """The multiplication map x (x) y -> x * y."""
        m, n = self.values.shape
        out = scalars.zeros(m + n - 1, self.values.dtype == object)
        for a in range(m):
            out[a: a + n] = out[a: a + n] + self.values[a]
        return TruncatedSeries(out, self.tail)

    def right_act(self, c: TruncatedSeries) -> "TensorSeries":
        """(x (x) y) . c = x (x) (y * c)."""
        vals = np.array([np.convolve(row, c.coeffs) for row in self.values])
        tail = self.tail * c.norm_upper + self.norm_lower * c.tail
        return TensorSeries(vals, tail)


def sigma(f: TruncatedSeries, p: DiscPoint, M: int, tol: float = DEFAULT_IDEAL_TOL) -> TensorSeries:
    """``b (x) (b^{-1} f)`` for ``f`` in the ideal at ``p``, with ``b`` cut at degree ``M``.

    The stored tensor contracts back to ``f`` up to ``tail = b.tail * ||b^{-1} f||``.
    """
    g = blaschke_divide(f, p, tol)
    b = blaschke(p, M)
    return TensorSeries(np.multiply.outer(b.coeffs, g.coeffs), b.tail * g.norm_lower)
