"""Discretized L1(R+) and M(R) for the half-line kernels.

Densities are piecewise constant on cells ``[lo + k h, lo + (k+1) h)`` and are
sampled at cell midpoints.  ``lo / h`` must be an integer, so every grid is a
window of the global lattice ``h Z`` and cells of different functions line up.
The unit mass at 0 is an exact atom and never touches the grid.

Fourier convention: ``F f(x) = int f(t) e^{i x t} dt``, so the character at a
point ``lam`` of the upper half-plane is ``f -> F f(lam)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.signal import fftconvolve

from .errors import GridMismatch, NotInIdeal

MEMBERSHIP_TOL = 1e-6


@dataclass(frozen=True)
class HalfPlanePoint:
    lam: complex

    def __post_init__(self):
        lam = complex(self.lam)
        if not lam.imag > 0:
            raise ValueError("point must lie in the open upper half-plane")
        object.__setattr__(self, "lam", lam)

    @property
    def im(self) -> float:
        return self.lam.imag


def default_length(p: HalfPlanePoint) -> float:
    return max(20.0, 14.0 / p.im)


def _cells(x: float, step: float) -> int:
    q = x / step
    k = round(q)
    if abs(q - k) > 1e-9 * max(1.0, abs(q)):
        raise GridMismatch(f"{x} is not a multiple of the step {step}")
    return int(k)


class GridFunction:
    """Piecewise-constant density on [lo, hi) with step h."""

    __slots__ = ("lo", "step", "values")

    def __init__(self, lo: float, hi: float, step: float, values):
        if step <= 0:
            raise ValueError("step must be positive")
        values = np.asarray(values, dtype=complex)
        _cells(lo, step)
        n = _cells(hi - lo, step)
        if n < 1 or values.shape != (n,):
            raise ValueError(f"expected {n} values for [{lo}, {hi}) with step {step}")
        self.lo = float(lo)
        self.step = float(step)
        self.values = values

    @property
    def hi(self) -> float:
        return self.lo + self.values.size * self.step

    @property
    def start(self) -> int:
        """Index of the first cell on the lattice step * Z."""
        return _cells(self.lo, self.step)

    def midpoints(self) -> np.ndarray:
        return self.lo + (np.arange(self.values.size) + 0.5) * self.step

    def norm(self) -> float:
        return float(self.step * np.abs(self.values).sum())

    @classmethod
    def sample(cls, fn, lo: float, hi: float, step: float) -> "GridFunction":
        n = _cells(hi - lo, step)
        t = lo + (np.arange(n) + 0.5) * step
        return cls(lo, hi, step, fn(t))

    @classmethod
    def zeros(cls, lo: float, hi: float, step: float) -> "GridFunction":
        return cls(lo, hi, step, np.zeros(_cells(hi - lo, step), dtype=complex))

    def extend(self, lo: float, hi: float) -> "GridFunction":
        """Zero-extend (or crop) to [lo, hi)."""
        a = _cells(lo, self.step)
        b = _cells(hi, self.step)
        out = np.zeros(b - a, dtype=complex)
        s = self.start
        lo_i, hi_i = max(a, s), min(b, s + self.values.size)
        if hi_i > lo_i:
            out[lo_i - a: hi_i - a] = self.values[lo_i - s: hi_i - s]
        return GridFunction(a * self.step, b * self.step, self.step, out)

    def restrict(self, lo: float, hi: float) -> "GridFunction":
        return self.extend(max(lo, self.lo), min(hi, self.hi))

    def _check(self, other: "GridFunction"):
        if not math.isclose(self.step, other.step, rel_tol=1e-12):
            raise GridMismatch(f"steps differ: {self.step} vs {other.step}")

    def __add__(self, other: "GridFunction") -> "GridFunction":
        self._check(other)
        lo, hi = min(self.lo, other.lo), max(self.hi, other.hi)
        a, b = self.extend(lo, hi), other.extend(lo, hi)
        return GridFunction(a.lo, a.hi, self.step, a.values + b.values)

    def __sub__(self, other: "GridFunction") -> "GridFunction":
        return self + other.scale(-1)

    def scale(self, c) -> "GridFunction":
        return GridFunction(self.lo, self.hi, self.step, self.values * c)

    def to_json(self) -> dict:
        return {"lo": self.lo, "hi": self.hi, "step": self.step,
                "values": [[v.real, v.imag] for v in self.values.tolist()]}

    @classmethod
    def from_json(cls, data: dict) -> "GridFunction":
        return cls(data["lo"], data["hi"], data["step"], [complex(r, i) for r, i in data["values"]])


class MeasureElement:
    """atom * delta_0 + density."""

    __slots__ = ("atom", "density")

    def __init__(self, atom, density: GridFunction):
        self.atom = complex(atom)
        self.density = density

    def norm(self) -> float:
        return abs(self.atom) + self.density.norm()


def convolve_densities(f: GridFunction, g: GridFunction) -> GridFunction:
    """Cell averages of f * g; exact for piecewise-constant f and g.

    The product of cell i of f and cell j of g is a hat on two cells starting
    at cell i + j, carrying half of its mass in each.
    """
    f._check(g)
    h = f.step
    conv = fftconvolve(f.values, g.values) if min(f.values.size, g.values.size) > 64 \
        else np.convolve(f.values, g.values)
    out = np.zeros(conv.size + 1, dtype=complex)
    out[:-1] += 0.5 * h * conv
    out[1:] += 0.5 * h * conv
    start = f.start + g.start
    return GridFunction(start * h, (start + out.size) * h, h, out)


def convolve_measures(m1: MeasureElement, m2: MeasureElement) -> MeasureElement:
    d1, d2 = m1.density, m2.density
    d1._check(d2)
    density = convolve_densities(d1, d2) + d2.scale(m1.atom) + d1.scale(m2.atom)
    return MeasureElement(m1.atom * m2.atom, density)


def convolve_with(m: MeasureElement, f: GridFunction) -> GridFunction:
    return convolve_densities(m.density, f) + f.scale(m.atom)


# -- kernels ----------------------------------------------------------------


def _length(p: HalfPlanePoint, step: float, L: float | None) -> float:
    """L (default ``default_length``) rounded up to a whole number of cells."""
    L = default_length(p) if L is None else L
    return math.ceil(L / step - 1e-9) * step


def u_plus(p: HalfPlanePoint, step: float, L: float | None = None) -> GridFunction:
    """1_{t>0} e^{-i conj(lam) t} on [0, L)."""
    L = _length(p, step, L)
    lam_bar = p.lam.conjugate()
    return GridFunction.sample(lambda t: np.exp(-1j * lam_bar * t), 0.0, L, step)


def u_minus(p: HalfPlanePoint, step: float, L: float | None = None) -> GridFunction:
    """1_{t<0} e^{-i lam t} on [-L, 0)."""
    L = _length(p, step, L)
    return GridFunction.sample(lambda t: np.exp(-1j * p.lam * t), -L, 0.0, step)


def kernel_budget(p: HalfPlanePoint, step: float, L: float) -> float:
    """2 (h Im lam + e^{-Im lam L}), the tolerance for ||u|| Im lam and ||h||."""
    return 2 * (step * p.im + math.exp(-p.im * L))


def h_measure(p: HalfPlanePoint, step: float, L: float | None = None) -> MeasureElement:
    return MeasureElement(1.0, u_plus(p, step, L).scale(-2 * p.im))


def h_check_measure(p: HalfPlanePoint, step: float, L: float | None = None) -> MeasureElement:
    return MeasureElement(1.0, u_minus(p, step, L).scale(-2 * p.im))


def fourier(f: GridFunction, x) -> np.ndarray:
    """Midpoint quadrature of int f(t) e^{i x t} dt."""
    x = np.atleast_1d(np.asarray(x, dtype=complex))
    t = f.midpoints()
    return f.step * np.exp(1j * np.multiply.outer(x, t)) @ f.values


def fourier_closed(p: HalfPlanePoint, x, kind: str):
    """Closed forms of F u+, F u-, F h and F h-check."""
    x = np.asarray(x, dtype=complex)
    lam, lam_bar = p.lam, p.lam.conjugate()
    if kind == "u+":
        return 1j / (x - lam_bar)
    if kind == "u-":
        return 1 / (1j * (x - lam))
    if kind == "h":
        return (x - lam) / (x - lam_bar)
    if kind == "h-check":
        return (x - lam_bar) / (x - lam)
    raise ValueError(f"unknown kernel {kind!r}")


def fourier_check(p: HalfPlanePoint, x, step: float, L: float | None = None,
                  kind: str = "u+") -> tuple[np.ndarray, np.ndarray]:
    """(quadrature, closed form) for F u+ or F u- at x."""
    f = u_plus(p, step, L) if kind == "u+" else u_minus(p, step, L)
    return fourier(f, x), fourier_closed(p, x, kind)


# -- ideal membership and the module maps -------------------------------------


def character(f: GridFunction, p: HalfPlanePoint) -> complex:
    """F f(lam) by midpoint quadrature."""
    return complex(fourier(f, p.lam)[0])


def require_ideal(f: GridFunction, p: HalfPlanePoint, tol: float = MEMBERSHIP_TOL):
    val = character(f, p)
    if abs(val) > tol * f.norm():
        raise NotInIdeal(f"|F f(lam)| = {abs(val):.3g} exceeds {tol} * ||f||")


def inverse_identity_residual(f: GridFunction, p: HalfPlanePoint, L: float | None = None) -> float:
    """||h * h-check * f - f||_1."""
    h = h_measure(p, f.step, L)
    hc = h_check_measure(p, f.step, L)
    g = convolve_with(h, convolve_with(hc, f))
    return (g - f).norm()


def ideal_support_check(f: GridFunction, p: HalfPlanePoint, L: float | None = None,
                        tol: float = MEMBERSHIP_TOL) -> float:
    """l1 mass of h-check * f on t < 0 (zero in the continuum for f in the ideal)."""
    if f.lo < 0:
        raise ValueError("f must be supported in [0, inf)")
    require_ideal(f, p, tol)
    g = convolve_with(h_check_measure(p, f.step, L), f)
    if g.lo >= 0:
        return 0.0
    return g.restrict(g.lo, 0.0).norm()


def approximate_unit(m: int, step: float) -> GridFunction:
    """e_m = m 1_[0, 1/m)."""
    return GridFunction(0.0, _cells(1.0 / m, step) * step, step,
                        np.full(_cells(1.0 / m, step), float(m), dtype=complex))


class HalfLineWitness(NamedTuple):
    norm_bound: float
    r: float
    left: GridFunction
    right: GridFunction


def flat_witness(f: GridFunction, p: HalfPlanePoint, m: int, L: float | None = None,
                 tol: float = MEMBERSHIP_TOL) -> HalfLineWitness:
    """rho(f) = (e_m * h) (x) (h-check * f); returns ||rho(f)|| / ||f|| and ||pi rho(f) - e_m * f||.

    The second factor is cut to t >= 0 before use (its mass on t < 0 is the
    negative-support defect).
    """
    require_ideal(f, p, tol)
    e = approximate_unit(m, f.step)
    left = convolve_with(h_measure(p, f.step, L), e)
    right = convolve_with(h_check_measure(p, f.step, L), f)
    right = right.restrict(0.0, right.hi)
    norm_bound = left.norm() * right.norm() / f.norm()
    r = (convolve_densities(left, right) - convolve_densities(e, f)).norm()
    return HalfLineWitness(norm_bound, r, left, right)


def approximate_identity_error(f: GridFunction, m: int) -> float:
    """||e_m * f - f||_1."""
    return (convolve_densities(approximate_unit(m, f.step), f) - f).norm()


def ideal_test_function(p: HalfPlanePoint, step: float, width: float = 1.0) -> GridFunction:
    """e^{-i lam t} (1_[0,w) - 1_[w,2w)), which has F f(lam) = 0 exactly on the grid."""
    def fn(t):
        g = np.where(t < width, 1.0, -1.0)
        return np.exp(-1j * p.lam * t) * g
    return GridFunction.sample(fn, 0.0, 2 * width, step)


def refinement_study(fn, levels) -> list[tuple[float, float, float]]:
    """Rows (h, L, fn(h, L)) for each (h, L) in levels."""
    return [(h, L, float(fn(h, L))) for h, L in levels]
