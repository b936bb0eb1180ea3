"""l1(G+) for a subgroup G of the rationals, with exact rational supports.

Supports are :class:`fractions.Fraction` keys, so bucketing by ``floor(x/alpha)``
and the divisibility order on step sizes are exact.  Values are complex floats
by default.

The order on positive step sizes: ``alpha <= beta`` when ``alpha = k * beta``
for a positive integer k (beta is finer).  Any two steps have the upper bound
:func:`join`.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, NamedTuple, Sequence

import numpy as np

from .errors import ChainNotRefining, NotInIdeal, WindowTooSmall
from .seriesalg import (
    DEFAULT_IDEAL_TOL,
    DiscPoint,
    TruncatedSeries,
    blaschke,
    blaschke_cutoff,
    blaschke_divide,
    quotient_matrix,
    sigma,
)

INF = math.inf


def as_fraction(x) -> Fraction:
    if isinstance(x, float):
        raise TypeError("rational keys must be exact; pass a Fraction, int or 'p/q' string")
    return Fraction(x)


@dataclass(frozen=True)
class RatChar:
    """phi(b) = sum_x b(x) e^{-t x} e^{i s x}; t = INF means phi(b) = b(0)."""

    t: float = 1.0
    s: float = 0.0

    def __post_init__(self):
        if not (self.t >= 0):
            raise ValueError("t must be >= 0 or INF")

    @property
    def infinite(self) -> bool:
        return self.t == INF

    def weight(self, x) -> complex:
        """phi(delta_x)."""
        if self.infinite:
            return 1.0 + 0j if x == 0 else 0j
        return cmath.exp(complex(-self.t, self.s) * float(x))

    def point(self, alpha) -> complex:
        """The disc point e^{(-t + i s) alpha} seen by the copy of Z+ at step alpha."""
        return self.weight(as_fraction(alpha))


class RationalSeries:
    """Finitely supported function on the nonnegative rationals."""

    __slots__ = ("data",)

    def __init__(self, data: Mapping | None = None):
        clean: dict[Fraction, complex] = {}
        for k, v in (data or {}).items():
            k = as_fraction(k)
            if k < 0:
                raise ValueError(f"negative support point {k}")
            if v != 0:
                clean[k] = clean.get(k, 0) + v
        self.data = clean

    @classmethod
    def delta(cls, x, value=1.0) -> "RationalSeries":
        return cls({as_fraction(x): value})

    def __getitem__(self, x):
        return self.data.get(as_fraction(x), 0)

    def support(self) -> list[Fraction]:
        return sorted(self.data)

    def norm(self) -> float:
        return float(sum(abs(v) for v in self.data.values()))

    def __add__(self, other: "RationalSeries") -> "RationalSeries":
        out = dict(self.data)
        for k, v in other.data.items():
            out[k] = out.get(k, 0) + v
        return RationalSeries(out)

    def __sub__(self, other: "RationalSeries") -> "RationalSeries":
        return self + other.scale(-1)

    def scale(self, c) -> "RationalSeries":
        return RationalSeries({k: c * v for k, v in self.data.items()})

    def __mul__(self, other: "RationalSeries") -> "RationalSeries":
        out: dict[Fraction, complex] = {}
        for x, u in self.data.items():
            for y, v in other.data.items():
                out[x + y] = out.get(x + y, 0) + u * v
        return RationalSeries(out)

    def evaluate(self, c: RatChar) -> complex:
        if c.infinite:
            return complex(self[0])
        return complex(sum(v * c.weight(x) for x, v in self.data.items()))

    def on_lattice(self, alpha) -> bool:
        alpha = as_fraction(alpha)
        return all((x / alpha).denominator == 1 for x in self.data)

    def to_json(self) -> list[dict]:
        return [{"num": k.numerator, "den": k.denominator, "re": complex(v).real, "im": complex(v).imag}
                for k, v in sorted(self.data.items())]

    @classmethod
    def from_json(cls, items: Iterable[dict]) -> "RationalSeries":
        return cls({Fraction(d["num"], d["den"]): complex(d["re"], d["im"]) for d in items})

    def __eq__(self, other):
        return isinstance(other, RationalSeries) and self.data == other.data

    def __repr__(self):
        body = ", ".join(f"{k}: {v}" for k, v in sorted(self.data.items()))
        return f"RationalSeries({{{body}}})"


class RationalTensor:
    """Element of l1(G+) (x) l1(G+) = l1(G+ x G+); norm is the plain l1 sum."""

    __slots__ = ("data", "tail")

    def __init__(self, data: Mapping | None = None, tail: float = 0.0):
        self.data = {(as_fraction(x), as_fraction(y)): v for (x, y), v in (data or {}).items() if v != 0}
        self.tail = tail

    @classmethod
    def elementary(cls, u: RationalSeries, v: RationalSeries) -> "RationalTensor":
        return cls({(x, y): a * b for x, a in u.data.items() for y, b in v.data.items()})

    def norm(self) -> float:
        return float(sum(abs(v) for v in self.data.values()))

    def contract(self) -> RationalSeries:
        out: dict[Fraction, complex] = {}
        for (x, y), v in self.data.items():
            out[x + y] = out.get(x + y, 0) + v
        return RationalSeries(out)

    def right_act(self, b: RationalSeries) -> "RationalTensor":
        out: dict = {}
        for (x, y), v in self.data.items():
            for z, w in b.data.items():
                key = (x, y + z)
                out[key] = out.get(key, 0) + v * w
        return RationalTensor(out, self.tail * b.norm())

    def __sub__(self, other: "RationalTensor") -> "RationalTensor":
        out = dict(self.data)
        for k, v in other.data.items():
            out[k] = out.get(k, 0) - v
        return RationalTensor(out, self.tail + other.tail)


# -- the directed set ---------------------------------------------------------


def join(a1, a2) -> Fraction:
    """Largest gamma with a1/gamma and a2/gamma both integers."""
    a1, a2 = as_fraction(a1), as_fraction(a2)
    if a1 <= 0 or a2 <= 0:
        raise ValueError("join needs positive rationals")
    p1, q1 = a1.numerator, a1.denominator
    p2, q2 = a2.numerator, a2.denominator
    return Fraction(math.gcd(p1 * q2, p2 * q1), q1 * q2)


def join_all(values: Iterable) -> Fraction:
    out = None
    for v in values:
        v = as_fraction(v)
        if v == 0:
            continue
        out = v if out is None else join(out, v)
    if out is None:
        raise ValueError("join_all needs at least one positive rational")
    return out


def refines(alpha, beta) -> bool:
    """alpha <= beta in the order: alpha is a positive integer multiple of beta."""
    q = as_fraction(alpha) / as_fraction(beta)
    return q > 0 and q.denominator == 1


def check_chain(chain: Sequence) -> list[Fraction]:
    chain = [as_fraction(a) for a in chain]
    if any(a <= 0 for a in chain):
        raise ChainNotRefining("chain entries must be positive")
    for a, b in zip(chain, chain[1:]):
        if not refines(a, b):
            raise ChainNotRefining(f"{a} is not an integer multiple of {b}")
    return chain


# -- theta projections ---------------------------------------------------------


def theta(b: RationalSeries, alpha, c: RatChar) -> RationalSeries:
    """Fold each bucket [n alpha, (n+1) alpha) onto n alpha with the character weight."""
    if c.infinite:
        return theta_inf(b, alpha)
    alpha = as_fraction(alpha)
    out: dict[Fraction, complex] = {}
    for x, v in b.data.items():
        n = x // alpha
        base = n * alpha
        out[base] = out.get(base, 0) + v * c.weight(x - base)
    return RationalSeries(out)


def theta_inf(b: RationalSeries, alpha) -> RationalSeries:
    alpha = as_fraction(alpha)
    return RationalSeries({x: v for x, v in b.data.items() if (x / alpha).denominator == 1})


def theta_converges(b: RationalSeries, chain: Sequence, c: RatChar) -> list[float]:
    """||theta_alpha(b) - b|| along a refining chain."""
    return [(theta(b, a, c) - b).norm() for a in check_chain(chain)]


# -- flatness witnesses -------------------------------------------------------


def lattice_series(f: RationalSeries, alpha) -> TruncatedSeries:
    """f on alpha Z+ as the l1(Z+) element n -> f(n alpha)."""
    alpha = as_fraction(alpha)
    if not f.on_lattice(alpha):
        raise ValueError(f"series not supported on {alpha} Z+")
    deg = max((int(x / alpha) for x in f.data), default=0)
    coeffs = np.zeros(deg + 1, dtype=complex)
    for x, v in f.data.items():
        coeffs[int(x / alpha)] += v
    return TruncatedSeries(coeffs, 0.0)


def sigma_alpha(f: RationalSeries, alpha, c: RatChar, M_b: int | None = None,
                tol: float = DEFAULT_IDEAL_TOL) -> RationalTensor:
    """sigma for the copy of Z+ at step alpha, read back onto alpha Z+ x alpha Z+."""
    alpha = as_fraction(alpha)
    p = DiscPoint(c.point(alpha))
    if M_b is None:
        M_b = blaschke_cutoff(p)
    ts = sigma(lattice_series(f, alpha), p, M_b, tol)
    vals = ts.values
    data = {(a * alpha, k * alpha): complex(vals[a, k])
            for a, k in zip(*np.nonzero(vals))}
    return RationalTensor(data, ts.tail)


def rho_alpha(f: RationalSeries, alpha, c: RatChar, M_b: int | None = None) -> RationalTensor:
    return sigma_alpha(theta(f, alpha, c), alpha, c, M_b)


class FlatWitness(NamedTuple):
    r1: float
    r2: float
    norm_bound: float
    ratio: float


def _grid(f: RationalSeries, gamma: Fraction, length: int) -> np.ndarray:
    out = np.zeros(length, dtype=complex)
    for x, v in f.data.items():
        out[int(x / gamma)] += v
    return out


def _upsample(vec: np.ndarray, k: int) -> np.ndarray:
    out = np.zeros((vec.size - 1) * k + 1, dtype=complex)
    out[::k] = vec
    return out


def flat_witness_residuals(cvec: RationalSeries, b: RationalSeries, alpha, c: RatChar,
                           M_b: int | None = None, tol: float = DEFAULT_IDEAL_TOL) -> FlatWitness:
    """r1 = ||pi rho(c) - c||, r2 = ||rho(c).b - rho(c*b)||, bound (1+2|lam|)^2 <= 9.

    ``ratio`` is the measured ||rho(c)|| / ||c||.  Every rho_alpha(x) has the
    form ``b_lam (x) S(theta x)`` with the same first factor, so the
    computation runs on dense vectors over a common grid gamma Z+ and
    ``r2 = ||b_lam|| * ||S(theta c) * b - S(theta(c b))||``.
    """
    if c.infinite or c.t <= 0:
        raise ValueError("flat_witness_residuals needs 0 < t < INF")
    if abs(cvec.evaluate(c)) > tol * (1 + cvec.norm()):
        raise NotInIdeal(f"|phi(c)| = {abs(cvec.evaluate(c)):.3g} exceeds tolerance")
    alpha = as_fraction(alpha)
    p = DiscPoint(c.point(alpha))
    if M_b is None:
        M_b = blaschke_cutoff(p)
    gamma = join_all([alpha, *cvec.data, *b.data])
    k = int(alpha / gamma)
    bl = blaschke(p, M_b)
    cb = cvec * b

    def quotient(f: RationalSeries) -> np.ndarray:
        th = theta(f, alpha, c)
        if not th.data:
            return np.zeros(1, dtype=complex)
        return _upsample(blaschke_divide(lattice_series(th, alpha), p, tol).coeffs, k)

    g_c, g_cb = quotient(cvec), quotient(cb)
    contracted = np.convolve(_upsample(bl.coeffs, k), g_c)
    top = max([0, *(int(x / gamma) for x in cvec.data)])
    n = max(contracted.size, top + 1)
    r1 = float(np.abs(np.pad(contracted, (0, n - contracted.size)) - _grid(cvec, gamma, n)).sum())
    top_b = max([0, *(int(x / gamma) for x in b.data)])
    moved = np.convolve(g_c, _grid(b, gamma, top_b + 1))
    n = max(moved.size, g_cb.size)
    diff = np.pad(moved, (0, n - moved.size)) - np.pad(g_cb, (0, n - g_cb.size))
    r2 = float(bl.norm_lower * np.abs(diff).sum())
    ratio = float(bl.norm_lower * np.abs(g_c).sum() / cvec.norm()) if cvec.norm() else 0.0
    return FlatWitness(r1, r2, (1 + 2 * abs(p.lam)) ** 2, ratio)


def infinity_witness(f: RationalSeries, alpha) -> tuple[RationalTensor, float]:
    """delta_alpha (x) (delta_{-alpha} * theta_alpha f) and ||theta_alpha f - f||."""
    if f[0] != 0:
        raise NotInIdeal("f(0) must vanish for the character at t = INF")
    alpha = as_fraction(alpha)
    th = theta_inf(f, alpha)
    tensor = RationalTensor({(alpha, x - alpha): v for x, v in th.data.items()})
    return tensor, (th - f).norm()


# -- pre-limit splitting maps -------------------------------------------------


class LatticeCochain:
    """A 2-cochain on G+ known on a grid gamma Z+ x gamma Z+: values[i, k] = F(i gamma, k gamma)."""

    __slots__ = ("gamma", "values")

    def __init__(self, gamma, values):
        self.gamma = as_fraction(gamma)
        values = np.asarray(values, dtype=complex)
        if values.ndim != 2:
            raise ValueError("only degree-2 lattice cochains are supported")
        self.values = values

    def index(self, x) -> int:
        q = as_fraction(x) / self.gamma
        if q.denominator != 1:
            raise WindowTooSmall(f"{x} is not on the grid {self.gamma} Z+")
        return int(q)


def random_lattice_cochain(gamma, shape, seed: int, scale: float = 1.0) -> LatticeCochain:
    rng = np.random.default_rng(seed)
    size = int(np.prod(shape))
    vals = scale * np.sqrt(rng.random(size)) * np.exp(2j * np.pi * rng.random(size))
    return LatticeCochain(gamma, vals.reshape(shape))


def prelimit_shape(gamma, alpha, window: Sequence, M_b: int) -> tuple[int, int]:
    """Smallest grid box prelimit_flat_split reads."""
    gamma, alpha = as_fraction(gamma), as_fraction(alpha)
    k = alpha / gamma
    if k.denominator != 1:
        raise WindowTooSmall(f"step {alpha} is not on the grid {gamma} Z+")
    k = int(k)
    xs = [as_fraction(x) for x in window]
    top = max(xs)
    n_pair = int((2 * top) // alpha)
    n_one = int(top // alpha)
    y_top = int(top / gamma)
    rows = max((M_b + n_one) * k, y_top) + 1
    cols = max(n_pair * k, n_one * k + y_top, y_top) + 1
    return rows, cols


def prelimit_residual(F: LatticeCochain, c: RatChar, alpha, window: Sequence,
                      M_b: int | None = None) -> np.ndarray:
    """(delta s1 + s2 delta - id) F on window x window, with Lambda' replaced by rho_alpha.

    s1 F(f) = -F~(rho_alpha(p f)) + phi(f) F(0, 0)
    s2 G(f, g) = -G~(rho_alpha(p f) (x) g) + phi(f) G(0, 0, g)
    where p f = f - phi(f) delta_0 and delta_0 is the unit.
    """
    if c.infinite or c.t <= 0:
        raise ValueError("prelimit_flat_split needs 0 < t < INF")
    alpha = as_fraction(alpha)
    xs = [as_fraction(x) for x in window]
    lam = c.point(alpha)
    p = DiscPoint(lam)
    if M_b is None:
        M_b = blaschke_cutoff(p)
    rows, cols = prelimit_shape(F.gamma, alpha, xs, M_b)
    if F.values.shape[0] < rows or F.values.shape[1] < cols:
        raise WindowTooSmall(f"grid box {F.values.shape} too small, need {(rows, cols)}")
    k = int(alpha / F.gamma)
    V = F.values
    z = complex(-c.t, c.s)
    b = blaschke(p, M_b).coeffs
    a_idx = np.arange(M_b + 1)

    xi = np.array([F.index(x) for x in xs])
    n_x = np.array([int(x // alpha) for x in xs])
    xf = np.array([float(x) for x in xs])
    w_x = np.exp(z * (xf - n_x * float(alpha)))
    phi_x = np.exp(z * xf)
    F00 = V[0, 0]

    # sums x + y for the s1 evaluations
    sum_vals = [[xs[i] + xs[j] for j in range(len(xs))] for i in range(len(xs))]
    n_sum = np.array([[int(v // alpha) for v in row] for row in sum_vals])
    sum_f = np.add.outer(xf, xf)
    w_sum = np.exp(z * (sum_f - n_sum * float(alpha)))
    phi_sum = np.exp(z * sum_f)

    C = int(max(n_sum.max(), n_x.max()))
    Q = quotient_matrix(p, C)
    c_idx = np.arange(C + 1)
    Kvec = b @ V[np.ix_(a_idx * k, c_idx * k)]  # (C+1,)
    s1_x = -w_x * (Q[n_x] @ Kvec) + phi_x * F00
    s1_sum = -w_sum * (Q[n_sum] @ Kvec) + phi_sum * F00
    d_s1 = phi_x[:, None] * s1_x[None, :] - s1_sum + s1_x[:, None] * phi_x[None, :]

    # s2 of delta F
    Cx = int(n_x.max())
    cx_idx = np.arange(Cx + 1)
    A = a_idx[:, None, None]
    Cc = cx_idx[None, :, None]
    Y = xi[None, None, :]
    phi_a = np.exp(z * float(alpha) * a_idx)[:, None, None]
    D = (phi_a * V[Cc * k, Y]
         - V[(A + Cc) * k, Y]
         + V[A * k, Cc * k + Y]
         - V[A * k, Cc * k] * phi_x[None, None, :])
    L = np.tensordot(b, D, axes=(0, 0))  # (Cx+1, |Y|)
    dF00y = V[0, xi] - F00 * phi_x
    s2_dF = -w_x[:, None] * (Q[n_x][:, : Cx + 1] @ L) + phi_x[:, None] * dF00y[None, :]

    return d_s1 + s2_dF - V[np.ix_(xi, xi)]


def prelimit_flat_split(F: LatticeCochain, c: RatChar, alpha, window: Sequence,
                        M_b: int | None = None) -> float:
    """Sup over window pairs of |(delta s1 + s2 delta - id) F|."""
    return float(np.max(np.abs(prelimit_residual(F, c, alpha, window, M_b))))
