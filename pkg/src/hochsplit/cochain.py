"""Hochschild cochains C^n(l1(Z+), C_lam) in basis coordinates.

An n-cochain is determined by its values on tuples of basis vectors
``(delta_{j1}, ..., delta_{jn})``; we store those values densely on a box
``{0..L_1-1} x ... x {0..L_n-1}`` (a cube of side ``N+1`` in the common case).
Because the domain is an l1 space, the norm of the multilinear functional on
the stored box is simply the largest stored modulus.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Sequence

import numpy as np

from . import scalars
from .errors import WindowTooSmall
from .scalars import Gaussian
from .seriesalg import Bounded, DiscPoint, TruncatedSeries


class Cochain:
    """Values of an n-cochain with coefficients in the point module at ``point``."""

    __slots__ = ("values", "point")

    def __init__(self, values, point: DiscPoint):
        values = np.asarray(values)
        if values.dtype != object:
            values = np.array(values, dtype=complex)
        else:
            values = values.copy()
        if any(s < 1 for s in values.shape):
            raise ValueError("cochain boxes must be nonempty")
        values.flags.writeable = False
        self.values = values
        if not isinstance(point, DiscPoint):
            point = DiscPoint(point)
        if values.dtype == object and not point.exact:
            point = point.exactly()
        self.point = point

    @property
    def degree(self) -> int:
        return self.values.ndim

    @property
    def shape(self) -> tuple[int, ...]:
        return self.values.shape

    @property
    def window(self) -> int:
        """Largest N such that the cube {0..N}^n is stored."""
        return min(self.shape) - 1 if self.degree else 0

    @property
    def exact(self) -> bool:
        return self.values.dtype == object

    @property
    def lam(self):
        return self.point.lam if self.exact else complex(self.point.lam)

    def norm(self):
        return cochain_norm(self)

    def restrict(self, shape: Sequence[int] | int) -> "Cochain":
        if isinstance(shape, int):
            shape = (shape,) * self.degree
        if len(shape) != self.degree or any(w > s for w, s in zip(shape, self.shape)):
            raise WindowTooSmall(f"cannot restrict box {self.shape} to {tuple(shape)}")
        return Cochain(self.values[tuple(slice(0, w) for w in shape)], self.point)

    def __sub__(self, other: "Cochain") -> "Cochain":
        return Cochain(self.values - other.values, self.point)

    def __add__(self, other: "Cochain") -> "Cochain":
        return Cochain(self.values + other.values, self.point)

    def scale(self, c) -> "Cochain":
        return Cochain(self.values * c, self.point)

    def to_json(self) -> dict:
        lam = self.point.lam
        if self.exact:
            g = scalars.as_exact(lam)
            flat = [[str(scalars.as_exact(v).re), str(scalars.as_exact(v).im)] for v in self.values.reshape(-1)]
            lam_pair = [str(g.re), str(g.im)]
        else:
            flat = [[v.real, v.imag] for v in self.values.reshape(-1).tolist()]
            lam_pair = [complex(lam).real, complex(lam).imag]
        out = {"degree": self.degree, "window": self.window, "lambda": lam_pair, "values": flat}
        if len(set(self.shape)) > 1:
            out["shape"] = list(self.shape)
        return out

    @classmethod
    def from_json(cls, data: dict) -> "Cochain":
        n, N = data["degree"], data["window"]
        shape = tuple(data.get("shape", (N + 1,) * n))
        flat = data["values"]
        exact = bool(flat) and isinstance(flat[0][0], str)
        if exact:
            vals = scalars.array([Gaussian(Fraction(r), Fraction(i)) for r, i in flat], True)
            lam = Gaussian(Fraction(data["lambda"][0]), Fraction(data["lambda"][1]))
        else:
            vals = np.array([complex(r, i) for r, i in flat])
            lam = complex(*data["lambda"])
        return cls(vals.reshape(shape), DiscPoint(lam))

    def __repr__(self):
        return f"Cochain(degree={self.degree}, shape={self.shape}, lam={self.point.lam!r})"


def _axis_index(length: int, axis: int, ndim: int) -> np.ndarray:
    shape = [1] * ndim
    shape[axis] = length
    return np.arange(length).reshape(shape)


def admissible_output(shape: Sequence[int], out_shape: Sequence[int]) -> bool:
    """Whether the coboundary on ``out_shape`` only reads entries inside ``shape``."""
    n = len(shape)
    if len(out_shape) != n + 1 or any(w < 1 for w in out_shape):
        return False
    return all(out_shape[k] + out_shape[k + 1] - 1 <= shape[k] for k in range(n))


def coboundary(T: Cochain, out_shape: Sequence[int] | None = None) -> Cochain:
    """Hochschild coboundary for the point module C_lam.

    (dT)(j0..jn) = lam^j0 T(j1..jn) + sum_i (-1)^i T(.., j_{i-1}+j_i, ..)
                   + (-1)^(n+1) T(j0..j_{n-1}) lam^jn

    By default the output is the cube of side ``floor(N/2) + 1`` for an input
    window N, so every entry is computed from stored values only.  Any other
    output box must satisfy ``L_k + L_{k+1} - 1 <= shape[k]``.
    """
    n = T.degree
    if out_shape is None:
        if n == 0:
            out_shape = (1,)
        else:
            if T.window < 2:
                raise WindowTooSmall(f"coboundary needs window >= 2, got {T.window}")
            out_shape = (T.window // 2 + 1,) * (n + 1)
    out_shape = tuple(int(w) for w in out_shape)
    if not admissible_output(T.shape, out_shape):
        raise WindowTooSmall(f"output box {out_shape} not computable from box {T.shape}")

    lam, exact, vals = T.lam, T.exact, T.values
    ndim = n + 1
    idx = [_axis_index(w, k, ndim) for k, w in enumerate(out_shape)]
    pw_first = scalars.powers(lam, out_shape[0] - 1, exact).reshape(idx[0].shape)
    pw_last = scalars.powers(lam, out_shape[-1] - 1, exact).reshape(idx[-1].shape)

    if n == 0:
        # left and right actions coincide on C_lam
        return Cochain(pw_first * vals - vals * pw_last, T.point)

    out = pw_first * vals[tuple(idx[k + 1] for k in range(n))]
    for i in range(1, n + 1):
        sel = []
        for k in range(n):
            if k < i - 1:
                sel.append(idx[k])
            elif k == i - 1:
                sel.append(idx[i - 1] + idx[i])
            else:
                sel.append(idx[k + 1])
        term = vals[tuple(sel)]
        out = out - term if i % 2 else out + term
    last = vals[tuple(idx[k] for k in range(n))] * pw_last
    out = out + last if (n + 1) % 2 == 0 else out - last
    return Cochain(np.broadcast_to(out, out_shape), T.point)


def cochain_norm(T: Cochain):
    return scalars.max_abs(T.values)


def apply_multilinear(T: Cochain, *fs: TruncatedSeries) -> Bounded:
    """T(f_1, ..., f_n) with a bound for the omitted tails of the arguments.

    error <= ||T|| * sum_i (prod_{k != i} ||f_k||_upper) * f_i.tail
    """
    if len(fs) != T.degree:
        raise ValueError(f"expected {T.degree} arguments, got {len(fs)}")
    for i, f in enumerate(fs):
        if f.deg > T.shape[i] - 1:
            raise WindowTooSmall(f"argument {i} has degree {f.deg} beyond stored length {T.shape[i]}")
    acc = T.values
    for i, f in enumerate(fs):
        vec = f.padded(T.shape[i]) if (f.exact == T.exact) else _match(f, T.exact).padded(T.shape[i])
        acc = np.tensordot(vec, acc, axes=(0, 0))
    value = acc[()] if isinstance(acc, np.ndarray) else acc
    uppers = [f.norm_upper for f in fs]
    err = 0
    for i, f in enumerate(fs):
        if f.tail:
            prod = 1
            for k, u in enumerate(uppers):
                if k != i:
                    prod = prod * u
            err = err + prod * f.tail
    return Bounded(value, cochain_norm(T) * err)


def _match(f: TruncatedSeries, exact: bool) -> TruncatedSeries:
    if exact:
        return TruncatedSeries(scalars.to_exact_array(f.coeffs), Fraction(f.tail))
    return f.as_float()


def random_cochain(n: int, N: int, p: DiscPoint, seed: int, scale: float = 1.0,
                   shape: Sequence[int] | None = None, exact: bool = False) -> Cochain:
    """Entries i.i.d. uniform on the disc of radius ``scale`` (deterministic in ``seed``).

    In exact mode the same float samples are converted to rationals without
    rounding, so float and exact cochains for one seed agree entrywise.
    """
    if shape is None:
        shape = (N + 1,) * n
    shape = tuple(shape)
    rng = np.random.default_rng(seed)
    size = int(np.prod(shape)) if shape else 1
    radius = scale * np.sqrt(rng.random(size))
    angle = 2 * np.pi * rng.random(size)
    vals = (radius * np.exp(1j * angle)).reshape(shape)
    if exact:
        vals = scalars.to_exact_array(vals)
    return Cochain(vals, p)


def indicator(shape: Sequence[int], index: Sequence[int], p: DiscPoint, exact: bool = False) -> Cochain:
    vals = scalars.zeros(tuple(shape), exact)
    vals[tuple(index)] = Gaussian(1) if exact else 1.0
    return Cochain(vals, p)
