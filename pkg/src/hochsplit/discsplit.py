"""Splitting maps for the point cohomology of l1(Z+).

Interior points ``|lam| < 1`` use the Blaschke-factor formula

    (s_n T)(f_1, ..., f_n) = -T(b, b^{-1}(f_1 - f_1(lam)), f_2, ..., f_n)
                             + f_1(lam) T(1, 1, f_2, ..., f_n)

with ``b`` cut at degree ``M_b``; the cut is carried as a certified error.
Peak points ``|lam| = 1`` use the Foelner average ``v_m`` twisted by the
character as a delta-net.

Random cochains used by the checks are stored on boxes that are long in the
first slot (``M_b + N + 1``) and short elsewhere, which is all the formulas
ever read; this keeps degree-3 inputs small even when ``M_b`` is in the
thousands.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field
from functools import lru_cache
from fractions import Fraction
from typing import Any, NamedTuple

import numpy as np

from . import scalars
from .cochain import Cochain, coboundary, cochain_norm, random_cochain
from .errors import WindowTooSmall
from .seriesalg import (
    DiscPoint,
    TruncatedSeries,
    blaschke,
    blaschke_cutoff,
    quotient_matrix,
    quotient_of_basis,
)

UNIFORM_CONSTANT = 10


@dataclass
class SplitReport:
    lam: complex
    degree: int
    window: int
    blaschke_cutoff: int
    residual_sup: float
    certified_error: float
    operator_norm_s_n: float
    bound_check: bool
    slack: float = 0.0
    norm_T: float = 0.0
    division_sup: float | None = None
    norm_bound: float | None = None
    profile: list[float] = field(default_factory=list)

    def to_json(self) -> dict:
        d = asdict(self)
        lam = complex(self.lam)
        d["lam"] = [lam.real, lam.imag]
        return d


def _float_point(p: DiscPoint, exact: bool) -> DiscPoint:
    return p if exact or not p.exact else DiscPoint(complex(p.lam))


def split_tail_factor(p: DiscPoint, M_b: int):
    """(1 + 2|lam|)(1 + |lam|)|lam|^M_b: per-entry cost of cutting b at degree M_b."""
    r = p.radius
    return (1 + 2 * r) * (1 + r) * r ** M_b


def rounding_allowance(terms: int, scale, exact: bool) -> float:
    """A priori floating-point allowance for sums of ``terms`` products of total size ``scale``."""
    if exact:
        return 0
    return 20.0 * terms * scalars.EPS * float(scale)


def split_map(T: Cochain, M_b: int, window: int | None = None) -> tuple[Cochain, Any]:
    """Apply the splitting map to a cochain of degree ``n + 1 >= 2``.

    Returns the degree-n cochain on the cube ``{0..window}^n`` and a per-entry
    error bound ``||T|| (1+2|lam|)(1+|lam|)|lam|^M_b`` for the Blaschke cut.
    T must be stored for first index ``<= M_b`` and other indices ``<= window``.
    """
    m = T.degree
    if m < 2:
        raise ValueError("split_map needs a cochain of degree >= 2")
    p = _float_point(T.point, T.exact)
    if not p.interior:
        raise ValueError("split_map is for |lambda| < 1; use peak_split on the circle")
    if window is None:
        window = min(T.shape[1:]) - 1
    if T.shape[0] < M_b + 1 or any(s < window + 1 for s in T.shape[1:]):
        raise WindowTooSmall(
            f"box {T.shape} cannot feed split_map with M_b={M_b}, window={window}")
    b = blaschke(p, M_b).coeffs
    G = quotient_matrix(p, window)
    sub = T.values[(slice(0, M_b + 1),) + (slice(0, window + 1),) * (m - 1)]
    X = np.tensordot(b, sub, axes=(0, 0))
    out = -np.tensordot(G, X, axes=(1, 0))
    pw = scalars.powers(p.lam, window, T.exact).reshape((window + 1,) + (1,) * (m - 2))
    out = out + pw * sub[(0, 0)]
    err = cochain_norm(T) * split_tail_factor(p, M_b)
    return Cochain(out, T.point), err


def identity_box(n: int, N: int, M_b: int) -> tuple[int, ...]:
    """Storage box for an (n+1)-cochain that makes the identity exact on window N."""
    return (M_b + N + 1,) + (2 * N + 1,) * n


def splitting_residual(T: Cochain, M_b: int, N: int) -> Cochain:
    """(delta s_n + s_{n+1} delta - id) T on the cube {0..N}^(n+1)."""
    n = T.degree - 1
    sT, _ = split_map(T, M_b, window=2 * N)
    left = coboundary(sT, (N + 1,) * (n + 1))
    dT = coboundary(T, (M_b + 1,) + (N + 1,) * (n + 1))
    right, _ = split_map(dT, M_b, window=N)
    return left + right - T.restrict(N + 1)


def splitting_identity_check(n: int, p: DiscPoint, N: int, M_b: int | None = None, seed: int = 0,
                             exact: bool = False, scale: float = 1.0) -> SplitReport:
    """Residual of (delta s_n + s_{n+1} delta - id) on a random (n+1)-cochain.

    The residual is the Blaschke truncation defect, bounded rigorously by
    ``(2n+5) ||T|| (1+2r)(1+r) r^M_b`` (plus a rounding allowance in float mode).
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if exact and not p.exact:
        p = p.exactly()
    if not p.interior:
        raise ValueError("splitting_identity_check needs |lambda| < 1")
    if M_b is None:
        M_b = blaschke_cutoff(p)
    T = random_cochain(n + 1, N, p, seed, scale, shape=identity_box(n, N, M_b), exact=exact)
    residual = cochain_norm(splitting_residual(T, M_b, N))
    norm_T = cochain_norm(T)
    fp = _float_point(p, exact)
    rounding = rounding_allowance((2 * n + 5) * (M_b + 2 * N + 4), 9 * norm_T, exact)
    certified = (2 * n + 5) * norm_T * split_tail_factor(fp, M_b) + rounding
    slack = 0 if exact else 1e-10 * float(norm_T)
    opnorm, _ = truncated_split_norm(fp, N, M_b)
    return SplitReport(
        lam=complex(p.lam), degree=n, window=N, blaschke_cutoff=M_b,
        residual_sup=residual, certified_error=certified, operator_norm_s_n=opnorm,
        bound_check=bool(residual <= certified + slack), slack=slack, norm_T=norm_T,
    )


@lru_cache(maxsize=512)
def truncated_split_norm(p: DiscPoint, N: int, M_b: int):
    """Exact operator norm of the truncated s_n on the window, and sup_j ||b^{-1} p(delta_j)||.

    Output entry (j_1, ...) of s_n T is a fixed linear combination of input
    entries (a, c, j_2, ...): coefficient ``-b[a] g_j[c]`` plus ``lam^j`` at
    (0, 0).  With sup norms on both sides the operator norm is the largest
    l1 row sum; it does not depend on n or on j_2, ...
    """
    b = blaschke(p, M_b).coeffs
    best = 1 if p.exact else 1.0
    div_sup = 0 if p.exact else 0.0
    for j in range(1, N + 1):
        g = quotient_of_basis(p, j).coeffs
        K = -np.multiply.outer(b, g)
        K[0, 0] = K[0, 0] + p.lam ** j
        row = scalars.sum_abs(K)
        best = max(best, row)
        div_sup = max(div_sup, scalars.sum_abs(g))
    return best, div_sup


def norm_audit(p: DiscPoint, n: int, N: int, M_b: int | None = None) -> SplitReport:
    """Exact truncated ||s_n|| against 1 + (1+2r)(1+2r-r^N) <= 10."""
    if not p.interior:
        raise ValueError("norm_audit needs |lambda| < 1")
    if M_b is None:
        M_b = blaschke_cutoff(p)
    opnorm, div_sup = truncated_split_norm(p, N, M_b)
    r = p.radius
    bound = 1 + (1 + 2 * r) * (1 + 2 * r - r ** N)
    slack = 0 if p.exact else 1e-12
    ok = opnorm <= bound + slack and opnorm <= UNIFORM_CONSTANT
    return SplitReport(
        lam=complex(p.lam), degree=n, window=N, blaschke_cutoff=M_b,
        residual_sup=0.0, certified_error=0.0, operator_norm_s_n=opnorm,
        bound_check=bool(ok), slack=slack, division_sup=div_sup, norm_bound=bound,
    )


class Stabilized(NamedTuple):
    cochain: Cochain
    distance: Any
    defect: Any
    cocycle_defect: Any
    certified_error: Any


def stabilize_window(shape, n: int, M_b: int) -> int:
    N = shape[0] - M_b - 1
    if n >= 2:
        N = min(N, min((s - 1) // 2 for s in shape[1:]))
    return N


def stabilize(T: Cochain, M_b: int | None = None, window: int | None = None) -> Stabilized:
    """Nearby cocycle ``S = T - s_n(delta T)`` on the cube of side ``window + 1``.

    ``distance = ||S - T||`` is at most the truncated ||s_n|| (<= 10) times
    ``defect = ||delta T||`` on the entries s_n reads.  ``cocycle_defect`` is
    ||delta S|| on the halved window; it is bounded by ``certified_error``.
    """
    n = T.degree
    if n < 1:
        raise ValueError("stabilize needs degree >= 1")
    p = _float_point(T.point, T.exact)
    if M_b is None:
        M_b = blaschke_cutoff(p)
    if window is None:
        window = stabilize_window(T.shape, n, M_b)
    if window < 1:
        raise WindowTooSmall(f"box {T.shape} too small for stabilize with M_b={M_b}")
    N = window
    dT = coboundary(T, (M_b + 1,) + (N + 1,) * n)
    sdT, _ = split_map(dT, M_b, window=N)
    S = T.restrict(N + 1) - sdT
    norm_T = cochain_norm(T)
    rounding = rounding_allowance((n + 2) ** 2 * (M_b + 2 * N + 4), 9 * norm_T, T.exact)
    certified = (n + 2) ** 2 * norm_T * split_tail_factor(p, M_b) + rounding
    cocycle_defect = cochain_norm(coboundary(S)) if N >= 2 else 0.0
    return Stabilized(S, cochain_norm(sdT), cochain_norm(dT), cocycle_defect, certified)


class DerivationFit(NamedTuple):
    alpha: Any
    sup_dev: Any
    defect: Any
    guarantee: Any


def derivation_stabilize(psi, p: DiscPoint, M_b: int | None = None) -> DerivationFit:
    """Nearest point derivation ``n lam^(n-1) alpha`` to an approximate one.

    ``sup_dev = max_n |psi_n - n lam^(n-1) alpha|`` over the output window and
    ``guarantee = distance + (N-1) * certified_error`` bounds it; the
    distance itself is at most 10 times ``defect``.
    """
    psi = np.asarray(psi)
    T = Cochain(psi, p)
    res = stabilize(T, M_b)
    S = res.cochain
    N = S.shape[0] - 1
    lam = T.lam
    alpha = S.values[1]
    pw = scalars.powers(lam, N, T.exact)
    ns = np.arange(1, N + 1)
    model = ns * pw[:N] * alpha if not T.exact else np.array(
        [int(k) * pw[k - 1] * alpha for k in ns], dtype=object)
    dev = scalars.max_abs(T.values[1: N + 1] - model)
    guarantee = res.distance + max(N - 1, 0) * res.certified_error
    return DerivationFit(alpha, dev, res.defect, guarantee)


# -- peak points -------------------------------------------------------------


def _unit_point(theta: float, lam=None) -> DiscPoint:
    if lam is None:
        return DiscPoint(complex(np.cos(theta), np.sin(theta)))
    p = DiscPoint(lam)
    if p.exact:
        if p.lam.abs2() != 1:
            raise ValueError("peak point must lie on the unit circle")
    elif abs(abs(p.lam) - 1) > 1e-12:
        raise ValueError("peak point must lie on the unit circle")
    return p


def peak_delta_net(theta: float, m: int, lam=None) -> TruncatedSeries:
    """v_m = (1/m) sum_{k<m} lam^{-k} delta_k for lam = e^{i theta} (or ``lam`` given exactly)."""
    if m < 1:
        raise ValueError("m must be >= 1")
    p = _unit_point(theta, lam)
    if p.exact:
        v = scalars.powers(p.lam.conjugate(), m - 1, True) * Fraction(1, m)
        return TruncatedSeries(v, Fraction(0))
    k = np.arange(m)
    lam_c = complex(p.lam)
    v = np.exp(-1j * np.angle(lam_c) * k) / m
    return TruncatedSeries(v, 0.0)


def peak_annihilation_defect(theta: float, m: int, j: int, lam=None):
    """||(delta_j - lam^j delta_0) * v_m||_1, which equals 2 min(j, m) / m."""
    v = peak_delta_net(theta, m, lam)
    p = _unit_point(theta, lam)
    exact = p.exact
    a = scalars.zeros(j + 1, exact)
    a[j] = a[j] + 1
    a[0] = a[0] - (p.lam ** j if exact else complex(p.lam) ** j)
    return scalars.sum_abs(np.convolve(a, v.coeffs))


def _peak_contract(T: Cochain, v: np.ndarray, window: int) -> Cochain:
    """(s T)(a_1, ...) = T(v, a_1, ...) on the cube of side window + 1."""
    m = v.size
    sub = T.values[(slice(0, m),) + (slice(0, window + 1),) * (T.degree - 1)]
    return Cochain(np.tensordot(v, sub, axes=(0, 0)), T.point)


def _peak_contract_coboundary(T: Cochain, v: np.ndarray, N: int) -> Cochain:
    """(delta T)(v, a_1, ..., a_n) on {0..N}^n without forming delta T.

    The first slot of delta T enters as lam^k T(a), as a shift T(k + a_1, ...),
    and (for n = 2) through P(c) = T(v, c); each is contracted with v directly.
    """
    n, m, exact = T.degree, v.size, T.exact
    lam = T.lam
    vals = T.values
    pw = scalars.powers(lam, max(m - 1, N), exact)
    phi_v = (v * pw[:m]).sum()
    cube = vals[(slice(0, N + 1),) * n]
    shifted = np.stack([np.tensordot(v, vals[(slice(a, a + m),) + (slice(0, N + 1),) * (n - 1)], axes=(0, 0))
                        for a in range(N + 1)])
    out = phi_v * cube - shifted
    if n == 1:
        out = out + (v * vals[:m]).sum() * pw[: N + 1]
    else:
        P = np.tensordot(v, vals[:m, : 2 * N + 1], axes=(0, 0))
        idx = np.arange(N + 1)
        out = out + P[idx[:, None] + idx[None, :]] - P[: N + 1, None] * pw[None, : N + 1]
    return Cochain(out, T.point)


def peak_split(T: Cochain, theta: float, m: int, window: int | None = None) -> SplitReport:
    """Residual of the delta-net splitting (u = delta_0) at a peak point.

    For H of degree 1: (delta s_0 + s_1 delta - id)H(a) = -H(v_m * (a - phi(a))),
    and for F of degree 2 the same with a second passive slot.  On basis index
    j the residual is at most ||T|| * 2 min(j, m) / m.
    """
    n = T.degree
    if n not in (1, 2):
        raise ValueError("peak_split supports degrees 1 and 2")
    p = T.point
    if not T.exact:
        expected = complex(np.cos(theta), np.sin(theta))
        if abs(complex(p.lam) - expected) > 1e-12:
            raise ValueError("cochain point does not match theta")
    lam_arg = p.lam if T.exact else None
    v = peak_delta_net(theta, m, lam_arg).coeffs
    if window is None:
        window = T.shape[0] - m
        if n == 2:
            window = min(window, (T.shape[1] - 1) // 2)
    N = window
    if N < 0 or T.shape[0] < m + N or (n == 2 and T.shape[1] < 2 * N + 1):
        raise WindowTooSmall(f"box {T.shape} too small for peak_split with m={m}, window={N}")
    if n == 1:
        s0 = _peak_contract(T, v, 0)  # degree-0 cochain
        left = coboundary(s0, (N + 1,))
    else:
        s1 = _peak_contract(T, v, 2 * N)
        left = coboundary(s1, (N + 1, N + 1))
    right = _peak_contract_coboundary(T, v, N)
    R = (left + right - T.restrict(N + 1)).values
    absR = scalars.abs_array(R)
    profile = [absR[j].max() if n == 2 else absR[j] for j in range(N + 1)]
    norm_T = cochain_norm(T)
    rounding = rounding_allowance(4 * (m + N + 2), norm_T, T.exact)
    bounds = [norm_T * Fraction(2 * min(j, m), m) if T.exact else float(norm_T) * 2 * min(j, m) / m
              for j in range(N + 1)]
    ok = all(r <= bd + rounding for r, bd in zip(profile, bounds))
    return SplitReport(
        lam=complex(p.lam), degree=n, window=N, blaschke_cutoff=m,
        residual_sup=max(profile), certified_error=bounds[-1] + rounding,
        operator_norm_s_n=scalars.sum_abs(v), bound_check=bool(ok), norm_T=norm_T,
        profile=[float(x) for x in profile],
    )
