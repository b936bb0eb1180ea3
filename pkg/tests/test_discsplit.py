from __future__ import annotations

import cmath
from fractions import Fraction

import numpy as np
import pytest

from hochsplit import discsplit as ds
from hochsplit.cochain import Cochain, coboundary, cochain_norm, indicator, random_cochain
from hochsplit.errors import WindowTooSmall
from hochsplit.scalars import Gaussian
from hochsplit.seriesalg import DiscPoint, TruncatedSeries, blaschke_cutoff


def _brute_norm(p, N, M_b):
    """Operator norm of the truncated s_1 from its action on indicator cochains."""
    rows = np.zeros(N + 1)
    for a in range(M_b + 1):
        for c in range(N + 1):
            out, _ = ds.split_map(indicator((M_b + 1, N + 1), (a, c), p), M_b, window=N)
            rows += np.abs(out.values)
    return rows.max()


def test_split_map_at_zero():
    T = random_cochain(2, 6, DiscPoint(0), 1)
    S, err = ds.split_map(T, 1, window=5)
    assert err == 0
    assert S.values[0] == T.values[0, 0]
    for j in range(1, 6):
        assert S.values[j] == -T.values[1, j - 1]


def test_split_map_degree_three_at_zero():
    T = random_cochain(3, 5, DiscPoint(0), 2)
    S, _ = ds.split_map(T, 1, window=4)
    assert np.array_equal(S.values[0], T.values[0, 0, :5])
    assert np.array_equal(S.values[3], -T.values[1, 2, :5])


def test_split_map_error_budget():
    T = random_cochain(2, 400, DiscPoint(0.9), 3)
    _, err = ds.split_map(T, 400, window=10)
    assert err == pytest.approx(cochain_norm(T) * 2.8 * 1.9 * 0.9 ** 400)
    assert err < 1e-17 * cochain_norm(T)


def test_split_map_rejects_boundary_and_small_boxes():
    with pytest.raises(ValueError):
        ds.split_map(random_cochain(2, 4, DiscPoint(1.0), 0), 2)
    with pytest.raises(WindowTooSmall):
        ds.split_map(random_cochain(2, 4, DiscPoint(0.5), 0), 8)


@pytest.mark.parametrize("n", [1, 2])
def test_identity_exact_zero_at_origin(n):
    rep = ds.splitting_identity_check(n, DiscPoint("0"), 6, seed=4, exact=True)
    assert rep.residual_sup == 0 and rep.bound_check


def test_identity_half_with_fixed_cutoff():
    for n in (1, 2):
        rep = ds.splitting_identity_check(n, DiscPoint(0.5), 8, M_b=120, seed=n)
        assert rep.residual_sup <= rep.norm_T * 2 * 1.5 * 0.5 ** 120 + 1e-10 * rep.norm_T
        assert rep.bound_check


def test_identity_exact_three_quarters():
    # the only defect left is the Blaschke truncation at degree 64
    rep = ds.splitting_identity_check(1, DiscPoint("3/4"), 5, M_b=64, seed=0, exact=True)
    assert isinstance(rep.residual_sup, (Fraction, float))
    assert 0 < rep.residual_sup <= rep.certified_error
    assert rep.bound_check and rep.slack == 0


def test_identity_on_a_cocycle_shape():
    # s applied to delta psi recovers psi up to a cocycle: delta(psi - s delta psi) = 0
    p = DiscPoint(0.6 + 0.2j)
    M_b = blaschke_cutoff(p)
    psi = random_cochain(1, 0, p, 8, shape=(M_b + 25,))
    res = ds.stabilize(psi, M_b, window=10)
    assert res.cocycle_defect <= res.certified_error


@pytest.mark.parametrize("lam,M_b", [(0.7, 6), (0.5j, 5), (-0.3 + 0.3j, 4), (0, 1)])
def test_truncated_norm_against_brute_force(lam, M_b):
    p = DiscPoint(lam)
    N = 5
    opnorm, _ = ds.truncated_split_norm(p, N, M_b)
    assert opnorm == pytest.approx(_brute_norm(p, N, M_b), rel=1e-13)


def test_norm_audit_at_origin():
    rep = ds.norm_audit(DiscPoint(0), 1, 20)
    assert rep.division_sup == 1
    assert rep.operator_norm_s_n == 1
    assert rep.norm_bound == 2 and rep.bound_check


def test_norm_audit_division_sup():
    rep = ds.norm_audit(DiscPoint(0.9), 1, 50)
    assert rep.division_sup == pytest.approx(2.8 - 0.9 ** 50, rel=1e-12)
    assert rep.operator_norm_s_n <= rep.norm_bound <= 10


def test_norm_audit_exact_mode():
    rep = ds.norm_audit(DiscPoint("1/2"), 1, 10, M_b=12)
    assert rep.division_sup == 2 - Fraction(1, 2 ** 10)


@pytest.mark.parametrize("phase", [0, 3])
def test_norm_monotone_along_ray(phase):
    norms = []
    for r in (0.0, 0.25, 0.5, 0.75, 0.9, 0.99):
        p = DiscPoint(r * cmath.exp(2j * cmath.pi * phase / 8))
        norms.append(ds.norm_audit(p, 1, 200).operator_norm_s_n)
    assert all(a <= b + 1e-12 for a, b in zip(norms, norms[1:]))
    assert norms[-1] <= 10


def test_stabilize_keeps_cocycles():
    lam = Gaussian(1, 2) / 4
    p = DiscPoint(lam)
    psi = np.array([Gaussian(0)] + [Gaussian(3 * k) * lam ** (k - 1) for k in range(1, 40)], dtype=object)
    res = ds.stabilize(Cochain(psi, p), M_b=20, window=10)
    assert res.distance == 0
    assert np.array_equal(res.cochain.values, psi[:11])


@pytest.mark.parametrize("lam", [0.5, 0.9j, 0.99])
@pytest.mark.parametrize("n", [1, 2])
def test_stabilize_guarantees(lam, n):
    p = DiscPoint(lam)
    M_b = blaschke_cutoff(p)
    shape = (M_b + 11,) if n == 1 else ds.identity_box(1, 10, M_b)
    T = random_cochain(n, 10, p, 21, shape=shape)
    res = ds.stabilize(T, M_b, window=10)
    assert res.distance <= ds.UNIFORM_CONSTANT * res.defect + res.certified_error
    assert res.cocycle_defect <= res.certified_error


def test_stabilize_scaled_input_near_boundary():
    p = DiscPoint(0.99)
    M_b = blaschke_cutoff(p)
    T = random_cochain(1, 0, p, 2, shape=(M_b + 11,))
    res = ds.stabilize(T, M_b, window=10)
    T = T.scale(1 / res.defect)
    res = ds.stabilize(T, M_b, window=10)
    assert res.defect == pytest.approx(1)
    assert res.distance <= 10 + res.certified_error


def test_derivation_exact_recovery():
    lam, a0 = 0.7 - 0.2j, 1.5 + 0.5j
    k = np.arange(3000)
    psi = k * lam ** np.maximum(k - 1, 0) * a0
    fit = ds.derivation_stabilize(psi, DiscPoint(lam))
    assert fit.alpha == pytest.approx(a0, abs=1e-12)
    assert fit.sup_dev <= 1e-12


def test_derivation_with_noise():
    lam, eps = 0.5, 0.1
    k = np.arange(200)
    noise = np.random.default_rng(1).uniform(-1, 1, 200) * eps
    psi = k * lam ** np.maximum(k - 1, 0) + noise
    fit = ds.derivation_stabilize(psi, DiscPoint(lam))
    assert fit.defect <= 4 * eps
    assert fit.sup_dev <= 10 * fit.defect + fit.guarantee
    assert fit.sup_dev <= fit.guarantee + 1e-12


def test_derivation_at_origin():
    psi = np.random.default_rng(4).normal(size=30) + 0j
    fit = ds.derivation_stabilize(psi, DiscPoint(0))
    assert fit.alpha == psi[1]
    N = 30 - 2
    assert fit.sup_dev == pytest.approx(np.abs(psi[2: N + 1]).max())


def test_delta_net_basics():
    v = ds.peak_delta_net(0.0, 1)
    assert np.array_equal(v.coeffs, [1])
    assert ds.peak_annihilation_defect(0.0, 1, 5) == pytest.approx(2)
    assert ds.peak_annihilation_defect(1.3, 12, 3) == pytest.approx(0.5)
    assert ds.peak_annihilation_defect(0.0, 7, 0) == 0


@pytest.mark.parametrize("lam", ["1", "0,1", "3/5,4/5", "-1"])
def test_delta_net_exact(lam):
    p = DiscPoint(lam)
    v = ds.peak_delta_net(0.0, 9, lam=lam)
    assert v.norm_lower == 1
    phi = sum((c * p.lam ** k for k, c in enumerate(v.coeffs)), Gaussian(0))
    assert phi == 1
    assert ds.peak_annihilation_defect(0.0, 9, 4, lam=lam) == Fraction(8, 9)


def test_delta_net_rejects_interior():
    with pytest.raises(ValueError):
        ds.peak_delta_net(0.0, 3, lam=0.5)


@pytest.mark.parametrize("n", [1, 2])
def test_peak_split_small(n):
    theta, m, N = 0.8, 16, 20
    p = DiscPoint(cmath.exp(1j * theta))
    shape = (m + N,) if n == 1 else (m + N, 2 * N + 1)
    T = random_cochain(n, N, p, 6, shape=shape)
    rep = ds.peak_split(T, theta, m, window=N)
    assert rep.profile[0] <= 1e-15
    assert rep.bound_check


def test_peak_split_degree_two_matches_explicit_coboundary():
    theta, m, N = 2.0, 8, 6
    p = DiscPoint(cmath.exp(1j * theta))
    T = random_cochain(2, N, p, 3, shape=(m + N + 1, 3 * N + m + 1))
    v = ds.peak_delta_net(theta, m).coeffs
    fast = ds._peak_contract_coboundary(T, v, N)
    dT = coboundary(T, (m, N + 1, N + 1))
    slow = np.tensordot(v, dT.values, axes=(0, 0))
    assert np.allclose(fast.values, slow, atol=1e-14)


def test_peak_split_exact_point():
    m, N = 6, 8
    T = random_cochain(1, N, DiscPoint("0,1"), 2, shape=(m + N,), exact=True)
    rep = ds.peak_split(T, np.pi / 2, m, window=N)
    assert rep.profile[0] == 0
    assert rep.bound_check


def test_peak_split_checks_point():
    T = random_cochain(1, 10, DiscPoint(1.0), 0, shape=(20,))
    with pytest.raises(ValueError):
        ds.peak_split(T, 0.5, 4)
    with pytest.raises(WindowTooSmall):
        ds.peak_split(T, 0.0, 15, window=10)


def test_report_json():
    rep = ds.norm_audit(DiscPoint(0.25j), 2, 8)
    d = rep.to_json()
    assert d["lam"] == [0.0, 0.25] and d["degree"] == 2
