from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, strategies as st

from hochsplit import halfline as hl
from hochsplit.errors import GridMismatch, NotInIdeal
from hochsplit.halfline import GridFunction, HalfPlanePoint, MeasureElement

SIX_POINTS = [1j, 2j, 3j, 0.5j, 1 + 1j, -2 + 0.7j]


def _indicator(lo, hi, step):
    return GridFunction.sample(lambda t: np.ones_like(t), lo, hi, step)


def test_rejects_lower_half_plane():
    with pytest.raises(ValueError):
        HalfPlanePoint(1.0)
    with pytest.raises(ValueError):
        HalfPlanePoint(-1j)


def test_default_length():
    assert hl.default_length(HalfPlanePoint(1j)) == 20
    assert hl.default_length(HalfPlanePoint(0.1j)) == pytest.approx(140)
    # 14 / 0.3 is not a whole number of cells; the kernel grid rounds up
    u = hl.u_plus(HalfPlanePoint(0.3j), 1 / 64)
    assert u.lo == 0 and u.hi >= 14 / 0.3


@pytest.mark.parametrize("lam", SIX_POINTS)
def test_u_plus_norm(lam):
    p, h = HalfPlanePoint(lam), 1 / 64
    L = hl.default_length(p)
    for u in (hl.u_plus(p, h), hl.u_minus(p, h)):
        assert abs(u.norm() * p.im - 1) <= hl.kernel_budget(p, h, L)


def test_u_plus_examples():
    assert hl.u_plus(HalfPlanePoint(1j), 1 / 128).norm() == pytest.approx(1, abs=1e-4)
    assert hl.u_plus(HalfPlanePoint(2j), 1 / 128).norm() == pytest.approx(0.5, abs=1e-4)


def test_u_plus_refinement_rate():
    # midpoint sampling: the error drops by about 4 per halving
    p = HalfPlanePoint(1j)
    errs = [abs(hl.u_plus(p, h, 40).norm() - 1) for h in (1 / 16, 1 / 32, 1 / 64)]
    for a, b in zip(errs, errs[1:]):
        assert 3.5 < a / b < 4.5


def test_fourier_closed_examples():
    p = HalfPlanePoint(1j)
    assert hl.fourier_closed(p, 0, "u+") == pytest.approx(1)
    big = hl.fourier_closed(p, 1e8, "u+")
    assert abs(big) < 1e-7
    with pytest.raises(ValueError):
        hl.fourier_closed(p, 0, "nope")


@pytest.mark.parametrize("lam", [1j, 1 + 1j])
def test_fourier_quadrature(lam):
    p = HalfPlanePoint(lam)
    x = np.linspace(-5, 5, 11)
    for kind in ("u+", "u-"):
        num, closed = hl.fourier_check(p, x, 1 / 256, kind=kind)
        assert np.max(np.abs(num - closed)) < 1e-4


def test_fourier_product_is_one():
    x = np.linspace(-50, 50, 100)
    for lam in SIX_POINTS:
        p = HalfPlanePoint(lam)
        prod = hl.fourier_closed(p, x, "h") * hl.fourier_closed(p, x, "h-check")
        assert np.max(np.abs(prod - 1)) <= 1e-12


@pytest.mark.parametrize("lam", SIX_POINTS)
def test_h_norm_three(lam):
    p, h = HalfPlanePoint(lam), 1 / 64
    L = hl.default_length(p)
    for m in (hl.h_measure(p, h), hl.h_check_measure(p, h)):
        assert m.atom == 1
        assert abs(m.norm() - 3) <= hl.kernel_budget(p, h, L)


def test_delta_is_unit():
    f = GridFunction.sample(lambda t: np.exp(-t) + 1j * t, 0, 2, 1 / 32)
    unit = MeasureElement(1.0, GridFunction.zeros(0, 1, 1 / 32))
    out = hl.convolve_measures(unit, MeasureElement(2.0, f))
    assert out.atom == 2
    assert np.allclose(out.density.restrict(0, 2).values, f.values)


def test_indicator_triangle():
    h = 1 / 64
    tri = hl.convolve_densities(_indicator(0, 1, h), _indicator(0, 1, h))
    t = tri.midpoints()
    expect = np.where(t < 1, t, 2 - t)
    assert np.max(np.abs(tri.values - expect)) <= h
    assert tri.values[np.argmin(np.abs(t - 1))].real == pytest.approx(1, abs=h)
    assert tri.norm() == pytest.approx(1, abs=1e-12)


@given(st.integers(0, 1000))
def test_convolution_submultiplicative(seed):
    rng = np.random.default_rng(seed)
    h = 1 / 16
    f = GridFunction(-1, 1, h, rng.normal(size=32) + 1j * rng.normal(size=32))
    g = GridFunction(0, 2, h, rng.normal(size=32))
    m1, m2 = MeasureElement(rng.normal(), f), MeasureElement(1j, g)
    assert hl.convolve_measures(m1, m2).norm() <= m1.norm() * m2.norm() * (1 + 1e-12)


def test_fft_and_direct_paths_agree():
    rng = np.random.default_rng(0)
    h = 1 / 64
    f = GridFunction(0, 2, h, rng.normal(size=128))
    g = GridFunction(0, 2, h, rng.normal(size=128))
    fast = hl.convolve_densities(f, g).values
    slow = np.convolve(f.values, g.values)
    ref = np.zeros(slow.size + 1, dtype=complex)
    ref[:-1] += 0.5 * h * slow
    ref[1:] += 0.5 * h * slow
    assert np.allclose(fast, ref, atol=1e-12)


def test_grid_mismatch():
    with pytest.raises(GridMismatch):
        _indicator(0, 1, 1 / 8) + _indicator(0, 1, 1 / 16)
    with pytest.raises(GridMismatch):
        GridFunction(0.01, 1.01, 1 / 4, np.zeros(4))


def test_grid_json_roundtrip():
    f = GridFunction.sample(lambda t: np.exp(1j * t), -1, 1, 1 / 8)
    g = GridFunction.from_json(f.to_json())
    assert g.lo == f.lo and g.hi == f.hi and np.array_equal(g.values, f.values)


def test_inverse_identity_zero():
    f = GridFunction.zeros(0, 1, 1 / 64)
    assert hl.inverse_identity_residual(f, HalfPlanePoint(1j)) == 0


def test_inverse_identity_indicator():
    p = HalfPlanePoint(1j)
    levels = [(1 / 256, 20), (1 / 512, 40), (1 / 1024, 80)]
    rows = hl.refinement_study(lambda h, L: hl.inverse_identity_residual(_indicator(0, 1, h), p, L), levels)
    res = [r for _, _, r in rows]
    assert res[0] < 0.05
    assert res[0] > res[1] > res[2]
    assert res[0] / res[1] > 2 and res[1] / res[2] > 2


def test_inverse_identity_real_shift():
    # |e^{-i lam t}| only sees Im lam; the grid error grows with |lam| h
    f = _indicator(0, 1, 1 / 256)
    a = hl.inverse_identity_residual(f, HalfPlanePoint(1j), 20)
    b = hl.inverse_identity_residual(f, HalfPlanePoint(5 + 1j), 20)
    assert abs(a - b) < 1e-4 and max(a, b) < 0.05


@pytest.mark.parametrize("lam", [1j, 3j, 1 + 1j])
def test_support_and_inverse_decrease(lam):
    p = HalfPlanePoint(lam)
    levels = [(1 / 16, 5), (1 / 32, 10), (1 / 64, 20)]
    supp = [hl.ideal_support_check(hl.ideal_test_function(p, h), p, L) for h, L in levels]
    inv = [hl.inverse_identity_residual(hl.ideal_test_function(p, h), p, L) for h, L in levels]
    assert supp[0] > supp[1] > supp[2]
    assert inv[0] > inv[1] > inv[2]


def test_ideal_test_function_is_in_ideal():
    p = HalfPlanePoint(2 + 1j)
    f = hl.ideal_test_function(p, 1 / 64)
    assert abs(hl.character(f, p)) <= 1e-12 * f.norm()


def test_support_gate():
    p = HalfPlanePoint(1j)
    with pytest.raises(NotInIdeal):
        hl.ideal_support_check(_indicator(0, 1, 1 / 64), p)
    with pytest.raises(ValueError):
        hl.ideal_support_check(_indicator(-1, 1, 1 / 64), p)


@pytest.mark.parametrize("lam", [1j, 1 + 1j, 3j, 0.1j])
def test_flat_witness_norm(lam):
    p = HalfPlanePoint(lam)
    h = 1 / 64
    L = hl.default_length(p)
    w = hl.flat_witness(hl.ideal_test_function(p, h), p, 4)
    assert w.norm_bound <= 9 + 4 * hl.kernel_budget(p, h, L)


def test_flat_witness_refinement():
    p = HalfPlanePoint(3j)
    rs = [hl.flat_witness(hl.ideal_test_function(p, h), p, 4).r for h in (1 / 32, 1 / 64, 1 / 128)]
    assert rs[0] > rs[1] > rs[2]
    assert rs[0] / rs[2] > 10


def test_approximate_identity():
    f = hl.ideal_test_function(HalfPlanePoint(1j), 1 / 256)
    errs = [hl.approximate_identity_error(f, m) for m in (4, 16, 64)]
    assert errs[0] > errs[1] > errs[2]
    with pytest.raises(NotInIdeal):
        hl.flat_witness(_indicator(0, 1, 1 / 64), HalfPlanePoint(1j), 4)
