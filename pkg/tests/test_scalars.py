from __future__ import annotations

from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from hochsplit import scalars
from hochsplit.scalars import Gaussian

rationals = st.fractions(min_value=-5, max_value=5, max_denominator=50)
gaussians = st.builds(Gaussian, rationals, rationals)


def test_parse_scalar_forms():
    assert scalars.parse_scalar("3/4", exact=True) == Gaussian(Fraction(3, 4))
    assert scalars.parse_scalar("1/2,-1/3", exact=True) == Gaussian(Fraction(1, 2), Fraction(-1, 3))
    assert scalars.parse_scalar("0.5,0.25") == complex(0.5, 0.25)
    with pytest.raises(ValueError):
        scalars.parse_scalar("1,2,3")


def test_exact_modulus_when_rational():
    assert abs(Gaussian(Fraction(3, 5), Fraction(4, 5))) == 1
    assert isinstance(abs(Gaussian(3, 4)), Fraction)
    assert abs(Gaussian(1, 1)) == pytest.approx(2 ** 0.5)


def test_float_to_exact_is_lossless():
    z = 0.1 + 0.7j
    assert complex(scalars.as_exact(z)) == z


@given(gaussians, gaussians)
def test_field_identities(a, b):
    assert (a * b).abs2() == a.abs2() * b.abs2()
    assert (a + b).conjugate() == a.conjugate() + b.conjugate()
    if b:
        assert (a / b) * b == a


@given(gaussians, st.integers(0, 12))
def test_powers_match_repeated_multiplication(z, n):
    pw = scalars.powers(z, n, exact=True)
    acc = Gaussian(1)
    for k in range(n + 1):
        assert pw[k] == acc
        acc = acc * z


def test_float_powers_zero_to_the_zero():
    assert scalars.powers(0.0, 3, exact=False).tolist() == [1, 0, 0, 0]


def test_max_and_sum_abs_exact():
    a = scalars.array([Gaussian(3, 4), Gaussian(0, -1), Gaussian(Fraction(1, 2))], exact=True)
    assert scalars.max_abs(a) == 5
    assert scalars.sum_abs(a) == Fraction(13, 2)
    assert scalars.max_abs(np.zeros(0)) == 0.0
