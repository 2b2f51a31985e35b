import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from fock_zeros.logspace import LogComplex, logsumexp_real, relative_difference, weighted_mag, wrap_angle

nonzero = st.complex_numbers(min_magnitude=1e-100, max_magnitude=1e100, allow_nan=False, allow_infinity=False)


@given(nonzero, nonzero)
def test_mul_div_match_complex(a, b):
    la, lb = LogComplex.from_complex(a), LogComplex.from_complex(b)
    assert relative_difference(la * lb, LogComplex.from_complex(a * b)) < 1e-12
    assert relative_difference(la / lb, LogComplex.from_complex(a / b)) < 1e-12


def test_zero_handling():
    z = LogComplex.zero()
    assert z.is_zero and z.to_complex() == 0
    assert relative_difference(z, LogComplex.zero()) == 0.0
    assert relative_difference(z, LogComplex.one()) == 1.0
    with pytest.raises(ZeroDivisionError):
        LogComplex.one() / z


def test_huge_values_stay_finite_in_log_space():
    v = LogComplex(5000.0, 1.0)
    assert weighted_mag(v, 100.0, 1.0) == pytest.approx(0.0)
    assert np.isinf(abs(v.to_complex()))


def test_wrap_angle_range():
    x = np.linspace(-20, 20, 101)
    w = wrap_angle(x)
    assert np.all(w > -math.pi) and np.all(w <= math.pi)
    assert np.allclose(np.exp(1j * w), np.exp(1j * x))
    assert wrap_angle(-math.pi) == pytest.approx(math.pi)


def test_logsumexp():
    assert logsumexp_real([-np.inf, -np.inf]) == -np.inf
    assert logsumexp_real([1000.0, 1000.0]) == pytest.approx(1000 + math.log(2))
