import math

import numpy as np
import pytest

from fock_zeros.canonical import CanonicalFunction
from fock_zeros.funcspec import SpecError, parse_complex, parse_function
from fock_zeros.lattice import LatticeIndex
from fock_zeros.logspace import relative_difference

PI = math.pi


def test_divisor_limit_is_finite_and_matches_nearby(sigma_pi):
    f = CanonicalFunction(sigma_pi, (LatticeIndex(1, 0),))
    at = f.evaluate(1 + 0j)
    near = f.evaluate(1 + 1e-9j)
    assert np.isfinite(at.logmag)
    assert relative_difference(at, near) < 1e-7


@pytest.mark.parametrize("route", ["product", "theta"])
def test_routes_agree_for_quotients(sigma_pi, route):
    f = CanonicalFunction(sigma_pi, (LatticeIndex(0, 0), LatticeIndex(1, 0)), (0.5, 1j))
    z = np.array([0.3 + 0.2j, 2.4 - 1.3j, -3.1 + 0.7j])
    assert np.max(relative_difference(f.with_route(route).evaluate(z), f.evaluate(z))) < 1e-8


def test_polynomial_only():
    f = CanonicalFunction.constant(2.0).times_poly([1.0, 1.0])
    assert f.evaluate(1.0).to_complex() == pytest.approx(4.0)
    assert np.isneginf(f.evaluate(-1.0).logmag)
    assert f.degree == 1
    with pytest.raises(ValueError):
        CanonicalFunction(None, (LatticeIndex(0, 0),))


def test_periodic_flag(sigma_pi):
    assert CanonicalFunction(sigma_pi).is_periodic_weighted(PI)
    assert not CanonicalFunction(sigma_pi).times_power(1).is_periodic_weighted(PI)
    assert not CanonicalFunction(sigma_pi).is_periodic_weighted(2 * PI)


def test_validation(sigma_pi):
    with pytest.raises(ValueError):
        CanonicalFunction(sigma_pi, ((0, 0), (0, 0)))
    with pytest.raises(ValueError):
        CanonicalFunction(sigma_pi, route="taylor")


@pytest.mark.parametrize("text,value", [("2", 2), ("-0.5", -0.5), ("1+2i", 1 + 2j), ("3j", 3j), (" -1 - i ", -1 - 1j)])
def test_parse_complex(text, value):
    assert parse_complex(text) == value


@pytest.mark.parametrize("text", ["", "abc", "1+", "i i", "pi"])
def test_parse_complex_rejects(text):
    with pytest.raises(SpecError):
        parse_complex(text)


@pytest.mark.parametrize("spec", [
    "sigma",
    "sigma / (z - w(0,0))",
    "sigma / (z - w(0,0)) / (z - w(1,-2)) * poly(0.5, 1.0+2.0i)",
    "1 * poly(0.0, 1.0)",
])
def test_describe_roundtrip(sigma_pi, spec):
    f = parse_function(spec, sigma_pi)
    assert parse_function(f.describe(), sigma_pi) == f


def test_parse_whitespace_and_poly_product(sigma_pi):
    f = parse_function("sigma/(z-w(0,0))*poly(1,1)*poly(-1,1)", sigma_pi)
    assert f.poly == (-1 + 0j, 0j, 1 + 0j)
    assert f.divisors == (LatticeIndex(0, 0),)


@pytest.mark.parametrize("spec", ["", "cos", "sigma / z", "sigma * poly()", "1 / (z - w(0,0))",
                                  "sigma / (z - w(0,0)) / (z - w(0,0))", "sigma + 1"])
def test_parse_rejects(sigma_pi, spec):
    with pytest.raises(SpecError):
        parse_function(spec, sigma_pi)
