import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from fock_zeros.lattice import (MAX_INDEX, Cell, FockParams, LatticeIndex, LatticeIndexError,
                                SquareLattice, iter_window, ring_indices)

finite = st.floats(-50, 50, allow_nan=False)
alphas = st.floats(0.1, 20)


def test_omega_and_area():
    lat = SquareLattice(math.pi)
    assert lat.omega1 == pytest.approx(1.0)
    assert lat.cell_area == pytest.approx(1.0)
    lat2 = SquareLattice(2 * math.pi)
    assert lat2.omega1 == pytest.approx(math.sqrt(0.5))
    assert lat2.cell_area == pytest.approx(math.pi / lat2.alpha)


def test_point_and_cell():
    lat = SquareLattice(math.pi)
    assert lat.point((2, -3)) == pytest.approx(2 - 3j)
    c = lat.cell(LatticeIndex(1, 1))
    assert c.area == pytest.approx(1.0)
    assert c.contains(1 + 1j)
    assert c.contains(0.5 + 0.5j)  # lower-left edges belong to the cell
    assert not c.contains(1.5 + 1j)


def test_reduce_examples():
    lat = SquareLattice(math.pi)
    z0, idx = lat.reduce(2.3 - 0.7j)
    assert idx == (2, -1)
    assert z0 == pytest.approx(0.3 + 0.3j)
    z0, idx = lat.reduce(0.5 + 0.5j)
    assert idx == (1, 1) and z0 == pytest.approx(-0.5 - 0.5j)


@given(finite, finite, alphas)
def test_reduce_roundtrip(x, y, alpha):
    lat = SquareLattice(alpha)
    z = complex(x, y)
    z0, idx = lat.reduce(z)
    assert lat.cell(idx).contains(z)
    assert Cell(0j, lat.half_width).contains(z0)
    assert abs(z0 + lat.point(idx) - z) <= 1e-12 * max(1.0, abs(z))


def test_reduce_vectorised_matches_scalar():
    lat = SquareLattice(2.0)
    z = np.random.default_rng(1).normal(size=50) * 5 + 1j * np.random.default_rng(2).normal(size=50) * 5
    z0, m, n = lat.reduce(z)
    for k in range(z.size):
        s0, idx = lat.reduce(complex(z[k]))
        assert (m[k], n[k]) == idx and z0[k] == s0


@pytest.mark.parametrize("r", [0, 1, 2, 5])
def test_ring_sizes(r):
    idx = ring_indices(r)
    assert len(idx) == (1 if r == 0 else 8 * r)
    assert len(set(idx)) == len(idx)
    assert all(i.ring == r for i in idx)


def test_ring_order_counter_clockwise():
    idx = ring_indices(2)
    assert idx[0] == (2, 0)
    angles = [math.atan2(n, m) % (2 * math.pi) for m, n in idx]
    assert angles == sorted(angles)


def test_window_and_enumerate():
    lat = SquareLattice(1.0)
    assert len(list(iter_window(3))) == 49
    pts = lat.enumerate_rings(2)
    assert len(pts) == 25 and pts[0] == (LatticeIndex(0, 0), 0j)


def test_rejects_bad_input():
    with pytest.raises(ValueError):
        SquareLattice(0.0)
    with pytest.raises(ValueError):
        FockParams(1.0, -2)
    with pytest.raises(ValueError):
        ring_indices(-1)
    with pytest.raises(LatticeIndexError):
        SquareLattice(1.0).point((MAX_INDEX + 1, 0))
    assert FockParams(1.0, math.inf).is_sup
