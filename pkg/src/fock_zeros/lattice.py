"""Square lattice geometry.

The lattice with parameter ``alpha`` is generated by ``omega1 = sqrt(pi/alpha)``
and ``i*omega1``.  Every cell is the square of side ``omega1`` centred at a
lattice point, half-open in both coordinates: ``[c - h, c + h)`` with
``h = omega1/2``.  With that convention :func:`reduce` is a total function.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterator, NamedTuple, Union

import numpy as np

INFINITY = math.inf

# |m|, |n| above this lose exactness of omega1*(m + i n) for moderate alpha.
MAX_INDEX = 2**20


class LatticeIndexError(ValueError):
    """Raised when a lattice index exceeds ``MAX_INDEX`` in magnitude."""


@dataclass(frozen=True)
class FockParams:
    """Weight parameter ``alpha`` and norm exponent ``p`` (``p`` may be ``INFINITY``)."""

    alpha: float
    p: float = 2.0

    def __post_init__(self):
        if not (self.alpha > 0 and math.isfinite(self.alpha)):
            raise ValueError(f"alpha must be a positive finite number, got {self.alpha!r}")
        if not self.p > 0:
            raise ValueError(f"p must be positive or INFINITY, got {self.p!r}")

    @property
    def is_sup(self) -> bool:
        return math.isinf(self.p)


class LatticeIndex(NamedTuple):
    m: int
    n: int

    @property
    def ring(self) -> int:
        return max(abs(self.m), abs(self.n))


IndexLike = Union[LatticeIndex, tuple]


@dataclass(frozen=True)
class Cell:
    center: complex
    half_width: float

    @property
    def area(self) -> float:
        return (2.0 * self.half_width) ** 2

    def contains(self, z) -> np.ndarray | bool:
        d = np.asarray(z) - self.center
        h = self.half_width
        inside = (-h <= d.real) & (d.real < h) & (-h <= d.imag) & (d.imag < h)
        return bool(inside) if np.ndim(inside) == 0 else inside


def _check_bounds(m, n):
    if np.any(np.abs(m) > MAX_INDEX) or np.any(np.abs(n) > MAX_INDEX):
        raise LatticeIndexError(f"lattice index exceeds 2**20 in magnitude: ({m}, {n})")


@dataclass(frozen=True)
class SquareLattice:
    """The lattice ``sqrt(pi/alpha) * (Z + iZ)``."""

    alpha: float
    omega1: float = field(init=False)

    def __post_init__(self):
        if not (self.alpha > 0 and math.isfinite(self.alpha)):
            raise ValueError(f"alpha must be a positive finite number, got {self.alpha!r}")
        object.__setattr__(self, "omega1", math.sqrt(math.pi / self.alpha))

    @property
    def half_width(self) -> float:
        return 0.5 * self.omega1

    @property
    def cell_area(self) -> float:
        return self.omega1**2

    def point(self, idx: IndexLike) -> complex:
        m, n = idx
        _check_bounds(m, n)
        return complex(self.omega1 * m, self.omega1 * n)

    def points(self, m, n) -> np.ndarray:
        """Vectorised :meth:`point` over integer arrays."""
        m = np.asarray(m)
        n = np.asarray(n)
        _check_bounds(m, n)
        return self.omega1 * m + 1j * (self.omega1 * n)

    def cell(self, idx: IndexLike) -> Cell:
        return Cell(self.point(idx), self.half_width)

    def reduce(self, z):
        """Split ``z`` as ``z0 + point(idx)`` with ``z0`` in the fundamental cell.

        Works on scalars and arrays.  For scalars returns ``(z0, LatticeIndex)``;
        for arrays returns ``(z0, m, n)`` with integer arrays ``m`` and ``n``.
        """
        scalar = np.ndim(z) == 0
        z = np.asarray(z, dtype=complex)
        w = self.omega1
        h = 0.5 * w
        m = np.floor(z.real / w + 0.5)
        n = np.floor(z.imag / w + 0.5)
        # floor() above can be off by one at cell edges after rounding
        x0 = z.real - w * m
        m = np.where(x0 >= h, m + 1, np.where(x0 < -h, m - 1, m))
        y0 = z.imag - w * n
        n = np.where(y0 >= h, n + 1, np.where(y0 < -h, n - 1, n))
        m = m.astype(np.int64)
        n = n.astype(np.int64)
        _check_bounds(m, n)
        z0 = (z.real - w * m) + 1j * (z.imag - w * n)
        if scalar:
            return complex(z0), LatticeIndex(int(m), int(n))
        return z0, m, n

    def ring_indices(self, ring: int) -> list[LatticeIndex]:
        return ring_indices(ring)

    def enumerate_rings(self, max_ring: int) -> list[tuple[LatticeIndex, complex]]:
        """All ``(idx, point)`` with ``max(|m|,|n|) <= max_ring``.

        Grouped by ring ``0, 1, ..., max_ring``.  Inside ring ``r >= 1`` the
        points run counter-clockwise starting from ``(r, 0)``.
        """
        if max_ring < 0:
            raise ValueError("max_ring must be nonnegative")
        out = []
        for r in range(max_ring + 1):
            out.extend((idx, self.point(idx)) for idx in ring_indices(r))
        return out


def ring_indices(ring: int) -> list[LatticeIndex]:
    """Indices on the square ring of Chebyshev radius ``ring``, counter-clockwise from ``(ring, 0)``."""
    if ring < 0:
        raise ValueError("ring must be nonnegative")
    if ring == 0:
        return [LatticeIndex(0, 0)]
    r = ring
    pts = [(m, n) for m in range(-r, r + 1) for n in range(-r, r + 1) if max(abs(m), abs(n)) == r]
    pts.sort(key=lambda t: math.atan2(t[1], t[0]) % (2 * math.pi))
    return [LatticeIndex(m, n) for m, n in pts]


def iter_window(max_ring: int) -> Iterator[LatticeIndex]:
    for r in range(max_ring + 1):
        yield from ring_indices(r)
