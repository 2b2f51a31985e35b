"""Complex numbers stored as (log-magnitude, argument).

sigma grows like ``exp(alpha |z|^2 / 2)``, so values far from the origin
overflow a double long before the weighted quantities of interest do.
Everything in this package that touches sigma goes through
:class:`LogComplex`; linear values are produced only at the edges.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special

TWO_PI = 2.0 * math.pi


def wrap_angle(theta):
    """Map angles into ``(-pi, pi]``."""
    t = np.asarray(theta, dtype=float)
    w = np.remainder(t + math.pi, TWO_PI) - math.pi
    # remainder lands on [-pi, pi); move the -pi edge to +pi
    w = np.where(w <= -math.pi, w + TWO_PI, w)
    return float(w) if np.ndim(w) == 0 else w


@dataclass(frozen=True)
class LogComplex:
    """A complex value ``exp(logmag + i*arg)``; ``logmag = -inf`` encodes zero.

    Fields may be scalars or equally shaped arrays.
    """

    logmag: float | np.ndarray
    arg: float | np.ndarray = 0.0

    def __post_init__(self):
        lm = np.asarray(self.logmag, dtype=float)
        ar = np.where(np.isneginf(lm), 0.0, wrap_angle(np.broadcast_to(self.arg, lm.shape)))
        if lm.ndim == 0:
            object.__setattr__(self, "logmag", float(lm))
            object.__setattr__(self, "arg", float(ar))
        else:
            object.__setattr__(self, "logmag", lm)
            object.__setattr__(self, "arg", np.asarray(ar, dtype=float))

    @classmethod
    def zero(cls, shape=()) -> LogComplex:
        if shape == ():
            return cls(-math.inf, 0.0)
        return cls(np.full(shape, -np.inf), np.zeros(shape))

    @classmethod
    def one(cls, shape=()) -> LogComplex:
        if shape == ():
            return cls(0.0, 0.0)
        return cls(np.zeros(shape), np.zeros(shape))

    @classmethod
    def from_complex(cls, z) -> LogComplex:
        z = np.asarray(z, dtype=complex)
        with np.errstate(divide="ignore"):
            lm = np.log(np.abs(z))
        return cls(lm, np.angle(z))

    @classmethod
    def from_log(cls, w) -> LogComplex:
        """From a complex logarithm ``w``: the value ``exp(w)``."""
        w = np.asarray(w, dtype=complex)
        return cls(w.real, w.imag)

    @property
    def shape(self):
        return np.shape(self.logmag)

    @property
    def is_zero(self):
        return np.isneginf(self.logmag)

    def to_complex(self):
        """Linear value; overflow clamps to infinite modulus."""
        with np.errstate(over="ignore", invalid="ignore"):
            r = np.exp(self.logmag)
            v = np.where(np.isinf(r), np.inf + 0j, r * np.exp(1j * np.asarray(self.arg)))
        return complex(v) if np.ndim(v) == 0 else v

    def __mul__(self, other) -> LogComplex:
        if not isinstance(other, LogComplex):
            other = LogComplex.from_complex(other)
        return LogComplex(np.add(self.logmag, other.logmag), np.add(self.arg, other.arg))

    __rmul__ = __mul__

    def __truediv__(self, other) -> LogComplex:
        if not isinstance(other, LogComplex):
            other = LogComplex.from_complex(other)
        if np.any(other.is_zero):
            raise ZeroDivisionError("division by a LogComplex zero")
        return LogComplex(np.subtract(self.logmag, other.logmag), np.subtract(self.arg, other.arg))

    def __neg__(self) -> LogComplex:
        return LogComplex(self.logmag, np.add(self.arg, math.pi))

    def __pow__(self, k: int) -> LogComplex:
        return LogComplex(np.multiply(self.logmag, k), np.multiply(self.arg, k))

    def __getitem__(self, key) -> LogComplex:
        return LogComplex(np.asarray(self.logmag)[key], np.asarray(self.arg)[key])

    def log(self):
        """Complex logarithm (principal argument)."""
        return np.asarray(self.logmag) + 1j * np.asarray(self.arg)


def weighted_mag(v: LogComplex, z, alpha: float):
    """``log(|v| * exp(-alpha |z|^2 / 2))``; ``-inf`` where ``v`` is zero."""
    z = np.asarray(z)
    out = np.asarray(v.logmag) - 0.5 * alpha * (z.real**2 + z.imag**2)
    return float(out) if np.ndim(out) == 0 else out


def relative_difference(a: LogComplex, b: LogComplex):
    """``|a - b| / |b|`` evaluated without leaving log-space.

    Two zeros differ by 0; a zero against a nonzero differs by 1.
    """
    la, lb = np.asarray(a.logmag, dtype=float), np.asarray(b.logmag, dtype=float)
    za, zb = np.isneginf(la), np.isneginf(lb)
    with np.errstate(invalid="ignore"):
        d = (la - lb) + 1j * wrap_angle(np.asarray(a.arg) - np.asarray(b.arg))
        rel = np.abs(np.expm1(d))
    rel = np.where(za & zb, 0.0, np.where(za | zb, 1.0, rel))
    return float(rel) if np.ndim(rel) == 0 else rel


def logsumexp_real(x, axis=None):
    """``log(sum(exp(x)))``; ``-inf`` for an all ``-inf`` input."""
    with np.errstate(divide="ignore"):
        out = special.logsumexp(np.asarray(x, dtype=float), axis=axis)
    return float(out) if np.ndim(out) == 0 else out
