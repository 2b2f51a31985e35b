"""Functions of the form ``sigma(z) * P(z) / prod_j (z - a_j)`` with lattice points ``a_j``."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .lattice import LatticeIndex, SquareLattice
from .logspace import LogComplex
from .sigma import SigmaEvaluator

ROUTES = ("reduced", "product", "theta")


def _fmt_coeff(c: complex) -> str:
    c = complex(c)
    if c.imag == 0:
        return repr(c.real)
    if c.real == 0:
        return f"{c.imag!r}i"
    return f"{c.real!r}{c.imag:+}i"


@dataclass(frozen=True)
class CanonicalFunction:
    """``sigma(z) * P(z) / prod (z - w(m, n))``.

    ``poly`` holds the coefficients of ``P`` in ascending order.  With
    ``sigma=None`` the function is the polynomial alone (no divisors allowed).
    The value at a divisor is the analytic limit: the divisor cancels against
    the vanishing factor of sigma before any logarithm is taken.
    """

    sigma: SigmaEvaluator | None
    divisors: tuple[LatticeIndex, ...] = ()
    poly: tuple[complex, ...] = (1.0,)
    route: str = "reduced"
    _flags: dict = field(default_factory=dict, compare=False, repr=False)

    def __post_init__(self):
        divs = tuple(LatticeIndex(int(m), int(n)) for m, n in self.divisors)
        if len(set(divs)) != len(divs):
            raise ValueError("divisors must be distinct lattice points")
        if self.sigma is None and divs:
            raise ValueError("divisors need a sigma factor to cancel against")
        if self.route not in ROUTES:
            raise ValueError(f"route must be one of {ROUTES}")
        poly = tuple(complex(c) for c in self.poly) or (0j,)
        object.__setattr__(self, "divisors", divs)
        object.__setattr__(self, "poly", poly)

    @classmethod
    def sigma_only(cls, sigma: SigmaEvaluator) -> CanonicalFunction:
        return cls(sigma)

    @classmethod
    def constant(cls, c: complex = 1.0) -> CanonicalFunction:
        return cls(None, (), (c,))

    @property
    def lattice(self) -> SquareLattice | None:
        return None if self.sigma is None else self.sigma.lattice

    @property
    def removed_divisors(self) -> list[complex]:
        return [self.lattice.point(d) for d in self.divisors]

    @property
    def degree(self) -> int:
        nz = [i for i, c in enumerate(self.poly) if c != 0]
        return nz[-1] if nz else -1

    def times_power(self, j: int) -> CanonicalFunction:
        """Multiply the numerator polynomial by ``z**j``."""
        return replace(self, poly=(0j,) * j + self.poly)

    def times_poly(self, coeffs) -> CanonicalFunction:
        prod = np.polynomial.polynomial.polymul(np.asarray(self.poly), np.asarray(coeffs, dtype=complex))
        return replace(self, poly=tuple(complex(c) for c in prod))

    def with_route(self, route: str) -> CanonicalFunction:
        return replace(self, route=route)

    def is_periodic_weighted(self, alpha: float) -> bool:
        """True when the weighted modulus at ``alpha`` is exactly doubly periodic."""
        return (self.sigma is not None and not self.divisors and self.degree == 0
                and math.isclose(self.sigma.alpha, alpha, rel_tol=1e-14))

    def _log_poly(self, z: np.ndarray) -> np.ndarray:
        vals = np.polynomial.polynomial.polyval(z, np.asarray(self.poly))
        with np.errstate(divide="ignore"):
            return np.log(vals)

    def evaluate(self, z) -> LogComplex:
        scalar = np.ndim(z) == 0
        z = np.atleast_1d(np.asarray(z, dtype=complex))
        if self.sigma is None:
            out = LogComplex.from_log(self._log_poly(z))
            return out[0] if scalar else out
        if self.route == "reduced":
            logv = self._log_reduced(z)
        else:
            s = self.sigma.eval_product(z) if self.route == "product" else self.sigma.eval_theta(z)
            logv = s.log()
            with np.errstate(divide="ignore", invalid="ignore"):
                for a in self.removed_divisors:
                    logv = logv - np.log(z - a)
        logv = logv + self._log_poly(z)
        out = LogComplex(logv.real, np.where(np.isfinite(logv.real), logv.imag, 0.0))
        return out[0] if scalar else out

    def _log_reduced(self, z: np.ndarray) -> np.ndarray:
        z0, m, n, rest = self.sigma.reduced_parts(z)
        logv = rest.log()
        cancelled = np.zeros(z.shape, dtype=bool)
        lat = self.sigma.lattice
        for d in self.divisors:
            hit = (m == d.m) & (n == d.n)
            cancelled |= hit
            with np.errstate(divide="ignore", invalid="ignore"):
                logd = np.log(z - lat.point(d))
            logv = logv - np.where(hit, 0.0, logd)
        with np.errstate(divide="ignore"):
            lead = np.log(z0)
        return logv + np.where(cancelled, 0.0, lead)

    def log_abs(self, z) -> np.ndarray:
        return np.asarray(self.evaluate(z).logmag)

    def describe(self) -> str:
        """Render in the command-line function grammar."""
        parts = ["sigma" if self.sigma is not None else "1"]
        parts += [f"/ (z - w({d.m},{d.n}))" for d in self.divisors]
        if self.poly != (1 + 0j,):
            parts.append("* poly(" + ", ".join(_fmt_coeff(c) for c in self.poly) + ")")
        return " ".join(parts)


def sigma_function(alpha: float, **kwargs) -> CanonicalFunction:
    """``sigma`` for the lattice with parameter ``alpha``."""
    return CanonicalFunction(SigmaEvaluator(SquareLattice(alpha), **kwargs))
