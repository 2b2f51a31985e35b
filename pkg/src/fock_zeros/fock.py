"""Weighted Fock-space norms by cell-decomposed Gauss-Legendre quadrature.

The plane is tiled by the cells of the lattice for ``params.alpha``.  Cell
integrals of ``|f(z) exp(-alpha |z|^2/2)|^p`` are summed ring by ring; the
decay of the ring contributions, fitted as a power of the ring index,
decides convergence.  A ring of radius ``r`` has ``8r`` cells, so a weighted
modulus decaying like ``|z|^{-N}`` gives contributions ``~ r^{1 - Np}``:
convergent exactly when ``Np > 2``.

Any object with a ``log_abs(z)`` method returning ``log|f(z)|`` on arrays
is an admissible function.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Protocol, Sequence

import numpy as np
from scipy import optimize, special

from .canonical import CanonicalFunction, sigma_function
from .lattice import Cell, FockParams, SquareLattice, ring_indices
from .logspace import LogComplex, logsumexp_real

EXPONENT_MARGIN = 0.3
# a fitted exponent this close to -1 is read as the log-divergent boundary
BOUNDARY_SLACK = 0.15
GROWTH_TOL = 1e-6
SUP_GRID = 17
POINTWISE_SLACK = 1e-6


class NotApplicable(ValueError):
    """Operation does not apply to this exponent (finite vs. infinite ``p``)."""


class InvalidParams(ValueError):
    pass


class Verdict(str, Enum):
    CONVERGENT = "CONVERGENT"
    DIVERGENT = "DIVERGENT"
    INCONCLUSIVE = "INCONCLUSIVE"


class Evaluable(Protocol):
    def log_abs(self, z: np.ndarray) -> np.ndarray: ...


class LogFunction:
    """Wrap a callable returning complex values or a :class:`LogComplex`."""

    def __init__(self, func: Callable):
        self.func = func

    def log_abs(self, z):
        v = self.func(np.asarray(z, dtype=complex))
        if isinstance(v, LogComplex):
            return np.asarray(v.logmag)
        with np.errstate(divide="ignore"):
            return np.log(np.abs(np.asarray(v, dtype=complex)))


class ZeroFunction:
    def log_abs(self, z):
        return np.full(np.shape(z), -np.inf)


@dataclass(frozen=True)
class QuadratureSpec:
    order: int = 24
    max_ring: int = 24
    fit_window: int = 8

    def __post_init__(self):
        if self.order < 4:
            raise ValueError("quadrature order must be at least 4")
        if self.fit_window < 2:
            raise ValueError("fit window needs at least two rings")
        if self.max_ring < self.fit_window + 2:
            raise ValueError("max_ring must be at least fit_window + 2")


@dataclass
class NormEstimate:
    verdict: Verdict
    partial_norm_p: float
    ring_contribs: list[float]
    fitted_exponent: float
    log_ring_contribs: list[float] = field(repr=False, default_factory=list)
    tail: float = 0.0
    params: FockParams | None = None

    @property
    def norm(self) -> float:
        """``||f||_{p,alpha}`` (the ``1/p`` power of the estimate)."""
        return self.partial_norm_p ** (1.0 / self.params.p)

    def to_dict(self) -> dict:
        return {
            "verdict": self.verdict.value,
            "partial_norm_p": self.partial_norm_p,
            "tail": self.tail,
            "fitted_exponent": self.fitted_exponent,
            "ring_contribs": list(self.ring_contribs),
        }


@dataclass
class SupEstimate:
    log_sup: float
    argmax: complex
    ring_max: list[float]
    unbounded: bool

    @property
    def bounded(self) -> bool:
        return not self.unbounded

    def to_dict(self) -> dict:
        return {
            "log_sup": self.log_sup,
            "argmax": [self.argmax.real, self.argmax.imag],
            "unbounded": self.unbounded,
            "ring_max": list(self.ring_max),
        }


def max_workers() -> int:
    env = os.environ.get("FOCK_ZEROS_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return os.cpu_count() or 1


def _ordered_map(func, items):
    items = list(items)
    workers = min(max_workers(), len(items))
    if workers <= 1:
        return [func(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(func, items))


def weighted_log_mag(f: Evaluable, z, alpha: float):
    z = np.asarray(z, dtype=complex)
    return np.asarray(f.log_abs(z)) - 0.5 * alpha * (z.real**2 + z.imag**2)


def _gauss_nodes(order: int, half_width: float):
    x, w = np.polynomial.legendre.leggauss(order)
    off = half_width * (x[:, None] + 1j * x[None, :])
    logw = np.log(w[:, None] * w[None, :])
    return off.ravel(), logw.ravel()


def _log_cell_integrals(f, params: FockParams, centers: np.ndarray, half_width: float, order: int):
    off, logw = _gauss_nodes(order, half_width)
    nodes = centers[:, None] + off[None, :]
    wm = weighted_log_mag(f, nodes.ravel(), params.alpha).reshape(nodes.shape)
    with np.errstate(invalid="ignore"):
        terms = params.p * wm + logw[None, :]
    terms = np.where(np.isneginf(wm), -np.inf, terms)
    return logsumexp_real(terms, axis=1) + 2.0 * math.log(half_width)


def cell_integral(f: Evaluable, params: FockParams, cell: Cell, quad: QuadratureSpec = QuadratureSpec()) -> float:
    """Integral of ``|f(z) exp(-alpha|z|^2/2)|^p`` over ``cell`` (no ``alpha/pi`` factor)."""
    if params.is_sup:
        raise NotApplicable("cell integrals need a finite exponent")
    val = _log_cell_integrals(f, params, np.array([cell.center]), cell.half_width, quad.order)
    return float(np.exp(val[0]))


def _fit_exponent(rings: np.ndarray, logs: np.ndarray) -> tuple[float, float]:
    ok = np.isfinite(logs)
    if ok.sum() < 2:
        return -math.inf, -math.inf
    slope, intercept = np.polyfit(np.log(rings[ok]), logs[ok], 1)
    return float(slope), float(intercept)


def classify_exponent(slope: float, log_contribs: Sequence[float], margin: float = EXPONENT_MARGIN) -> Verdict:
    if slope < -1.0 - margin:
        return Verdict.CONVERGENT
    finite = [c for c in log_contribs if np.isfinite(c)]
    nondecaying = len(finite) >= 2 and finite[-1] >= finite[0]
    if slope >= -1.0 - BOUNDARY_SLACK or nondecaying:
        return Verdict.DIVERGENT
    return Verdict.INCONCLUSIVE


def norm_estimate(f: Evaluable, params: FockParams, quad: QuadratureSpec = QuadratureSpec(),
                  margin: float = EXPONENT_MARGIN) -> NormEstimate:
    """Estimate ``||f||^p_{p,alpha}`` and classify convergence.

    ``partial_norm_p`` is the ``alpha/pi``-scaled sum over rings ``0..max_ring``
    plus, for convergent cases, the fitted power-law tail.
    """
    if params.is_sup:
        raise NotApplicable("use sup_norm for p = infinity")
    lat = SquareLattice(params.alpha)

    def ring_log(r):
        centers = lat.points(*np.array(ring_indices(r)).T)
        cells = _log_cell_integrals(f, params, np.atleast_1d(centers), lat.half_width, quad.order)
        return logsumexp_real(cells)

    scale = math.log(params.alpha / math.pi)
    logs = np.array(_ordered_map(ring_log, range(quad.max_ring + 1))) + scale
    with np.errstate(over="ignore"):
        contribs = np.exp(logs)
    rings = np.arange(quad.max_ring - quad.fit_window + 1, quad.max_ring + 1)
    window = logs[rings]
    slope, _ = _fit_exponent(rings.astype(float), window)
    verdict = classify_exponent(slope, window, margin)
    partial = float(np.sum(contribs))
    tail = 0.0
    last = logs[quad.max_ring]
    if verdict is Verdict.CONVERGENT and np.isfinite(slope) and np.isfinite(last):
        # power law through the last ring: c_R * sum_{r>R} (r/R)^slope
        with np.errstate(divide="ignore", under="ignore"):
            log_tail = last - slope * math.log(quad.max_ring) + np.log(special.zeta(-slope, quad.max_ring + 1))
        tail = float(np.exp(log_tail))
    return NormEstimate(verdict, partial + tail, [float(c) for c in contribs], slope,
                        [float(x) for x in logs], tail, params)


def _cell_grid(half_width: float, npts: int = SUP_GRID):
    t = np.linspace(-half_width, half_width, npts)
    return (t[:, None] + 1j * t[None, :]).ravel()


def _refine(f, alpha, start: complex, center: complex, h: float) -> tuple[float, complex]:
    def neg(x):
        v = weighted_log_mag(f, np.array([complex(x[0], x[1])]), alpha)[0]
        return -v if np.isfinite(v) else 1e300

    bounds = [(center.real - h, center.real + h), (center.imag - h, center.imag + h)]
    res = optimize.minimize(neg, [start.real, start.imag], method="L-BFGS-B", bounds=bounds,
                            options={"ftol": 1e-15, "gtol": 1e-12, "maxiter": 200})
    return -float(res.fun), complex(res.x[0], res.x[1])


def sup_norm(f: Evaluable, params: FockParams, search_rings: int = 24,
             exploit_periodicity: bool = True, trend_window: int = 4) -> SupEstimate:
    """Log of ``sup |f(z)| exp(-alpha|z|^2/2)`` over rings ``0..search_rings``.

    ``unbounded`` is set when the per-ring maximum is still strictly increasing
    over the last ``trend_window`` rings.
    """
    if not params.is_sup:
        raise NotApplicable("sup_norm is the p = infinity norm")
    lat = SquareLattice(params.alpha)
    h = lat.half_width
    grid = _cell_grid(h)
    if exploit_periodicity and isinstance(f, CanonicalFunction) and f.is_periodic_weighted(params.alpha):
        search_rings = 0

    def ring_best(r):
        centers = np.atleast_1d(lat.points(*np.array(ring_indices(r)).T))
        pts = (centers[:, None] + grid[None, :]).ravel()
        wm = weighted_log_mag(f, pts, params.alpha)
        i = int(np.argmax(wm))
        center = complex(centers[i // grid.size])
        best, at = float(wm[i]), complex(pts[i])
        if np.isfinite(best):
            val, loc = _refine(f, params.alpha, at, center, h)
            if val > best:
                best, at = val, loc
        return best, at

    results = _ordered_map(ring_best, range(search_rings + 1))
    ring_max = [b for b, _ in results]
    k = int(np.argmax(ring_max))
    incr = np.diff(ring_max[-(trend_window + 1):])
    unbounded = len(ring_max) > trend_window and bool(np.all(incr > GROWTH_TOL))
    return SupEstimate(ring_max[k], results[k][1], ring_max, unbounded)


def pointwise_estimate_check(f: Evaluable, norm: float, params: FockParams, samples) -> float:
    """Largest violation of ``|f(z)| e^{-alpha|z|^2/2} <= C_p ||f||_{p,alpha}`` over ``samples``, in logs.

    Members satisfy the inequality, so the result should not exceed a small
    numerical slack.  Under the ``alpha/pi`` measure the sharp constant is
    ``C_p = max(1, (p/2)^{1/p})``; constants attain it at the origin.
    """
    wm = weighted_log_mag(f, np.asarray(samples, dtype=complex), params.alpha)
    if wm.size == 0 or np.all(np.isneginf(wm)):
        return -math.inf
    log_c = 0.0 if params.is_sup else max(0.0, math.log(params.p / 2.0) / params.p)
    return float(np.max(wm) - math.log(norm) - log_c)


@dataclass
class EmbeddingReport:
    gamma: float
    at_alpha: NormEstimate | SupEstimate
    at_beta: NormEstimate | SupEstimate
    params_alpha: FockParams
    params_beta: FockParams

    @staticmethod
    def _member(est) -> bool:
        if isinstance(est, SupEstimate):
            return est.bounded
        return est.verdict is Verdict.CONVERGENT

    @staticmethod
    def _nonmember(est) -> bool:
        if isinstance(est, SupEstimate):
            return est.unbounded
        return est.verdict is Verdict.DIVERGENT

    @property
    def realized(self) -> bool:
        """sigma_gamma lies in the larger space and outside the smaller one."""
        return self._member(self.at_beta) and self._nonmember(self.at_alpha)

    def to_dict(self) -> dict:
        return {
            "gamma": self.gamma,
            "alpha": {"alpha": self.params_alpha.alpha, "p": self.params_alpha.p, **self.at_alpha.to_dict()},
            "beta": {"alpha": self.params_beta.alpha, "p": self.params_beta.p, **self.at_beta.to_dict()},
            "realized": self.realized,
        }


def _estimate(f, params, quad):
    if params.is_sup:
        return sup_norm(f, params, quad.max_ring, exploit_periodicity=False)
    return norm_estimate(f, params, quad)


def embedding_demo(alpha: float, beta: float, p: float, q: float,
                   quad: QuadratureSpec = QuadratureSpec()) -> EmbeddingReport:
    """Exhibit sigma for ``gamma = (alpha+beta)/2``: a member at ``(beta, q)``, not at ``(alpha, p)``.

    Its zero set, the lattice for ``gamma``, is then a zero sequence for the
    larger space but not for the smaller one.
    """
    if not alpha < beta:
        raise InvalidParams(f"need alpha < beta, got alpha={alpha!r}, beta={beta!r}")
    gamma = 0.5 * (alpha + beta)
    f = sigma_function(gamma)
    pa, pb = FockParams(alpha, p), FockParams(beta, q)
    return EmbeddingReport(gamma, _estimate(f, pa, quad), _estimate(f, pb, quad), pa, pb)
