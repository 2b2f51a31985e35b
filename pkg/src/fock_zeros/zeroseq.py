"""Zero sequences built from a square lattice by finitely many changes.

A :class:`ZeroSequence` is the lattice for ``gamma`` with some points removed
and some points (with multiplicity) added.  For these sequences the space
``I_Z`` of functions vanishing on ``Z`` has a closed form:

* ``p = inf``: ``sigma / prod(z - a_i)`` times polynomials of degree
  ``<= r``, one degree lost per added point.
* ``p < inf``: the quotient only enters the space after ``N`` removals, where
  ``N`` is the least integer with ``N p > 2``; the remaining ``r - N``
  removals buy polynomial degrees.

:func:`verify_basis` backs the count with numerical evidence, and
:func:`vanishing_witness` builds the nonzero combination that vanishes on
extra constraint points.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Sequence

import numpy as np

from .canonical import CanonicalFunction
from .fock import (EXPONENT_MARGIN, NormEstimate, QuadratureSpec, SupEstimate, Verdict, norm_estimate, sup_norm,
                   weighted_log_mag)
from .lattice import FockParams, LatticeIndex, SquareLattice, iter_window
from .logspace import LogComplex
from .sigma import SigmaEvaluator

VANISH_LOG = -20.0
COINCIDE_TOL = 1e-12
FD_STEP = 1e-5
RANK_RTOL = 1e-9
VANISH_SAMPLES = 20
VANISH_RING = 6


class Classification(str, Enum):
    ZERO_SEQUENCE = "ZERO_SEQUENCE"
    UNIQUENESS_SET = "UNIQUENESS_SET"


class MismatchedAlpha(ValueError):
    pass


class VerificationFailed(RuntimeError):
    def __init__(self, clause: str, record: "BasisVerification"):
        super().__init__(f"basis verification failed: {clause}")
        self.clause = clause
        self.record = record


class DegenerateBasis(ValueError):
    pass


class NotMaximal(ValueError):
    def __init__(self, k: int | float):
        super().__init__(f"sequence is not maximal: dim I_Z = {k}")
        self.k = k


def smallest_n(p: float) -> int:
    """Least positive integer ``N`` with ``N * p > 2``."""
    if math.isinf(p):
        raise ValueError("smallest_n needs a finite exponent")
    if not p > 0:
        raise ValueError("p must be positive")
    n = max(1, math.floor(2.0 / p) + 1)
    while n * p <= 2:
        n += 1
    while n > 1 and (n - 1) * p > 2:
        n -= 1
    return n


@dataclass(frozen=True)
class ZeroSequence:
    """Lattice for ``gamma`` minus ``removed`` plus ``added`` (point, multiplicity) pairs."""

    lattice: SquareLattice
    removed: frozenset = frozenset()
    added: tuple = ()

    def __post_init__(self):
        removed = frozenset(LatticeIndex(int(m), int(n)) for m, n in self.removed)
        merged: Counter = Counter()
        for pt, mult in self.added:
            if int(mult) < 1:
                raise ValueError("multiplicities must be positive integers")
            merged[complex(pt)] += int(mult)
        added = tuple(sorted(merged.items(), key=lambda t: (t[0].real, t[0].imag)))
        object.__setattr__(self, "removed", removed)
        object.__setattr__(self, "added", added)

    @classmethod
    def lattice_minus(cls, alpha: float, removed: Iterable = ()) -> ZeroSequence:
        removed = list(removed)
        if len(set(map(tuple, removed))) != len(removed):
            raise ValueError("removed indices must be distinct")
        return cls(SquareLattice(alpha), frozenset(removed))

    @property
    def gamma(self) -> float:
        return self.lattice.alpha

    @property
    def added_count(self) -> int:
        return sum(m for _, m in self.added)

    def sorted_removed(self) -> list[LatticeIndex]:
        return sorted(self.removed)

    def stacked_points(self) -> list[complex]:
        """Added points sitting on surviving lattice points (multiplicity increases)."""
        out = []
        for pt, _ in self.added:
            z0, idx = self.lattice.reduce(pt)
            if abs(z0) <= COINCIDE_TOL * self.lattice.omega1 and idx not in self.removed:
                out.append(pt)
        return out

    def to_dict(self) -> dict:
        return {
            "gamma": self.gamma,
            "removed": [list(i) for i in self.sorted_removed()],
            "added": [[p.real, p.imag, m] for p, m in self.added],
        }


def add_points(seq: ZeroSequence, points: Iterable) -> ZeroSequence:
    """Merge points into ``seq``.

    Items are complex numbers or ``(point, multiplicity)`` pairs.  A unit
    landing on a removed lattice point cancels that removal.
    """
    removed = set(seq.removed)
    added = Counter(dict(seq.added))
    for item in points:
        pt, mult = (item, 1) if np.ndim(item) == 0 else item
        pt = complex(pt)
        for _ in range(int(mult)):
            z0, idx = seq.lattice.reduce(pt)
            if abs(z0) <= COINCIDE_TOL * seq.lattice.omega1 and idx in removed:
                removed.discard(idx)
            else:
                added[pt] += 1
    return ZeroSequence(seq.lattice, frozenset(removed), tuple(added.items()))


@dataclass
class DimensionReport:
    k: int | float
    n: int | None
    classification: Classification
    basis: list[CanonicalFunction]
    sequence: ZeroSequence
    params: FockParams
    notes: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "k": self.k if not math.isinf(self.k) else "inf",
            "N": self.n,
            "classification": self.classification.value,
            "basis": [b.describe() for b in self.basis],
            "notes": list(self.notes),
        }


def _added_factor(seq: ZeroSequence) -> np.ndarray:
    coeffs = np.array([1.0 + 0j])
    for pt, mult in seq.added:
        for _ in range(mult):
            coeffs = np.polynomial.polynomial.polymul(coeffs, [-pt, 1.0])
    return coeffs


def generator(seq: ZeroSequence, sigma: SigmaEvaluator | None = None) -> CanonicalFunction:
    """``sigma * prod (z - b)^m / prod (z - a_i)``: vanishes exactly on ``seq``."""
    sigma = sigma or SigmaEvaluator(seq.lattice)
    g = CanonicalFunction(sigma, tuple(seq.sorted_removed()))
    return g.times_poly(_added_factor(seq))


def dim_iz(seq: ZeroSequence, params: FockParams, sigma: SigmaEvaluator | None = None) -> DimensionReport:
    """Dimension of ``I_Z`` with an explicit basis ``g * z^j``, ``j < k``."""
    if not math.isclose(params.alpha, seq.gamma, rel_tol=1e-12):
        raise MismatchedAlpha(
            f"sequence built on alpha={seq.gamma!r} but space has alpha={params.alpha!r}"
        )
    r = len(seq.removed)
    a = seq.added_count
    if params.is_sup:
        n = None
        k = max(0, r - a + 1)
    else:
        n = smallest_n(params.p)
        k = max(0, r - a - n + 1)
    cls = Classification.UNIQUENESS_SET if k == 0 else Classification.ZERO_SEQUENCE
    basis = []
    if k > 0:
        g = generator(seq, sigma)
        basis = [g.times_power(j) for j in range(k)]
    notes = []
    if seq.stacked_points():
        notes.append("added points on surviving lattice points counted one per multiplicity unit")
    return DimensionReport(k, n, cls, basis, seq, params, notes)


@dataclass
class ClauseResult:
    passed: bool
    details: dict

    def to_dict(self) -> dict:
        return {"passed": self.passed, **self.details}


@dataclass
class BasisVerification:
    clauses: dict[str, ClauseResult]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.clauses.values())

    @property
    def failed_clause(self) -> str | None:
        for name, c in self.clauses.items():
            if not c.passed:
                return name
        return None

    def to_dict(self) -> dict:
        return {"passed": self.passed, **{k: v.to_dict() for k, v in self.clauses.items()}}


def _membership(f, params: FockParams, quad: QuadratureSpec,
                margin: float = EXPONENT_MARGIN) -> NormEstimate | SupEstimate:
    if params.is_sup:
        return sup_norm(f, params, quad.max_ring)
    return norm_estimate(f, params, quad, margin)


def _is_member(est) -> bool:
    return est.bounded if isinstance(est, SupEstimate) else est.verdict is Verdict.CONVERGENT


def _is_nonmember(est) -> bool:
    return est.unbounded if isinstance(est, SupEstimate) else est.verdict is Verdict.DIVERGENT


def _summary(est) -> dict:
    if isinstance(est, SupEstimate):
        return {"log_sup": est.log_sup, "unbounded": est.unbounded}
    return {"verdict": est.verdict.value, "fitted_exponent": est.fitted_exponent}


def surviving_sample(seq: ZeroSequence, count: int, seed: int, max_ring: int = VANISH_RING) -> list[complex]:
    pool = [idx for idx in iter_window(max_ring) if idx not in seq.removed]
    rng = np.random.default_rng(seed)
    pick = rng.choice(len(pool), size=min(count, len(pool)), replace=False)
    return [seq.lattice.point(pool[i]) for i in sorted(pick)]


def verify_basis(report: DimensionReport, quad: QuadratureSpec = QuadratureSpec(), seed: int = 0,
                 raise_on_failure: bool = True, margin: float = EXPONENT_MARGIN) -> BasisVerification:
    """Numerical evidence for a finite, positive dimension.

    ``members``: every basis element lies in the space.
    ``next_power``: the basis cannot be extended by the next power of ``z``.
    ``vanishing``: basis elements vanish at sampled surviving lattice points.
    """
    if math.isinf(report.k) or report.k < 1:
        raise ValueError("verify_basis needs a finite dimension k >= 1")
    params = report.params
    ests = [_membership(b, params, quad, margin) for b in report.basis]
    members = ClauseResult(all(_is_member(e) for e in ests), {"elements": [_summary(e) for e in ests]})
    nxt = _membership(report.basis[-1].times_power(1), params, quad, margin)
    next_power = ClauseResult(_is_nonmember(nxt), _summary(nxt))
    pts = surviving_sample(report.sequence, VANISH_SAMPLES, seed)
    worst = max(float(np.max(weighted_log_mag(b, np.array(pts), params.alpha))) for b in report.basis)
    vanishing = ClauseResult(worst < VANISH_LOG, {"max_weighted_log_mag": worst, "points": len(pts)})
    record = BasisVerification({"members": members, "next_power": next_power, "vanishing": vanishing})
    if raise_on_failure and not record.passed:
        raise VerificationFailed(record.failed_clause, record)
    return record


def uniqueness_after_adding(seq: ZeroSequence, params: FockParams, j: int) -> Classification:
    """Classification of ``seq`` with any ``j`` further points."""
    k = dim_iz(seq, params).k
    return Classification.ZERO_SEQUENCE if j < k else Classification.UNIQUENESS_SET


def _fd_weights(order: int) -> tuple[np.ndarray, np.ndarray]:
    """Central stencil and weights for the ``order``-th derivative, second-order accurate."""
    s = max(1, (order + 1) // 2)
    offs = np.arange(-s, s + 1, dtype=float)
    a = np.vander(offs, increasing=True).T
    rhs = np.zeros(offs.size)
    rhs[order] = math.factorial(order)
    return offs, np.linalg.solve(a, rhs)


def _weighted_derivative(f: CanonicalFunction, b: complex, order: int, h: float, alpha: float) -> complex:
    """``f^{(order)}(b) * exp(-alpha |b|^2 / 2)`` by central differences in log-space."""
    weight = -0.5 * alpha * abs(b) ** 2
    if order == 0:
        v = f.evaluate(b)
        if v.is_zero:
            return 0j
        return complex(np.exp(v.logmag + weight + 1j * v.arg))
    offs, w = _fd_weights(order)
    vals = f.evaluate(b + offs * h)
    lm = np.asarray(vals.logmag)
    ref = float(np.max(lm[np.isfinite(lm)])) if np.any(np.isfinite(lm)) else 0.0
    with np.errstate(invalid="ignore"):
        lin = np.where(np.isfinite(lm), np.exp(lm - ref + 1j * np.asarray(vals.arg)), 0j)
    s = complex(np.dot(w, lin)) / h**order
    return s * complex(np.exp(ref + weight))


def _alpha_of(basis: Sequence[CanonicalFunction]) -> float:
    return basis[0].sigma.alpha if basis and basis[0].sigma is not None else 0.0


def constraint_matrix(basis: Sequence[CanonicalFunction], points: Sequence, step: float | None = None) -> np.ndarray:
    """Rows: value and derivative conditions at each point; columns: basis functions.

    A point of multiplicity ``m`` contributes rows for derivatives ``0..m-1``.
    Entries are scaled by the Gaussian weight at the point, which leaves the
    null space unchanged.
    """
    alpha = _alpha_of(basis)
    omega = basis[0].sigma.omega1 if basis and basis[0].sigma is not None else 1.0
    h = FD_STEP * omega if step is None else step
    rows = []
    for item in points:
        pt, mult = (item, 1) if np.ndim(item) == 0 else item
        for d in range(int(mult)):
            rows.append([_weighted_derivative(f, complex(pt), d, h, alpha) for f in basis])
    return np.array(rows, dtype=complex).reshape(len(rows), len(basis))


def vanishing_witness(basis: Sequence[CanonicalFunction], points: Sequence, step: float | None = None) -> np.ndarray:
    """Coefficients ``c`` with ``sum c_i f_i`` vanishing on ``points`` (with multiplicity).

    Needs ``len(basis) == total multiplicity + 1``.  Returns the unit null
    vector from an SVD of :func:`constraint_matrix`, rotated so its first
    nonzero entry is positive real.
    """
    total = sum(1 if np.ndim(it) == 0 else int(it[1]) for it in points)
    if len(basis) != total + 1:
        raise ValueError(f"need {total + 1} basis functions for {total} conditions, got {len(basis)}")
    if total == 0:
        return np.array([1.0 + 0j])
    a = constraint_matrix(basis, points, step)
    _, s, vh = np.linalg.svd(a)
    rank = int(np.sum(s > RANK_RTOL * s[0])) if s[0] > 0 else 0
    if rank < total:
        raise DegenerateBasis(f"constraint matrix has rank {rank} < {total}")
    c = vh[-1].conj()
    c = c / np.linalg.norm(c)
    i = next(i for i, x in enumerate(c) if abs(x) > 1e-12)
    c = c * (abs(c[i]) / c[i])
    c[i] = abs(c[i])
    return c


@dataclass
class LinearCombination:
    """``sum c_i f_i`` evaluated in log-space."""

    functions: Sequence[CanonicalFunction]
    coeffs: np.ndarray

    def evaluate(self, z) -> LogComplex:
        scalar = np.ndim(z) == 0
        z = np.atleast_1d(np.asarray(z, dtype=complex))
        vals = [f.evaluate(z) for f in self.functions]
        lm = np.stack([np.asarray(v.logmag) for v in vals])
        ref = np.max(np.where(np.isfinite(lm), lm, -np.inf), axis=0)
        ref = np.where(np.isfinite(ref), ref, 0.0)
        total = np.zeros(z.shape, dtype=complex)
        for c, v in zip(self.coeffs, vals):
            lmv = np.asarray(v.logmag)
            with np.errstate(invalid="ignore"):
                total += np.where(np.isfinite(lmv), c * np.exp(lmv - ref + 1j * np.asarray(v.arg)), 0j)
        out = LogComplex.from_complex(total) * LogComplex(ref, 0.0)
        return out[0] if scalar else out

    def log_abs(self, z):
        return np.asarray(self.evaluate(z).logmag)


@dataclass
class ProbeResult:
    point: complex
    classification: Classification
    k_after: int

    def to_dict(self) -> dict:
        return {"point": [self.point.real, self.point.imag],
                "classification": self.classification.value, "k_after": self.k_after}


@dataclass
class MaximalityCertificate:
    sequence: ZeroSequence
    params: FockParams
    generator: CanonicalFunction
    verification: BasisVerification
    probes: list[ProbeResult]

    @property
    def maximal(self) -> bool:
        return self.verification.passed and all(
            p.classification is Classification.UNIQUENESS_SET for p in self.probes)

    def to_dict(self) -> dict:
        return {
            "maximal": self.maximal,
            "k": 1,
            "generator": self.generator.describe(),
            "verification": self.verification.to_dict(),
            "probes": [p.to_dict() for p in self.probes],
        }


def maximality_certificate(seq: ZeroSequence, params: FockParams, quad: QuadratureSpec = QuadratureSpec(),
                           seed: int = 0, probes: int = 5,
                           margin: float = EXPONENT_MARGIN) -> MaximalityCertificate:
    """Evidence that ``seq`` is a maximal zero sequence (``dim I_Z = 1``).

    Raises :class:`NotMaximal` for any other dimension and
    :class:`VerificationFailed` when the numerical evidence does not hold up.
    """
    report = dim_iz(seq, params)
    if report.k != 1:
        raise NotMaximal(report.k)
    record = verify_basis(report, quad, seed, margin=margin)
    rng = np.random.default_rng(seed)
    w = seq.lattice.omega1
    results = []
    for _ in range(probes):
        a = complex(rng.uniform(-3, 3) * w, rng.uniform(-3, 3) * w)
        k_after = dim_iz(add_points(seq, [a]), params).k
        cls = Classification.UNIQUENESS_SET if k_after == 0 else Classification.ZERO_SEQUENCE
        results.append(ProbeResult(a, cls, k_after))
    return MaximalityCertificate(seq, params, report.basis[0], record, results)
