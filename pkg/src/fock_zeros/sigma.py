"""Weierstrass sigma function of the square lattice, in log-space.

Three independent evaluation routes are provided:

``eval_product``
    The canonical product over a square window of rings ``1..M``.  The window
    is invariant under multiplication by ``i``, so the four rotations of a
    point combine into ``1 - (z/q)^4`` and the exponential convergence factors
    cancel exactly.  The omitted far-field factor is
    ``exp(-sum_j z^{4j} T_{4j}(M) / (4j))`` where ``T_k(M)`` is the lattice sum
    of ``w^{-k}`` outside the window; it is restored from the closed-form
    Eisenstein sum ``G_4 = Gamma(1/4)^8 / (960 pi^2)`` of ``Z[i]`` and the
    standard recursion for the higher sums.  What remains is bounded by
    ``8 M^2 rho^{4(J+1)} / (4(J+1)(4J+2)(1-rho^4))`` with
    ``rho = |z| / (M omega1)``.

``eval_reduced``
    Reduce ``z`` into the fundamental cell and apply the quasi-periodicity
    ``sigma(z + w) = eps(w) sigma(z) exp(eta(w) (z + w/2))`` with
    ``eta(w) = alpha * conj(w)`` and ``eps(w_mn) = (-1)^(m+n+mn)``.

``eval_theta``
    ``sigma(z) = (omega1/pi) exp(eta1 z^2 / (2 omega1)) theta1(v) / theta1'(0)``
    with ``v = pi z / omega1`` and nome ``q = exp(-pi)``.
"""

from __future__ import annotations

import math
from functools import lru_cache

import numpy as np

from .lattice import SquareLattice
from .logspace import LogComplex, weighted_mag

DEFAULT_TOL = 1e-10
MIN_AUTO_RING = 3
MAX_AUTO_RING = 4096
MAX_CORRECTION_TERMS = 12

# sum' (m + i n)^{-4} over Z[i] minus the origin
G4_UNIT = math.gamma(0.25) ** 8 / (960.0 * math.pi**2)

THETA_REL_CUTOFF = 1e-16
SELF_TEST_TOL = 1e-8


class TruncationTooSmall(ValueError):
    """The requested truncation ring cannot meet the tolerance at this ``|z|``."""


class SelfTestError(RuntimeError):
    """The quasi-period constant failed the construction-time periodicity check."""


@lru_cache(maxsize=None)
def eisenstein_unit(kmax: int = 4 * (MAX_CORRECTION_TERMS + 1)) -> dict[int, float]:
    """Lattice sums ``G_{2k} = sum' w^{-2k}`` of ``Z[i]`` up to ``2k <= kmax``.

    Uses the Laurent-coefficient recursion for the Weierstrass p-function with
    ``g3 = 0``: ``c_2 = 3 G_4``, ``c_3 = 0`` and
    ``c_k = 3 / ((2k+1)(k-3)) * sum_{m=2}^{k-2} c_m c_{k-m}``,
    ``G_{2k} = c_k / (2k - 1)``.
    """
    c = {2: 3.0 * G4_UNIT, 3: 0.0}
    for k in range(4, kmax // 2 + 1):
        c[k] = 3.0 / ((2 * k + 1) * (k - 3)) * sum(c[m] * c[k - m] for m in range(2, k - 1))
    return {2 * k: ck / (2 * k - 1) for k, ck in c.items()}


@lru_cache(maxsize=64)
def _quarter_points(max_ring: int) -> np.ndarray:
    """Unit-lattice representatives ``m + i n`` (``m >= 1``, ``n >= 0``) up to ``max_ring``.

    Every nonzero point of ``Z[i]`` is ``i^k`` times exactly one of these.
    Ordered ring by ring.
    """
    pts = []
    for r in range(1, max_ring + 1):
        pts.extend(complex(r, n) for n in range(0, r))
        pts.extend(complex(m, r) for m in range(1, r + 1))
    return np.array(pts, dtype=complex)


# rounding left in G_k - (sum inside a window) for the unit lattice
_CANCEL_EPS = 2e-15


@lru_cache(maxsize=64)
def _tail_parts(max_ring: int, terms: int) -> tuple[np.ndarray, np.ndarray]:
    """Split ``T_{4j}(M)`` of the unit lattice into a near band and a far remainder.

    The band covers rings ``M+1 .. 3M`` and is summed directly, so it carries
    full relative accuracy.  The remainder beyond ring ``3M`` comes from the
    closed-form sums by subtraction; it is accurate only to about
    ``_CANCEL_EPS`` in absolute terms.
    """
    g = eisenstein_unit()
    outer = 3 * max_ring
    q_in = _quarter_points(max_ring)
    q_out = _quarter_points(outer)[q_in.size:]
    q_all = _quarter_points(outer)
    band = np.empty(terms)
    far = np.empty(terms)
    for j in range(1, terms + 1):
        k = 4 * j
        band[j - 1] = 4.0 * float(np.sum(q_out ** (-k)).real)
        far[j - 1] = g[k] - 4.0 * float(np.sum(q_all ** (-k)).real)
    return band, far


def _far_bound(max_ring: int, k: int) -> float:
    # |sum of w^{-k} beyond ring 3M| <= 8 (3M)^{2-k} / (k-2)
    return 8.0 * (3.0 * max_ring) ** (2 - k) / (k - 2)


def correction_error(max_ring: int, u: float, terms: int) -> tuple[float, tuple[bool, ...]]:
    """Worst-case log-error of the far-field correction at ``|z|/omega1 = u``.

    Returns the bound and, per term, whether the far remainder is included.
    Including it costs ``_CANCEL_EPS * u^k / k``; dropping it costs its size.
    """
    use_far = []
    err = tail_bound(max_ring, u / max_ring, terms)
    for j in range(1, terms + 1):
        k = 4 * j
        scale = u**k / k
        drop = _far_bound(max_ring, k) * scale
        keep = _CANCEL_EPS * scale
        use_far.append(keep < drop)
        err += min(keep, drop)
    return err, tuple(use_far)


def tail_bound(max_ring: int, rho: float, terms: int) -> float:
    """Bound on the log-error from correction terms beyond ``terms`` (exact tails assumed)."""
    if rho >= 1.0:
        return math.inf
    if rho == 0.0:
        return 0.0
    j1 = terms + 1
    r4 = rho**4
    return 8.0 * max_ring**2 * r4**j1 / (4 * j1 * (4 * j1 - 2) * (1.0 - r4))


def plan_truncation(zmax_scaled: float, tol: float, max_ring: int | None = None) -> tuple[int, int]:
    """Pick ``(M, J)`` for ``|z| / omega1 <= zmax_scaled``.

    With ``max_ring`` fixed, only the number of correction terms is chosen and
    :class:`TruncationTooSmall` is raised if none suffices.
    """
    rings = [max_ring] if max_ring is not None else range(MIN_AUTO_RING, MAX_AUTO_RING + 1)
    for m in rings:
        for j in range(1, MAX_CORRECTION_TERMS + 1):
            if correction_error(m, zmax_scaled, j)[0] < tol:
                return m, j
    raise TruncationTooSmall(
        f"truncation ring {max_ring if max_ring is not None else MAX_AUTO_RING} cannot reach "
        f"tolerance {tol:g} at |z|/omega1 = {zmax_scaled:.6g}"
    )


def _log_sigma_over_z(u: np.ndarray, max_ring: int, terms: int, umax: float | None = None) -> np.ndarray:
    """Complex log of ``sigma(z)/z`` for the unit lattice at ``u = z / omega1``.

    The imaginary part is an unwrapped sum of arguments.
    """
    q = _quarter_points(max_ring)
    u4 = u**4
    acc = np.zeros(u.shape, dtype=complex)
    block = max(1, int(2_000_000 // max(u.size, 1)))
    for start in range(0, q.size, block):
        qb = q[start : start + block] ** 4
        with np.errstate(divide="ignore", invalid="ignore"):
            acc += np.sum(np.log1p(-u4[..., None] / qb), axis=-1)
    if umax is None:
        umax = float(np.max(np.abs(u))) if u.size else 0.0
    band, far = _tail_parts(max_ring, terms)
    _, use_far = correction_error(max_ring, umax, terms)
    power = np.ones_like(u)
    for j in range(1, terms + 1):
        power = power * u4
        t = band[j - 1] + (far[j - 1] if use_far[j - 1] else 0.0)
        acc -= power * (t / (4 * j))
    return acc


class SigmaEvaluator:
    """sigma for the square lattice ``lattice``.

    Parameters
    ----------
    lattice : SquareLattice
    truncation_ring : int, optional
        Fixed product window ``M``.  ``None`` picks the smallest adequate
        window per call from ``tol``.
    tol : float
        Requested bound on the relative error left by truncation.
    eta_scale : float
        Multiplies the quasi-period constants.  Anything but 1 is wrong and
        exists only as a negative control; it fails the self-test unless
        ``self_test`` is False.
    """

    def __init__(self, lattice: SquareLattice, truncation_ring: int | None = None,
                 tol: float = DEFAULT_TOL, eta_scale: float = 1.0, self_test: bool = True):
        if truncation_ring is not None and truncation_ring < 1:
            raise ValueError("truncation_ring must be a positive integer")
        self.lattice = lattice
        self.truncation_ring = truncation_ring
        self.tol = tol
        w1 = complex(lattice.omega1, 0.0)
        self.eta = (
            eta_scale * lattice.alpha * w1.conjugate(),
            eta_scale * lattice.alpha * (1j * w1).conjugate(),
        )
        if self_test:
            self._self_test()

    @property
    def alpha(self) -> float:
        return self.lattice.alpha

    @property
    def omega1(self) -> float:
        return self.lattice.omega1

    def _plan(self, z: np.ndarray) -> tuple[int, int]:
        zmax = float(np.max(np.abs(z))) / self.omega1 if z.size else 0.0
        return plan_truncation(zmax, self.tol, self.truncation_ring)

    def _self_test(self):
        rng = np.random.default_rng(20240611)
        w = self.omega1
        z = (rng.uniform(-3.5, 3.5, 10) + 1j * rng.uniform(-3.5, 3.5, 10)) * w
        z += 1.5 * w  # stay off the fundamental cell
        direct = weighted_mag(self.eval_product(z, auto=True), z, self.alpha)
        reduced = weighted_mag(self.eval_reduced(z), z, self.alpha)
        err = float(np.max(np.abs(direct - reduced)))
        if not err < SELF_TEST_TOL:
            raise SelfTestError(
                f"weighted modulus of the reduced route deviates by {err:.3g} from the product; "
                "quasi-period constant is wrong"
            )

    def eval_product(self, z, auto: bool = False) -> LogComplex:
        """Truncated canonical product (with far-field correction).

        ``auto`` ignores a fixed ``truncation_ring`` and plans the window from
        the tolerance.
        """
        scalar = np.ndim(z) == 0
        z = np.atleast_1d(np.asarray(z, dtype=complex))
        if auto and self.truncation_ring is not None:
            big, terms = plan_truncation(float(np.max(np.abs(z))) / self.omega1, self.tol)
        else:
            big, terms = self._plan(z)
        u = z / self.omega1
        rest = _log_sigma_over_z(u, big, terms)
        with np.errstate(divide="ignore"):
            logmag = np.log(np.abs(z)) + rest.real
        arg = np.angle(z) + rest.imag
        # exact lattice points inside the window are exact zeros
        z0, m, n = self.lattice.reduce(z)
        on_lattice = (z0 == 0) & (np.maximum(np.abs(m), np.abs(n)) <= big)
        logmag = np.where(on_lattice, -np.inf, logmag)
        out = LogComplex(logmag, arg)
        return out[0] if scalar else out

    def reduced_parts(self, z):
        """Return ``(z0, m, n, rest)`` with ``sigma(z) = z0 * rest``.

        ``z = z0 + omega_mn`` with ``z0`` in the fundamental cell; ``rest`` is a
        :class:`LogComplex` that never vanishes, so a divisor ``z - omega_mn``
        can be cancelled against ``z0`` exactly.
        """
        z = np.asarray(z, dtype=complex)
        z0, m, n = self.lattice.reduce(z)
        # |z0| <= omega1/sqrt(2) in the fundamental cell
        big, terms = plan_truncation(math.sqrt(0.5) + 1e-12, self.tol, self.truncation_ring)
        rest = _log_sigma_over_z(z0 / self.omega1, big, terms, umax=math.sqrt(0.5))
        w = self.lattice.points(m, n)
        eta_w = m * self.eta[0] + n * self.eta[1]
        rest = rest + eta_w * (z0 + 0.5 * w)
        sign_flip = ((m + n + m * n) & 1).astype(bool)
        rest = rest + 1j * np.where(sign_flip, math.pi, 0.0)
        return z0, m, n, LogComplex(rest.real, rest.imag)

    def eval_reduced(self, z) -> LogComplex:
        """Argument reduction to the fundamental cell plus quasi-periodicity."""
        scalar = np.ndim(z) == 0
        z0, _, _, rest = self.reduced_parts(np.atleast_1d(z))
        with np.errstate(divide="ignore"):
            logmag = np.log(np.abs(z0)) + rest.logmag
        out = LogComplex(logmag, np.angle(z0) + rest.arg)
        return out[0] if scalar else out

    def eval_theta(self, z) -> LogComplex:
        """Independent route through the odd Jacobi theta series."""
        scalar = np.ndim(z) == 0
        z = np.atleast_1d(np.asarray(z, dtype=complex))
        w1 = self.omega1
        v = math.pi * z / w1
        yv = np.abs(v.imag)
        # exponent of the largest term; subtracting it keeps every term finite
        shift = yv**2 / math.pi
        total = np.zeros_like(z)
        deriv = 0.0
        k = 0
        while True:
            a = -math.pi * (k + 0.5) ** 2
            sgn = -1.0 if k & 1 else 1.0
            s = 2 * k + 1
            term = sgn * (np.exp(1j * s * v + a - shift) - np.exp(-1j * s * v + a - shift)) / 1j
            total = total + term
            deriv += sgn * s * math.exp(a)
            bound = np.exp(s * yv + a - shift)
            past_peak = (k + 0.5) * math.pi > yv
            small = (bound <= THETA_REL_CUTOFF * np.abs(total)) | (bound < 1e-300)
            if np.all(past_peak & small) or k > 400:
                break
            k += 1
        # total is theta1 itself; deriv is half of theta1'(0)
        with np.errstate(divide="ignore"):
            log_theta = np.log(np.abs(total)) + shift
        log_pref = math.log(w1 / math.pi) + self.eta[0] * z * z / (2.0 * w1)
        logmag = log_theta + log_pref.real - math.log(2.0 * deriv)
        arg = np.angle(total) + log_pref.imag
        out = LogComplex(np.where(total == 0, -np.inf, logmag), arg)
        return out[0] if scalar else out

    def weighted(self, v: LogComplex, z):
        return weighted_mag(v, z, self.alpha)
