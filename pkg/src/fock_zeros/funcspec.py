"""Parser for the command-line function grammar.

::

    spec    := base term*
    base    := "sigma" | "1"
    term    := "/" "(" "z" "-" "w(" INT "," INT ")" ")"
             | "*" "poly(" COEFF ("," COEFF)* ")"

``w(m,n)`` is a lattice point; coefficients are complex literals written
with ``i`` or ``j`` (``2``, ``-0.5``, ``1+2i``).  Whitespace is ignored.
"""

from __future__ import annotations

import re

from .canonical import CanonicalFunction
from .lattice import LatticeIndex
from .sigma import SigmaEvaluator

_DIVISOR = re.compile(r"/\(z-w\((-?\d+),(-?\d+)\)\)")
_POLY = re.compile(r"\*poly\(([^()]*)\)")


class SpecError(ValueError):
    pass


def parse_complex(text: str) -> complex:
    t = re.sub(r"\s+", "", text).replace("i", "j")
    if not t or not re.fullmatch(r"[0-9.eE+\-j]+", t):
        raise SpecError(f"not a complex number: {text!r}")
    try:
        return complex(t)
    except ValueError:
        raise SpecError(f"not a complex number: {text!r}") from None


def parse_function(spec: str, sigma: SigmaEvaluator) -> CanonicalFunction:
    s = re.sub(r"\s+", "", spec)
    if s.startswith("sigma"):
        base, pos = sigma, 5
    elif s.startswith("1"):
        base, pos = None, 1
    else:
        raise SpecError(f"function must start with 'sigma' or '1': {spec!r}")
    divisors: list[LatticeIndex] = []
    f = CanonicalFunction(base) if base is not None else CanonicalFunction.constant()
    while pos < len(s):
        m = _DIVISOR.match(s, pos)
        if m:
            divisors.append(LatticeIndex(int(m.group(1)), int(m.group(2))))
            pos = m.end()
            continue
        m = _POLY.match(s, pos)
        if m:
            coeffs = [parse_complex(c) for c in m.group(1).split(",")]
            f = f.times_poly(coeffs)
            pos = m.end()
            continue
        raise SpecError(f"cannot parse {spec!r} at offset {pos}: {s[pos:]!r}")
    try:
        return CanonicalFunction(base, tuple(divisors), f.poly)
    except ValueError as exc:
        raise SpecError(str(exc)) from None
