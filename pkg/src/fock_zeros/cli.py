"""``fock-zeros`` command line.

Exit codes: 0 success, 1 negative verdict, 2 usage or parse error,
3 internal verification failure.
"""

from __future__ import annotations

import argparse
import json
import math
import re
import sys
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .canonical import CanonicalFunction
from .fock import QuadratureSpec, Verdict, norm_estimate, sup_norm, weighted_log_mag
from .funcspec import SpecError, parse_complex, parse_function
from .lattice import FockParams, LatticeIndex, SquareLattice
from .logspace import relative_difference, weighted_mag
from .sigma import SelfTestError, SigmaEvaluator
from .zeroseq import (NotMaximal, VerificationFailed, ZeroSequence, add_points, dim_iz,
                      maximality_certificate, verify_basis)

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_VERIFY = 0, 1, 2, 3

DEFAULT_TOLERANCES = {
    "periodicity": 1e-8,
    "oracle": 1e-8,
    "residual": 1e-10,
    "exponent_margin": 0.3,
    "truncation": 1e-10,
}
MAX_RESOLUTION = 8192


class UsageError(ValueError):
    pass


def parse_real(text: str) -> float:
    """Float, ``inf``, or a multiple/fraction of ``pi`` such as ``2pi`` or ``pi/2``."""
    t = text.strip().lower().replace(" ", "")
    if t in ("inf", "infinity"):
        return math.inf
    m = re.fullmatch(r"([0-9.eE+\-]*)\*?pi(?:/([0-9.eE+\-]+))?", t)
    try:
        if m:
            coef = m.group(1)
            c = 1.0 if coef in ("", "+") else -1.0 if coef == "-" else float(coef)
            return c * math.pi / (float(m.group(2)) if m.group(2) else 1.0)
        return float(t)
    except ValueError:
        raise UsageError(f"not a number: {text!r}") from None


def _positive(text: str) -> float:
    v = parse_real(text)
    if not v > 0:
        raise argparse.ArgumentTypeError(f"must be positive: {text!r}")
    return v


def _positive_int(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if v <= 0:
        raise argparse.ArgumentTypeError(f"must be a positive integer: {text!r}")
    return v


def _index(text: str) -> LatticeIndex:
    m = re.fullmatch(r"\(?\s*(-?\d+)\s*,\s*(-?\d+)\s*\)?", text.strip())
    if not m:
        raise argparse.ArgumentTypeError(f"lattice index must be 'm,n': {text!r}")
    return LatticeIndex(int(m.group(1)), int(m.group(2)))


def _added(text: str) -> tuple[complex, int]:
    pt, _, mult = text.partition(":")
    try:
        z = parse_complex(pt)
        k = int(mult) if mult else 1
    except (SpecError, ValueError):
        raise argparse.ArgumentTypeError(f"added point must be 'z[:multiplicity]': {text!r}") from None
    if k < 1:
        raise argparse.ArgumentTypeError("multiplicity must be positive")
    return z, k


def _complex_arg(text: str) -> complex:
    try:
        return parse_complex(text)
    except SpecError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


@dataclass
class RunConfig:
    alpha: float = math.pi
    p: float = 2.0
    truncation_ring: int | None = None
    quad_order: int = 24
    max_ring: int = 24
    fit_window: int = 8
    seed: int = 0
    output_path: str | None = None
    tolerances: dict = field(default_factory=lambda: dict(DEFAULT_TOLERANCES))

    def __post_init__(self):
        if not self.alpha > 0 or not self.p > 0:
            raise UsageError("alpha and p must be positive")
        for k in (self.quad_order, self.max_ring, self.fit_window):
            if k <= 0:
                raise UsageError("numeric settings must be positive")
        unknown = set(self.tolerances) - set(DEFAULT_TOLERANCES)
        if unknown:
            raise UsageError(f"unknown tolerance name(s): {', '.join(sorted(unknown))}")
        if any(not v > 0 for v in self.tolerances.values()):
            raise UsageError("tolerances must be positive")
        if not 0 <= self.seed < 2**64:
            raise UsageError("seed must be a 64-bit unsigned integer")

    @property
    def params(self) -> FockParams:
        return FockParams(self.alpha, self.p)

    @property
    def quad(self) -> QuadratureSpec:
        return QuadratureSpec(self.quad_order, self.max_ring, self.fit_window)

    def sigma(self, **kwargs) -> SigmaEvaluator:
        return SigmaEvaluator(SquareLattice(self.alpha), self.truncation_ring,
                              tol=self.tolerances["truncation"], **kwargs)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["p"] = "inf" if math.isinf(self.p) else self.p
        d["truncation_ring"] = "auto" if self.truncation_ring is None else self.truncation_ring
        return d


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (complex, np.complexfloating)):
        return [_jsonable(float(obj.real)), _jsonable(float(obj.imag))]
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return x
    return obj


def dumps(report: dict) -> str:
    return json.dumps(_jsonable(report), indent=2, ensure_ascii=False) + "\n"


def _emit(report: dict, path: str | None):
    text = dumps(report)
    if path:
        try:
            Path(path).write_text(text, encoding="utf-8")
        except OSError as exc:
            raise UsageError(f"cannot write {path}: {exc}") from None
    else:
        sys.stdout.write(text)


def _route_dict(v, z, alpha):
    return {"logmag": v.logmag, "arg": v.arg, "weighted": weighted_mag(v, z, alpha)}


def cmd_sigma(cfg: RunConfig, args) -> int:
    z = args.z
    ev = cfg.sigma()
    routes = {"product": ev.eval_product(z), "reduced": ev.eval_reduced(z), "theta": ev.eval_theta(z)}
    names = list(routes)
    diffs = {f"{a}-{b}": relative_difference(routes[a], routes[b])
             for i, a in enumerate(names) for b in names[i + 1:]}
    tol = cfg.tolerances["oracle"]
    report = {
        "command": "sigma",
        "config": cfg.to_dict(),
        "z": z,
        "routes": {k: _route_dict(v, z, cfg.alpha) for k, v in routes.items()},
        "relative_differences": diffs,
        "agree": all(d < tol for d in diffs.values()),
    }
    _emit(report, cfg.output_path)
    return EXIT_OK


def cmd_periodicity(cfg: RunConfig, args) -> int:
    if args.corrupt_eta != 1.0:
        ev = cfg.sigma(eta_scale=args.corrupt_eta, self_test=False)
    else:
        ev = cfg.sigma()
    w = ev.omega1
    rng = np.random.default_rng(cfg.seed)
    n = args.samples
    radius = 6.0 * w * np.sqrt(rng.uniform(0, 1, n))
    z = radius * np.exp(2j * np.pi * rng.uniform(0, 1, n))
    evaluate = ev.eval_reduced if args.route == "reduced" else lambda x: ev.eval_product(x, auto=True)
    tol = cfg.tolerances["periodicity"]
    devs = {}
    if n:
        base = weighted_mag(evaluate(z), z, cfg.alpha)
        for name, period in (("omega1", w), ("i_omega1", 1j * w)):
            zz = z + period
            devs[name] = float(np.max(np.abs(weighted_mag(evaluate(zz), zz, cfg.alpha) - base)))
    passed = all(d < tol for d in devs.values())
    report = {
        "command": "periodicity",
        "config": cfg.to_dict(),
        "samples": n,
        "route": args.route,
        "eta_scale": args.corrupt_eta,
        "max_deviation": devs,
        "tolerance": tol,
        "passed": passed,
    }
    if n == 0:
        report["warning"] = "no samples drawn; pass is vacuous"
        print("warning: no samples drawn; pass is vacuous", file=sys.stderr)
    _emit(report, cfg.output_path)
    return EXIT_OK if passed else EXIT_FAIL


def _parse_f(cfg: RunConfig, text: str) -> CanonicalFunction:
    return parse_function(text, cfg.sigma())


def cmd_norm(cfg: RunConfig, args) -> int:
    f = _parse_f(cfg, args.f)
    params = cfg.params
    report = {"command": "norm", "config": cfg.to_dict(), "function": f.describe()}
    if params.is_sup:
        est = sup_norm(f, params, cfg.max_ring)
        report["sup"] = est.to_dict()
        code = EXIT_FAIL if est.unbounded else EXIT_OK
    else:
        est = norm_estimate(f, params, cfg.quad, cfg.tolerances["exponent_margin"])
        report["estimate"] = est.to_dict()
        code = EXIT_FAIL if est.verdict is Verdict.DIVERGENT else EXIT_OK
        if args.figure:
            from .plotting import ring_contrib_figure
            ring_contrib_figure(est.log_ring_contribs, est.fitted_exponent, cfg.fit_window,
                                args.figure, f"{f.describe()}  p={cfg.p:g}")
            report["figure"] = args.figure
    _emit(report, cfg.output_path)
    return code


def _sequence(cfg: RunConfig, args) -> ZeroSequence:
    removed = list(args.remove or [])
    if len(set(removed)) != len(removed):
        raise UsageError("removed lattice points must be distinct")
    seq = ZeroSequence(SquareLattice(cfg.alpha), frozenset(removed))
    return add_points(seq, args.add or [])


def cmd_dim(cfg: RunConfig, args) -> int:
    seq = _sequence(cfg, args)
    rep = dim_iz(seq, cfg.params, cfg.sigma())
    report = {"command": "dim", "config": cfg.to_dict(), "sequence": seq.to_dict(), "dimension": rep.to_dict()}
    code = EXIT_OK
    margin = cfg.tolerances["exponent_margin"]
    if rep.k >= 1:
        rec = verify_basis(rep, cfg.quad, cfg.seed, raise_on_failure=False, margin=margin)
        report["verification"] = rec.to_dict()
        if not rec.passed:
            code = EXIT_FAIL
        elif rep.k == 1:
            cert = maximality_certificate(seq, cfg.params, cfg.quad, cfg.seed, margin=margin)
            report["certificate"] = cert.to_dict()
    _emit(report, cfg.output_path)
    return code


def cmd_certify(cfg: RunConfig, args) -> int:
    seq = _sequence(cfg, args)
    report = {"command": "certify", "config": cfg.to_dict(), "sequence": seq.to_dict()}
    try:
        cert = maximality_certificate(seq, cfg.params, cfg.quad, cfg.seed,
                                      margin=cfg.tolerances["exponent_margin"])
    except NotMaximal as exc:
        report.update({"maximal": False, "k": exc.k, "reason": "NotMaximal"})
        code = EXIT_FAIL
    except VerificationFailed as exc:
        report.update({"maximal": False, "reason": "VerificationFailed", "clause": exc.clause,
                       "verification": exc.record.to_dict()})
        code = EXIT_VERIFY
    else:
        report.update(cert.to_dict())
        code = EXIT_OK if cert.maximal else EXIT_VERIFY
    _emit(report, cfg.output_path)
    return code


def _region(text: str | None, omega: float) -> tuple[complex, complex]:
    if not text:
        return complex(-2 * omega, -2 * omega), complex(2 * omega, 2 * omega)
    parts = text.split(",")
    if len(parts) != 2:
        raise UsageError("region must be 'z1,z2'")
    try:
        a, b = (parse_complex(p) for p in parts)
    except SpecError as exc:
        raise UsageError(str(exc)) from None
    if a.real == b.real or a.imag == b.imag:
        raise UsageError("region corners must differ in both coordinates")
    return a, b


def heatmap_grid(f, alpha: float, a: complex, b: complex, resolution: int):
    """Weighted log-modulus on a ``resolution`` x ``resolution`` grid.

    ``grid[i, j]`` sits at ``x[j] + i y[i]``; both axes ascend.
    """
    x = np.linspace(min(a.real, b.real), max(a.real, b.real), resolution)
    y = np.linspace(min(a.imag, b.imag), max(a.imag, b.imag), resolution)
    z = x[None, :] + 1j * y[:, None]
    return x, y, weighted_log_mag(f, z.ravel(), alpha).reshape(z.shape)


def _fmt(v: float) -> str:
    if np.isneginf(v):
        return "-inf"
    return repr(float(v))


def write_csv(path, grid, x, y, meta: dict):
    header = ",".join(f"{k}={v}" for k, v in meta.items())
    lines = [header]
    lines += [",".join(_fmt(v) for v in row) for row in grid]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def write_pgm(path, grid, low: float = -20.0):
    """8-bit P5 image; top row is the largest imaginary part."""
    finite = grid[np.isfinite(grid)]
    high = float(finite.max()) if finite.size else 0.0
    clipped = np.clip(np.where(np.isneginf(grid), low, grid), low, high)
    span = high - low if high > low else 1.0
    img = np.round(255.0 * (clipped - low) / span).astype(np.uint8)[::-1]
    h, w = img.shape
    Path(path).write_bytes(f"P5\n{w} {h}\n255\n".encode("ascii") + img.tobytes())


def cmd_heatmap(cfg: RunConfig, args) -> int:
    if not 1 <= args.resolution <= MAX_RESOLUTION:
        raise UsageError(f"resolution must be in 1..{MAX_RESOLUTION}")
    if not cfg.output_path:
        raise UsageError("heatmap needs --out for the CSV grid")
    f = _parse_f(cfg, args.f)
    omega = SquareLattice(cfg.alpha).omega1
    a, b = _region(args.region, omega)
    x, y, grid = heatmap_grid(f, cfg.alpha, a, b, args.resolution)
    meta = {"function": f.describe().replace(",", ";"), "alpha": repr(cfg.alpha),
            "x_min": repr(float(x[0])), "x_max": repr(float(x[-1])),
            "y_min": repr(float(y[0])), "y_max": repr(float(y[-1])),
            "resolution": args.resolution, "rows": "imag ascending", "cols": "real ascending"}
    try:
        write_csv(cfg.output_path, grid, x, y, meta)
        if args.pgm:
            write_pgm(args.pgm, grid)
        if args.figure:
            from .plotting import heatmap_figure
            heatmap_figure(grid, (x[0], x[-1], y[0], y[-1]), args.figure, f.describe())
    except OSError as exc:
        raise UsageError(f"cannot write output: {exc}") from None
    finite = grid[np.isfinite(grid)]
    report = {"command": "heatmap", "config": cfg.to_dict(), "function": f.describe(),
              "csv": cfg.output_path, "pgm": args.pgm, "figure": args.figure,
              "max_weighted": float(finite.max()) if finite.size else -math.inf}
    sys.stdout.write(dumps(report))
    return EXIT_OK


def _tolerance(text: str) -> tuple[str, float]:
    name, eq, val = text.partition("=")
    if not eq:
        raise argparse.ArgumentTypeError(f"tolerance must be name=value: {text!r}")
    try:
        return name.strip(), float(val)
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad tolerance value: {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--alpha", type=_positive, default=math.pi, help="weight parameter (accepts 'pi', '2pi', 'pi/2')")
    common.add_argument("--p", type=_positive, default=2.0, help="norm exponent or 'inf'")
    common.add_argument("--trunc-ring", default="auto", help="product truncation ring or 'auto'")
    common.add_argument("--quad-order", type=_positive_int, default=24)
    common.add_argument("--max-ring", type=_positive_int, default=24)
    common.add_argument("--fit-window", type=_positive_int, default=8)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--out", default=None, help="output file (JSON report; CSV for heatmap)")
    common.add_argument("--tol", action="append", type=_tolerance, default=[], metavar="NAME=VALUE")

    parser = argparse.ArgumentParser(prog="fock-zeros", description="Zero sequences of Fock spaces on square lattices.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sigma", parents=[common], help="evaluate sigma by all three routes")
    p.add_argument("--z", type=_complex_arg, required=True)

    p = sub.add_parser("periodicity", parents=[common], help="check periodicity of the weighted modulus")
    p.add_argument("--samples", type=int, default=100)
    p.add_argument("--route", choices=("reduced", "product"), default="reduced")
    p.add_argument("--corrupt-eta", type=float, default=1.0, help=argparse.SUPPRESS)

    p = sub.add_parser("norm", parents=[common], help="estimate a weighted norm")
    p.add_argument("--f", required=True, help="function, e.g. 'sigma / (z - w(0,0))'")
    p.add_argument("--figure", default=None, help="write a ring-contribution plot here")

    for name, text in (("dim", "dimension of I_Z with evidence"), ("certify", "maximality certificate")):
        p = sub.add_parser(name, parents=[common], help=text)
        p.add_argument("--remove", action="append", type=_index, metavar="M,N")
        p.add_argument("--add", action="append", type=_added, metavar="Z[:MULT]")

    p = sub.add_parser("heatmap", parents=[common], help="weighted log-modulus on a grid")
    p.add_argument("--f", default="sigma")
    p.add_argument("--region", default=None, help="two corners 'z1,z2'; default +-2 omega1")
    p.add_argument("--resolution", type=int, default=201)
    p.add_argument("--pgm", default=None)
    p.add_argument("--figure", default=None)
    return parser


COMMANDS = {
    "sigma": cmd_sigma,
    "periodicity": cmd_periodicity,
    "norm": cmd_norm,
    "dim": cmd_dim,
    "certify": cmd_certify,
    "heatmap": cmd_heatmap,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        trunc = None if args.trunc_ring == "auto" else int(args.trunc_ring)
        if trunc is not None and trunc <= 0:
            raise UsageError("--trunc-ring must be positive")
        tols = dict(DEFAULT_TOLERANCES)
        unknown = [n for n, _ in args.tol if n not in DEFAULT_TOLERANCES]
        if unknown:
            raise UsageError(f"unknown tolerance name(s): {', '.join(unknown)}")
        tols.update(dict(args.tol))
        cfg = RunConfig(args.alpha, args.p, trunc, args.quad_order, args.max_ring, args.fit_window,
                        args.seed, args.out, tols)
        cfg.quad  # validates ring/window combination
        return COMMANDS[args.command](cfg, args)
    except ValueError as exc:
        # usage errors, grammar errors and a fixed truncation ring too small for the request
        print(f"fock-zeros: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SelfTestError as exc:
        print(f"fock-zeros: error: {exc}", file=sys.stderr)
        return EXIT_VERIFY

if __name__ == "__main__":
    sys.exit(main())
