"""Zero sequences, weighted norms and the Weierstrass sigma function for Fock spaces."""

__version__ = "0.1.0"

from .lattice import INFINITY, Cell, FockParams, LatticeIndex, SquareLattice  # noqa: E402
from .logspace import LogComplex, relative_difference, weighted_mag  # noqa: E402
from .sigma import SelfTestError, SigmaEvaluator, TruncationTooSmall  # noqa: E402
from .canonical import CanonicalFunction, sigma_function  # noqa: E402
from .fock import (NormEstimate, QuadratureSpec, SupEstimate, Verdict, cell_integral,  # noqa: E402
                   embedding_demo, norm_estimate, pointwise_estimate_check, sup_norm)
from .zeroseq import (Classification, DimensionReport, ZeroSequence, add_points, dim_iz,  # noqa: E402
                      maximality_certificate, smallest_n, uniqueness_after_adding,
                      vanishing_witness, verify_basis)

__all__ = [
    "INFINITY", "Cell", "FockParams", "LatticeIndex", "SquareLattice",
    "LogComplex", "relative_difference", "weighted_mag",
    "SelfTestError", "SigmaEvaluator", "TruncationTooSmall",
    "CanonicalFunction", "sigma_function",
    "NormEstimate", "QuadratureSpec", "SupEstimate", "Verdict", "cell_integral",
    "embedding_demo", "norm_estimate", "pointwise_estimate_check", "sup_norm",
    "Classification", "DimensionReport", "ZeroSequence", "add_points", "dim_iz",
    "maximality_certificate", "smallest_n", "uniqueness_after_adding",
    "vanishing_witness", "verify_basis",
]
