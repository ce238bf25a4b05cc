"""Exact Schur/tau-function identities and numerical sigma functions of hyperelliptic curves."""
from .partitions import GapProfile, Partition, hyperelliptic_gaps, hyperelliptic_strata, mk
from .schur import schur
from .curves import HyperellipticCurve, period_matrices
from .theta import ThetaEvaluator
from .sigma import SigmaContext, build_context, sigma

__all__ = [
    "GapProfile",
    "HyperellipticCurve",
    "Partition",
    "SigmaContext",
    "ThetaEvaluator",
    "build_context",
    "hyperelliptic_gaps",
    "hyperelliptic_strata",
    "mk",
    "period_matrices",
    "schur",
    "sigma",
]

__version__ = "0.1.0"
