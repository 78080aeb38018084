"""Numerical laboratory for integral means, arc amalgams, mixed-norm spaces
of analytic functions on the disc and analytic paraproducts."""

from mnlab.means import ArcMeanVector, HLReport, arc_means, hl_report, integral_mean, lq_norm
from mnlab.mixed_norm import ExponentProfile, apq_norm, hp_norm, littlewood_paley_norm
from mnlab.paraproducts import apply_paraproduct, degeneracy_check, operator_norm_lower_bound, rho
from mnlab.sequences import DoubleIndexSeq, conjugate, lpq_norm
from mnlab.series import AtomSpec, PowerSeries, SignPattern, atom_function, lacunary_series
from mnlab.weights import LogPowerWeight, StandardWeight, TabulatedWeight, audit_weight

__version__ = "0.1.0"

__all__ = [
    "ArcMeanVector", "HLReport", "arc_means", "hl_report", "integral_mean", "lq_norm",
    "ExponentProfile", "apq_norm", "hp_norm", "littlewood_paley_norm",
    "apply_paraproduct", "degeneracy_check", "operator_norm_lower_bound", "rho",
    "DoubleIndexSeq", "conjugate", "lpq_norm",
    "AtomSpec", "PowerSeries", "SignPattern", "atom_function", "lacunary_series",
    "LogPowerWeight", "StandardWeight", "TabulatedWeight", "audit_weight",
]
