"""Sharp isoperimetric profiles for one-dimensional MCP(K,N) densities."""

from .density import (
    ModelDensity,
    TabulatedDensity,
    ValidationReport,
    f_lower,
    random_mcp_density,
    sup_bound,
    validate_cd,
    validate_mcp,
)
from .kernel import CurvatureParams, Tolerance, integrate, invert_monotone, s_kappa, sigma_coeff, tau_coeff
from .oracle import IntervalSet, OracleReport, min_perimeter_bruteforce, perimeter, rigidity_probe, verify_sharpness, volume
from .profile import A_fun, ProfilePoint, ProfileTable, a_of_volume, profile_restricted, profile_sharp, profile_table, volume_of_a

__version__ = "0.1.0"
