"""Numerical tolerances shared by every validation in the package.

Keep all pass/fail thresholds here so that a verdict can be reproduced by
reading one file.
"""

# DensityMatrix invariants
TOL_HERM = 1e-12
TOL_TRACE = 1e-12
TOL_PSD = 1e-10
TOL_NORM = 1e-12

# eigensolver
TOL_EIG = 1e-10
TOL_HERM_INPUT = 1e-10
JACOBI_OFF_TOL = 1e-14
JACOBI_MAX_SWEEPS = 100
MAX_DIM = 16

# operators
TOL_UNITARY = 1e-12
TOL_BASIS = 1e-10
TOL_COMPLETENESS = 1e-12

# root finding
TOL_ROOT = 1e-12
BISECTION_MAX_ITER = 200

# comparisons between two states produced by different routes
TOL_STATE_MATCH = 1e-12


def as_dict():
    """Return every tolerance as a plain dict (for echoing into reports)."""
    return {k: v for k, v in globals().items() if k.isupper()}
