"""Global numerical tolerances and dimension caps.

Values are read at call time, so assigning e.g. ``config.PSD_TOL = 1e-9``
changes behaviour for every subsequent call.
"""
import os

#: Eigenvalues above ``-PSD_TOL`` count as non-negative for density matrices.
PSD_TOL = 1e-10

#: Choi eigenvalues above ``-CP_TOL`` count as non-negative.
CP_TOL = 1e-8

#: Largest state dimension (d**k for k-copy states) accepted by simulators.
STATE_DIM_CAP = 2048

#: Largest Choi matrix dimension (d**2). Overridden by ``QDECAY_DIM_CAP``.
CHOI_DIM_CAP = int(os.environ.get("QDECAY_DIM_CAP", 4096))

#: Largest number of copies for exact twirl projectors (k! Schur-Weyl terms).
K_CAP = 4


class CapacityError(ValueError):
    """Raised when a requested object exceeds a configured dimension cap."""
