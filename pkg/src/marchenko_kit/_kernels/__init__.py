"""Hot propagation kernels: compiled core with a pure-numpy fallback.

The three entry points are Numerov lattice propagators; everything else in
the package is BLAS/LAPACK-bound and gains nothing from compilation.  The
compiled extension is selected at import when present; set
MARCHENKO_KIT_PURE=1 to force the fallback (used by the benchmark and for
debugging).

    propagate_complex(v, h, k2, u0, u1)   -> complex field (nx, nk)
    propagate_real(v, h, kappa, from_left) -> real field (nx, nk), renormalized
    shoot_wronskian(v, h, kappa)          -> scaled two-sided Wronskian (nk,)
"""

import os

if os.environ.get("MARCHENKO_KIT_PURE", "") == "1":
    from ._fallback import propagate_complex, propagate_real, shoot_wronskian

    BACKEND = "python"
else:
    try:
        from ._core import propagate_complex, propagate_real, shoot_wronskian

        BACKEND = "compiled"
    except ImportError:
        from ._fallback import propagate_complex, propagate_real, shoot_wronskian

        BACKEND = "python"

__all__ = ["BACKEND", "propagate_complex", "propagate_real", "shoot_wronskian"]
