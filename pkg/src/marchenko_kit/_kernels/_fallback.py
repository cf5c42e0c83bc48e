"""Pure-numpy Numerov propagators (fallback for the compiled core).

The recurrence for u'' = Q(x) u on a uniform lattice is

    a[j+1] u[j+1] = b[j] u[j] - a[j-1] u[j-1],
    a[j] = 1 - (h^2/12) Q[j],   b[j] = 2 + (5 h^2/6) Q[j],

which is fourth-order accurate globally and conserves the discrete
Wronskian a[j] a[j+1] (u[j] v[j+1] - u[j+1] v[j]) exactly.  The batch axis
runs over momenta, so the python-level loop is only over lattice sites.
"""

import numpy as np

_RENORM = 1e200


def propagate_complex(v, h, k2, u0, u1):
    """Propagate u'' = (v - k2) u left to right for a batch of k^2 values.

    Parameters
    ----------
    v : (nx,) real potential samples.
    h : lattice spacing.
    k2 : (nk,) real values of k^2.
    u0, u1 : (nk,) complex initial values at the first two sites.

    Returns
    -------
    (nx, nk) complex field.
    """
    v = np.asarray(v, dtype=float)
    k2 = np.asarray(k2, dtype=float)
    nx, nk = v.size, k2.size
    c1 = h * h / 12.0
    c2 = 5.0 * h * h / 6.0
    u = np.empty((nx, nk), dtype=np.complex128)
    u[0] = u0
    u[1] = u1
    q_prev = v[0] - k2
    q_curr = v[1] - k2
    a_prev = 1.0 - c1 * q_prev
    b_curr = 2.0 + c2 * q_curr
    for j in range(1, nx - 1):
        q_next = v[j + 1] - k2
        a_next = 1.0 - c1 * q_next
        u[j + 1] = (b_curr * u[j] - a_prev * u[j - 1]) / a_next
        a_prev = 1.0 - c1 * q_curr
        b_curr = 2.0 + c2 * q_next
        q_curr = q_next
    return u


def propagate_real(v, h, kappa, from_left=True):
    """Propagate u'' = (v + kappa^2) u from one decayed end for a batch of kappa.

    The growing (stable) direction is integrated: from the left the solution
    behaves like e^{+kappa x}, from the right like e^{-kappa x}.  The first
    two values use the discrete dispersion of the free lattice so the tail is
    an exact lattice exponential.  Columns are renormalized (positive scale)
    whenever they exceed 1e200; only the shape is meaningful.
    """
    v = np.asarray(v, dtype=float)
    kappa = np.asarray(kappa, dtype=float)
    nx, nk = v.size, kappa.size
    th = _lattice_growth(kappa, h)
    u = np.empty((nx, nk), dtype=float)
    c1 = h * h / 12.0
    c2 = 5.0 * h * h / 6.0
    if from_left:
        order = range(1, nx - 1)
        u[0] = 1.0
        u[1] = np.exp(th)
        step = 1
    else:
        order = range(nx - 2, 0, -1)
        u[-1] = 1.0
        u[-2] = np.exp(th)
        step = -1
    for j in order:
        q_prev = v[j - step] + kappa**2
        q_curr = v[j] + kappa**2
        q_next = v[j + step] + kappa**2
        u[j + step] = ((2.0 + c2 * q_curr) * u[j] - (1.0 - c1 * q_prev) * u[j - step]) / (
            1.0 - c1 * q_next
        )
        big = np.abs(u[j + step]) > _RENORM
        if big.any():
            if from_left:
                u[: j + 2, big] /= np.abs(u[j + step][big])
            else:
                u[j + step:, big] /= np.abs(u[j + step][big])
    return u


def shoot_wronskian(v, h, kappa):
    """Scaled discrete Wronskian of the two one-sided decaying solutions.

    Zero crossings in kappa locate bound states E = -kappa^2.  Both solutions
    are propagated with rolling renormalization, and the Wronskian at the
    midpoint is divided by the local solution magnitudes, so only its sign
    and zeros are meaningful.
    """
    v = np.asarray(v, dtype=float)
    kappa = np.asarray(kappa, dtype=float)
    nx = v.size
    mid = nx // 2
    c1 = h * h / 12.0
    c2 = 5.0 * h * h / 6.0
    th = _lattice_growth(kappa, h)

    def sweep(start, stop, step):
        prev = np.ones(kappa.size)
        curr = np.exp(th)
        for j in range(start, stop, step):
            q_prev = v[j - step] + kappa**2
            q_curr = v[j] + kappa**2
            q_next = v[j + step] + kappa**2
            nxt = ((2.0 + c2 * q_curr) * curr - (1.0 - c1 * q_prev) * prev) / (1.0 - c1 * q_next)
            prev, curr = curr, nxt
            big = np.abs(curr) > _RENORM
            if big.any():
                scale = np.abs(curr[big])
                curr[big] /= scale
                prev[big] /= scale
        return prev, curr

    ul_mid, ul_next = sweep(1, mid + 1, 1)            # values at mid, mid+1
    ur_next, ur_mid = sweep(nx - 2, mid, -1)          # values at mid+1, mid
    q_mid = v[mid] + kappa**2
    q_nxt = v[mid + 1] + kappa**2
    a = (1.0 - c1 * q_mid) * (1.0 - c1 * q_nxt)
    w = a * (ul_mid * ur_next - ul_next * ur_mid)
    scale = np.abs(ul_mid * ur_next) + np.abs(ul_next * ur_mid)
    return w / np.maximum(scale, 1e-300)


def _lattice_growth(kappa, h):
    """Per-step log growth of the free decaying lattice solution."""
    t = (kappa * h) ** 2
    return np.arccosh((1.0 + 5.0 * t / 12.0) / (1.0 - t / 12.0))
