"""Spherical Bessel functions of the first kind and Legendre polynomials.

Both are evaluated for all orders up to a cap at once, since the multipole
series always needs the full ladder ``0..L``.
"""
import math

import numpy as np

from ._backend import njit

MAX_ORDER = 200

# below this argument the leading-order form is used (avoids 0/0)
SMALL_ARGUMENT = 1e-8

_OVERFLOW = 1e250


@njit
def _sph_jn_ladder(order, rho, out):
    """Fill ``out[0..order]`` with j_l(rho).

    Upward recurrence is used for l <= rho, where it is stable; higher
    orders come from a Miller downward recurrence normalized against the
    closed forms of j_0 / j_1.
    """
    if rho < SMALL_ARGUMENT:
        term = 1.0
        out[0] = 1.0
        for l in range(1, order + 1):
            term *= rho / (2 * l + 1)
            out[l] = term
        return

    s = math.sin(rho)
    c = math.cos(rho)
    j0 = s / rho
    j1 = s / (rho * rho) - c / rho

    n_up = min(order, int(rho))
    out[0] = j0
    if order == 0:
        return
    if n_up >= 1:
        out[1] = j1
        for l in range(1, n_up):
            out[l + 1] = (2 * l + 1) / rho * out[l] - out[l - 1]
    if n_up == order:
        return

    top = max(order, int(rho))
    start = top + 20 + int(math.sqrt(40.0 * (top + 1)))
    work = np.zeros(start + 2)
    work[start] = 1e-30
    for l in range(start, 0, -1):
        work[l - 1] = (2 * l + 1) / rho * work[l] - work[l + 1]
        if abs(work[l - 1]) > _OVERFLOW:
            for m in range(l - 1, start + 1):
                work[m] /= _OVERFLOW
    # normalize on whichever of j_0, j_1 is further from a zero
    if abs(j0) >= abs(j1):
        scale = j0 / work[0]
    else:
        scale = j1 / work[1]
    for l in range(n_up + 1, order + 1):
        out[l] = work[l] * scale


def spherical_bessel_j_upto(order, rho):
    """Return ``[j_0(rho), ..., j_order(rho)]`` as a float array."""
    order = int(order)
    if order < 0 or order > MAX_ORDER:
        raise ValueError(f"order must be in [0, {MAX_ORDER}], got {order}")
    rho = float(rho)
    if not rho >= 0.0 or not math.isfinite(rho):
        raise ValueError(f"argument must be finite and nonnegative, got {rho}")
    out = np.empty(order + 1)
    _sph_jn_ladder(order, rho, out)
    return out


def spherical_bessel_j(order, rho):
    """Spherical Bessel function of the first kind, j_order(rho)."""
    return float(spherical_bessel_j_upto(order, rho)[-1])


def legendre_p_upto(degree, x):
    """Legendre polynomials ``P_0..P_degree`` at ``x`` (array-like).

    Result has shape ``(degree + 1,) + np.shape(x)``. Arguments are clamped
    to [-1, 1] after a 1e-12 tolerance check.
    """
    degree = int(degree)
    if degree < 0 or degree > MAX_ORDER:
        raise ValueError(f"degree must be in [0, {MAX_ORDER}], got {degree}")
    x = np.asarray(x, dtype=float)
    if np.any(np.abs(x) > 1.0 + 1e-12):
        raise ValueError("legendre argument outside [-1, 1]")
    x = np.clip(x, -1.0, 1.0)
    out = np.empty((degree + 1,) + x.shape)
    out[0] = 1.0
    if degree >= 1:
        out[1] = x
    for l in range(1, degree):
        out[l + 1] = ((2 * l + 1) * x * out[l] - l * out[l - 1]) / (l + 1)
    return out


def legendre_p(degree, x):
    """Legendre polynomial of the given degree at scalar ``x``."""
    return float(legendre_p_upto(degree, float(x))[-1])
