"""SINR of a displaced user under a frozen precoder.

Four evaluators of increasing approximation:

* :func:`sinr_exact` - direct evaluation of the displaced channel, either
  with spherical LOS waves or with the local plane-wave model;
* :func:`sinr_multipole` - truncated Bessel/Legendre series of the
  plane-wave channel, zero-forcing only;
* :func:`sinr_small_displacement` - leading (kr)^2 term of the series;
* :func:`sinr_lorentzian` - orthogonal-channel, LOS-only closed form, with
  :func:`coherent_radius` its threshold-crossing radius.
"""
import math
import warnings
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .channel import PathSet, Scenario, build_paths, channel_matrix
from .precoding import ZERO_FORCING, Precoder, zero_forcing
from .special import MAX_ORDER, legendre_p_upto, spherical_bessel_j_upto

SPHERICAL = "spherical"
PLANEWAVE = "planewave"
MODES = (SPHERICAL, PLANEWAVE)

ORDER_MARGIN = 30
DEGENERATE_COS_TOL = 1e-12


class TruncationWarning(UserWarning):
    """Requested multipole order exceeds the supported cap."""


@dataclass(frozen=True, eq=False)
class Downlink:
    """Paths, precoder and noise power: everything a SINR evaluator needs.

    ``scenario`` is optional; without it only the plane-wave mode is
    available (synthetic channels built directly from a :class:`PathSet`).
    """

    paths: PathSet
    precoder: Precoder
    noise_power: float
    scenario: Scenario | None = None

    @classmethod
    def from_scenario(cls, scenario, precoder=None, paths=None):
        if paths is None:
            paths = build_paths(scenario)
        if precoder is None:
            precoder = zero_forcing(channel_matrix(scenario, paths))
        return cls(paths, precoder, float(scenario.noise_power), scenario)

    @classmethod
    def synthetic(cls, paths, noise_power, precoder=None):
        if precoder is None:
            precoder = zero_forcing(paths.nominal())
        return cls(paths, precoder, float(noise_power), None)

    @property
    def users(self):
        return self.paths.origins

    @property
    def n_users(self):
        return self.paths.n_users

    @property
    def wavelength(self):
        return self.paths.wavelength

    @property
    def wavenumber(self):
        return self.paths.wavenumber

    def snr(self, u=None):
        """SNR_u = |<h_u, w_u>|^2 / N_o (all users when ``u`` is None)."""
        g = np.abs(np.einsum("un,nu->u", self.precoder.channel, self.precoder.weights)) ** 2
        g = g / self.noise_power
        return g if u is None else float(g[u])

    def _kernel_args(self, mode):
        if mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}, got {mode!r}")
        p = self.paths
        N = p.n_antennas
        W = np.ascontiguousarray(self.precoder.weights, dtype=np.complex128)
        if mode == SPHERICAL:
            if self.scenario is None:
                raise ValueError("spherical mode needs a scenario with antenna geometry")
            prop = self.scenario.propagation
            first = 1 if p.has_los else 0
            return (np.ascontiguousarray(self.scenario.antennas),
                    prop.los_weight * 10.0 ** (-prop.pathloss_reference_db / 20.0),
                    prop.pathloss_exponent / 2.0, p.wavenumber, True,
                    np.ascontiguousarray(p.directions[:, :, first:]),
                    np.ascontiguousarray(p.amplitudes[:, :, first:]),
                    np.ascontiguousarray(p.origins), W, self.noise_power)
        return (np.zeros((N, 3)), 0.0, 0.0, p.wavenumber, False,
                np.ascontiguousarray(p.directions), np.ascontiguousarray(p.amplitudes),
                np.ascontiguousarray(p.origins), W, self.noise_power)

    def sinr_at(self, points, users=None, mode=SPHERICAL):
        """SINR of each selected user at absolute ``points`` (..., 3) -> (E, ...)."""
        points = np.asarray(points, dtype=float)
        if points.shape[-1:] != (3,):
            raise ValueError(f"points must have a trailing dimension of 3, got shape {points.shape}")
        lead = points.shape[:-1]
        points = np.ascontiguousarray(points.reshape(-1, 3))
        if users is None:
            users = np.arange(self.n_users)
        users = np.atleast_1d(np.asarray(users, dtype=np.int64))
        (antennas, amp0, half_alpha, k, spherical, dirs, amps, origins, W, noise) = self._kernel_args(mode)
        out = _kernels.sinr_points(points, users, antennas, amp0, half_alpha, k, spherical,
                                   dirs, amps, origins, W, noise)
        return out.reshape((len(users),) + lead)


def sinr_exact(link, u, displacement, mode=SPHERICAL):
    """SINR_u at ``r_u + displacement`` by direct channel evaluation.

    ``displacement`` is a 3-vector (returns float) or an (M, 3) array.
    """
    r = np.asarray(displacement, dtype=float)
    single = r.ndim == 1
    points = link.users[u] + np.atleast_2d(r)
    out = link.sinr_at(points, [u], mode)[0]
    return float(out[0]) if single else out


def default_order(kr):
    """Truncation order ceil(kr) + 30, capped at the supported maximum."""
    order = int(math.ceil(kr)) + ORDER_MARGIN
    if order > MAX_ORDER:
        warnings.warn(f"kr = {kr:.3g} needs order {order}; truncating at {MAX_ORDER}", TruncationWarning,
                      stacklevel=3)
        order = MAX_ORDER
    return order


def _split(displacement):
    r_vec = np.asarray(displacement, dtype=float)
    r = float(np.linalg.norm(r_vec))
    r_hat = r_vec / r if r > 0 else np.array([0.0, 0.0, 1.0])
    return r, r_hat


@dataclass(frozen=True, eq=False)
class MultipoleCoeffs:
    """Coefficient vectors b^l(r_hat) for l = 0..order, array shape (order+1, N)."""

    user: int
    r_hat: np.ndarray
    b: np.ndarray
    wavenumber: float

    @property
    def order(self):
        return self.b.shape[0] - 1


def multipole_coeffs(paths, u, r_hat, order):
    """b_un^l = sum_p a_p P_l(r_hat . v_p), with b^0 equal to the nominal h_u."""
    if order < 0 or order > MAX_ORDER:
        raise ValueError(f"order must be in [0, {MAX_ORDER}]")
    r_hat = np.asarray(r_hat, dtype=float)
    r_hat = r_hat / np.linalg.norm(r_hat)
    cos_gamma = np.clip(paths.directions[u] @ r_hat, -1.0, 1.0)  # (N, P)
    P = legendre_p_upto(order, cos_gamma)  # (L+1, N, P)
    b = np.einsum("lnp,np->ln", P, paths.amplitudes[u])
    return MultipoleCoeffs(u, r_hat, b, paths.wavenumber)


def _series_weights(kr, order):
    ell = np.arange(order + 1)
    return (1j ** ell) * (2 * ell + 1) * spherical_bessel_j_upto(order, kr)


def channel_multipole(coeffs, r, order=None):
    """Truncated series sum_l i^l (2l+1) j_l(kr) b^l for the displaced channel row."""
    kr = coeffs.wavenumber * float(r)
    if order is None:
        order = coeffs.order
    if order > coeffs.order:
        raise ValueError(f"coefficients only available up to order {coeffs.order}")
    c = _series_weights(kr, order)
    return c @ coeffs.b[:order + 1]


def _require_zf(link):
    if link.precoder.kind != ZERO_FORCING:
        raise ValueError("this SINR form assumes a zero-forcing precoder")


def sinr_multipole(link, u, displacement, order=None):
    """SINR_u from the truncated multipole series (zero-forcing only).

    The order-0 term is dropped from the interference sum, where the
    zero-forcing nulls cancel it exactly.
    """
    _require_zf(link)
    r, r_hat = _split(displacement)
    kr = link.wavenumber * r
    if order is None:
        order = default_order(kr)
    coeffs = multipole_coeffs(link.paths, u, r_hat, order)
    c = _series_weights(kr, order)
    G = coeffs.b @ link.precoder.weights  # (L+1, U): b^l . w_v
    signal = abs(c @ G[:, u]) ** 2
    leak = c[1:] @ G[1:]
    leak = np.delete(leak, u)
    return float(signal / (link.noise_power + np.sum(np.abs(leak) ** 2)))


def sinr_small_displacement(link, u, displacement):
    """Leading-order SINR: interference grows as (kr)^2 |<b^1, w_v>|^2."""
    _require_zf(link)
    r, r_hat = _split(displacement)
    kr = link.wavenumber * r
    coeffs = multipole_coeffs(link.paths, u, r_hat, 1)
    G = coeffs.b[1] @ link.precoder.weights
    signal = abs(link.precoder.channel[u] @ link.precoder.weights[:, u]) ** 2
    leak = np.delete(np.abs(G) ** 2, u)
    return float(signal / (link.noise_power + kr * kr * np.sum(leak)))


def small_displacement_radius(link, u, r_hat, sinr_threshold):
    """Distance along ``r_hat`` where the leading-order SINR meets the threshold.

    Valid for non-orthogonal channels (no Lorentzian assumption). The
    leading-order profile is monotone in r, so the crossing is solved
    directly; returns 0 when the threshold is not below SNR_u and
    ``math.inf`` when no interference builds up along ``r_hat``.
    """
    _require_zf(link)
    coeffs = multipole_coeffs(link.paths, u, r_hat, 1)
    G = coeffs.b[1] @ link.precoder.weights
    leak = float(np.sum(np.delete(np.abs(G) ** 2, u)))
    signal = abs(link.precoder.channel[u] @ link.precoder.weights[:, u]) ** 2
    excess = signal / sinr_threshold - link.noise_power
    if excess <= 0.0:
        return 0.0
    if leak == 0.0:
        return math.inf
    return math.sqrt(excess / leak) / link.wavenumber


@dataclass(frozen=True, eq=False)
class GeometryFractions:
    """Per-antenna power fractions xi_un and LOS direction cosines to r_hat."""

    user: int
    r_hat: np.ndarray
    xi: np.ndarray
    cos_gamma: np.ndarray
    wavenumber: float

    @property
    def spread(self):
        """sum_{s<t} xi_s xi_t (cos_s - cos_t)^2."""
        dc = self.cos_gamma[:, None] - self.cos_gamma[None, :]
        return float(0.5 * np.sum(self.xi[:, None] * self.xi[None, :] * dc * dc))

    @property
    def is_degenerate(self):
        """All direction cosines equal (to 1e-12): the closed-form radius is unbounded."""
        c = self.cos_gamma[self.xi > 0]
        return bool(c.max() - c.min() <= DEGENERATE_COS_TOL)


def geometry_fractions(paths, u, r_hat):
    """Power fractions and LOS cosines for user ``u`` along ``r_hat``."""
    r_hat = np.asarray(r_hat, dtype=float)
    r_hat = r_hat / np.linalg.norm(r_hat)
    h = paths.nominal()[u]
    power = np.abs(h) ** 2
    xi = power / power.sum()
    cos_gamma = np.clip(paths.directions[u, :, 0] @ r_hat, -1.0, 1.0)
    return GeometryFractions(u, r_hat, xi, cos_gamma, paths.wavenumber)


def sinr_lorentzian(r, geometry, snr_u):
    """SNR_u / (1 + (kr)^2 SNR_u spread): orthogonal-channel LOS profile."""
    kr = geometry.wavenumber * np.asarray(r, dtype=float)
    return snr_u / (1.0 + kr * kr * snr_u * geometry.spread)


def coherent_radius(geometry, sinr_threshold, snr_u):
    """Closed-form radius where the Lorentzian profile meets the threshold.

    Returns 0 when the threshold is not below SNR_u and ``math.inf`` when the
    geometry is degenerate (all cosines equal, see
    :attr:`GeometryFractions.is_degenerate`).
    """
    radicand = 1.0 / sinr_threshold - 1.0 / snr_u
    if radicand <= 0.0:
        return 0.0
    if geometry.is_degenerate:
        return math.inf
    return math.sqrt(radicand) / (geometry.wavenumber * math.sqrt(geometry.spread))


def threshold_crossing(profile, threshold, r_max, step, tol):
    """Distance of the first downward crossing of ``threshold`` along rays.

    ``profile(r)`` maps an array of distances of shape (D, K) to SINR values
    of the same shape, one row per ray. Returns ``(radii, found)``; rays that
    stay above threshold out to ``r_max`` report ``r_max`` and
    ``found=False``.
    """
    steps = np.arange(1, int(math.ceil(r_max / step)) + 1) * step
    steps[-1] = min(steps[-1], r_max)
    values = profile(np.broadcast_to(steps, (1, len(steps))))
    D = values.shape[0]
    steps_d = np.broadcast_to(steps, (D, len(steps)))
    below = values < threshold
    found = below.any(axis=1)
    first = np.where(found, below.argmax(axis=1), len(steps) - 1)
    hi = steps_d[np.arange(D), first].copy()
    lo = np.where(first > 0, steps_d[np.arange(D), np.maximum(first - 1, 0)], 0.0)
    radii = np.where(found, 0.0, r_max)
    active = found.copy()
    while active.any() and np.max((hi - lo)[active]) > tol:
        mid = 0.5 * (lo + hi)
        val = profile(mid[:, None])[:, 0]
        go_lo = val < threshold
        hi = np.where(active & go_lo, mid, hi)
        lo = np.where(active & ~go_lo, mid, lo)
    radii = np.where(found, 0.5 * (lo + hi), radii)
    return radii, found
