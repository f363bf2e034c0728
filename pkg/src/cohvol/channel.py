"""Geometric channel model: antennas, users, propagation paths.

Phase convention
----------------
The line-of-sight coefficient is ``g(d) exp(-i k d)``. Displacing the
receiver by ``r`` along the plane-wave approximation multiplies a path
arriving from direction ``v`` (unit vector pointing from the receiver
towards the source) by ``exp(+i k v . r)``, which is the first-order
expansion of the spherical phase. Path amplitudes are referenced to the
nominal user position, so the displaced channel at ``r = 0`` is simply the
sum of the amplitudes.
"""
import math
from dataclasses import dataclass, field, replace
from typing import NamedTuple

import numpy as np

SPEED_OF_LIGHT = 299_792_458.0
REFERENCE_DISTANCE = 1.0  # meters


class DegenerateGeometryError(ValueError):
    """A receiver coincides with a transmit antenna, or positions repeat."""


@dataclass(frozen=True)
class PropagationParams:
    carrier_frequency: float = 1.9175e9
    rician_k: float = math.inf
    pathloss_reference_db: float = 28.0
    pathloss_exponent: float = 2.2
    shadowing_sigma_db: float = 3.0
    cluster_count: int = 0
    rays_per_cluster: int = 1
    cluster_spread_deg: float = 5.0
    seed: int = 0

    def __post_init__(self):
        if not self.carrier_frequency > 0:
            raise ValueError("carrier_frequency must be positive")
        if not self.rician_k >= 0:
            raise ValueError("rician_k must be nonnegative")
        if self.cluster_count < 0 or self.rays_per_cluster < 1:
            raise ValueError("cluster_count >= 0 and rays_per_cluster >= 1 required")

    @property
    def wavelength(self):
        return SPEED_OF_LIGHT / self.carrier_frequency

    @property
    def wavenumber(self):
        return 2.0 * math.pi / self.wavelength

    @property
    def los_weight(self):
        """Amplitude share of the LOS path, sqrt(K/(K+1))."""
        if math.isinf(self.rician_k):
            return 1.0
        return math.sqrt(self.rician_k / (self.rician_k + 1.0))

    @property
    def nlos_weight(self):
        if math.isinf(self.rician_k):
            return 0.0
        return math.sqrt(1.0 / (self.rician_k + 1.0))

    @property
    def has_nlos(self):
        return self.cluster_count > 0 and not math.isinf(self.rician_k)


def _as_positions(values, name):
    arr = np.array(values, dtype=float, ndmin=2)
    if arr.ndim != 2 or arr.shape[1] != 3:
        raise ValueError(f"{name} must be an array of 3-vectors")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contain non-finite coordinates")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class Scenario:
    """Immutable world model: N transmit antennas, U users, propagation, noise."""

    antennas: np.ndarray
    users: np.ndarray
    propagation: PropagationParams = field(default_factory=PropagationParams)
    noise_power: float = 1.0

    def __post_init__(self):
        antennas = _as_positions(self.antennas, "antennas")
        users = _as_positions(self.users, "users")
        object.__setattr__(self, "antennas", antennas)
        object.__setattr__(self, "users", users)
        if len(users) < 1:
            raise ValueError("at least one user is required")
        if len(antennas) < len(users):
            raise ValueError(f"N >= U violated: {len(antennas)} antennas for {len(users)} users")
        for name, pts in (("antenna", antennas), ("user", users)):
            if len(np.unique(pts, axis=0)) != len(pts):
                raise DegenerateGeometryError(f"duplicate {name} positions")
        if not self.noise_power > 0:
            raise ValueError("noise_power must be positive")

    @property
    def n_antennas(self):
        return len(self.antennas)

    @property
    def n_users(self):
        return len(self.users)

    @property
    def wavelength(self):
        return self.propagation.wavelength

    @property
    def wavenumber(self):
        return self.propagation.wavenumber

    def with_noise(self, noise_power):
        return replace(self, noise_power=float(noise_power))

    def rescaled(self, factor):
        """Scale all lengths and the wavelength by ``factor``.

        Noise is rescaled by the same pathloss factor as the channel gains,
        so every SINR value is left unchanged.
        """
        prop = replace(self.propagation, carrier_frequency=self.propagation.carrier_frequency / factor)
        noise = self.noise_power * factor ** (-self.propagation.pathloss_exponent)
        return Scenario(self.antennas * factor, self.users * factor, prop, noise)


class PathComponent(NamedTuple):
    direction: np.ndarray
    amplitude: complex


@dataclass(frozen=True, eq=False)
class PathSet:
    """Plane-wave paths for every (user, antenna) pair.

    ``directions`` has shape (U, N, P, 3) and ``amplitudes`` (U, N, P); when
    built from a scenario, path 0 is the LOS path. ``origins`` (U, 3) are the
    positions the amplitudes are referenced to.
    """

    directions: np.ndarray
    amplitudes: np.ndarray
    origins: np.ndarray
    wavelength: float
    has_los: bool = True

    def __post_init__(self):
        d = np.asarray(self.directions, dtype=float)
        a = np.asarray(self.amplitudes, dtype=complex)
        o = np.asarray(self.origins, dtype=float)
        if d.ndim != 4 or d.shape[-1] != 3 or a.shape != d.shape[:3] or o.shape != (d.shape[0], 3):
            raise ValueError("inconsistent path array shapes")
        norms = np.linalg.norm(d, axis=-1)
        if np.any(np.abs(norms - 1.0) > 1e-12):
            raise ValueError("path directions must be unit vectors")
        if not np.all(np.isfinite(a)):
            raise ValueError("path amplitudes must be finite")
        for arr in (d, a, o):
            arr.setflags(write=False)
        object.__setattr__(self, "directions", d)
        object.__setattr__(self, "amplitudes", a)
        object.__setattr__(self, "origins", o)

    @property
    def n_users(self):
        return self.amplitudes.shape[0]

    @property
    def n_antennas(self):
        return self.amplitudes.shape[1]

    @property
    def wavenumber(self):
        return 2.0 * math.pi / self.wavelength

    def components(self, u, n):
        return [PathComponent(self.directions[u, n, p], complex(self.amplitudes[u, n, p]))
                for p in range(self.amplitudes.shape[2])]

    def nominal(self):
        """Channel matrix at the reference positions, shape (U, N)."""
        return self.amplitudes.sum(axis=-1)

    def displaced(self, u, displacement):
        """Plane-wave channel row of user ``u`` at ``origin + displacement``.

        ``displacement`` may be a single 3-vector (result shape (N,)) or an
        (M, 3) array (result shape (M, N)).
        """
        r = np.asarray(displacement, dtype=float)
        phase = self.wavenumber * np.einsum("npk,...k->...np", self.directions[u], r)
        return np.sum(self.amplitudes[u] * np.exp(1j * phase), axis=-1)


def pathloss_gain(distance, params):
    """Amplitude gain of the exponent pathloss model, referenced to 1 m."""
    distance = np.asarray(distance, dtype=float)
    loss_db = params.pathloss_reference_db + 10.0 * params.pathloss_exponent * np.log10(distance / REFERENCE_DISTANCE)
    gain = 10.0 ** (-loss_db / 20.0)
    return float(gain) if gain.ndim == 0 else gain


def _los_coefficient(distance, params):
    return params.los_weight * pathloss_gain(distance, params) * np.exp(-1j * params.wavenumber * distance)


def _unit(v):
    return v / np.linalg.norm(v, axis=-1, keepdims=True)


def _nlos_paths(scenario, gains):
    """Seeded cluster/ray NLOS components, shape (U, N, C*R) and (U, N, C*R, 3)."""
    prop = scenario.propagation
    U, N = gains.shape
    C, R = prop.cluster_count, prop.rays_per_cluster
    rng = np.random.default_rng(prop.seed)

    centers = _unit(rng.standard_normal((U, N, C, 3)))
    shadow_db = rng.normal(0.0, prop.shadowing_sigma_db, size=(U, N, C))
    # Laplacian offsets in two tangent angles; scale gives the stated rms spread
    spread = math.radians(prop.cluster_spread_deg)
    offsets = rng.laplace(0.0, spread / math.sqrt(2.0), size=(U, N, C, R, 2))
    phases = rng.uniform(0.0, 2.0 * math.pi, size=(U, N, C, R))

    helper = np.where(np.abs(centers[..., 2:3]) < 0.9, [0.0, 0.0, 1.0], [1.0, 0.0, 0.0])
    e1 = _unit(np.cross(centers, helper))
    e2 = np.cross(centers, e1)
    dirs = (centers[:, :, :, None, :]
            + offsets[..., 0:1] * e1[:, :, :, None, :]
            + offsets[..., 1:2] * e2[:, :, :, None, :])
    dirs = _unit(dirs).reshape(U, N, C * R, 3)

    power = np.repeat(10.0 ** (shadow_db / 10.0) / R, R, axis=-1)
    amps = np.sqrt(power) * np.exp(1j * phases.reshape(U, N, C * R))
    total = np.sum(np.abs(amps) ** 2, axis=-1, keepdims=True)
    target = (prop.nlos_weight * gains[..., None]) ** 2
    amps = amps * np.sqrt(target / total)
    return dirs, amps


def _distances(scenario):
    diff = scenario.antennas[None, :, :] - scenario.users[:, None, :]
    dist = np.linalg.norm(diff, axis=-1)
    if np.any(dist == 0.0):
        raise DegenerateGeometryError("a user coincides with a transmit antenna")
    return diff, dist


def build_paths(scenario):
    """LOS path plus seeded NLOS cluster rays for every (user, antenna)."""
    prop = scenario.propagation
    diff, dist = _distances(scenario)
    los_dirs = diff / dist[..., None]
    los_amps = _los_coefficient(dist, prop)
    if prop.has_nlos:
        nlos_dirs, nlos_amps = _nlos_paths(scenario, pathloss_gain(dist, prop))
        dirs = np.concatenate([los_dirs[:, :, None, :], nlos_dirs], axis=2)
        amps = np.concatenate([los_amps[:, :, None], nlos_amps], axis=2)
    else:
        dirs = los_dirs[:, :, None, :]
        amps = los_amps[:, :, None]
    return PathSet(dirs, amps, scenario.users.copy(), scenario.wavelength, has_los=True)


def channel_exact_at(scenario, point, n, paths=None, user=None):
    """Spherical-wave coefficient from antenna ``n`` to an arbitrary point.

    The LOS term uses the true distance (amplitude and phase). NLOS rays, if
    ``paths`` and ``user`` are given, are added as plane waves referenced to
    that user's nominal position.
    """
    point = np.asarray(point, dtype=float)
    d = float(np.linalg.norm(point - scenario.antennas[n]))
    if d == 0.0:
        raise DegenerateGeometryError("evaluation point coincides with antenna")
    value = complex(_los_coefficient(d, scenario.propagation))
    if paths is not None and user is not None and paths.amplitudes.shape[2] > 1:
        r = point - paths.origins[user]
        phase = paths.wavenumber * paths.directions[user, n, 1:] @ r
        value += complex(np.sum(paths.amplitudes[user, n, 1:] * np.exp(1j * phase)))
    return value


def channel_planewave_displaced(paths, u, n, displacement):
    """Plane-wave channel coefficient h_un at ``origin_u + displacement``."""
    r = np.asarray(displacement, dtype=float)
    phase = paths.wavenumber * paths.directions[u, n] @ r
    return complex(np.sum(paths.amplitudes[u, n] * np.exp(1j * phase)))


@dataclass(frozen=True, eq=False)
class ChannelMatrix:
    """U x N channel matrix; row u holds h_un for n = 1..N."""

    values: np.ndarray
    scenario: Scenario | None = None

    def __post_init__(self):
        v = np.array(self.values, dtype=complex, ndmin=2)
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def shape(self):
        return self.values.shape

    def singular_values(self):
        return np.linalg.svd(self.values, compute_uv=False)

    def condition(self):
        s = self.singular_values()
        return np.inf if s[-1] == 0 else float(s[0] / s[-1])


def channel_matrix(scenario, paths=None):
    """Nominal channel matrix evaluated at each user's exact position."""
    _, dist = _distances(scenario)
    values = _los_coefficient(dist, scenario.propagation)
    if paths is None and scenario.propagation.has_nlos:
        paths = build_paths(scenario)
    if paths is not None and paths.amplitudes.shape[2] > 1:
        values = values + paths.amplitudes[:, :, 1:].sum(axis=-1)
    return ChannelMatrix(values, scenario)
