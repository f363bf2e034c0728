import math

import numpy as np
import pytest

from cohvol import PropagationParams, Scenario

ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)


def random_scenario(rng, n_users, n_antennas, nlos=False, noise_power=1e-12):
    """Users in a ~3 wavelength cluster, antennas spread 20-80 wavelengths away."""
    prop = PropagationParams(rician_k=10.0, cluster_count=2, rays_per_cluster=4,
                             seed=int(rng.integers(1 << 30))) if nlos else PropagationParams()
    lam = prop.wavelength
    users = rng.uniform(-1.5, 1.5, (n_users, 3)) * lam
    antennas = rng.uniform(-50, 50, (n_antennas, 3)) * lam
    antennas[:, 2] = rng.uniform(20, 80, n_antennas) * lam
    return Scenario(antennas, users, prop, noise_power)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def orthogonal_paths(rng, n_users, wavelength=0.15):
    """LOS-only synthetic channels with exactly orthogonal rows (N = U).

    Antenna n is seen by every user from the same direction; amplitudes are
    the rows of a unitary DFT matrix, so the zero-forcing precoder reduces to
    the normalized matched filter.
    """
    from cohvol import PathSet
    N = n_users
    dirs = rng.normal(size=(N, 3))
    dirs[:, 2] = np.abs(dirs[:, 2])
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    u, n = np.meshgrid(np.arange(n_users), np.arange(N), indexing="ij")
    amps = np.exp(-2j * np.pi * u * n / N) / np.sqrt(N)
    directions = np.broadcast_to(dirs, (n_users, N, 3))[:, :, None, :].copy()
    origins = np.arange(n_users)[:, None] * np.array([4 * wavelength, 0.0, 0.0])
    return PathSet(directions, amps[:, :, None], origins, wavelength)


def random_paths(rng, n_users, n_antennas, n_paths, wavelength=0.15):
    """Generic multipath plane-wave channels with random complex amplitudes."""
    from cohvol import PathSet
    dirs = rng.normal(size=(n_users, n_antennas, n_paths, 3))
    dirs /= np.linalg.norm(dirs, axis=-1, keepdims=True)
    amps = (rng.normal(size=dirs.shape[:3]) + 1j * rng.normal(size=dirs.shape[:3])) / np.sqrt(2 * n_paths)
    origins = rng.uniform(-2, 2, (n_users, 3)) * wavelength
    return PathSet(dirs, amps, origins, wavelength, has_los=False)


def cone_paths(rng, n_users, n_antennas, n_paths, user, r_hat, cos_c, wavelength=0.15):
    """Like :func:`random_paths`, but every path of ``user`` makes angle
    arccos(cos_c) with ``r_hat``."""
    from cohvol import PathSet
    base = random_paths(rng, n_users, n_antennas, n_paths, wavelength)
    r_hat = np.asarray(r_hat, float) / np.linalg.norm(r_hat)
    e1 = np.cross(r_hat, [1.0, 0.0, 0.0] if abs(r_hat[0]) < 0.9 else [0.0, 1.0, 0.0])
    e1 /= np.linalg.norm(e1)
    e2 = np.cross(r_hat, e1)
    phi = rng.uniform(0, 2 * np.pi, (n_antennas, n_paths))
    s = math.sqrt(1.0 - cos_c ** 2)
    cone = (cos_c * r_hat + s * (np.cos(phi)[..., None] * e1 + np.sin(phi)[..., None] * e2))
    cone /= np.linalg.norm(cone, axis=-1, keepdims=True)
    dirs = base.directions.copy()
    dirs[user] = cone
    return PathSet(dirs, base.amplitudes, base.origins, wavelength, has_los=False)
