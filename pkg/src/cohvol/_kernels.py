"""Hot loop: SINR of selected users at many points for a frozen precoder.

Two interchangeable implementations: a numba kernel parallel over points
and a chunked numpy fallback. :func:`sinr_points` dispatches on
``NUMBA_ENABLED``; both are exported so the benchmark can time each one.
"""
import math

import numpy as np

from ._backend import NUMBA_ENABLED, njit, prange

CHUNK = 8192


@njit(parallel=True)
def sinr_points_numba(points, eval_users, antennas, los_amp0, half_alpha, k, spherical,
                      dirs, amps, origins, W, noise):
    M = points.shape[0]
    E = eval_users.shape[0]
    N = W.shape[0]
    U = W.shape[1]
    P = amps.shape[2]
    out = np.empty((E, M))
    for m in prange(M):
        px = points[m, 0]
        py = points[m, 1]
        pz = points[m, 2]
        los = np.zeros(N, dtype=np.complex128)
        h = np.empty(N, dtype=np.complex128)
        if spherical:
            for n in range(N):
                dx = px - antennas[n, 0]
                dy = py - antennas[n, 1]
                dz = pz - antennas[n, 2]
                d = math.sqrt(dx * dx + dy * dy + dz * dz)
                g = los_amp0 * d ** (-half_alpha)
                los[n] = complex(g * math.cos(k * d), -g * math.sin(k * d))
        if P == 0:
            # no per-user paths: one channel row serves every evaluated user
            a2 = np.empty(U)
            for v in range(U):
                t = 0j
                for n in range(N):
                    t += los[n] * W[n, v]
                a2[v] = t.real * t.real + t.imag * t.imag
            for e in range(E):
                u = eval_users[e]
                intf = 0.0
                for v in range(U):
                    if v != u:
                        intf += a2[v]
                out[e, m] = a2[u] / (noise + intf)
            continue
        for e in range(E):
            u = eval_users[e]
            rx = px - origins[u, 0]
            ry = py - origins[u, 1]
            rz = pz - origins[u, 2]
            for n in range(N):
                acc = los[n]
                for p in range(P):
                    ph = k * (dirs[u, n, p, 0] * rx + dirs[u, n, p, 1] * ry + dirs[u, n, p, 2] * rz)
                    acc += amps[u, n, p] * complex(math.cos(ph), math.sin(ph))
                h[n] = acc
            sig = 0.0
            intf = 0.0
            for v in range(U):
                s = 0j
                for n in range(N):
                    s += h[n] * W[n, v]
                a2 = s.real * s.real + s.imag * s.imag
                if v == u:
                    sig = a2
                else:
                    intf += a2
            out[e, m] = sig / (noise + intf)
    return out


def sinr_points_numpy(points, eval_users, antennas, los_amp0, half_alpha, k, spherical,
                      dirs, amps, origins, W, noise):
    M = points.shape[0]
    out = np.empty((len(eval_users), M))
    for start in range(0, M, CHUNK):
        pts = points[start:start + CHUNK]
        if spherical:
            diff = pts[:, None, :] - antennas[None, :, :]
            d = np.sqrt(np.sum(diff * diff, axis=-1))
            g = los_amp0 * d ** (-half_alpha)
            los = g * np.cos(k * d) - 1j * g * np.sin(k * d)
        else:
            los = 0.0
        shared = None
        if amps.shape[2] == 0:
            s = los @ W
            shared = s.real ** 2 + s.imag ** 2
        for e, u in enumerate(eval_users):
            if shared is not None:
                a2 = shared.copy()
            else:
                r = pts - origins[u]
                ph = k * np.einsum("npk,mk->mnp", dirs[u], r)
                h = los + np.sum(amps[u][None] * (np.cos(ph) + 1j * np.sin(ph)), axis=-1)
                s = h @ W
                a2 = s.real ** 2 + s.imag ** 2
            sig = a2[:, u].copy()
            a2[:, u] = 0.0
            intf = a2.sum(axis=1)
            out[e, start:start + CHUNK] = sig / (noise + intf)
    return out


def sinr_points(*args):
    if NUMBA_ENABLED:
        return sinr_points_numba(*args)
    return sinr_points_numpy(*args)
