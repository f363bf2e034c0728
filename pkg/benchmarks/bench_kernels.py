"""Time the numba SINR kernel against the numpy fallback.

    python benchmarks/bench_kernels.py [--preset fig2] [--spacing 0.0625] [--repeat 3]

Both implementations are run on the same preset field grid (spacing in
wavelengths) and their outputs compared. Run with numba enabled (the
default); with COHVOL_DISABLE_NUMBA=1 the "numba" kernel is plain Python.
"""
import argparse
import time

import numpy as np

from cohvol import preset
from cohvol._backend import NUMBA_ENABLED
from cohvol._kernels import sinr_points_numba, sinr_points_numpy
from cohvol.runner import build_link


def best_of(fn, args, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn(*args)
        times.append(time.perf_counter() - t0)
    return min(times), out


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--preset", default="fig2", choices=["fig2", "fig3", "fig4"])
    ap.add_argument("--spacing", type=float, default=1 / 16, help="grid spacing in wavelengths")
    ap.add_argument("--mode", default="spherical", choices=["spherical", "planewave"])
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)

    cfg = preset(args.preset)
    cfg = cfg.with_grid_spacing(args.spacing * cfg.wavelength)
    link = build_link(cfg)
    points = np.ascontiguousarray(cfg.grid.points())
    users = np.arange(link.n_users, dtype=np.int64)
    kargs = (points, users) + link._kernel_args(args.mode)

    t0 = time.perf_counter()
    sinr_points_numba(*(a[:1] if i == 0 else a for i, a in enumerate(kargs)))
    compile_time = time.perf_counter() - t0

    t_nb, out_nb = best_of(sinr_points_numba, kargs, args.repeat)
    t_np, out_np = best_of(sinr_points_numpy, kargs, args.repeat)
    evals = points.shape[0] * len(users)
    # exact array nulls (SINR ~ 1e-25) hold only rounding residue; compare elsewhere
    keep = out_np > 1e-10
    rel = float(np.max(np.abs(out_nb[keep] / out_np[keep] - 1)))
    print(f"preset {args.preset}, {points.shape[0]} points x {len(users)} users x "
          f"{link.paths.n_antennas} antennas, mode {args.mode}, numba enabled: {NUMBA_ENABLED}")
    print(f"first call (compile or cache load): {compile_time:.2f} s")
    print(f"numba : {t_nb:8.3f} s  ({evals / t_nb / 1e6:6.2f} M evals/s)")
    print(f"numpy : {t_np:8.3f} s  ({evals / t_np / 1e6:6.2f} M evals/s)")
    print(f"speedup {t_np / t_nb:.1f}x, max relative difference {rel:.1e} (points with SINR > 1e-10)")


if __name__ == "__main__":
    main()
