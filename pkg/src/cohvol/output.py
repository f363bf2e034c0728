"""Result writers: field CSV, 16-bit PGM envelope image, volume summary, metadata.

All files of one call are written to temporaries in the target directory
and renamed into place only after every write succeeded.
"""
import os
import tempfile
from contextlib import contextmanager

import numpy as np

from . import __version__

FIELD_HEADER = "x_m,y_m,z_m,user,sinr_db"
VOLUME_HEADER = ("user,sinr_o_db,equivalent_radius_m,equivalent_radius_lambda,anisotropy,"
                 "axial_radius_m,transverse_radius_m,flags")


def _g(v):
    return f"{v:.9g}"


def to_db(linear):
    with np.errstate(divide="ignore"):
        return 10.0 * np.log10(linear)


def field_csv(field):
    pts = field.grid.points()
    db = to_db(field.values.reshape(len(field.users), -1))
    env = to_db(field.envelope.ravel())
    coords = [",".join(_g(c) for c in p) for p in pts]
    labels = [str(int(u)) for u in field.users]
    out = [FIELD_HEADER]
    for i, xyz in enumerate(coords):
        for k, lab in enumerate(labels):
            out.append(f"{xyz},{lab},{_g(db[k, i])}")
        out.append(f"{xyz},-1,{_g(env[i])}")
    return "\n".join(out) + "\n"


def envelope_pgm(field, db_min, db_max):
    """Binary 16-bit graymap of the envelope in dB (3D grids: middle slice).

    Columns follow the first grid axis, rows the second with the largest
    coordinate on top.
    """
    env = to_db(field.envelope)
    if env.ndim == 3:
        env = env[:, :, env.shape[2] // 2]
    scaled = np.clip((env - db_min) / (db_max - db_min), 0.0, 1.0)
    img = np.rint(scaled * 65535.0).astype(">u2")
    img = img.T[::-1]
    height, width = img.shape
    return f"P5\n{width} {height}\n65535\n".encode("ascii") + img.tobytes()


def volume_csv(volumes_by_threshold, wavelength, elongations):
    out = [VOLUME_HEADER]
    for thr_db, vols in volumes_by_threshold.items():
        for vol in vols:
            el = elongations.get((thr_db, vol.user))
            if vol.empty or el is None:
                axial = transverse = 0.0
            else:
                axial, transverse = el.axial_radius, el.transverse_radius
            aniso = 0.0 if vol.empty else vol.anisotropy
            out.append(",".join([
                str(vol.user), _g(thr_db), _g(vol.equivalent_radius), _g(vol.equivalent_radius / wavelength),
                _g(aniso), _g(axial), _g(transverse), ";".join(vol.flags)]))
    return "\n".join(out) + "\n"


def metadata_text(result):
    cfg, link = result.config, result.link
    snr_db = to_db(link.snr())
    lines = [
        f"preset = {cfg.name}",
        f"seed = {cfg.seed}",
        f"noise_power = {link.noise_power!r}",
        f"snr_target_db = {cfg.snr_target_db!r}",
        f"carrier_frequency = {cfg.carrier_frequency!r}",
        f"wavelength_m = {link.wavelength!r}",
        f"mode = {cfg.mode}",
        f"antennas = {link.paths.n_antennas}",
        f"users = {link.n_users}",
        f"version = {__version__}",
    ]
    lines += [f"snr_db.user{u} = {_g(v)}" for u, v in enumerate(snr_db)]
    return "\n".join(lines) + "\n"


@contextmanager
def _atomic_group(directory):
    """Collect (name, bytes) pairs; write all to temporaries, then rename."""
    pending = []
    yield pending
    umask = os.umask(0)
    os.umask(umask)
    temps = []
    try:
        for name, data in pending:
            fd, tmp = tempfile.mkstemp(prefix=f".{name}.", dir=directory)
            temps.append((tmp, os.path.join(directory, name)))
            with os.fdopen(fd, "wb") as fh:
                fh.write(data)
            os.chmod(tmp, 0o666 & ~umask)
        for tmp, final in temps:
            os.replace(tmp, final)
    except BaseException:
        for tmp, _ in temps:
            if os.path.exists(tmp):
                os.unlink(tmp)
        raise


def write_outputs(result, out_dir):
    """Write every configured output for a :class:`~cohvol.runner.SimulationResult`.

    Returns the list of paths written.
    """
    cfg = result.config
    os.makedirs(out_dir, exist_ok=True)
    elong = {}
    for thr_db, vols in result.volumes.items():
        for vol in vols:
            elong[(thr_db, vol.user)] = result.elongation(thr_db, vol.user)
    with _atomic_group(out_dir) as files:
        if result.field is not None:
            if "csv" in cfg.formats:
                files.append(("field.csv", field_csv(result.field).encode("ascii")))
            if "pgm" in cfg.formats:
                files.append(("envelope.pgm", envelope_pgm(result.field, cfg.db_min, cfg.db_max)))
        files.append(("volumes.csv", volume_csv(result.volumes, result.link.wavelength, elong).encode("ascii")))
        files.append(("metadata.txt", metadata_text(result).encode("utf-8")))
    return [os.path.join(out_dir, name) for name, _ in files]
