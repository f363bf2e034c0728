"""Scenario configuration files and the built-in presets.

The file format is line-oriented ``key = value`` text; ``#`` starts a
comment. Repeatable keys (``antenna``, ``user``, ``grid_axis``) append one
entry per line. Lengths are meters unless ``unit = lambda`` is given, in
which case they are multiples of the carrier wavelength and are converted
once the whole file has been read. Example::

    unit = lambda
    carrier_frequency = 1.9175e9
    antenna = 0 50 0
    user = 0 0 0
    threshold_db = 5, 10
"""
import math
from dataclasses import dataclass, replace

import numpy as np

from .channel import SPEED_OF_LIGHT, PropagationParams, Scenario
from .volumes import GridSpec

MODES = ("spherical", "planewave")
FORMATS = ("csv", "pgm")
VOLUME_GRIDS = ("plane", "box")
PRESETS = ("fig2", "fig3", "fig4")

DEFAULT_CARRIER = 1.9175e9
PRESET_SEEDS = {"fig2": 0, "fig3": 3, "fig4": 4}


class ConfigError(ValueError):
    def __init__(self, message, line=None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


@dataclass(frozen=True)
class ScenarioConfig:
    """Validated simulation configuration; every length is in meters."""

    antennas: tuple
    users: tuple
    name: str = "custom"
    carrier_frequency: float = DEFAULT_CARRIER
    rician_k: float = math.inf
    pathloss_reference_db: float = 28.0
    pathloss_exponent: float = 2.2
    shadowing_sigma_db: float = 3.0
    cluster_count: int = 0
    rays_per_cluster: int = 1
    cluster_spread_deg: float = 5.0
    seed: int = 0
    noise_power: float | None = None
    snr_target_db: float = 30.0
    mode: str = "spherical"
    thresholds_db: tuple = (5.0,)
    grid: GridSpec | None = None
    volume_grid: str = "box"
    volume_halfwidth: float | None = None
    volume_spacing: float | None = None
    search_radius: float | None = None
    formats: tuple = FORMATS
    db_min: float = -10.0
    db_max: float = 50.0

    @property
    def wavelength(self):
        return SPEED_OF_LIGHT / self.carrier_frequency

    def propagation(self):
        return PropagationParams(
            carrier_frequency=self.carrier_frequency, rician_k=self.rician_k,
            pathloss_reference_db=self.pathloss_reference_db, pathloss_exponent=self.pathloss_exponent,
            shadowing_sigma_db=self.shadowing_sigma_db, cluster_count=self.cluster_count,
            rays_per_cluster=self.rays_per_cluster, cluster_spread_deg=self.cluster_spread_deg,
            seed=self.seed)

    def scenario(self, noise_power=None):
        """Scenario with the configured noise power (1.0 if auto and not given)."""
        if noise_power is None:
            noise_power = 1.0 if self.noise_power is None else self.noise_power
        return Scenario(np.array(self.antennas), np.array(self.users), self.propagation(), noise_power)

    def with_grid_spacing(self, spacing):
        """Same grid extents resampled at (approximately) the given spacing."""
        if self.grid is None:
            return self
        res = tuple(max(2, int(round(e / spacing)) + 1) for e in self.grid.extents)
        return replace(self, grid=replace(self.grid, resolution=res))


# key -> (kind, is_length)
_SCALARS = {
    "name": ("str", False),
    "carrier_frequency": ("float", False),
    "rician_k": ("float", False),
    "pathloss_reference_db": ("float", False),
    "pathloss_exponent": ("float", False),
    "shadowing_sigma_db": ("float", False),
    "cluster_count": ("int", False),
    "rays_per_cluster": ("int", False),
    "cluster_spread_deg": ("float", False),
    "seed": ("int", False),
    "noise_power": ("float?", False),
    "snr_target_db": ("float", False),
    "mode": ("str", False),
    "threshold_db": ("floats", False),
    "grid_origin": ("vec3", True),
    "grid_extent": ("floats", True),
    "grid_resolution": ("ints", False),
    "volume_grid": ("str", False),
    "volume_halfwidth": ("float?", True),
    "volume_spacing": ("float?", True),
    "search_radius": ("float?", True),
    "format": ("strs", False),
    "db_min": ("float", False),
    "db_max": ("float", False),
    "unit": ("str", False),
}
_REPEATED = {"antenna": True, "user": True, "grid_axis": False}  # value: is_length
_REQUIRED = ("antenna", "user")


def _convert(kind, text, line):
    try:
        if kind == "str":
            return text
        if kind == "float":
            return float(text)
        if kind == "float?":
            return None if text.lower() in ("auto", "none") else float(text)
        if kind == "int":
            return int(text)
        if kind == "floats":
            return tuple(float(t) for t in text.replace(",", " ").split())
        if kind == "ints":
            return tuple(int(t) for t in text.replace(",", " ").split())
        if kind == "strs":
            return tuple(t.strip() for t in text.split(",") if t.strip())
        if kind == "vec3":
            v = tuple(float(t) for t in text.replace(",", " ").split())
            if len(v) != 3:
                raise ValueError("expected three coordinates")
            return v
    except ValueError as exc:
        raise ConfigError(f"bad value {text!r}: {exc}", line) from None
    raise AssertionError(kind)


def parse_config(text):
    """Parse and validate configuration text into a :class:`ScenarioConfig`."""
    values, lines, repeated = {}, {}, {k: [] for k in _REPEATED}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        body = raw.split("#", 1)[0].strip()
        if not body:
            continue
        if "=" not in body:
            raise ConfigError(f"expected 'key = value', got {body!r}", lineno)
        key, _, val = (s.strip() for s in body.partition("="))
        if key in _REPEATED:
            repeated[key].append((_convert("vec3", val, lineno), lineno))
            continue
        if key not in _SCALARS:
            raise ConfigError(f"unknown key {key!r}", lineno)
        if key in values:
            raise ConfigError(f"duplicate key {key!r}", lineno)
        values[key] = _convert(_SCALARS[key][0], val, lineno)
        lines[key] = lineno

    for key in _REQUIRED:
        if not repeated[key]:
            raise ConfigError(f"missing required key {key!r}")

    unit = values.pop("unit", "meters")
    if unit not in ("meters", "lambda"):
        raise ConfigError(f"unit must be 'meters' or 'lambda', got {unit!r}", lines["unit"])
    carrier = values.get("carrier_frequency", DEFAULT_CARRIER)
    if not carrier > 0:
        raise ConfigError("carrier_frequency must be positive", lines.get("carrier_frequency"))
    scale = SPEED_OF_LIGHT / carrier if unit == "lambda" else 1.0

    def length(v):
        if v is None:
            return None
        if isinstance(v, tuple):
            return tuple(x * scale for x in v)
        return v * scale

    for key, (_, is_len) in _SCALARS.items():
        if is_len and key in values:
            values[key] = length(values[key])
    antennas = tuple(length(v) for v, _ in repeated["antenna"])
    users = tuple(length(v) for v, _ in repeated["user"])
    if len(antennas) < len(users):
        raise ConfigError(f"N >= U violated: {len(antennas)} antennas for {len(users)} users",
                          repeated["user"][-1][1])
    for name, entries in (("antenna", repeated["antenna"]), ("user", repeated["user"])):
        seen = {}
        for pos, lineno in entries:
            if pos in seen:
                raise ConfigError(f"duplicate {name} position (also on line {seen[pos]})", lineno)
            seen[pos] = lineno

    kwargs = dict(antennas=antennas, users=users)
    plain = {"name", "carrier_frequency", "rician_k", "pathloss_reference_db", "pathloss_exponent",
             "shadowing_sigma_db", "cluster_count", "rays_per_cluster", "cluster_spread_deg", "seed",
             "noise_power", "snr_target_db", "mode", "volume_grid", "volume_halfwidth",
             "volume_spacing", "search_radius", "db_min", "db_max"}
    for key in plain & values.keys():
        kwargs[key] = values[key]
    if "threshold_db" in values:
        kwargs["thresholds_db"] = values["threshold_db"]
    if "format" in values:
        kwargs["formats"] = values["format"]

    grid_keys = ("grid_origin", "grid_extent", "grid_resolution")
    if repeated["grid_axis"] or any(k in values for k in grid_keys):
        missing = [k for k in grid_keys if k not in values] + ([] if repeated["grid_axis"] else ["grid_axis"])
        if missing:
            raise ConfigError(f"incomplete grid, missing {', '.join(missing)}")
        axes = tuple(v for v, _ in repeated["grid_axis"])
        A = np.array(axes)
        if len(axes) not in (2, 3) or np.max(np.abs(A @ A.T - np.eye(len(axes)))) > 1e-9:
            raise ConfigError("grid axes must be two or three orthonormal vectors",
                              repeated["grid_axis"][-1][1])
        try:
            kwargs["grid"] = GridSpec(values["grid_origin"], axes, values["grid_extent"],
                                      values["grid_resolution"])
        except ValueError as exc:
            raise ConfigError(str(exc), lines["grid_extent"]) from None

    return validate(ScenarioConfig(**kwargs), lines)


def validate(config, lines=None):
    """Check value ranges; returns the config unchanged."""
    lines = lines or {}

    def fail(msg, key):
        raise ConfigError(msg, lines.get(key))

    if config.mode not in MODES:
        fail(f"mode must be one of {MODES}", "mode")
    if config.volume_grid not in VOLUME_GRIDS:
        fail(f"volume_grid must be one of {VOLUME_GRIDS}", "volume_grid")
    bad = [f for f in config.formats if f not in FORMATS]
    if bad:
        fail(f"unknown output format(s) {bad}", "format")
    if not config.thresholds_db:
        fail("at least one threshold is required", "threshold_db")
    if config.volume_grid == "plane" and config.grid is None:
        fail("volume_grid = plane needs a grid", "volume_grid")
    if not config.db_max > config.db_min:
        fail("db_max must exceed db_min", "db_max")
    if config.noise_power is not None and not config.noise_power > 0:
        fail("noise_power must be positive", "noise_power")
    if config.cluster_count < 0 or config.rays_per_cluster < 1:
        fail("cluster_count >= 0 and rays_per_cluster >= 1 required", "cluster_count")
    if not config.rician_k >= 0:
        fail("rician_k must be nonnegative", "rician_k")
    return config


def _fmt(v):
    return repr(float(v))


def _vec(v):
    return " ".join(_fmt(x) for x in v)


def emit_config(config):
    """Serialize a config to text that :func:`parse_config` reads back exactly."""
    out = [f"# cohvol scenario '{config.name}'", "unit = meters", f"name = {config.name}"]
    for key in ("carrier_frequency", "rician_k", "pathloss_reference_db", "pathloss_exponent",
                "shadowing_sigma_db", "cluster_spread_deg", "snr_target_db", "db_min", "db_max"):
        out.append(f"{key} = {_fmt(getattr(config, key))}")
    for key in ("cluster_count", "rays_per_cluster", "seed"):
        out.append(f"{key} = {getattr(config, key)}")
    for key in ("noise_power", "volume_halfwidth", "volume_spacing", "search_radius"):
        v = getattr(config, key)
        out.append(f"{key} = {'auto' if v is None else _fmt(v)}")
    out.append(f"mode = {config.mode}")
    out.append(f"volume_grid = {config.volume_grid}")
    out.append("threshold_db = " + ", ".join(_fmt(t) for t in config.thresholds_db))
    out.append("format = " + ", ".join(config.formats))
    out.extend(f"antenna = {_vec(a)}" for a in config.antennas)
    out.extend(f"user = {_vec(u)}" for u in config.users)
    if config.grid is not None:
        g = config.grid
        out.append(f"grid_origin = {_vec(g.origin)}")
        out.extend(f"grid_axis = {_vec(a)}" for a in g.axes)
        out.append(f"grid_extent = {_vec(g.extents)}")
        out.append("grid_resolution = " + " ".join(str(r) for r in g.resolution))
    return "\n".join(out) + "\n"


def _plane_grid(lam, x_extent, y_extent, spacing):
    res = (int(round(x_extent / spacing)) + 1, int(round(y_extent / spacing)) + 1)
    return GridSpec((0.0, 0.0, 0.0), ((1.0, 0.0, 0.0), (0.0, 1.0, 0.0)),
                    (x_extent * lam, y_extent * lam), res)


def preset(name, seed=None, nlos=False, carrier_frequency=DEFAULT_CARRIER):
    """Built-in scenario: one of three reference layouts.

    ``fig2``: 8 users 4 wavelengths apart on the x axis, 10-element
    half-wavelength ULA on {y = 50, z = 0}. ``fig3``: same users, 10
    antennas drawn uniformly in {|x|, |y| <= 50, 50 <= z <= 200}. ``fig4``:
    10 users uniform in a 2-wavelength cube, 16 antennas in
    {|x|, |y| <= 300, 200 <= z <= 300}. Coordinates above are in
    wavelengths. Random placements use ``seed`` (a fixed default per
    preset). ``nlos`` adds Rician scattering (K = 10, 4 clusters x 10 rays).
    """
    if name not in PRESETS:
        raise ConfigError(f"unknown preset {name!r}; choose from {', '.join(PRESETS)}")
    seed = PRESET_SEEDS[name] if seed is None else int(seed)
    lam = SPEED_OF_LIGHT / carrier_frequency
    rng = np.random.default_rng(seed)
    common = dict(name=name, carrier_frequency=carrier_frequency, seed=seed, thresholds_db=(5.0,))
    if nlos:
        common.update(rician_k=10.0, cluster_count=4, rays_per_cluster=10)

    if name in ("fig2", "fig3"):
        users = np.array([[-14.0 + 4.0 * i, 0.0, 0.0] for i in range(8)])
        if name == "fig2":
            antennas = np.array([[-2.25 + 0.5 * n, 50.0, 0.0] for n in range(10)])
        else:
            antennas = np.column_stack([rng.uniform(-50, 50, 10), rng.uniform(-50, 50, 10),
                                        rng.uniform(50, 200, 10)])
        grid = _plane_grid(lam, 48.0, 20.0, 1.0 / 16.0)
        extra = dict(grid=grid, volume_grid="plane", search_radius=10.0 * lam)
    else:
        users = rng.uniform(-1.0, 1.0, (10, 3))
        antennas = np.column_stack([rng.uniform(-300, 300, 16), rng.uniform(-300, 300, 16),
                                    rng.uniform(200, 300, 16)])
        grid = _plane_grid(lam, 4.0, 4.0, 1.0 / 16.0)
        extra = dict(grid=grid, volume_grid="box", volume_halfwidth=lam, volume_spacing=lam / 64.0,
                     search_radius=lam)

    to_m = lambda arr: tuple(tuple(float(c) for c in row * lam) for row in arr)
    return ScenarioConfig(antennas=to_m(antennas), users=to_m(users), **common, **extra)
