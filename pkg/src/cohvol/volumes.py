"""SINR fields on grids and the coherent volume around each user."""
import itertools
import math
from dataclasses import dataclass, field
from typing import Callable, NamedTuple

import numpy as np
from scipy import ndimage

from .sinr import SPHERICAL, Downlink, threshold_crossing

DEFAULT_MAX_SAMPLES = 20_000_000


class GridTooLargeError(RuntimeError):
    """Requested grid exceeds the sample cap."""


@dataclass(frozen=True)
class GridSpec:
    """Regular grid centered on ``origin`` spanned by 2 or 3 orthonormal axes.

    Axis ``i`` carries ``resolution[i]`` samples evenly spread over
    ``[-extents[i]/2, +extents[i]/2]``.
    """

    origin: tuple
    axes: tuple
    extents: tuple
    resolution: tuple

    def __post_init__(self):
        object.__setattr__(self, "origin", tuple(float(v) for v in self.origin))
        object.__setattr__(self, "axes", tuple(tuple(float(c) for c in a) for a in self.axes))
        object.__setattr__(self, "extents", tuple(float(e) for e in self.extents))
        object.__setattr__(self, "resolution", tuple(int(r) for r in self.resolution))
        if len(self.origin) != 3:
            raise ValueError("grid origin must be a 3-vector")
        k = len(self.axes)
        if k not in (2, 3) or any(len(a) != 3 for a in self.axes):
            raise ValueError("grid needs two or three 3-vector axes")
        if len(self.extents) != k or len(self.resolution) != k:
            raise ValueError("extents and resolution must match the number of axes")
        A = np.array(self.axes)
        if np.max(np.abs(A @ A.T - np.eye(k))) > 1e-9:
            raise ValueError("grid axes must be orthonormal")
        if any(r < 2 for r in self.resolution):
            raise ValueError("grid resolution must be at least 2 per axis")
        if any(not e > 0 for e in self.extents):
            raise ValueError("grid extents must be positive")

    @classmethod
    def box(cls, center, halfwidth, spacing, ndim=3, axes=None):
        """Grid with a sample exactly at ``center`` and the given spacing."""
        if axes is None:
            axes = np.eye(3)[:ndim]
        steps = max(1, int(round(halfwidth / spacing)))
        res = 2 * steps + 1
        ext = 2.0 * steps * spacing
        return cls(tuple(center), tuple(map(tuple, axes)), (ext,) * len(axes), (res,) * len(axes))

    @property
    def ndim(self):
        return len(self.axes)

    @property
    def shape(self):
        return self.resolution

    @property
    def size(self):
        return int(np.prod(self.resolution))

    @property
    def spacing(self):
        return tuple(e / (r - 1) for e, r in zip(self.extents, self.resolution))

    @property
    def cell_measure(self):
        return float(np.prod(self.spacing))

    def coordinates(self, i):
        e = self.extents[i]
        return np.linspace(-e / 2.0, e / 2.0, self.resolution[i])

    def points(self):
        """All sample points, shape (size, 3), in C order over ``shape``."""
        mesh = np.meshgrid(*(self.coordinates(i) for i in range(self.ndim)), indexing="ij")
        A = np.array(self.axes)
        local = np.stack([m.ravel() for m in mesh], axis=1)
        return np.asarray(self.origin) + local @ A

    def local(self, point):
        return (np.asarray(point, dtype=float) - np.asarray(self.origin)) @ np.array(self.axes).T

    def nearest_index(self, point):
        """Grid index closest to ``point``; None if outside the grid."""
        t = self.local(point)
        idx = []
        for i in range(self.ndim):
            j = int(round((t[i] + self.extents[i] / 2.0) / self.spacing[i]))
            if j < 0 or j >= self.resolution[i]:
                return None
            idx.append(j)
        return tuple(idx)

    def project(self, vector):
        """Component of ``vector`` inside the grid span, normalized."""
        A = np.array(self.axes)
        v = (np.asarray(vector, dtype=float) @ A.T) @ A
        n = np.linalg.norm(v)
        if n == 0:
            raise ValueError("vector has no component in the grid span")
        return v / n

    def directions(self):
        """Fixed radius-sampling directions: face/edge/corner of a cube (26 in
        3D) or of a square (8 in 2D), expressed in world coordinates."""
        A = np.array(self.axes)
        out = []
        for combo in itertools.product((-1, 0, 1), repeat=self.ndim):
            if any(combo):
                v = np.array(combo, dtype=float) @ A
                out.append(v / np.linalg.norm(v))
        return np.array(out)


@dataclass(frozen=True, eq=False)
class SinrField:
    """Per-user SINR samples over a grid plus their pointwise maximum."""

    grid: GridSpec
    users: np.ndarray
    values: np.ndarray  # (len(users),) + grid.shape, linear
    envelope: np.ndarray
    link: Downlink | None = None
    mode: str = SPHERICAL

    def user_values(self, u):
        hits = np.flatnonzero(self.users == u)
        if not len(hits):
            raise KeyError(f"user {u} was not sampled")
        return self.values[hits[0]]


def sample_field(link, grid, mode=SPHERICAL, users=None, max_samples=DEFAULT_MAX_SAMPLES):
    """SINR of each user at every grid point for the link's frozen precoder."""
    if users is None:
        users = np.arange(link.n_users)
    users = np.atleast_1d(np.asarray(users, dtype=np.int64))
    if grid.size * len(users) > max_samples:
        raise GridTooLargeError(f"{grid.size} points x {len(users)} users exceeds cap of {max_samples}")
    vals = link.sinr_at(grid.points(), users, mode)
    vals = vals.reshape((len(users),) + grid.shape)
    vals.setflags(write=False)
    env = vals.max(axis=0)
    env.setflags(write=False)
    return SinrField(grid, users, vals, env, link, mode)


@dataclass(frozen=True)
class SinrFunction:
    """Adapter for arbitrary SINR callables ``fn(points, u) -> (M,)``."""

    fn: Callable
    centers: np.ndarray
    wavelength: float


class Elongation(NamedTuple):
    axial_radius: float
    transverse_radius: float
    ratio: float


@dataclass(frozen=True, eq=False)
class CoherentVolume:
    user: int
    threshold: float
    grid: GridSpec
    mask: np.ndarray
    directions: np.ndarray
    radii: np.ndarray
    bounded: np.ndarray  # False where no crossing was found within the search radius
    equivalent_radius: float
    anisotropy: float
    snr: float
    wavelength: float
    reference: np.ndarray | None = None
    discarded_measure: float = 0.0
    flags: tuple = field(default=())

    @property
    def empty(self):
        return "empty" in self.flags

    @property
    def voxel_count(self):
        return int(self.mask.sum())

    @property
    def measure(self):
        """Volume (3D) or area (2D) of the voxel mask."""
        return self.voxel_count * self.grid.cell_measure


def _equivalent_radius(measure, ndim):
    if ndim == 3:
        return (3.0 * measure / (4.0 * math.pi)) ** (1.0 / 3.0)
    return math.sqrt(measure / math.pi)


def _reference_directions(grid, reference):
    ref = grid.project(reference)
    if grid.ndim == 2:
        A = np.array(grid.axes)
        t = A @ ref
        perp = np.array([-t[1], t[0]]) @ A
        return ref, np.array([ref, -ref, perp, -perp])
    helper = np.array([0.0, 0.0, 1.0]) if abs(ref[2]) < 0.9 else np.array([1.0, 0.0, 0.0])
    e1 = np.cross(ref, helper)
    e1 /= np.linalg.norm(e1)
    e2 = np.cross(ref, e1)
    ring = [math.cos(a) * e1 + math.sin(a) * e2 for a in np.arange(8) * (math.pi / 4)]
    return ref, np.array([ref, -ref] + ring)


def _source_parts(source, u, grid, mode):
    if isinstance(source, SinrField):
        values = source.user_values(u)
        grid = source.grid
        link = source.link
        mode = source.mode
        if link is None:
            raise ValueError("field carries no link for directional radius search")
        center = link.users[u]
        fn = lambda pts: link.sinr_at(pts, [u], mode)[0]
        return grid, values, center, fn, link.wavelength
    if isinstance(source, Downlink):
        center = source.users[u]
        if grid is None:
            grid = GridSpec.box(center, source.wavelength, source.wavelength / 64.0)
        fn = lambda pts: source.sinr_at(pts, [u], mode)[0]
    elif isinstance(source, SinrFunction):
        center = np.asarray(source.centers[u], dtype=float)
        if grid is None:
            raise ValueError("a grid is required when extracting from a function")
        fn = lambda pts: np.asarray(source.fn(pts, u), dtype=float)
    else:
        raise TypeError(f"cannot extract a volume from {type(source).__name__}")
    values = fn(grid.points()).reshape(grid.shape)
    wavelength = source.wavelength
    return grid, values, center, fn, wavelength


def extract_volume(source, u, sinr_o, grid=None, mode=SPHERICAL, reference=None,
                   search_radius=None, step=None, tol=None):
    """Coherent volume of user ``u`` at linear threshold ``sinr_o``.

    ``source`` is a sampled :class:`SinrField`, a :class:`Downlink` (sampled
    here on ``grid``, by default a 1-wavelength box at wavelength/64) or a
    :class:`SinrFunction`. The voxel mask is the 26-connected (8 in 2D)
    above-threshold component containing the user's grid cell. Directional
    radii come from a march-and-bisect search on the underlying evaluator.
    """
    grid, values, center, fn, wavelength = _source_parts(source, u, grid, mode)
    idx = grid.nearest_index(center)
    if idx is None:
        raise ValueError(f"user {u} lies outside the grid")

    flags = []
    snr = float(fn(np.atleast_2d(center))[0])
    above = values >= sinr_o
    if snr < sinr_o:
        flags.append("empty")
        mask = np.zeros(grid.shape, dtype=bool)
    elif above[idx]:
        labels, _ = ndimage.label(above, structure=np.ones((3,) * grid.ndim))
        mask = labels == labels[idx]
    else:
        mask = np.zeros(grid.shape, dtype=bool)
    mask.setflags(write=False)
    discarded = float((above.sum() - mask.sum()) * grid.cell_measure)

    dirs = grid.directions()
    ref = None
    if reference is not None:
        ref, extra = _reference_directions(grid, reference)
        dirs = np.vstack([dirs, extra])

    if search_radius is None:
        search_radius = min(grid.extents) / 2.0
    if step is None:
        step = min(grid.spacing)
    if tol is None:
        tol = wavelength / 1000.0

    if "empty" in flags:
        radii = np.zeros(len(dirs))
        bounded = np.ones(len(dirs), dtype=bool)
    else:
        def profile(r):
            pts = center + r[..., None] * dirs[:, None, :]
            shape = pts.shape[:2]
            return fn(pts.reshape(-1, 3)).reshape(shape)

        radii, bounded = threshold_crossing(profile, sinr_o, search_radius, step, tol)
        if not bounded.all():
            flags.append("unbounded")

    count = int(mask.sum())
    eq_radius = _equivalent_radius(count * grid.cell_measure, grid.ndim)
    if "empty" not in flags and count <= 1:
        flags.append("sub-resolution")
    if count and _touches_boundary(mask):
        flags.append("truncated")
    rmin = float(radii.min())
    anisotropy = float(radii.max() / rmin) if rmin > 0 else (math.inf if radii.max() > 0 else 0.0)
    return CoherentVolume(u, float(sinr_o), grid, mask, dirs, radii, bounded, eq_radius, anisotropy,
                          snr, float(wavelength), ref, discarded, tuple(flags))


def _touches_boundary(mask):
    for axis in range(mask.ndim):
        if mask.take(0, axis=axis).any() or mask.take(-1, axis=axis).any():
            return True
    return False


def elongation_metrics(volume, reference=None):
    """Axial radius along +-reference, largest transverse radius, and their ratio."""
    if volume.empty:
        raise ValueError("elongation is undefined for an empty volume")
    if reference is None:
        reference = volume.reference
    if reference is None:
        raise ValueError("no reference direction given")
    ref = volume.grid.project(reference)
    dots = volume.directions @ ref
    axial_sel = np.abs(np.abs(dots) - 1.0) <= 1e-9
    trans_sel = np.abs(dots) <= 1e-9
    if not axial_sel.any() or not trans_sel.any():
        raise ValueError("volume was not extracted with this reference direction")
    axial = float(volume.radii[axial_sel].max())
    transverse = float(volume.radii[trans_sel].max())
    ratio = axial / transverse if transverse > 0 else math.inf
    return Elongation(axial, transverse, ratio)


def antenna_centroid_directions(link):
    """Unit vectors from each user towards the centroid of the antennas."""
    if link.scenario is None:
        raise ValueError("link has no antenna geometry")
    c = link.scenario.antennas.mean(axis=0)
    v = c - link.users
    return v / np.linalg.norm(v, axis=1, keepdims=True)


@dataclass(frozen=True, eq=False)
class LayoutComparison:
    threshold: float
    volumes_a: list
    volumes_b: list
    radius_a: np.ndarray
    radius_b: np.ndarray
    elongation_a: np.ndarray
    elongation_b: np.ndarray

    @property
    def radius_ratio(self):
        """Equivalent radius of layout b over layout a, per user."""
        return self.radius_b / self.radius_a

    @property
    def elongation_ratio(self):
        return self.elongation_b / self.elongation_a


def layout_volumes(link, sinr_o, grid=None, references=None, mode=SPHERICAL, box_halfwidth=None,
                   spacing=None, search_radius=None):
    """Coherent volumes of every user of one layout.

    With ``grid`` given (a shared cross-section), the field is sampled once
    and each user's component is cut out of it; otherwise each user gets
    its own 3D box.
    """
    if references is None:
        references = antenna_centroid_directions(link)
    if grid is not None:
        fld = sample_field(link, grid, mode)
        return [extract_volume(fld, u, sinr_o, reference=references[u], search_radius=search_radius)
                for u in range(link.n_users)]
    lam = link.wavelength
    half = lam if box_halfwidth is None else box_halfwidth
    spacing = lam / 64.0 if spacing is None else spacing
    return [extract_volume(link, u, sinr_o, grid=GridSpec.box(link.users[u], half, spacing), mode=mode,
                           reference=references[u], search_radius=search_radius)
            for u in range(link.n_users)]


def compare_layouts(link_a, link_b, sinr_o, grid=None, references=None, **kwargs):
    """Per-user coherent-volume size and elongation for two antenna layouts.

    Both links must serve the same users. ``references`` (U, 3) default to
    the direction from each user to the centroid of layout a's antennas and
    are used for both layouts.
    """
    if link_a.n_users != link_b.n_users or not np.array_equal(link_a.users, link_b.users):
        raise ValueError("layouts must serve the same users")
    if references is None:
        references = antenna_centroid_directions(link_a)
    vols_a = layout_volumes(link_a, sinr_o, grid, references, **kwargs)
    vols_b = layout_volumes(link_b, sinr_o, grid, references, **kwargs)

    def elong(vols):
        return np.array([elongation_metrics(v).ratio if not v.empty else np.nan for v in vols])

    return LayoutComparison(
        float(sinr_o), vols_a, vols_b,
        np.array([v.equivalent_radius for v in vols_a]),
        np.array([v.equivalent_radius for v in vols_b]),
        elong(vols_a), elong(vols_b))
