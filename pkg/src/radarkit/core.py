"""Shared geometric and grid data model.

Conventions used throughout the toolkit:

* Cartesian frame: x forward, y left, z up (right handed).
* Azimuth is measured from +x toward +y, elevation from the xy-plane
  toward +z. Angles are degrees at every API boundary and radians only
  inside formulas.
* Grid bin ``i`` covers ``[min + i*res, min + (i+1)*res)``; a value
  exactly on an upper edge belongs to the next bin.
* Tensor memory order is row-major ``(doppler, range, elevation, azimuth)``
  with azimuth fastest, so range/angle kernels stream contiguously.

All types are immutable after construction and all operations are pure,
so everything here is safe to share across threads.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError

_ORTHONORMAL_TOL = 1e-9


def _freeze(array: np.ndarray) -> np.ndarray:
    array.setflags(write=False)
    return array


@dataclass(frozen=True)
class GridSpec:
    """Geometry of a 4D radar tensor: bin counts, resolutions, and FOV placement.

    Angular coverage is centered on ``elevation_center`` / ``azimuth_center``
    and spans ``bins * res`` degrees. Range coverage starts at ``range_min``.
    """

    doppler_bins: int
    range_bins: int
    elevation_bins: int
    azimuth_bins: int
    doppler_res: float  # m/s per bin
    range_res: float  # m per bin
    elevation_res: float  # deg per bin
    azimuth_res: float  # deg per bin
    range_min: float = 0.0
    elevation_center: float = 0.0
    azimuth_center: float = 0.0

    def __post_init__(self):
        for name in ("doppler_bins", "range_bins", "elevation_bins", "azimuth_bins"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be >= 1, got {getattr(self, name)}")
        for name in ("doppler_res", "range_res", "elevation_res", "azimuth_res"):
            if not getattr(self, name) > 0:
                raise ConfigError(f"{name} must be > 0, got {getattr(self, name)}")
        if self.azimuth_bins * self.azimuth_res > 360.0 + 1e-12:
            raise ConfigError("azimuth extent exceeds 360 degrees")
        if self.elevation_bins * self.elevation_res > 180.0 + 1e-12:
            raise ConfigError("elevation extent exceeds 180 degrees")
        el_extent = self.elevation_bins * self.elevation_res
        if (self.elevation_center - 0.5 * el_extent < -90.0 - 1e-12
                or self.elevation_center + 0.5 * el_extent > 90.0 + 1e-12):
            raise ConfigError("elevation coverage must lie within [-90, 90] degrees")
        az_extent = self.azimuth_bins * self.azimuth_res
        if (self.azimuth_center - 0.5 * az_extent < -180.0 - 1e-12
                or self.azimuth_center + 0.5 * az_extent > 180.0 + 1e-12):
            raise ConfigError("azimuth coverage must lie within [-180, 180] degrees")

    @property
    def shape(self) -> tuple[int, int, int, int]:
        return (self.doppler_bins, self.range_bins, self.elevation_bins, self.azimuth_bins)

    @property
    def cell_count(self) -> int:
        d, r, e, a = self.shape
        return d * r * e * a

    @property
    def elevation_min(self) -> float:
        return self.elevation_center - 0.5 * self.elevation_bins * self.elevation_res

    @property
    def azimuth_min(self) -> float:
        return self.azimuth_center - 0.5 * self.azimuth_bins * self.azimuth_res

    @property
    def range_max(self) -> float:
        return self.range_min + self.range_bins * self.range_res

    def doppler_velocity(self, d) -> np.ndarray | float:
        """Radial velocity in m/s reported for doppler bin ``d``."""
        return (np.asarray(d, dtype=np.float64) - self.doppler_bins / 2.0) * self.doppler_res

    def doppler_bin(self, velocity: float) -> int:
        """Doppler bin whose reported velocity is closest to ``velocity``."""
        return self.doppler_bins // 2 + int(round(velocity / self.doppler_res))

    def spatial_bin_indices(self, ranges, elevations, azimuths, *, doubled: bool = False):
        """Bin indices along (range, elevation, azimuth) for spherical components.

        With ``doubled=True`` the bins are half resolution (twice the count),
        as used by the occupancy ground truth. Indices may fall outside the
        grid; callers filter with the returned arrays.
        """
        scale = 2.0 if doubled else 1.0
        ri = np.floor((np.asarray(ranges, np.float64) - self.range_min) / (self.range_res / scale))
        ei = np.floor((np.asarray(elevations, np.float64) - self.elevation_min) / (self.elevation_res / scale))
        ai = np.floor((np.asarray(azimuths, np.float64) - self.azimuth_min) / (self.azimuth_res / scale))
        return ri.astype(np.int64), ei.astype(np.int64), ai.astype(np.int64)

    def bin_center_spherical(self, ri, ei, ai, *, doubled: bool = False):
        """Spherical (range, elevation, azimuth) of bin centers, vectorized."""
        scale = 2.0 if doubled else 1.0
        r = self.range_min + (np.asarray(ri, np.float64) + 0.5) * (self.range_res / scale)
        e = self.elevation_min + (np.asarray(ei, np.float64) + 0.5) * (self.elevation_res / scale)
        a = self.azimuth_min + (np.asarray(ai, np.float64) + 0.5) * (self.azimuth_res / scale)
        return r, e, a


@dataclass(frozen=True)
class RadarTensor4D:
    """Intensity tensor over (doppler, range, elevation, azimuth) bins."""

    spec: GridSpec
    data: np.ndarray

    def __post_init__(self):
        data = np.asarray(self.data, dtype=np.float64)
        if data.shape != self.spec.shape:
            raise ConfigError(f"tensor shape {data.shape} does not match spec {self.spec.shape}")
        if not np.isfinite(data).all():
            raise ConfigError("tensor intensities must be finite")
        if data.size and data.min() < 0:
            raise ConfigError("tensor intensities must be non-negative")
        object.__setattr__(self, "data", _freeze(data))

    def flat_index(self, d: int, r: int, e: int, a: int) -> int:
        _, R, E, A = self.spec.shape
        return ((d * R + r) * E + e) * A + a


@dataclass(frozen=True)
class PointCloud:
    """Cartesian points with intensity, stored as an (N, 4) array of x, y, z, i."""

    points: np.ndarray
    frame_id: int = 0

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=np.float64)
        if pts.size == 0:
            pts = pts.reshape(0, 4)
        if pts.ndim != 2 or pts.shape[1] != 4:
            raise ConfigError(f"point array must have shape (N, 4), got {pts.shape}")
        if not np.isfinite(pts[:, :3]).all():
            raise ConfigError("point coordinates must be finite")
        object.__setattr__(self, "points", _freeze(pts))

    @classmethod
    def from_xyz(cls, xyz, intensity=None, frame_id: int = 0) -> "PointCloud":
        xyz = np.asarray(xyz, dtype=np.float64).reshape(-1, 3)
        if intensity is None:
            intensity = np.ones(len(xyz))
        pts = np.column_stack([xyz, np.asarray(intensity, np.float64).reshape(-1)])
        return cls(pts, frame_id)

    @classmethod
    def empty(cls, frame_id: int = 0) -> "PointCloud":
        return cls(np.empty((0, 4)), frame_id)

    @property
    def xyz(self) -> np.ndarray:
        return self.points[:, :3]

    @property
    def intensity(self) -> np.ndarray:
        return self.points[:, 3]

    def __len__(self) -> int:
        return len(self.points)


@dataclass(frozen=True)
class RigidTransform:
    """SE(3) pose: 3x3 rotation (orthonormal, det +1) plus translation in meters."""

    rotation: np.ndarray
    translation: np.ndarray

    def __post_init__(self):
        rot = np.asarray(self.rotation, dtype=np.float64).reshape(3, 3)
        tr = np.asarray(self.translation, dtype=np.float64).reshape(3)
        if np.abs(rot.T @ rot - np.eye(3)).max() >= _ORTHONORMAL_TOL:
            raise ConfigError("rotation is not orthonormal")
        if abs(np.linalg.det(rot) - 1.0) >= _ORTHONORMAL_TOL:
            raise ConfigError("rotation determinant is not +1")
        if not np.isfinite(tr).all():
            raise ConfigError("translation must be finite")
        object.__setattr__(self, "rotation", _freeze(rot))
        object.__setattr__(self, "translation", _freeze(tr))

    @classmethod
    def identity(cls) -> "RigidTransform":
        return cls(np.eye(3), np.zeros(3))

    @classmethod
    def from_translation(cls, t) -> "RigidTransform":
        return cls(np.eye(3), np.asarray(t, np.float64))

    def apply(self, points: np.ndarray) -> np.ndarray:
        """Map one (3,) point or an (N, 3) batch through the transform."""
        pts = np.asarray(points, dtype=np.float64)
        if pts.ndim == 1:
            return self.rotation @ pts + self.translation
        return pts @ self.rotation.T + self.translation

    def compose(self, other: "RigidTransform") -> "RigidTransform":
        """Transform that applies ``other`` first and then ``self``."""
        return RigidTransform(
            self.rotation @ other.rotation,
            self.rotation @ other.translation + self.translation,
        )

    def inverse(self) -> "RigidTransform":
        rot_t = self.rotation.T
        return RigidTransform(rot_t, -(rot_t @ self.translation))


@dataclass(frozen=True)
class SphericalCoord:
    """Range (m), elevation (deg in [-90, 90]), azimuth (deg in (-180, 180])."""

    range: float
    elevation: float
    azimuth: float

    def __post_init__(self):
        if self.range < 0:
            raise ConfigError(f"range must be >= 0, got {self.range}")
        if not -90.0 <= self.elevation <= 90.0:
            raise ConfigError(f"elevation out of [-90, 90]: {self.elevation}")
        if not -180.0 < self.azimuth <= 180.0:
            raise ConfigError(f"azimuth out of (-180, 180]: {self.azimuth}")


def compose(t_outer: RigidTransform, t_inner: RigidTransform) -> RigidTransform:
    """compose(a, b) maps p to a(b(p)): ``b`` is applied first."""
    return t_outer.compose(t_inner)


def inverse(transform: RigidTransform) -> RigidTransform:
    return transform.inverse()


def rotation_about_axis(axis, degrees: float) -> np.ndarray:
    """Rotation matrix for a right-handed rotation about ``axis`` (Rodrigues)."""
    axis = np.asarray(axis, dtype=np.float64)
    norm = np.linalg.norm(axis)
    if norm == 0:
        raise ConfigError("rotation axis must be nonzero")
    x, y, z = axis / norm
    k = np.array([[0.0, -z, y], [z, 0.0, -x], [-y, x, 0.0]])
    theta = math.radians(degrees)
    return np.eye(3) + math.sin(theta) * k + (1.0 - math.cos(theta)) * (k @ k)


def yaw_rotation(degrees: float) -> np.ndarray:
    return rotation_about_axis((0.0, 0.0, 1.0), degrees)


def transform_point_cloud(cloud: PointCloud, transform: RigidTransform) -> PointCloud:
    """Apply a rigid transform to every point; intensity and order preserved."""
    moved = transform.apply(cloud.xyz)
    return PointCloud.from_xyz(moved, cloud.intensity, cloud.frame_id)


def spherical_components(xyz: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Ranges, elevations (deg), azimuths (deg) for an (N, 3) point batch.

    The degenerate origin point maps to elevation 0 and azimuth 0.
    """
    xyz = np.asarray(xyz, dtype=np.float64).reshape(-1, 3)
    ranges = np.linalg.norm(xyz, axis=1)
    nonzero = ranges > 0
    sin_el = np.zeros(len(xyz))
    np.divide(xyz[:, 2], ranges, out=sin_el, where=nonzero)
    elev = np.degrees(np.arcsin(np.clip(sin_el, -1.0, 1.0)))
    azim = np.degrees(np.arctan2(xyz[:, 1], xyz[:, 0]))
    azim = np.where(nonzero, azim, 0.0)
    azim = np.where(azim <= -180.0, azim + 360.0, azim)
    return ranges, elev, azim


def cartesian_components(ranges, elevations, azimuths) -> np.ndarray:
    """(N, 3) Cartesian points from spherical components in degrees."""
    r = np.asarray(ranges, np.float64)
    el = np.radians(np.asarray(elevations, np.float64))
    az = np.radians(np.asarray(azimuths, np.float64))
    cos_el = np.cos(el)
    return np.column_stack([r * cos_el * np.cos(az), r * cos_el * np.sin(az), r * np.sin(el)])


def cartesian_to_spherical(point) -> SphericalCoord:
    r, el, az = spherical_components(np.asarray(point, np.float64).reshape(1, 3))
    return SphericalCoord(float(r[0]), float(el[0]), float(az[0]))


def spherical_to_cartesian(coord: SphericalCoord) -> np.ndarray:
    return cartesian_components([coord.range], [coord.elevation], [coord.azimuth])[0]
