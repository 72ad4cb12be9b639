"""CA-CFAR and OS-CFAR detectors over 4D radar tensors.

Both detectors slide a 1-D window along a single tensor axis (range by
default, doppler optionally). For the cell under test, ``train_cells``
noise samples are taken on each side beyond ``guard_cells`` guards:

* cell-averaging (CA) estimates the noise as the mean of the training
  cells,
* ordered-statistic (OS) pools the training cells from both sides and
  takes the k-th smallest.

A cell is detected iff its intensity strictly exceeds
``threshold_scale * noise_estimate``. ``cfar_oracle`` recomputes the
statistic from scratch for every cell with no sliding-window reuse and
must produce exactly the same detection set.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .core import GridSpec, PointCloud, RadarTensor4D, SphericalCoord, cartesian_components
from .errors import ConfigError

_AXIS_INDEX = {"range": 1, "doppler": 0}


@dataclass(frozen=True)
class CfarConfig:
    variant: str  # "ca" or "os"
    axis: str = "range"  # "range" or "doppler"
    guard_cells: int = 2
    train_cells: int = 4
    threshold_scale: float = 6.0
    order_k: int | None = None  # OS rank, 1-based; defaults to 3/4 of the pool
    edge_policy: str = "skip"  # "skip" or "clamp"

    def __post_init__(self):
        if self.variant not in ("ca", "os"):
            raise ConfigError(f"unknown CFAR variant {self.variant!r}")
        if self.axis not in _AXIS_INDEX:
            raise ConfigError(f"unknown CFAR axis {self.axis!r}")
        if self.edge_policy not in ("skip", "clamp"):
            raise ConfigError(f"unknown edge policy {self.edge_policy!r}")
        if self.guard_cells < 0:
            raise ConfigError("guard_cells must be >= 0")
        if self.train_cells < 1:
            raise ConfigError("train_cells must be >= 1")
        if not self.threshold_scale > 0:
            raise ConfigError("threshold_scale must be > 0")
        if self.variant == "os":
            k = self.rank
            if not 1 <= k <= 2 * self.train_cells:
                raise ConfigError(f"order_k={k} outside [1, {2 * self.train_cells}]")

    @property
    def rank(self) -> int:
        if self.order_k is not None:
            return self.order_k
        return max(1, (3 * self.train_cells) // 2)


@dataclass(frozen=True)
class Detection:
    cell: tuple[int, int, int, int]  # (d, r, e, a)
    intensity: float
    position: SphericalCoord
    doppler_velocity: float


DetectionList = list


def _check_window(cfg: CfarConfig, spec: GridSpec) -> int:
    axis = _AXIS_INDEX[cfg.axis]
    length = spec.shape[axis]
    if 2 * (cfg.guard_cells + cfg.train_cells) >= length:
        raise ConfigError(
            f"CFAR window 2*({cfg.guard_cells}+{cfg.train_cells})+1 exceeds "
            f"{cfg.axis} axis of length {length}"
        )
    return axis


def _axis_lines(data: np.ndarray, axis: int) -> np.ndarray:
    """Tensor rearranged to contiguous (n_lines, axis_length)."""
    moved = np.moveaxis(data, axis, -1)
    return np.ascontiguousarray(moved).reshape(-1, moved.shape[-1])


def _lines_to_tensor_shape(lines_arr: np.ndarray, shape: tuple, axis: int) -> np.ndarray:
    moved_shape = tuple(s for i, s in enumerate(shape) if i != axis) + (shape[axis],)
    return np.moveaxis(lines_arr.reshape(moved_shape), -1, axis)


def _clamped_training(line: np.ndarray, i: int, guard: int, train: int) -> np.ndarray | None:
    """Training cells for an edge cell with the window shrunk symmetrically."""
    length = len(line)
    t_eff = min(train, i - guard, length - 1 - i - guard)
    if t_eff < 1:
        return None
    left = line[i - guard - t_eff : i - guard]
    right = line[i + guard + 1 : i + guard + 1 + t_eff]
    return np.concatenate([left, right])


def _noise_for_training(train: np.ndarray, cfg: CfarConfig) -> float:
    if cfg.variant == "ca":
        return np.mean(train)
    k = min(cfg.rank, len(train))
    return np.partition(train, k - 1)[k - 1]


def _detect_lines(lines: np.ndarray, cfg: CfarConfig) -> np.ndarray:
    """Vectorized detection mask per line; edge cells handled per policy."""
    guard, train = cfg.guard_cells, cfg.train_cells
    half = guard + train
    length = lines.shape[1]
    mask = np.zeros_like(lines, dtype=bool)

    windows = sliding_window_view(lines, 2 * half + 1, axis=1)
    training = np.concatenate([windows[..., :train], windows[..., -train:]], axis=-1)
    if cfg.variant == "ca":
        noise = np.mean(training, axis=-1)
    else:
        k = cfg.rank
        noise = np.partition(training, k - 1, axis=-1)[..., k - 1]
    interior = lines[:, half : length - half]
    mask[:, half : length - half] = interior > cfg.threshold_scale * noise

    if cfg.edge_policy == "clamp":
        edge_cols = [*range(half), *range(length - half, length)]
        for row in range(lines.shape[0]):
            line = lines[row]
            for i in edge_cols:
                train_vals = _clamped_training(line, i, guard, train)
                if train_vals is None:
                    continue
                noise_i = _noise_for_training(train_vals, cfg)
                mask[row, i] = line[i] > cfg.threshold_scale * noise_i
    return mask


def _detections_from_mask(tensor: RadarTensor4D, mask: np.ndarray) -> DetectionList:
    spec = tensor.spec
    detections = []
    for d, r, e, a in np.argwhere(mask):
        rng, el, az = spec.bin_center_spherical(r, e, a)
        detections.append(
            Detection(
                cell=(int(d), int(r), int(e), int(a)),
                intensity=float(tensor.data[d, r, e, a]),
                position=SphericalCoord(float(rng), float(el), float(az)),
                doppler_velocity=float(spec.doppler_velocity(int(d))),
            )
        )
    return detections


def _run_fast(tensor: RadarTensor4D, cfg: CfarConfig) -> DetectionList:
    axis = _check_window(cfg, tensor.spec)
    lines = _axis_lines(tensor.data, axis)
    mask = _detect_lines(lines, cfg)
    return _detections_from_mask(tensor, _lines_to_tensor_shape(mask, tensor.spec.shape, axis))


def ca_cfar(tensor: RadarTensor4D, cfg: CfarConfig) -> DetectionList:
    """Cell-averaging CFAR; see module docstring for the decision rule."""
    if cfg.variant != "ca":
        raise ConfigError("ca_cfar requires variant='ca'")
    return _run_fast(tensor, cfg)


def os_cfar(tensor: RadarTensor4D, cfg: CfarConfig) -> DetectionList:
    """Ordered-statistic CFAR; training cells from both sides are pooled."""
    if cfg.variant != "os":
        raise ConfigError("os_cfar requires variant='os'")
    return _run_fast(tensor, cfg)


def run_cfar(tensor: RadarTensor4D, cfg: CfarConfig) -> DetectionList:
    return ca_cfar(tensor, cfg) if cfg.variant == "ca" else os_cfar(tensor, cfg)


def cfar_oracle(tensor: RadarTensor4D, cfg: CfarConfig) -> DetectionList:
    """Brute-force reference detector.

    Recomputes the noise statistic independently for every cell (no
    sliding-window reuse); intended as the test oracle for both variants.
    """
    axis = _check_window(cfg, tensor.spec)
    guard, train = cfg.guard_cells, cfg.train_cells
    half = guard + train
    lines = _axis_lines(tensor.data, axis)
    length = lines.shape[1]
    mask = np.zeros_like(lines, dtype=bool)
    for row in range(lines.shape[0]):
        line = lines[row]
        for i in range(length):
            if half <= i < length - half:
                left = line[i - guard - train : i - guard]
                right = line[i + guard + 1 : i + guard + 1 + train]
                train_vals = np.concatenate([left, right])
            elif cfg.edge_policy == "clamp":
                train_vals = _clamped_training(line, i, guard, train)
                if train_vals is None:
                    continue
            else:
                continue
            noise = _noise_for_training(train_vals, cfg)
            mask[row, i] = line[i] > cfg.threshold_scale * noise
    return _detections_from_mask(tensor, _lines_to_tensor_shape(mask, tensor.spec.shape, axis))


def cfar_ratio_field(tensor: RadarTensor4D, cfg: CfarConfig) -> np.ndarray:
    """Per-cell ratio of intensity to the CFAR noise estimate.

    Thresholding this field at ``s`` reproduces the detector at
    ``threshold_scale = s`` up to floating-point rounding of the division,
    which makes it the natural score field for point-budget sweeps. Cells
    that can never be detected (skipped edges) score 0; a zero noise
    estimate yields +inf for nonzero cells.
    """
    axis = _check_window(cfg, tensor.spec)
    guard, train = cfg.guard_cells, cfg.train_cells
    half = guard + train
    lines = _axis_lines(tensor.data, axis)
    length = lines.shape[1]
    ratio = np.zeros_like(lines)

    windows = sliding_window_view(lines, 2 * half + 1, axis=1)
    training = np.concatenate([windows[..., :train], windows[..., -train:]], axis=-1)
    if cfg.variant == "ca":
        noise = np.mean(training, axis=-1)
    else:
        k = cfg.rank
        noise = np.partition(training, k - 1, axis=-1)[..., k - 1]
    interior = lines[:, half : length - half]
    with np.errstate(divide="ignore", invalid="ignore"):
        r = np.where(noise > 0, interior / noise, np.where(interior > 0, np.inf, 0.0))
    ratio[:, half : length - half] = r

    if cfg.edge_policy == "clamp":
        edge_cols = [*range(half), *range(length - half, length)]
        for row in range(lines.shape[0]):
            line = lines[row]
            for i in edge_cols:
                train_vals = _clamped_training(line, i, guard, train)
                if train_vals is None:
                    continue
                noise_i = _noise_for_training(train_vals, cfg)
                if noise_i > 0:
                    ratio[row, i] = line[i] / noise_i
                elif line[i] > 0:
                    ratio[row, i] = np.inf
    return _lines_to_tensor_shape(ratio, tensor.spec.shape, axis).astype(np.float64, copy=False)


def detections_to_point_cloud(detections: DetectionList, spec: GridSpec, frame_id: int = 0) -> PointCloud:
    """Detections as Cartesian bin-center points with intensity = cell value."""
    if not detections:
        return PointCloud.empty(frame_id)
    ranges = [d.position.range for d in detections]
    els = [d.position.elevation for d in detections]
    azs = [d.position.azimuth for d in detections]
    xyz = cartesian_components(ranges, els, azs)
    intensity = [d.intensity for d in detections]
    return PointCloud.from_xyz(xyz, intensity, frame_id)
