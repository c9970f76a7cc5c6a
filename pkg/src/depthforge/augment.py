"""Stochastic augmentation of clean depth patches into training inputs.

A per-image parameter vector drives three stages, composed as
foreground distortion -> random occlusions -> background fill (the fill only
touches pixels still exactly 0, so occluders and the warped object sit on top
of the noise background). The foreground mask of a training triple is always
computed from the clean patch before any transform.

Everything is deterministic given the sampled vector: polygon shapes and noise
fields are re-derived from seeds stored in the vector, never from shared RNG
state, so batch generation can run on any number of workers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .geometry import Quaternion
from .noise import NoiseSpec, fill_field
from .render import DepthPatch, ForegroundMask, foreground_mask
from .seeds import make_rng

BG_KINDS = ("perlin", "cellular", "white")
BG_FRACTAL_OCTAVES = 4  # backgrounds use fractal gradient noise
MIN_BACKGROUND_FILL = 1e-6  # filled pixels stay strictly positive


@dataclass(frozen=True)
class AugmentationConfig:
    """Sampling bounds for the per-image augmentation vector.

    Defaults: background and x/y warp-field frequencies in [0.0001, 0.1]
    cycles/px, z-field frequency in [0.01, 0.1], planar warp amplitude up to
    10 px and depth offset up to 0.005. Occluder centers come from a
    fair-coin mixture of U(0, size/4) and U(size/4, size); radii from
    U(10, size/4); vertex counts from U{3..10};
    spikiness sigma from U(0, 0.5). The angular irregularity defaults to
    U(0, pi/n_vertices) per polygon unless an explicit range is given.
    """

    patch_size: int = 64
    bg_kinds: tuple[str, ...] = BG_KINDS
    bg_frequency_range: tuple[float, float] = (0.0001, 0.1)
    fg_frequency_xy_range: tuple[float, float] = (0.0001, 0.1)
    fg_frequency_z_range: tuple[float, float] = (0.01, 0.1)
    warp_xy_range: tuple[float, float] = (0.0, 10.0)
    warp_z_range: tuple[float, float] = (0.0, 0.005)
    occluder_count_range: tuple[int, int] = (0, 3)
    occluder_radius_range: tuple[float, float] | None = None  # default (10, size/4)
    vertex_count_range: tuple[int, int] = (3, 10)
    spikiness_range: tuple[float, float] = (0.0, 0.5)
    irregularity_range: tuple[float, float] | None = None  # default U(0, pi/n)
    enable_background: bool = True
    enable_foreground: bool = True
    enable_occlusion: bool = True
    sensor_fraction: float = 0.0  # share of images routed through the sensor hook

    def __post_init__(self):
        if self.patch_size <= 0:
            raise ValueError("patch_size must be positive")
        for kind in self.bg_kinds:
            if kind not in BG_KINDS:
                raise ValueError(f"unknown background noise kind {kind!r}")
        for name in ("bg_frequency_range", "fg_frequency_xy_range",
                     "fg_frequency_z_range", "warp_xy_range", "warp_z_range",
                     "spikiness_range"):
            lo, hi = getattr(self, name)
            if lo > hi:
                raise ValueError(f"{name} is inverted")
        lo, hi = self.occluder_count_range
        if lo < 0 or lo > hi:
            raise ValueError("occluder_count_range is invalid")
        lo, hi = self.vertex_count_range
        if lo < 3 or lo > hi:
            raise ValueError("vertex_count_range must start at >= 3")
        if not 0.0 <= self.sensor_fraction <= 1.0:
            raise ValueError("sensor_fraction must be in [0, 1]")

    def radius_range(self) -> tuple[float, float]:
        if self.occluder_radius_range is not None:
            return self.occluder_radius_range
        return (10.0, self.patch_size / 4.0)


@dataclass(frozen=True)
class OccluderSpec:
    """One occluding polygon: center, mean radius, vertex count, angular
    irregularity, radial spikiness, depth as a fraction above the foreground
    maximum, and the seed for its shape RNG."""

    center_x: float
    center_y: float
    radius: float
    n_vertices: int
    irregularity: float
    spikiness: float
    depth_frac: float
    shape_seed: int


@dataclass(frozen=True)
class AugmentationVector:
    """All sampled parameters for augmenting one image (the per-image noise vector)."""

    bg_kind: str
    bg_frequency: float
    bg_seed: int
    fg_frequency_x: float
    fg_frequency_y: float
    fg_frequency_z: float
    warp_xy: float
    warp_z: float
    fg_seeds: tuple[int, int, int]
    occluders: tuple[OccluderSpec, ...]
    with_background: bool = True
    with_foreground: bool = True
    with_occlusions: bool = True
    apply_sensor: bool = False


def sample_augmentation_vector(cfg: AugmentationConfig,
                               rng: np.random.Generator) -> AugmentationVector:
    """Draw a fresh augmentation vector from the configured distributions."""
    size = float(cfg.patch_size)
    bg_kind = cfg.bg_kinds[int(rng.integers(0, len(cfg.bg_kinds)))]
    bg_frequency = float(rng.uniform(*cfg.bg_frequency_range))
    bg_seed = int(rng.integers(0, 2 ** 63))
    fx = float(rng.uniform(*cfg.fg_frequency_xy_range))
    fy = float(rng.uniform(*cfg.fg_frequency_xy_range))
    fz = float(rng.uniform(*cfg.fg_frequency_z_range))
    w_xy = float(rng.uniform(*cfg.warp_xy_range))
    w_z = float(rng.uniform(*cfg.warp_z_range))
    fg_seeds = tuple(int(rng.integers(0, 2 ** 63)) for _ in range(3))
    apply_sensor = cfg.sensor_fraction > 0 and rng.random() < cfg.sensor_fraction

    lo, hi = cfg.occluder_count_range
    n_occ = int(rng.integers(lo, hi + 1))
    r_lo, r_hi = cfg.radius_range()
    occluders = []
    for _ in range(n_occ):
        cx = _sample_center(rng, size)
        cy = _sample_center(rng, size)
        radius = float(rng.uniform(r_lo, r_hi))
        n_vert = int(rng.integers(cfg.vertex_count_range[0],
                                  cfg.vertex_count_range[1] + 1))
        if cfg.irregularity_range is not None:
            eps = float(rng.uniform(*cfg.irregularity_range))
        else:
            eps = float(rng.uniform(0.0, math.pi / n_vert))
        sigma = float(rng.uniform(*cfg.spikiness_range))
        depth_frac = float(rng.random())
        shape_seed = int(rng.integers(0, 2 ** 63))
        occluders.append(OccluderSpec(cx, cy, radius, n_vert, eps, sigma,
                                      depth_frac, shape_seed))
    return AugmentationVector(
        bg_kind=bg_kind, bg_frequency=bg_frequency, bg_seed=bg_seed,
        fg_frequency_x=fx, fg_frequency_y=fy, fg_frequency_z=fz,
        warp_xy=w_xy, warp_z=w_z, fg_seeds=fg_seeds,
        occluders=tuple(occluders),
        with_background=cfg.enable_background,
        with_foreground=cfg.enable_foreground,
        with_occlusions=cfg.enable_occlusion,
        apply_sensor=apply_sensor,
    )


def _sample_center(rng: np.random.Generator, size: float) -> float:
    # fair-coin mixture of U(0, size/4) and U(size/4, size)
    if rng.random() < 0.5:
        return float(rng.uniform(0.0, size / 4.0))
    return float(rng.uniform(size / 4.0, size))


def _background_spec(z: AugmentationVector) -> NoiseSpec:
    octaves = BG_FRACTAL_OCTAVES if z.bg_kind == "perlin" else 1
    return NoiseSpec(z.bg_kind, z.bg_frequency, z.bg_seed, octaves=octaves)


def fill_background(patch: DepthPatch, mask: ForegroundMask,
                    z: AugmentationVector) -> DepthPatch:
    """Replace mask==0 pixels with noise remapped from [-1, 1] to (0, 1];
    mask==1 pixels are untouched."""
    if mask.values.shape != patch.values.shape:
        raise ValueError("mask dimensions do not match the patch")
    field_vals = fill_field(_background_spec(z), patch.width, patch.height).values
    fill = np.clip((field_vals + 1.0) / 2.0, MIN_BACKGROUND_FILL, 1.0)
    out = patch.values.astype(np.float64).copy()
    bg = mask.values == 0
    out[bg] = fill[bg]
    return patch.with_values(out.astype(np.float32))


def distort_foreground(patch: DepthPatch, z: AugmentationVector,
                       fields: tuple[np.ndarray, np.ndarray, np.ndarray] | None = None,
                       ) -> DepthPatch:
    """Warp the patch by a 3-component noise field.

    Output pixel (i, j) samples input (i + w_xy*v0[i,j], j + w_xy*v1[i,j]) at
    the nearest pixel, with out-of-bounds reads yielding 0; sampled nonzero
    (foreground) values are then offset by w_z*v2[i,j] and clamped to [0, 1].
    Explicit fields override the vector's noise fields (used for testing).
    """
    h, w = patch.values.shape
    if fields is None:
        v0 = fill_field(NoiseSpec("perlin", z.fg_frequency_x, z.fg_seeds[0]), w, h).values
        v1 = fill_field(NoiseSpec("perlin", z.fg_frequency_y, z.fg_seeds[1]), w, h).values
        v2 = fill_field(NoiseSpec("perlin", z.fg_frequency_z, z.fg_seeds[2]), w, h).values
    else:
        v0, v1, v2 = fields
    rows, cols = np.meshgrid(np.arange(h, dtype=np.float64),
                             np.arange(w, dtype=np.float64), indexing="ij")
    src_r = np.floor(rows + z.warp_xy * v0 + 0.5).astype(np.int64)
    src_c = np.floor(cols + z.warp_xy * v1 + 0.5).astype(np.int64)
    inside = (src_r >= 0) & (src_r < h) & (src_c >= 0) & (src_c < w)
    out = np.zeros((h, w), np.float64)
    vals = patch.values.astype(np.float64)
    out[inside] = vals[src_r[inside], src_c[inside]]
    fg = out != 0
    out[fg] = np.clip(out[fg] + z.warp_z * v2[fg], 0.0, 1.0)
    return patch.with_values(out.astype(np.float32))


def generate_occlusion_polygon(occ: OccluderSpec,
                               rng: np.random.Generator) -> np.ndarray:
    """Random star-shaped polygon: walk a circle taking jittered angular steps
    with jittered radii.

    Steps are drawn from U(2pi/N - eps, 2pi/N + eps) and normalized so they
    sum to exactly 2pi; radii from Normal(radius, sigma) clamped into
    (0, 2*radius]. Returns an (N, 2) array of (x, y) points.
    """
    n = occ.n_vertices
    if n < 3:
        raise ValueError("polygon needs at least 3 vertices")
    if occ.radius <= 0:
        raise ValueError("polygon radius must be positive")
    if occ.irregularity < 0 or occ.spikiness < 0:
        raise ValueError("irregularity and spikiness must be non-negative")
    base = 2.0 * math.pi / n
    steps = np.array([rng.uniform(base - occ.irregularity, base + occ.irregularity)
                      for _ in range(n)])
    steps = steps / (steps.sum() / (2.0 * math.pi))
    theta = rng.uniform(0.0, 2.0 * math.pi)
    points = np.empty((n, 2))
    for i in range(n):
        r = min(max(rng.normal(occ.radius, occ.spikiness), 1e-12), 2.0 * occ.radius)
        points[i, 0] = occ.center_x + r * math.cos(theta)
        points[i, 1] = occ.center_y + r * math.sin(theta)
        theta += steps[i]
    return points


def polygon_mask(points: np.ndarray, width: int, height: int) -> np.ndarray:
    """Even-odd rasterization: pixel (r, c) is covered when its center
    (c + 0.5, r + 0.5) lies inside the polygon (crossing-number test)."""
    px, py = np.meshgrid(np.arange(width, dtype=np.float64) + 0.5,
                         np.arange(height, dtype=np.float64) + 0.5)
    inside = np.zeros((height, width), dtype=bool)
    n = len(points)
    for i in range(n):
        x_i, y_i = points[i]
        x_j, y_j = points[(i + 1) % n]
        if y_i == y_j:
            continue
        crosses = ((y_i > py) != (y_j > py)) & \
            (px < (x_j - x_i) * (py - y_i) / (y_j - y_i) + x_i)
        inside ^= crosses
    return inside


def apply_occlusions(patch: DepthPatch, z: AugmentationVector) -> DepthPatch:
    """Paint each occluder polygon over the patch with one constant value.

    The value sits in [max foreground value, 1] so occluders are in front of
    the object under the inverted depth normalization; overlapping polygons
    are painted in order (later ones on top). Pixels outside all polygons are
    unchanged.
    """
    out = patch.values.astype(np.float64).copy()
    max_fg = float(out.max())
    h, w = out.shape
    for occ in z.occluders:
        poly = generate_occlusion_polygon(occ, make_rng(occ.shape_seed))
        mask = polygon_mask(poly, w, h)
        value = max_fg + occ.depth_frac * (1.0 - max_fg)
        out[mask] = value
    return patch.with_values(out.astype(np.float32))


@dataclass(frozen=True)
class PairSample:
    """(clean, augmented, mask) training triple plus its parameter vector."""

    clean: DepthPatch
    augmented: DepthPatch
    mask: ForegroundMask
    z: AugmentationVector
    class_id: int | None = None
    pose: Quaternion | None = None
    viewpoint_index: int | None = None
    in_plane: float | None = None


def augment(clean: DepthPatch, z: AugmentationVector,
            source: DepthPatch | None = None, *,
            class_id: int | None = None, pose: Quaternion | None = None,
            viewpoint_index: int | None = None,
            in_plane: float | None = None) -> PairSample:
    """Build a training triple from a clean patch and a sampled vector.

    Stage order: foreground distortion, then occlusions, then background fill
    of pixels still exactly 0. Disabled stages are skipped. `source` lets a
    sensor-simulation hook substitute the image entering the augmentation
    chain while the clean patch stays the reconstruction target.
    """
    mask = foreground_mask(clean)
    img = source if source is not None else clean
    if img.values.shape != clean.values.shape:
        raise ValueError("source patch dimensions do not match the clean patch")
    if z.with_foreground:
        img = distort_foreground(img, z)
    if z.with_occlusions:
        img = apply_occlusions(img, z)
    if z.with_background:
        img = fill_background(img, foreground_mask(img), z)
    return PairSample(clean=clean, augmented=img, mask=mask, z=z,
                      class_id=class_id, pose=pose,
                      viewpoint_index=viewpoint_index, in_plane=in_plane)
