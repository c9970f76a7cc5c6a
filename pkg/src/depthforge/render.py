"""Software z-buffer rendering of meshes into normalized depth patches.

Depth values use an inverted normalization: value = (zfar - z) / (zfar - znear)
clamped into (0, 1], so closer surfaces have strictly larger values and the
background (no hit) is exactly 0. This keeps the nonzero-foreground mask rule
trivially correct and values pose-comparable across views of one object.
"""

from __future__ import annotations

import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from ._raster import rasterize
from .geometry import Camera, Pose, TriangleMesh
from .viewsphere import Viewpoint

# smallest value a rendered hit may take; keeps hits distinguishable from background
MIN_FOREGROUND = 1e-6


@dataclass(frozen=True)
class DepthPatch:
    """Single-channel depth image, values in [0, 1], background exactly 0.

    znear/zfar record the metric normalization window in mm.
    """

    values: np.ndarray
    znear: float
    zfar: float

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float32)
        if v.ndim != 2:
            raise ValueError("patch values must be a 2-D array")
        if v.size and (float(v.min()) < 0.0 or float(v.max()) > 1.0):
            raise ValueError("patch values must lie in [0, 1]")
        if not self.znear < self.zfar:
            raise ValueError("znear must be < zfar")
        v = v.copy()
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def height(self) -> int:
        return self.values.shape[0]

    @property
    def width(self) -> int:
        return self.values.shape[1]

    def with_values(self, values: np.ndarray) -> "DepthPatch":
        return DepthPatch(values, self.znear, self.zfar)


@dataclass(frozen=True)
class ForegroundMask:
    """Binary mask: 1 where the source patch is nonzero."""

    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values)
        if v.ndim != 2:
            raise ValueError("mask values must be a 2-D array")
        if not np.isin(v, (0, 1)).all():
            raise ValueError("mask values must be binary")
        v = v.astype(np.uint8).copy()
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def height(self) -> int:
        return self.values.shape[0]

    @property
    def width(self) -> int:
        return self.values.shape[1]


def foreground_mask(patch: DepthPatch) -> ForegroundMask:
    """Exact nonzero test, no threshold: mask = 1 wherever the patch != 0."""
    return ForegroundMask((patch.values != 0).astype(np.uint8))


@dataclass(frozen=True)
class RenderConfig:
    """Patch geometry and depth normalization window.

    znear/zfar default to a window_mm-wide window centered on the camera-to-
    object distance. focal defaults to auto-framing: the mesh bounding sphere
    fills fill_fraction of the patch.
    """

    patch_size: int = 64
    window_mm: float = 500.0
    znear: float | None = None
    zfar: float | None = None
    focal: float | None = None
    fill_fraction: float = 0.9

    def __post_init__(self):
        if self.patch_size <= 0:
            raise ValueError("patch_size must be positive")
        if self.window_mm <= 0:
            raise ValueError("window_mm must be positive")
        if self.znear is not None and self.zfar is not None and not self.znear < self.zfar:
            raise ValueError("znear must be < zfar")
        if not 0 < self.fill_fraction <= 1:
            raise ValueError("fill_fraction must be in (0, 1]")

    def resolve_window(self, distance: float) -> tuple[float, float]:
        znear = self.znear if self.znear is not None else distance - 0.5 * self.window_mm
        zfar = self.zfar if self.zfar is not None else distance + 0.5 * self.window_mm
        return float(znear), float(zfar)

    def resolve_focal(self, distance: float, bound_radius: float) -> float:
        if self.focal is not None:
            return float(self.focal)
        if bound_radius <= 0:
            return float(self.patch_size)
        return 0.5 * self.fill_fraction * self.patch_size * distance / bound_radius


def render_depth(mesh: TriangleMesh, camera: Camera,
                 cfg: RenderConfig | None = None) -> DepthPatch:
    """Rasterize a mesh through a pinhole camera into a normalized depth patch.

    The per-pixel nearest surface depth z maps to (zfar - z) / (zfar - znear),
    clamped into (0, 1]; pixels with no hit are exactly 0. An empty mesh
    renders to an all-zero patch. A camera inside the mesh bounding sphere is
    allowed but warned about.
    """
    cfg = cfg or RenderConfig(patch_size=camera.width)
    centroid = mesh.centroid()
    distance = float(np.linalg.norm(camera.pose.translation - centroid))
    znear, zfar = cfg.resolve_window(distance)
    if znear >= zfar:
        raise ValueError("resolved depth window is empty (znear >= zfar)")
    if mesh.n_triangles == 0:
        return DepthPatch(np.zeros((camera.height, camera.width), np.float32), znear, zfar)
    if distance < mesh.bounding_radius():
        warnings.warn("camera is inside the mesh bounding sphere")
    verts_cam = camera.pose.world_to_local(mesh.vertices)
    zbuf = rasterize(verts_cam, mesh.triangles, float(camera.focal),
                     float(camera.cx), float(camera.cy),
                     camera.width, camera.height)
    return DepthPatch(normalize_zbuffer(zbuf, znear, zfar), znear, zfar)


def normalize_zbuffer(zbuf: np.ndarray, znear: float, zfar: float) -> np.ndarray:
    """Map raw nearest-hit depths (inf = no hit) to the inverted [0, 1] range."""
    hit = np.isfinite(zbuf)
    values = np.zeros(zbuf.shape, np.float32)
    norm = (zfar - zbuf[hit]) / (zfar - znear)
    values[hit] = np.clip(norm, MIN_FOREGROUND, 1.0).astype(np.float32)
    return values


@dataclass(frozen=True)
class RenderedView:
    patch: DepthPatch
    viewpoint: Viewpoint
    all_background: bool


class RenderError(RuntimeError):
    """Rendering failure for a specific viewpoint index."""

    def __init__(self, index: int, cause: Exception):
        super().__init__(f"rendering failed for viewpoint {index}: {cause}")
        self.index = index


def render_views(mesh: TriangleMesh, viewpoints: list[Viewpoint],
                 cfg: RenderConfig | None = None, workers: int = 1) -> list[RenderedView]:
    """Render one patch per viewpoint, in input order, aiming at the mesh centroid.

    Viewpoints are positioned relative to the object: the camera sits at
    centroid + viewpoint position and keeps the viewpoint's orientation, so
    the view sphere follows the object. Views whose patch came out all zero
    (object outside the frustum) are flagged. Rendering is deterministic and
    parallelizes across viewpoints when workers > 1.
    """
    cfg = cfg or RenderConfig()
    centroid = mesh.centroid()
    bound = mesh.bounding_radius()

    def render_one(item: tuple[int, Viewpoint]) -> RenderedView:
        i, vp = item
        try:
            distance = float(np.linalg.norm(vp.camera_pose.translation))
            focal = cfg.resolve_focal(distance, bound)
            pose = Pose(vp.camera_pose.rotation, vp.camera_pose.translation + centroid)
            camera = Camera(pose, focal, cfg.patch_size / 2.0, cfg.patch_size / 2.0,
                            cfg.patch_size, cfg.patch_size)
            patch = render_depth(mesh, camera, cfg)
            return RenderedView(patch, vp, not bool(patch.values.any()))
        except Exception as e:  # attach the viewpoint index
            raise RenderError(i, e) from e

    items = list(enumerate(viewpoints))
    if workers > 1 and len(items) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(render_one, items))
    return [render_one(it) for it in items]
