"""Camera viewpoints as vertices of a subdivided icosahedron.

Viewpoints live on a sphere of configurable radius centered on the object,
optionally restricted to the upper hemisphere, each combined with a set of
in-plane (roll) rotations. For rotation-invariant objects the viewpoint set
can be trimmed so that no two viewpoints produce the same image.

The icosahedron orientation matters for the hemisphere counts. The default
"cyclic" orientation (vertices at cyclic permutations of (0, +-1, +-phi))
yields 337 upper-half vertices after 3 subdivisions, hence 337 * 7 = 2359
viewpoints with the default in-plane set; the alternative "pole" orientation
(two vertices on +-z) yields 341 and is kept selectable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .geometry import Pose, Quaternion, TriangleMesh, look_at

PHI = (1.0 + math.sqrt(5.0)) / 2.0

MAX_SUBDIVISIONS = 6
HEMISPHERE_TOL = 1e-9  # unit-sphere z >= -tol counts as "upper half"

DEFAULT_IN_PLANE = (-45.0, -30.0, -15.0, 0.0, 15.0, 30.0, 45.0)

HEMISPHERES = ("full", "upper")
SYMMETRIES = ("regular", "plane_symmetric", "axis_symmetric")
ORIENTATIONS = ("cyclic", "pole")


def _icosahedron_vertices(orientation: str) -> np.ndarray:
    if orientation == "cyclic":
        v = []
        for s1 in (1.0, -1.0):
            for s2 in (1.0, -1.0):
                v.append((0.0, s1 * 1.0, s2 * PHI))
                v.append((s1 * 1.0, s2 * PHI, 0.0))
                v.append((s2 * PHI, 0.0, s1 * 1.0))
        verts = np.array(v)
    elif orientation == "pole":
        verts = [(0.0, 0.0, 1.0)]
        zr, rr = 1.0 / math.sqrt(5.0), 2.0 / math.sqrt(5.0)
        for i in range(5):
            a = 2.0 * math.pi * i / 5.0
            verts.append((rr * math.cos(a), rr * math.sin(a), zr))
        for i in range(5):
            a = 2.0 * math.pi * i / 5.0 + math.pi / 5.0
            verts.append((rr * math.cos(a), rr * math.sin(a), -zr))
        verts.append((0.0, 0.0, -1.0))
        verts = np.array(verts)
    else:
        raise ValueError(f"unknown icosahedron orientation {orientation!r}")
    return verts / np.linalg.norm(verts, axis=1, keepdims=True)


def _icosahedron_faces(verts: np.ndarray) -> np.ndarray:
    # Faces = mutually adjacent vertex triples; adjacency = minimal distance.
    d2 = ((verts[:, None, :] - verts[None, :, :]) ** 2).sum(-1)
    edge2 = d2[d2 > 1e-9].min()
    adj = np.abs(d2 - edge2) < 1e-9
    faces = []
    n = len(verts)
    for i in range(n):
        for j in range(i + 1, n):
            if not adj[i, j]:
                continue
            for k in range(j + 1, n):
                if adj[i, k] and adj[j, k]:
                    faces.append((i, j, k))
    out = []
    for a, b, c in faces:  # orient outward (normal along face centroid)
        normal = np.cross(verts[b] - verts[a], verts[c] - verts[a])
        if normal @ (verts[a] + verts[b] + verts[c]) < 0:
            b, c = c, b
        out.append((a, b, c))
    return np.array(out, dtype=np.int64)


def icosphere(subdivisions: int, orientation: str = "cyclic") -> TriangleMesh:
    """Unit icosphere: repeatedly split each face in four, re-projecting to the sphere.

    Vertex count follows V' = V + E from (V, E, F) = (12, 30, 20):
    12, 42, 162, 642, ... Subdivision depth is capped at 6.
    """
    if subdivisions < 0:
        raise ValueError("subdivisions must be >= 0")
    if subdivisions > MAX_SUBDIVISIONS:
        raise ValueError(f"subdivisions capped at {MAX_SUBDIVISIONS}")
    verts = _icosahedron_vertices(orientation)
    faces = _icosahedron_faces(verts)
    verts = [tuple(v) for v in verts]
    for _ in range(subdivisions):
        cache: dict[tuple[int, int], int] = {}

        def midpoint(i: int, j: int) -> int:
            key = (i, j) if i < j else (j, i)
            if key in cache:
                return cache[key]
            p = np.asarray(verts[i]) + np.asarray(verts[j])
            p = p / np.linalg.norm(p)
            verts.append(tuple(p))
            cache[key] = len(verts) - 1
            return cache[key]

        new_faces = []
        for a, b, c in faces:
            ab, bc, ca = midpoint(a, b), midpoint(b, c), midpoint(c, a)
            new_faces += [(a, ab, ca), (b, bc, ab), (c, ca, bc), (ab, bc, ca)]
        faces = np.array(new_faces, dtype=np.int64)
    return TriangleMesh(np.array(verts), faces)


@dataclass(frozen=True)
class ViewSphereConfig:
    """View-sampling parameters: sphere radius (mm), subdivision depth,
    hemisphere restriction, in-plane roll angles and symmetry trimming."""

    radius: float = 600.0
    subdivisions: int = 3
    hemisphere: str = "upper"
    in_plane_degrees: tuple[float, ...] = DEFAULT_IN_PLANE
    symmetry: str = "regular"
    orientation: str = "cyclic"

    def __post_init__(self):
        object.__setattr__(self, "in_plane_degrees", tuple(float(a) for a in self.in_plane_degrees))
        if self.radius <= 0:
            raise ValueError("radius must be positive")
        if not self.in_plane_degrees:
            raise ValueError("in_plane_degrees must be non-empty")
        if len(set(self.in_plane_degrees)) != len(self.in_plane_degrees):
            raise ValueError("in_plane_degrees must be duplicate-free")
        if self.hemisphere not in HEMISPHERES:
            raise ValueError(f"hemisphere must be one of {HEMISPHERES}")
        if self.symmetry not in SYMMETRIES:
            raise ValueError(f"symmetry must be one of {SYMMETRIES}")
        if self.orientation not in ORIENTATIONS:
            raise ValueError(f"orientation must be one of {ORIENTATIONS}")


@dataclass(frozen=True)
class Viewpoint:
    """A camera position on the view sphere plus one in-plane roll angle."""

    vertex_index: int
    in_plane: float
    camera_pose: Pose
    view_direction: np.ndarray

    def __post_init__(self):
        d = np.asarray(self.view_direction, dtype=np.float64).copy()
        d.setflags(write=False)
        object.__setattr__(self, "view_direction", d)

    def unit_position(self) -> np.ndarray:
        p = self.camera_pose.translation
        return p / np.linalg.norm(p)


def _pose_for_vertex(unit_vertex: np.ndarray, radius: float, roll_deg: float) -> Pose:
    eye = unit_vertex * radius
    up = np.array([0.0, 0.0, 1.0])
    if abs(unit_vertex @ up) > 1.0 - 1e-9:  # polar view: pick another up hint
        up = np.array([1.0, 0.0, 0.0])
    base = look_at(eye, np.zeros(3), up)
    roll = Quaternion.from_axis_angle([0.0, 0.0, 1.0], math.radians(roll_deg))
    return Pose(base.rotation * roll, eye)  # roll about the local optical axis


def hemisphere_vertex_indices(mesh: TriangleMesh, hemisphere: str) -> np.ndarray:
    if hemisphere == "full":
        return np.arange(mesh.n_vertices)
    return np.flatnonzero(mesh.vertices[:, 2] >= -HEMISPHERE_TOL)


def vertex_counts(config: ViewSphereConfig) -> dict[str, int]:
    """Report achieved vertex counts (total, hemisphere-filtered, after trim)."""
    mesh = icosphere(config.subdivisions, config.orientation)
    kept = hemisphere_vertex_indices(mesh, config.hemisphere)
    trimmed = _trim_vertex_indices(mesh.vertices, kept, config.symmetry)
    return {
        "total_vertices": mesh.n_vertices,
        "hemisphere_vertices": len(kept),
        "trimmed_vertices": len(trimmed),
        "viewpoints": len(trimmed) * len(config.in_plane_degrees),
    }


def sample_viewpoints(config: ViewSphereConfig) -> list[Viewpoint]:
    """All viewpoints for a config: hemisphere-filtered icosphere vertices
    crossed with the in-plane angles, each camera aimed at the origin, then
    symmetry-trimmed per config.symmetry."""
    mesh = icosphere(config.subdivisions, config.orientation)
    kept = hemisphere_vertex_indices(mesh, config.hemisphere)
    views = []
    for vi in kept:
        unit = mesh.vertices[vi]
        for roll in config.in_plane_degrees:
            pose = _pose_for_vertex(unit, config.radius, roll)
            views.append(Viewpoint(int(vi), roll, pose, -unit))
    return trim_symmetric(views, config.symmetry)


def _trim_vertex_indices(vertices: np.ndarray, kept: np.ndarray, symmetry: str) -> np.ndarray:
    if symmetry == "regular":
        return kept
    pts = vertices[kept]
    if symmetry == "plane_symmetric":
        # Mirror plane is x-z: keep azimuth in [0, 180) plus on-plane vertices,
        # i.e. everything with y >= -tol.
        return kept[pts[:, 1] >= -HEMISPHERE_TOL]
    if symmetry == "axis_symmetric":
        # One azimuth column: the meridian arc in the x-z plane (azimuth 0 and
        # 180), running equator -> pole -> equator; a surface of revolution
        # looks the same from every other azimuth at the same elevation.
        return kept[np.abs(pts[:, 1]) <= HEMISPHERE_TOL]
    raise ValueError(f"unknown symmetry {symmetry!r}")


def trim_symmetric(viewpoints: list[Viewpoint], symmetry: str) -> list[Viewpoint]:
    """Drop viewpoints that would duplicate images of a symmetric object.

    regular: unchanged. plane_symmetric: keep one side of the x-z mirror plane
    plus on-plane viewpoints. axis_symmetric: keep the x-z meridian column
    only. In-plane rotations of kept vertices are preserved; trimming is
    idempotent and always returns a subset of its input.
    """
    if symmetry == "regular":
        return list(viewpoints)
    if symmetry not in SYMMETRIES:
        raise ValueError(f"unknown symmetry {symmetry!r}")
    out = []
    for vp in viewpoints:
        y = vp.unit_position()[1]
        if symmetry == "plane_symmetric":
            if y >= -HEMISPHERE_TOL:
                out.append(vp)
        else:  # axis_symmetric
            if abs(y) <= HEMISPHERE_TOL:
                out.append(vp)
    return out
