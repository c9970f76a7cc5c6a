"""Meshes, quaternions, poses and pinhole cameras shared by the whole pipeline.

Conventions: positions are millimeters; the camera frame is x-right, y-down,
z-forward (a camera looks along its local +z axis). All types are immutable
after construction and safe to share across threads.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

UNIT_TOL = 1e-6


class ObjParseError(ValueError):
    """Raised for malformed OBJ input; the message names the offending line."""


def _vec3(v) -> np.ndarray:
    a = np.asarray(v, dtype=np.float64)
    if a.shape != (3,):
        raise ValueError(f"expected a 3-vector, got shape {a.shape}")
    return a


def _frozen(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class Quaternion:
    """Rotation quaternion (w, x, y, z). q and -q denote the same rotation."""

    w: float
    x: float
    y: float
    z: float

    @staticmethod
    def identity() -> "Quaternion":
        return Quaternion(1.0, 0.0, 0.0, 0.0)

    @staticmethod
    def from_axis_angle(axis, angle: float) -> "Quaternion":
        a = _vec3(axis)
        n = float(np.linalg.norm(a))
        if n < 1e-12:
            raise ValueError("rotation axis must be nonzero")
        a = a / n
        h = 0.5 * angle
        s = math.sin(h)
        return Quaternion(math.cos(h), a[0] * s, a[1] * s, a[2] * s)

    @staticmethod
    def from_rotation_matrix(m: np.ndarray) -> "Quaternion":
        """Shepperd's method; expects a proper rotation matrix."""
        m = np.asarray(m, dtype=np.float64)
        t = m[0, 0] + m[1, 1] + m[2, 2]
        if t > 0:
            s = math.sqrt(t + 1.0) * 2.0
            q = (0.25 * s, (m[2, 1] - m[1, 2]) / s, (m[0, 2] - m[2, 0]) / s,
                 (m[1, 0] - m[0, 1]) / s)
        elif m[0, 0] >= m[1, 1] and m[0, 0] >= m[2, 2]:
            s = math.sqrt(1.0 + m[0, 0] - m[1, 1] - m[2, 2]) * 2.0
            q = ((m[2, 1] - m[1, 2]) / s, 0.25 * s, (m[0, 1] + m[1, 0]) / s,
                 (m[0, 2] + m[2, 0]) / s)
        elif m[1, 1] >= m[2, 2]:
            s = math.sqrt(1.0 + m[1, 1] - m[0, 0] - m[2, 2]) * 2.0
            q = ((m[0, 2] - m[2, 0]) / s, (m[0, 1] + m[1, 0]) / s, 0.25 * s,
                 (m[1, 2] + m[2, 1]) / s)
        else:
            s = math.sqrt(1.0 + m[2, 2] - m[0, 0] - m[1, 1]) * 2.0
            q = ((m[1, 0] - m[0, 1]) / s, (m[0, 2] + m[2, 0]) / s,
                 (m[1, 2] + m[2, 1]) / s, 0.25 * s)
        return Quaternion(*q).normalized()

    def norm(self) -> float:
        return math.sqrt(self.w * self.w + self.x * self.x
                         + self.y * self.y + self.z * self.z)

    def normalized(self) -> "Quaternion":
        n = self.norm()
        if n < 1e-12:
            raise ValueError("cannot normalize a zero quaternion")
        return Quaternion(self.w / n, self.x / n, self.y / n, self.z / n)

    def is_unit(self, tol: float = UNIT_TOL) -> bool:
        return abs(self.norm() - 1.0) <= tol

    def dot(self, other: "Quaternion") -> float:
        return (self.w * other.w + self.x * other.x
                + self.y * other.y + self.z * other.z)

    def __mul__(self, o: "Quaternion") -> "Quaternion":
        w1, x1, y1, z1 = self.w, self.x, self.y, self.z
        w2, x2, y2, z2 = o.w, o.x, o.y, o.z
        return Quaternion(
            w1 * w2 - x1 * x2 - y1 * y2 - z1 * z2,
            w1 * x2 + x1 * w2 + y1 * z2 - z1 * y2,
            w1 * y2 - x1 * z2 + y1 * w2 + z1 * x2,
            w1 * z2 + x1 * y2 - y1 * x2 + z1 * w2,
        )

    def to_rotation_matrix(self) -> np.ndarray:
        w, x, y, z = self.w, self.x, self.y, self.z
        return np.array([
            [1 - 2 * (y * y + z * z), 2 * (x * y - z * w), 2 * (x * z + y * w)],
            [2 * (x * y + z * w), 1 - 2 * (x * x + z * z), 2 * (y * z - x * w)],
            [2 * (x * z - y * w), 2 * (y * z + x * w), 1 - 2 * (x * x + y * y)],
        ])

    def rotate(self, v) -> np.ndarray:
        return self.to_rotation_matrix() @ _vec3(v)

    def as_array(self) -> np.ndarray:
        return np.array([self.w, self.x, self.y, self.z])


def angular_distance(q1: Quaternion, q2: Quaternion) -> float:
    """Rotation angle between two orientations: 2*arccos(|q1 . q2|), in [0, pi].

    Symmetric and invariant under a sign flip of either argument. Inputs must
    be unit quaternions (norm within 1e-6). Computed through the relative
    rotation's atan2 form, which is exact at 0 where arccos loses precision.
    """
    for q in (q1, q2):
        if not q.is_unit():
            raise ValueError(f"quaternion is not unit norm: {q}")
    # conj(q1) * q2: scalar part = q1 . q2, vector part vanishes exactly when
    # the rotations coincide
    w = q1.w * q2.w + q1.x * q2.x + q1.y * q2.y + q1.z * q2.z
    x = q1.w * q2.x - q1.x * q2.w - q1.y * q2.z + q1.z * q2.y
    y = q1.w * q2.y - q1.y * q2.w - q1.z * q2.x + q1.x * q2.z
    z = q1.w * q2.z - q1.z * q2.w - q1.x * q2.y + q1.y * q2.x
    return 2.0 * math.atan2(math.sqrt(x * x + y * y + z * z), abs(w))


@dataclass(frozen=True)
class Pose:
    """Rigid transform: rotation (unit quaternion) plus translation in mm.

    Interpreted as local-to-world: a camera with this pose sits at
    `translation` and looks along `forward()` in world space.
    """

    rotation: Quaternion
    translation: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "translation", _frozen(_vec3(self.translation).copy()))
        if not self.rotation.is_unit():
            raise ValueError("pose rotation must be a unit quaternion")

    def rotation_matrix(self) -> np.ndarray:
        return self.rotation.to_rotation_matrix()

    def forward(self) -> np.ndarray:
        """World-space direction of the local +z (optical) axis."""
        return self.rotation_matrix() @ np.array([0.0, 0.0, 1.0])

    def world_to_local(self, points: np.ndarray) -> np.ndarray:
        pts = np.asarray(points, dtype=np.float64)
        return (pts - self.translation) @ self.rotation_matrix()


@dataclass(frozen=True)
class TriangleMesh:
    """Indexed triangle mesh: vertices (N,3) float mm, triangles (M,3) int."""

    vertices: np.ndarray
    triangles: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.vertices, dtype=np.float64).reshape(-1, 3).copy()
        t = np.asarray(self.triangles, dtype=np.int64).reshape(-1, 3).copy()
        if t.size and (t.min() < 0 or t.max() >= len(v)):
            raise ValueError("triangle index out of range")
        object.__setattr__(self, "vertices", _frozen(v))
        object.__setattr__(self, "triangles", _frozen(t))

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    @property
    def n_triangles(self) -> int:
        return len(self.triangles)

    def centroid(self) -> np.ndarray:
        if not len(self.vertices):
            return np.zeros(3)
        return self.vertices.mean(axis=0)

    def bounding_radius(self, center=None) -> float:
        if not len(self.vertices):
            return 0.0
        c = self.centroid() if center is None else _vec3(center)
        return float(np.linalg.norm(self.vertices - c, axis=1).max())


@dataclass(frozen=True)
class Camera:
    """Pinhole camera: pose (camera-to-world), focal length and principal point in px."""

    pose: Pose
    focal: float
    cx: float
    cy: float
    width: int
    height: int

    def __post_init__(self):
        if self.focal <= 0:
            raise ValueError("focal length must be positive")
        if self.width <= 0 or self.height <= 0:
            raise ValueError("image size must be positive")


def look_at(eye, target, up) -> Pose:
    """Pose whose forward axis points from eye to target (right-handed frame).

    `up` fixes the image roll: world up appears up in the image. Degenerate
    inputs (eye == target, up parallel to the view direction) raise.
    """
    eye, target, up = _vec3(eye), _vec3(target), _vec3(up)
    f = target - eye
    fn = np.linalg.norm(f)
    if fn < 1e-12:
        raise ValueError("look_at: eye and target coincide")
    f = f / fn
    r = np.cross(f, up)
    rn = np.linalg.norm(r)
    if rn < 1e-9:
        raise ValueError("look_at: up vector is parallel to the view direction")
    r = r / rn
    d = np.cross(f, r)  # image-down axis
    m = np.column_stack([r, d, f])
    return Pose(Quaternion.from_rotation_matrix(m), eye)


def load_mesh(data: bytes | str) -> TriangleMesh:
    """Parse an ASCII OBJ subset: v/f records, quads fan-triangulated.

    Normals, texture coordinates and grouping records are ignored; unknown
    keywords produce a single warning each. Malformed lines and out-of-range
    indices raise ObjParseError naming the line number.
    """
    if isinstance(data, bytes):
        data = data.decode("utf-8", errors="replace")
    vertices: list[tuple[float, float, float]] = []
    faces: list[tuple[int, int, int]] = []
    silent = {"vn", "vt", "vp", "o", "g", "s", "mtllib", "usemtl", "l"}
    warned: set[str] = set()
    for lineno, raw in enumerate(data.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        key = parts[0]
        if key == "v":
            if len(parts) not in (4, 5):
                raise ObjParseError(f"line {lineno}: vertex needs 3 coordinates")
            try:
                vertices.append((float(parts[1]), float(parts[2]), float(parts[3])))
            except ValueError as e:
                raise ObjParseError(f"line {lineno}: bad vertex coordinate") from e
        elif key == "f":
            if len(parts) < 4:
                raise ObjParseError(f"line {lineno}: face needs at least 3 indices")
            idx = []
            for tok in parts[1:]:
                head = tok.split("/", 1)[0]
                try:
                    i = int(head)
                except ValueError as e:
                    raise ObjParseError(f"line {lineno}: bad face index {tok!r}") from e
                if i <= 0:
                    raise ObjParseError(
                        f"line {lineno}: only positive 1-based indices supported")
                if i > len(vertices):
                    raise ObjParseError(f"line {lineno}: index out of range ({i})")
                idx.append(i - 1)
            for k in range(1, len(idx) - 1):  # fan triangulation
                faces.append((idx[0], idx[k], idx[k + 1]))
        elif key not in silent and key not in warned:
            warned.add(key)
            warnings.warn(f"OBJ: ignoring unsupported record type {key!r}")
    return TriangleMesh(
        np.array(vertices, dtype=np.float64).reshape(-1, 3),
        np.array(faces, dtype=np.int64).reshape(-1, 3),
    )


def write_obj(mesh: TriangleMesh) -> str:
    """Serialize a mesh back to the ASCII OBJ subset accepted by load_mesh."""
    out = []
    for v in mesh.vertices:
        out.append(f"v {v[0]:.17g} {v[1]:.17g} {v[2]:.17g}")
    for t in mesh.triangles:
        out.append(f"f {t[0] + 1} {t[1] + 1} {t[2] + 1}")
    return "\n".join(out) + "\n"
