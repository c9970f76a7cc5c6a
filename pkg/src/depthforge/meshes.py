"""Procedural test meshes: simple closed objects for demos and benchmarks."""

from __future__ import annotations

import numpy as np

from .geometry import TriangleMesh
from .noise import NoiseSpec, _evaluate
from .viewsphere import icosphere


def cube(size: float = 100.0) -> TriangleMesh:
    """Axis-aligned cube centered at the origin: 8 vertices, 12 triangles."""
    h = size / 2.0
    verts = np.array([[sx, sy, sz] for sx in (-h, h) for sy in (-h, h) for sz in (-h, h)])
    faces = np.array([
        [0, 1, 3], [0, 3, 2], [4, 6, 7], [4, 7, 5],
        [0, 4, 5], [0, 5, 1], [2, 3, 7], [2, 7, 6],
        [0, 2, 6], [0, 6, 4], [1, 5, 7], [1, 7, 3],
    ])
    return TriangleMesh(verts, faces)


def bumpy_sphere(subdivisions: int = 3, radius: float = 80.0,
                 bump: float = 0.35, seed: int = 0) -> TriangleMesh:
    """Icosphere with deterministic hash-noise radial bumps: an asymmetric
    closed object (1280 triangles at 3 subdivisions) for rendering tests."""
    base = icosphere(subdivisions)
    spec = NoiseSpec("perlin", 0.15, seed)
    v = base.vertices
    # displace along the radius by smooth noise over two angular charts
    n1 = _evaluate(spec, 10.0 * v[:, 0], 10.0 * v[:, 1])
    n2 = _evaluate(spec, 10.0 * v[:, 1] + 37.0, 10.0 * v[:, 2] - 11.0)
    scale = radius * (1.0 + bump * 0.5 * (n1 + n2))
    return TriangleMesh(v * scale[:, None], base.triangles)
