"""Deterministic procedural noise: gradient (Perlin), cellular (Worley F1) and white.

All evaluation is hash-based over integer lattice cells, so every value is a
pure function of (spec, x, y) with no global tables and no accumulation-order
effects; results are bit-reproducible across platforms, processes and array
shapes. Outputs lie in [-1, 1].

Coordinates are in pixels; a spec's frequency scales them into lattice space
(cell size = 1 / frequency pixels).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .seeds import MASK64, mix64

NOISE_KINDS = ("perlin", "cellular", "white")

_SQRT2 = math.sqrt(2.0)
_H = math.sqrt(0.5)
# 8 canonical gradient directions (axis + normalized diagonals)
_GRAD_X = np.array([1.0, -1.0, 0.0, 0.0, _H, -_H, _H, -_H])
_GRAD_Y = np.array([0.0, 0.0, 1.0, -1.0, _H, _H, -_H, -_H])

_C1 = np.uint64(0x9E3779B97F4A7C15)
_C2 = np.uint64(0xC2B2AE3D27D4EB4F)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)


def _mix64_arr(x: np.ndarray) -> np.ndarray:
    x = (x + _C1) & np.uint64(MASK64)
    x ^= x >> np.uint64(30)
    x *= _M1
    x ^= x >> np.uint64(27)
    x *= _M2
    x ^= x >> np.uint64(31)
    return x


def _cell_hash(seed: int, xi: np.ndarray, yi: np.ndarray) -> np.ndarray:
    """Avalanched 64-bit hash of (seed, lattice cell)."""
    s = np.uint64(seed & MASK64)
    h = xi.astype(np.int64).astype(np.uint64) * _C1
    h ^= yi.astype(np.int64).astype(np.uint64) * _C2
    return _mix64_arr(_mix64_arr(h) ^ s)


def _to_unit(h: np.ndarray) -> np.ndarray:
    """Map a 64-bit hash to a double in [0, 1)."""
    return (h >> np.uint64(11)).astype(np.float64) * (1.0 / (1 << 53))


@dataclass(frozen=True)
class NoiseSpec:
    """A noise field: kind, frequency in cycles per pixel, 64-bit seed.

    octaves > 1 turns Perlin into its fractal sum (lacunarity 2, gain 0.5,
    renormalized to [-1, 1]); it is ignored for cellular and white noise.
    """

    kind: str
    frequency: float
    seed: int
    octaves: int = 1

    def __post_init__(self):
        if self.kind not in NOISE_KINDS:
            raise ValueError(f"kind must be one of {NOISE_KINDS}")
        if self.frequency <= 0:
            raise ValueError("frequency must be positive")
        if self.octaves < 1:
            raise ValueError("octaves must be >= 1")


@dataclass(frozen=True)
class ScalarField:
    """A width x height field of values in [-1, 1]."""

    width: int
    height: int
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        if v.shape != (self.height, self.width):
            raise ValueError("field shape must be (height, width)")
        if v.size and (v.min() < -1.0 or v.max() > 1.0):
            raise ValueError("field values must lie in [-1, 1]")
        v = v.copy()
        v.setflags(write=False)
        object.__setattr__(self, "values", v)


def _fade(t: np.ndarray) -> np.ndarray:
    return t * t * t * (t * (t * 6.0 - 15.0) + 10.0)


def _gradient_dot(seed: int, xi, yi, dx, dy) -> np.ndarray:
    h = _cell_hash(seed, xi, yi) & np.uint64(7)
    idx = h.astype(np.int64)
    return _GRAD_X[idx] * dx + _GRAD_Y[idx] * dy


def _perlin(seed: int, x: np.ndarray, y: np.ndarray) -> np.ndarray:
    x0 = np.floor(x)
    y0 = np.floor(y)
    xi = x0.astype(np.int64)
    yi = y0.astype(np.int64)
    fx = x - x0
    fy = y - y0
    n00 = _gradient_dot(seed, xi, yi, fx, fy)
    n10 = _gradient_dot(seed, xi + 1, yi, fx - 1.0, fy)
    n01 = _gradient_dot(seed, xi, yi + 1, fx, fy - 1.0)
    n11 = _gradient_dot(seed, xi + 1, yi + 1, fx - 1.0, fy - 1.0)
    u = _fade(fx)
    v = _fade(fy)
    nx0 = n00 + u * (n10 - n00)
    nx1 = n01 + u * (n11 - n01)
    # unit gradients bound |value| by sqrt(2)/2; rescale toward [-1, 1]
    return np.clip((nx0 + v * (nx1 - nx0)) * _SQRT2, -1.0, 1.0)


def _fractal_perlin(seed: int, x: np.ndarray, y: np.ndarray, octaves: int) -> np.ndarray:
    total = np.zeros_like(x)
    amplitude = 1.0
    norm = 0.0
    for o in range(octaves):
        total = total + amplitude * _perlin(mix64(seed + o), x * (2.0 ** o), y * (2.0 ** o))
        norm += amplitude
        amplitude *= 0.5
    return total / norm


def _cellular(seed: int, x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Worley F1 over the 3x3 cell neighborhood, one feature point per cell,
    remapped by d * sqrt(2) - 1 so a query at a feature point yields -1."""
    xi = np.floor(x).astype(np.int64)
    yi = np.floor(y).astype(np.int64)
    best = np.full(x.shape, np.inf)
    for dy in (-1, 0, 1):
        for dx in (-1, 0, 1):
            cx = xi + dx
            cy = yi + dy
            h = _cell_hash(seed, cx, cy)
            fx = cx + _to_unit(h)
            fy = cy + _to_unit(_mix64_arr(h ^ _C2))
            d = np.hypot(x - fx, y - fy)
            best = np.minimum(best, d)
    return np.clip(best * _SQRT2 - 1.0, -1.0, 1.0)


def feature_point(spec: NoiseSpec, cell_x: int, cell_y: int) -> tuple[float, float]:
    """Lattice-space feature point of a cellular-noise cell (for verification)."""
    h = _cell_hash(spec.seed, np.array([cell_x]), np.array([cell_y]))
    fx = cell_x + _to_unit(h)[0]
    fy = cell_y + _to_unit(_mix64_arr(h ^ _C2))[0]
    return float(fx), float(fy)


def _white(seed: int, x: np.ndarray, y: np.ndarray) -> np.ndarray:
    xi = np.floor(x).astype(np.int64)
    yi = np.floor(y).astype(np.int64)
    return _to_unit(_cell_hash(seed, xi, yi)) * 2.0 - 1.0


def _evaluate(spec: NoiseSpec, x: np.ndarray, y: np.ndarray) -> np.ndarray:
    lx = x * spec.frequency
    ly = y * spec.frequency
    if spec.kind == "perlin":
        if spec.octaves > 1:
            return _fractal_perlin(spec.seed, lx, ly, spec.octaves)
        return _perlin(spec.seed, lx, ly)
    if spec.kind == "cellular":
        return _cellular(spec.seed, lx, ly)
    return _white(spec.seed, lx, ly)


def noise_at(spec: NoiseSpec, x: float, y: float) -> float:
    """Evaluate the noise at pixel coordinates (x, y); value in [-1, 1]."""
    return float(_evaluate(spec, np.asarray([float(x)]), np.asarray([float(y)]))[0])


def fill_field(spec: NoiseSpec, width: int, height: int) -> ScalarField:
    """Field with values[row, col] == noise_at(spec, col, row)."""
    if width <= 0 or height <= 0:
        raise ValueError("field dimensions must be positive")
    cols, rows = np.meshgrid(np.arange(width, dtype=np.float64),
                             np.arange(height, dtype=np.float64))
    return ScalarField(width, height, _evaluate(spec, cols, rows))
