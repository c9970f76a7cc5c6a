"""Forward computation of the training losses as pure numeric functions.

Covers the conditional-GAN objective pieces (adversarial terms, whole-image L1,
foreground-masked L1, task feature distance, their weighted combination) and
the pose-aware triplet loss used by the retrieval network. Image reductions
use per-pixel means so the default weights are patch-size invariant.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .geometry import Quaternion, angular_distance
from .render import DepthPatch, ForegroundMask

_PROB_EPS = 1e-7
_TRIPLET_EPS = 1e-8


@dataclass(frozen=True)
class LossWeights:
    """Weights for (adversarial, L1, foreground L1, task) generator terms."""

    w_d: float = 1.0
    w_g: float = 100.0
    w_f: float = 200.0
    w_t: float = 10.0

    def __post_init__(self):
        if min(self.w_d, self.w_g, self.w_f, self.w_t) < 0:
            raise ValueError("loss weights must be non-negative")


def _values(x) -> np.ndarray:
    if isinstance(x, DepthPatch):
        return x.values.astype(np.float64)
    if isinstance(x, ForegroundMask):
        return x.values.astype(np.float64)
    return np.asarray(x, dtype=np.float64)


def l1_loss(a, b) -> float:
    """Mean absolute per-pixel difference between two patches."""
    av, bv = _values(a), _values(b)
    if av.shape != bv.shape:
        raise ValueError(f"shape mismatch: {av.shape} vs {bv.shape}")
    return float(np.abs(av - bv).mean())


def foreground_l1(a, b, mask) -> float:
    """L1 restricted to mask==1 pixels, averaged over the foreground count."""
    av, bv, mv = _values(a), _values(b), _values(mask)
    if av.shape != bv.shape or av.shape != mv.shape:
        raise ValueError("patches and mask must share dimensions")
    total = float((np.abs(av - bv) * mv).sum())
    return total / max(1.0, float(mv.sum()))


def discriminator_bce(d_real: float, d_fake: float) -> tuple[float, float]:
    """Cross-entropy terms for one (real, fake) discriminator output pair.

    Returns (loss_D, loss_G_adv) with loss_D = -(ln d_real + ln(1 - d_fake))
    and the non-saturating generator term loss_G_adv = -ln d_fake. Inputs are
    probabilities in [0, 1] and get clamped away from {0, 1} before the logs.
    """
    for name, v in (("d_real", d_real), ("d_fake", d_fake)):
        if not 0.0 <= v <= 1.0:
            raise ValueError(f"{name} must be a probability in [0, 1], got {v}")
    d_real = min(max(d_real, _PROB_EPS), 1.0 - _PROB_EPS)
    d_fake = min(max(d_fake, _PROB_EPS), 1.0 - _PROB_EPS)
    loss_d = -(math.log(d_real) + math.log(1.0 - d_fake))
    loss_g_adv = -math.log(d_fake)
    return loss_d, loss_g_adv


def minimax_generator_term(d_fake: float) -> float:
    """The saturating alternative ln(1 - d_fake); exposed for completeness."""
    if not 0.0 <= d_fake <= 1.0:
        raise ValueError("d_fake must be a probability in [0, 1]")
    return math.log(1.0 - min(max(d_fake, _PROB_EPS), 1.0 - _PROB_EPS))


def task_feature_loss(f1, f2) -> float:
    """Euclidean distance between two task-network feature vectors."""
    a = np.asarray(f1, dtype=np.float64).ravel()
    b = np.asarray(f2, dtype=np.float64).ravel()
    if a.shape != b.shape:
        raise ValueError("feature vectors must have equal length")
    return float(np.linalg.norm(a - b))


def generator_objective(l_d_adv: float, l_g: float, l_f: float, l_t: float,
                        weights: LossWeights = LossWeights()) -> float:
    """Weighted sum of the generator's loss components."""
    return (weights.w_d * l_d_adv + weights.w_g * l_g
            + weights.w_f * l_f + weights.w_t * l_t)


def pose_margin(q_b: Quaternion, q_p: Quaternion, c_b: int, c_p: int,
                n: float = 2.0 * math.pi) -> float:
    """Triplet margin: the pose angle for same-class pairs, n (> pi) otherwise."""
    if n <= math.pi:
        raise ValueError("dissimilar-class margin n must exceed pi")
    if c_b == c_p:
        return angular_distance(q_b, q_p)
    return n


def triplet_loss(f_b, f_p, f_n, m: float) -> float:
    """max(0, 1 - |f_b - f_n|^2 / (|f_b - f_p|^2 + m)); value in [0, 1].

    The denominator is floored at 1e-8 so an anchor coinciding with its
    positive at zero margin stays finite.
    """
    if m < 0:
        raise ValueError("margin must be non-negative")
    b = np.asarray(f_b, dtype=np.float64).ravel()
    p = np.asarray(f_p, dtype=np.float64).ravel()
    ng = np.asarray(f_n, dtype=np.float64).ravel()
    if not (b.shape == p.shape == ng.shape):
        raise ValueError("feature vectors must have equal length")
    d_bn = float(((b - ng) ** 2).sum())
    d_bp = float(((b - p) ** 2).sum())
    return max(0.0, 1.0 - d_bn / max(d_bp + m, _TRIPLET_EPS))
