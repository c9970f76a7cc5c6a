"""Descriptor-database nearest-neighbor evaluation.

Test-time protocol: compute a query feature, retrieve its nearest stored
descriptor, count a hit when the class matches the ground truth, and measure
the angular pose error on correctly classified queries only.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .geometry import Quaternion, angular_distance


@dataclass(frozen=True)
class DescriptorEntry:
    """(feature vector, class id, pose) stored for retrieval."""

    feature: np.ndarray
    class_id: int
    pose: Quaternion

    def __post_init__(self):
        f = np.asarray(self.feature, dtype=np.float64).ravel().copy()
        f.setflags(write=False)
        object.__setattr__(self, "feature", f)
        if not self.pose.is_unit():
            raise ValueError("descriptor pose must be a unit quaternion")


@dataclass(frozen=True)
class EvalReport:
    """Classification accuracy plus angular stats over correctly classified queries."""

    classification_accuracy: float
    angular_median_deg: float | None
    angular_mean_deg: float | None
    n_queries: int
    n_correct: int

    def to_json(self) -> str:
        doc = {
            "accuracy": self.classification_accuracy,
            "n_queries": self.n_queries,
            "n_correct": self.n_correct,
        }
        if self.n_correct > 0:
            doc["angular_median_deg"] = self.angular_median_deg
            doc["angular_mean_deg"] = self.angular_mean_deg
        return json.dumps(doc, indent=2, sort_keys=True)


def _feature_matrix(db: list[DescriptorEntry]) -> np.ndarray:
    if not db:
        raise ValueError("descriptor database is empty")
    return np.stack([e.feature for e in db])


def _nearest_index(features: np.ndarray, f: np.ndarray) -> int:
    if f.shape[0] != features.shape[1]:
        raise ValueError("query dimension does not match the database")
    diff = features - f
    # first minimum wins: ties break toward the lowest index
    return int(np.argmin(np.einsum("ij,ij->i", diff, diff)))


def nn_query(db: list[DescriptorEntry], f) -> DescriptorEntry:
    """Entry minimizing Euclidean distance to f (linear scan, lowest index on ties)."""
    features = _feature_matrix(db)
    return db[_nearest_index(features, np.asarray(f, dtype=np.float64).ravel())]


def evaluate(db: list[DescriptorEntry],
             queries: list[tuple[np.ndarray, int, Quaternion]]) -> EvalReport:
    """Run the retrieval protocol over (feature, class, pose) queries.

    Angular error (degrees) between the retrieved and ground-truth poses is
    collected only for correctly classified queries; the median uses the
    lower-middle element for even counts. When nothing is classified
    correctly the angular statistics are absent.
    """
    if not queries:
        raise ValueError("no queries given")
    features = _feature_matrix(db)
    errors = []
    correct = 0
    for f, class_id, pose in queries:
        hit = db[_nearest_index(features, np.asarray(f, dtype=np.float64).ravel())]
        if hit.class_id == class_id:
            correct += 1
            errors.append(math.degrees(angular_distance(hit.pose, pose)))
    accuracy = correct / len(queries)
    if correct == 0:
        return EvalReport(accuracy, None, None, len(queries), 0)
    errors.sort()
    median = errors[(len(errors) - 1) // 2]
    return EvalReport(accuracy, median, float(np.mean(errors)), len(queries), correct)
