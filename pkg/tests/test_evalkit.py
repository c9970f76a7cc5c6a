import json
import math

import numpy as np
import pytest

from depthforge.evalkit import DescriptorEntry, evaluate, nn_query
from depthforge.geometry import Quaternion


def random_db(rng, n, dim=16, classes=4):
    entries = []
    for _ in range(n):
        q = Quaternion(*rng.normal(size=4)).normalized()
        entries.append(DescriptorEntry(rng.normal(size=dim),
                                       int(rng.integers(classes)), q))
    return entries


class TestNNQuery:
    def test_exact_match_returned(self):
        rng = np.random.default_rng(0)
        db = random_db(rng, 50)
        assert nn_query(db, db[17].feature) is db[17]

    def test_singleton(self):
        db = random_db(np.random.default_rng(1), 1)
        assert nn_query(db, np.zeros(16)) is db[0]

    def test_empty_db(self):
        with pytest.raises(ValueError):
            nn_query([], np.zeros(4))

    def test_dimension_mismatch(self):
        db = random_db(np.random.default_rng(2), 3)
        with pytest.raises(ValueError):
            nn_query(db, np.zeros(7))

    def test_matches_exhaustive_scan(self):
        rng = np.random.default_rng(3)
        db = random_db(rng, 1000)
        feats = np.stack([e.feature for e in db])
        for _ in range(50):
            q = rng.normal(size=16)
            got = nn_query(db, q)
            dists = [float(((f - q) ** 2).sum()) for f in feats]  # plain scan
            best = min(range(len(dists)), key=lambda i: (dists[i], i))
            assert got is db[best]

    def test_tie_breaks_to_lowest_index(self):
        q = Quaternion.identity()
        db = [DescriptorEntry([1.0, 0.0], 0, q), DescriptorEntry([1.0, 0.0], 1, q)]
        assert nn_query(db, [1.0, 0.0]) is db[0]

    def test_result_is_global_minimum(self):
        rng = np.random.default_rng(4)
        db = random_db(rng, 500)
        query = rng.normal(size=16)
        hit = nn_query(db, query)
        d_hit = ((hit.feature - query) ** 2).sum()
        assert all(d_hit <= ((e.feature - query) ** 2).sum() for e in db)


class TestEvaluate:
    def test_self_retrieval_is_perfect(self):
        rng = np.random.default_rng(5)
        db = random_db(rng, 100)
        queries = [(e.feature, e.class_id, e.pose) for e in db]
        report = evaluate(db, queries)
        assert report.classification_accuracy == 1.0
        assert report.angular_median_deg == 0.0
        assert report.angular_mean_deg == 0.0

    def test_all_misclassified(self):
        q = Quaternion.identity()
        db = [DescriptorEntry([0.0], 0, q)]
        report = evaluate(db, [([0.0], 1, q), ([1.0], 2, q)])
        assert report.classification_accuracy == 0.0
        assert report.angular_median_deg is None
        assert report.angular_mean_deg is None

    def test_half_correct_micro_case(self):
        qz = Quaternion.from_axis_angle([0, 0, 1], math.radians(10.0))
        db = [DescriptorEntry([0.0, 0.0], 0, Quaternion.identity()),
              DescriptorEntry([4.0, 0.0], 1, Quaternion.identity())]
        queries = [([0.1, 0.0], 0, qz),   # correct class, 10 deg off
                   ([3.9, 0.0], 0, qz)]   # retrieved class 1 -> misclassified
        report = evaluate(db, queries)
        assert report.classification_accuracy == 0.5
        assert report.angular_median_deg == pytest.approx(10.0, abs=1e-9)
        assert report.angular_mean_deg == pytest.approx(10.0, abs=1e-9)
        assert report.n_correct == 1 and report.n_queries == 2

    def test_median_lower_middle(self):
        q = Quaternion.identity()
        db = [DescriptorEntry([float(i)], 0, Quaternion.from_axis_angle([0, 0, 1], math.radians(d)))
              for i, d in enumerate([2.0, 4.0, 6.0, 8.0])]
        queries = [(db[i].feature, 0, q) for i in range(4)]
        report = evaluate(db, queries)
        assert report.angular_median_deg == pytest.approx(4.0, abs=1e-9)

    def test_permutation_invariant(self):
        rng = np.random.default_rng(6)
        db = random_db(rng, 40)
        queries = [(rng.normal(size=16), int(rng.integers(4)),
                    Quaternion(*rng.normal(size=4)).normalized()) for _ in range(30)]
        r1 = evaluate(db, queries)
        r2 = evaluate(db, queries[::-1])
        assert r1.classification_accuracy == r2.classification_accuracy
        assert r1.angular_median_deg == r2.angular_median_deg
        assert r1.angular_mean_deg == r2.angular_mean_deg

    def test_json_report_keys(self):
        rng = np.random.default_rng(7)
        db = random_db(rng, 10)
        report = evaluate(db, [(e.feature, e.class_id, e.pose) for e in db])
        doc = json.loads(report.to_json())
        assert set(doc) == {"accuracy", "angular_median_deg", "angular_mean_deg",
                            "n_queries", "n_correct"}

    def test_json_omits_angles_when_no_hits(self):
        q = Quaternion.identity()
        db = [DescriptorEntry([0.0], 0, q)]
        report = evaluate(db, [([0.0], 1, q)])
        doc = json.loads(report.to_json())
        assert set(doc) == {"accuracy", "n_queries", "n_correct"}
