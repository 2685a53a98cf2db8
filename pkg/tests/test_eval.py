"""PR curves, AUC, confusion matrices and the evaluation report."""

import json

import numpy as np
import pytest

from weedmap.errors import (
    DimensionMismatchError,
    EmptyMatrixError,
    InvariantViolationError,
    NoPositivesError,
)
from weedmap.evaluate import (
    ConfusionMatrix,
    PRCurve,
    argmax_labels,
    auc,
    confusion,
    evaluate_map,
    pixel_metrics,
    pr_curve,
)
from weedmap.raster import LabelMap, ProbabilityMap


def _oracle_pr(scores, gt):
    """Independent per-threshold recount of the same sweep conventions."""
    s = np.asarray(scores, dtype=np.float64).ravel()
    g = np.asarray(gt).ravel().astype(bool)
    pos = int(g.sum())
    thresholds = sorted(set(s.tolist()) | {0.0, 1.0}, reverse=True)
    out = []
    for t in thresholds:
        pred = s >= t
        predicted = int(pred.sum())
        if predicted == 0:
            continue  # precision undefined, threshold dropped
        tp = int((pred & g).sum())
        out.append((t, tp / predicted, tp / pos))
    return out


def _oracle_auc(points):
    r = [0.0] + [p[2] for p in points]
    p = [points[0][1]] + [p[1] for p in points]
    if r[-1] < 1.0:
        r.append(1.0)
        p.append(1.0)
    total = 0.0
    for i in range(1, len(r)):
        total += (r[i] - r[i - 1]) * (p[i] + p[i - 1]) / 2.0
    return total


class TestPRCurve:
    def test_matches_oracle_on_random_instances(self):
        rng = np.random.default_rng(0)
        for _ in range(200):
            h = int(rng.integers(1, 20))
            w = int(rng.integers(1, 20))
            # quantize to few levels so ties occur often
            levels = int(rng.integers(2, 8))
            scores = rng.integers(0, levels, size=(h, w)) / (levels - 1)
            gt = rng.random((h, w)) < 0.4
            if not gt.any():
                gt.flat[0] = True
            curve = pr_curve(scores, gt)
            expected = _oracle_pr(scores, gt)
            assert len(curve) == len(expected)
            for (t, p, r), tt, pp, rr in zip(
                expected, curve.thresholds, curve.precisions, curve.recalls
            ):
                assert abs(t - tt) <= 1e-12
                assert abs(p - pp) <= 1e-12
                assert abs(r - rr) <= 1e-12
            assert abs(auc(curve) - _oracle_auc(expected)) <= 1e-12

    def test_constant_score_gives_prevalence_precision(self):
        gt = np.zeros((4, 4), dtype=bool)
        gt[:1] = True  # prevalence 0.25
        curve = pr_curve(np.full((4, 4), 0.5), gt)
        assert np.all(curve.precisions == 0.25)
        assert np.all(curve.recalls == 1.0)
        assert auc(curve) == pytest.approx(0.25)

    def test_perfect_separation_auc_one(self):
        gt = np.zeros(50, dtype=bool)
        gt[:20] = True
        scores = np.where(gt, 0.9, 0.1)
        assert auc(pr_curve(scores, gt)) == pytest.approx(1.0)

    def test_recall_never_decreases(self):
        rng = np.random.default_rng(1)
        for _ in range(50):
            scores = rng.random(64)
            gt = rng.random(64) < 0.3
            if not gt.any():
                gt[0] = True
            curve = pr_curve(scores, gt)
            assert np.all(np.diff(curve.recalls) >= 0)

    def test_no_positives_raises(self):
        with pytest.raises(NoPositivesError):
            pr_curve(np.full(8, 0.5), np.zeros(8, dtype=bool))

    def test_score_range_enforced(self):
        gt = np.array([True, False])
        with pytest.raises(InvariantViolationError):
            pr_curve(np.array([1.5, 0.5]), gt)

    def test_shape_mismatch(self):
        with pytest.raises(DimensionMismatchError):
            pr_curve(np.zeros((2, 3)), np.zeros((3, 2), dtype=bool))

    def test_auc_closes_partial_curves(self):
        # hand-built curve stopping at recall 0.5 gains the (1, 1) endpoint
        curve = PRCurve(thresholds=[0.9], precisions=[1.0], recalls=[0.5])
        # area: rect 0..0.5 at precision 1, then trapezoid 0.5..1 up to (1,1)
        assert auc(curve) == pytest.approx(0.5 + 0.5 * 1.0)


class TestConfusion:
    def test_hand_counts(self):
        gt = LabelMap(np.array([[0, 0, 1], [2, 1, 1]]), class_count=3)
        pred = LabelMap(np.array([[0, 1, 1], [2, 1, 0]]), class_count=3)
        cm = confusion(pred, gt)
        expected = np.array([[1, 1, 0], [1, 2, 0], [0, 0, 1]])
        assert np.array_equal(cm.counts, expected)
        assert cm.total == 6

    def test_merge_is_commutative_monoid(self):
        rng = np.random.default_rng(2)
        gt = LabelMap(rng.integers(0, 3, size=(40, 40)), class_count=3)
        pred = LabelMap(rng.integers(0, 3, size=(40, 40)), class_count=3)
        full = confusion(pred, gt)
        # partition the rows arbitrarily, build parts, merge in any order
        cuts = sorted(rng.choice(np.arange(1, 40), size=4, replace=False))
        bounds = [0, *cuts, 40]
        parts = [
            confusion(
                LabelMap(pred.labels[a:b], class_count=3),
                LabelMap(gt.labels[a:b], class_count=3),
            )
            for a, b in zip(bounds, bounds[1:])
        ]
        order = rng.permutation(len(parts))
        merged = ConfusionMatrix.zero(3)
        for i in order:
            merged = merged.merge(parts[i])
        assert merged == full
        # a different grouping gives the same result
        left = parts[0].merge(parts[1].merge(parts[2]))
        right = (parts[0].merge(parts[1])).merge(parts[2])
        assert left == right

    def test_zero_is_identity(self):
        rng = np.random.default_rng(3)
        gt = LabelMap(rng.integers(0, 3, size=(8, 8)), class_count=3)
        pred = LabelMap(rng.integers(0, 3, size=(8, 8)), class_count=3)
        cm = confusion(pred, gt)
        assert ConfusionMatrix.zero(3).merge(cm) == cm
        assert cm.merge(ConfusionMatrix.zero(3)) == cm

    def test_shape_mismatch_on_merge(self):
        with pytest.raises(DimensionMismatchError):
            ConfusionMatrix.zero(3).merge(ConfusionMatrix.zero(4))

    def test_map_shape_mismatch(self):
        with pytest.raises(DimensionMismatchError):
            confusion(
                LabelMap(np.zeros((2, 2), dtype=int), class_count=3),
                LabelMap(np.zeros((3, 3), dtype=int), class_count=3),
            )


class TestArgmax:
    def test_tie_breaks_to_lowest_id(self):
        planes = np.zeros((3, 1, 2), dtype=np.float32)
        planes[:, 0, 0] = [0.4, 0.4, 0.2]   # tie between 0 and 1
        planes[:, 0, 1] = [0.1, 0.45, 0.45]  # tie between 1 and 2
        labels = argmax_labels(ProbabilityMap(planes))
        assert labels.labels[0, 0] == 0
        assert labels.labels[0, 1] == 1


class TestPixelMetrics:
    def test_hand_case(self):
        cm = ConfusionMatrix(np.array([[3, 1], [2, 4]]))
        m = pixel_metrics(cm)
        assert m["pa"] == pytest.approx(7 / 10)
        assert m["mpa"] == pytest.approx((3 / 4 + 4 / 6) / 2)
        iou0 = 3 / (4 + 5 - 3)
        iou1 = 4 / (6 + 5 - 4)
        assert m["miou"] == pytest.approx((iou0 + iou1) / 2)
        assert m["fwiou"] == pytest.approx(0.4 * iou0 + 0.6 * iou1)

    def test_perfect_prediction(self):
        cm = ConfusionMatrix(np.diag([5, 2, 9]))
        m = pixel_metrics(cm)
        assert m["pa"] == m["mpa"] == m["miou"] == m["fwiou"] == 1.0

    def test_absent_class_excluded(self):
        counts = np.array([[8, 2, 0], [1, 9, 0], [0, 0, 0]])
        m = pixel_metrics(ConfusionMatrix(counts))
        assert m["mpa"] == pytest.approx((8 / 10 + 9 / 10) / 2)

    def test_empty_matrix_raises(self):
        with pytest.raises(EmptyMatrixError):
            pixel_metrics(ConfusionMatrix.zero(3))


class TestEvaluateMap:
    def _setup(self, seed=4, h=24, w=32):
        rng = np.random.default_rng(seed)
        gt = LabelMap(rng.integers(0, 3, size=(h, w)), class_count=3)
        planes = rng.random((3, h, w)).astype(np.float32)
        planes /= planes.sum(axis=0, keepdims=True)
        return ProbabilityMap(planes), gt

    def test_report_structure(self):
        pmap, gt = self._setup()
        report = evaluate_map(pmap, gt)
        assert [c.class_id for c in report.classes] == [0, 1, 2]
        assert report.pixel_count == 24 * 32
        assert 0.0 <= report.pa <= 1.0
        for c in report.classes:
            assert c.auc is not None
            assert c.prevalence > 0

    def test_absent_class_has_null_auc(self):
        pmap, gt = self._setup()
        gt2 = LabelMap(np.where(gt.labels == 2, 0, gt.labels), class_count=3)
        report = evaluate_map(pmap, gt2)
        assert report.classes[2].auc is None
        assert report.classes[2].prevalence == 0.0

    def test_uniform_prediction_degenerates_to_prevalence(self):
        rng = np.random.default_rng(5)
        gt = LabelMap(rng.integers(0, 3, size=(16, 16)), class_count=3)
        planes = np.full((3, 16, 16), 1 / 3, dtype=np.float32)
        report = evaluate_map(ProbabilityMap(planes), gt)
        for c in report.classes:
            assert c.auc == pytest.approx(c.prevalence, abs=1e-6)
            assert np.allclose(c.precisions, c.prevalence, atol=1e-7)

    def test_json_round_trip_and_order(self):
        pmap, gt = self._setup()
        d = evaluate_map(pmap, gt).to_dict(max_pr_points=16)
        blob = json.dumps(d)
        back = json.loads(blob)
        assert back == d
        assert [c["id"] for c in back["classes"]] == [0, 1, 2]
        assert [c["name"] for c in back["classes"]] == ["bg", "crop", "weed"]
        for c in back["classes"]:
            assert len(c["pr"]) <= 16

    def test_downsampling_keeps_endpoints(self):
        pmap, gt = self._setup(h=40, w=50)
        report = evaluate_map(pmap, gt)
        full = report.classes[0]
        d = report.to_dict(max_pr_points=8)
        pr = d["classes"][0]["pr"]
        assert pr[0] == [float(full.recalls[0]), float(full.precisions[0])]
        assert pr[-1] == [float(full.recalls[-1]), float(full.precisions[-1])]

    def test_shape_mismatch(self):
        pmap, gt = self._setup()
        bad = LabelMap(np.zeros((5, 5), dtype=int), class_count=3)
        with pytest.raises(DimensionMismatchError):
            evaluate_map(pmap, bad)
