"""
Evaluating probability maps against ground truth
================================================

Two complementary views: threshold-free precision-recall curves with
area-under-curve per class, and hard-label metrics (pixel accuracy,
mean class accuracy, mean IoU, frequency-weighted IoU) from a
confusion matrix. Confusion matrices merge associatively, so a survey
can be scored in chunks and combined.
"""

import numpy as np

from weedmap import (
    ConfusionMatrix,
    auc,
    confusion,
    evaluate_map,
    pixel_metrics,
    pr_curve,
)
from weedmap.raster import LabelMap, ProbabilityMap

# start with a toy score set where the ideal answer is easy to see:
# positives score high except one miss, one negative scores high
scores = np.array([0.95, 0.90, 0.80, 0.15, 0.85, 0.30, 0.10, 0.05])
truth = np.array([True, True, True, True, False, False, False, False])
curve = pr_curve(scores, truth)
print("threshold  precision  recall")
for t, p, r in zip(curve.thresholds, curve.precisions, curve.recalls):
    print(f"  {t:6.2f}   {p:8.3f}  {r:6.3f}")
print(f"AUC (trapezoid over recall): {auc(curve):.4f}")

# hard labels: a 3-class confusion matrix and the derived metrics
rng = np.random.default_rng(11)
gt = rng.integers(0, 3, size=(200, 300))
pred = gt.copy()
flip = rng.random(gt.shape) < 0.1           # corrupt 10% of pixels
pred[flip] = (gt[flip] + 1) % 3
cm = confusion(LabelMap(pred), LabelMap(gt), class_count=3)
print(f"\nconfusion counts (rows = truth):\n{cm.counts}")
for key, value in pixel_metrics(cm).items():
    print(f"  {key:6s} {value:.4f}")

# the merge law: scoring two halves separately then merging equals
# scoring the whole image at once
top = confusion(LabelMap(pred[:100]), LabelMap(gt[:100]), class_count=3)
bottom = confusion(LabelMap(pred[100:]), LabelMap(gt[100:]), class_count=3)
print("\nmerge(top, bottom) == whole:", top.merge(bottom) == cm)
print("zero() is the identity:      ",
      cm.merge(ConfusionMatrix.zero(3)) == cm)

# evaluate_map ties both views together for probability maps; the
# noise is strong enough that some pixels argmax to the wrong class
h, w = 120, 160
gt_map = rng.integers(0, 3, size=(h, w))
noise = rng.random((3, h, w)).astype(np.float32) * 1.4
planes = noise + np.stack([(gt_map == k) for k in range(3)]).astype(np.float32)
planes /= planes.sum(axis=0, keepdims=True)
report = evaluate_map(ProbabilityMap(planes), LabelMap(gt_map))
print(f"\nmap-level report on {report.pixel_count} pixels:")
print(f"  PA {report.pa:.3f}  MPA {report.mpa:.3f}  "
      f"MIoU {report.miou:.3f}  FWIoU {report.fwiou:.3f}")
for cls in report.classes:
    print(f"  class {cls.class_id} ({cls.name}): "
          f"prevalence {cls.prevalence:.3f}, AUC {cls.auc:.3f}")

# reports serialize to JSON with the PR curves downsampled to a
# bounded number of points
payload = report.to_dict(max_pr_points=8)
print(f"\nserialized PR points for class 0: {payload['classes'][0]['pr']}")
