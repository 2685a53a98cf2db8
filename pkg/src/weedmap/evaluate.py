"""Evaluation: per-class PR curves with AUC and pixel accuracy metrics.

Precision/recall sweeps use the observed score values as thresholds,
augmented with 0 and 1, iterated in descending order with the decision
rule ``score >= t``. A threshold predicting nothing (only the augmented
t=1 when no score reaches 1) contributes no point, since precision is
undefined there. AUC closes the curve by extending the first precision
back to recall 0 and, if the sweep never reaches full recall, adding
the conventional (1, 1) endpoint, then integrates by trapezoid over
recall.

Hard-label metrics come from a confusion matrix with ground truth in
rows and predictions in columns: pixel accuracy, mean per-class
accuracy, mean IoU, and frequency-weighted IoU. Classes absent from the
ground truth are excluded from the means.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DimensionMismatchError,
    EmptyMatrixError,
    InvariantViolationError,
    NoPositivesError,
)
from .raster import CLASS_NAMES, LabelMap, ProbabilityMap

_trapz = getattr(np, "trapezoid", None) or np.trapz

DEFAULT_PR_POINTS = 256


@dataclass
class PRCurve:
    """Precision/recall points, one per distinct threshold, descending."""

    thresholds: np.ndarray
    precisions: np.ndarray
    recalls: np.ndarray

    def __post_init__(self):
        self.thresholds = np.asarray(self.thresholds, dtype=np.float64)
        self.precisions = np.asarray(self.precisions, dtype=np.float64)
        self.recalls = np.asarray(self.recalls, dtype=np.float64)
        n = self.thresholds.size
        if self.precisions.size != n or self.recalls.size != n:
            raise InvariantViolationError("curve arrays must have equal length")

    def __len__(self) -> int:
        return self.thresholds.size

    @property
    def points(self) -> list[tuple[float, float]]:
        """(recall, precision) pairs in sweep order."""
        return list(zip(self.recalls.tolist(), self.precisions.tolist()))


def pr_curve(scores: np.ndarray, gt_mask: np.ndarray) -> PRCurve:
    """Precision/recall sweep of a probability plane against a truth mask.

    ``scores`` must lie in [0, 1]; ``gt_mask`` marks positive pixels and
    must contain at least one (NoPositivesError otherwise).
    """
    scores = np.asarray(scores, dtype=np.float64)
    gt_mask = np.asarray(gt_mask)
    if scores.shape != gt_mask.shape:
        raise DimensionMismatchError(
            f"scores {scores.shape} vs ground truth {gt_mask.shape}"
        )
    flat = scores.ravel()
    truth = gt_mask.ravel().astype(bool)
    if flat.size == 0:
        raise NoPositivesError("empty input")
    if flat.min() < 0.0 or flat.max() > 1.0:
        raise InvariantViolationError("scores must lie in [0, 1]")
    positives = int(truth.sum())
    if positives == 0:
        raise NoPositivesError("ground truth has no positive pixel")
    order = np.argsort(-flat, kind="stable")
    s_desc = flat[order]
    tp_cum = np.cumsum(truth[order], dtype=np.int64)
    # last index of each distinct value gives that threshold's cumulative
    # TP and prediction counts
    ends = np.append(np.nonzero(np.diff(s_desc))[0], s_desc.size - 1)
    thresholds = s_desc[ends]
    tp = tp_cum[ends]
    predicted = ends.astype(np.int64) + 1
    if thresholds[-1] != 0.0:
        # augmented t=0 predicts every pixel; augmented t=1 would predict
        # none when max(score) < 1 and is dropped
        thresholds = np.append(thresholds, 0.0)
        tp = np.append(tp, positives)
        predicted = np.append(predicted, flat.size)
    return PRCurve(
        thresholds=thresholds,
        precisions=tp / predicted,
        recalls=tp / positives,
    )


def auc(curve: PRCurve) -> float:
    """Area under a PR curve over the full recall axis [0, 1]."""
    if len(curve) == 0:
        raise InvariantViolationError("cannot integrate an empty curve")
    r = curve.recalls
    p = curve.precisions
    r_ext = [0.0]
    p_ext = [float(p[0])]
    r_ext.extend(r.tolist())
    p_ext.extend(p.tolist())
    if r[-1] < 1.0:
        r_ext.append(1.0)
        p_ext.append(1.0)
    return float(_trapz(p_ext, r_ext))


@dataclass(eq=False)
class ConfusionMatrix:
    """Square count matrix, ground truth in rows, predictions in columns.

    Matrices of equal size form a commutative monoid under merge, with
    the all-zero matrix as identity, so partial results can be combined
    in any grouping and order.
    """

    counts: np.ndarray

    def __post_init__(self):
        self.counts = np.asarray(self.counts, dtype=np.int64)
        if self.counts.ndim != 2 or self.counts.shape[0] != self.counts.shape[1]:
            raise InvariantViolationError(
                f"confusion matrix must be square, got {self.counts.shape}"
            )
        if (self.counts < 0).any():
            raise InvariantViolationError("confusion counts must be >= 0")

    @classmethod
    def zero(cls, class_count: int = 3) -> "ConfusionMatrix":
        return cls(np.zeros((class_count, class_count), dtype=np.int64))

    @property
    def class_count(self) -> int:
        return self.counts.shape[0]

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    def merge(self, other: "ConfusionMatrix") -> "ConfusionMatrix":
        if other.counts.shape != self.counts.shape:
            raise DimensionMismatchError(
                f"cannot merge {self.counts.shape} with {other.counts.shape}"
            )
        return ConfusionMatrix(self.counts + other.counts)

    def __eq__(self, other) -> bool:
        if not isinstance(other, ConfusionMatrix):
            return NotImplemented
        return bool(np.array_equal(self.counts, other.counts))


def argmax_labels(pmap: ProbabilityMap) -> LabelMap:
    """Hard labels from probability planes; ties pick the lowest class id."""
    return LabelMap(
        labels=np.argmax(pmap.planes, axis=0).astype(np.int64),
        class_count=pmap.class_count,
    )


def confusion(
    pred: LabelMap, gt: LabelMap, class_count: int | None = None
) -> ConfusionMatrix:
    """Count (ground truth, prediction) label pairs over aligned maps."""
    if pred.labels.shape != gt.labels.shape:
        raise DimensionMismatchError(
            f"prediction {pred.labels.shape} vs ground truth {gt.labels.shape}"
        )
    c = class_count or max(pred.class_count, gt.class_count)
    idx = gt.labels.astype(np.int64).ravel() * c + pred.labels.ravel()
    counts = np.bincount(idx, minlength=c * c).reshape(c, c)
    return ConfusionMatrix(counts)


def pixel_metrics(cm: ConfusionMatrix) -> dict:
    """PA, MPA, MIoU and FWIoU of a confusion matrix.

    Classes with no ground-truth pixels are skipped in MPA/MIoU and get
    zero weight in FWIoU.
    """
    counts = cm.counts.astype(np.float64)
    total = counts.sum()
    if total == 0:
        raise EmptyMatrixError("confusion matrix has no samples")
    diag = np.diag(counts)
    gt_per_class = counts.sum(axis=1)
    pred_per_class = counts.sum(axis=0)
    present = gt_per_class > 0
    union = gt_per_class + pred_per_class - diag
    iou = np.zeros_like(diag)
    np.divide(diag, union, out=iou, where=union > 0)
    return {
        "pa": float(diag.sum() / total),
        "mpa": float(np.mean(diag[present] / gt_per_class[present])),
        "miou": float(np.mean(iou[present])),
        "fwiou": float(np.sum(gt_per_class / total * iou)),
    }


@dataclass
class ClassReport:
    """Score-level and prevalence summary for one class."""

    class_id: int
    name: str
    prevalence: float
    auc: float | None
    recalls: np.ndarray = field(default_factory=lambda: np.empty(0))
    precisions: np.ndarray = field(default_factory=lambda: np.empty(0))
    thresholds: np.ndarray = field(default_factory=lambda: np.empty(0))


@dataclass
class EvaluationReport:
    """Full evaluation of one probability map against ground truth."""

    classes: list[ClassReport]
    pa: float
    mpa: float
    miou: float
    fwiou: float
    pixel_count: int
    confusion_counts: np.ndarray

    def to_dict(self, max_pr_points: int | None = DEFAULT_PR_POINTS) -> dict:
        """JSON-ready form; long PR curves are thinned to max_pr_points."""
        classes = []
        for cr in sorted(self.classes, key=lambda c: c.class_id):
            r, p = cr.recalls, cr.precisions
            if max_pr_points is not None and r.size > max_pr_points:
                keep = np.unique(
                    np.round(np.linspace(0, r.size - 1, max_pr_points)).astype(int)
                )
                r, p = r[keep], p[keep]
            classes.append({
                "id": cr.class_id,
                "name": cr.name,
                "prevalence": cr.prevalence,
                "auc": cr.auc,
                "pr": [[float(a), float(b)] for a, b in zip(r, p)],
            })
        return {
            "classes": classes,
            "metrics": {
                "pa": self.pa,
                "mpa": self.mpa,
                "miou": self.miou,
                "fwiou": self.fwiou,
            },
            "pixel_count": self.pixel_count,
            "confusion": self.confusion_counts.tolist(),
        }


def evaluate_map(
    pred: ProbabilityMap,
    gt: LabelMap,
    class_names: tuple[str, ...] | None = None,
) -> EvaluationReport:
    """Evaluate a probability map against a label map.

    Produces one PR curve + AUC per class present in the ground truth
    (absent classes get a null AUC and empty curve) plus the hard-label
    metrics of the argmax segmentation.
    """
    if pred.planes.shape[1:] != gt.labels.shape:
        raise DimensionMismatchError(
            f"map is {pred.planes.shape[1:]}, ground truth {gt.labels.shape}"
        )
    c = pred.class_count
    if gt.class_count != c:
        raise DimensionMismatchError(
            f"map has {c} classes, ground truth {gt.class_count}"
        )
    if class_names is None:
        class_names = CLASS_NAMES if c == len(CLASS_NAMES) else tuple(
            f"class_{i}" for i in range(c)
        )
    cm = confusion(argmax_labels(pred), gt, class_count=c)
    metrics = pixel_metrics(cm)
    total = gt.labels.size
    classes = []
    for cid in range(c):
        mask = gt.labels == cid
        prevalence = float(mask.sum() / total)
        if prevalence > 0:
            curve = pr_curve(pred.planes[cid], mask)
            classes.append(ClassReport(
                class_id=cid,
                name=class_names[cid],
                prevalence=prevalence,
                auc=auc(curve),
                recalls=curve.recalls,
                precisions=curve.precisions,
                thresholds=curve.thresholds,
            ))
        else:
            classes.append(ClassReport(
                class_id=cid,
                name=class_names[cid],
                prevalence=0.0,
                auc=None,
            ))
    return EvaluationReport(
        classes=classes,
        pa=metrics["pa"],
        mpa=metrics["mpa"],
        miou=metrics["miou"],
        fwiou=metrics["fwiou"],
        pixel_count=int(total),
        confusion_counts=cm.counts,
    )
