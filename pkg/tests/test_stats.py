"""Class frequency statistics, balancing weights, GSD and coverage."""

import numpy as np
import pytest

from weedmap.errors import (
    AllClassesAbsentError,
    EmptyDatasetError,
    NonPositiveInputError,
)
from weedmap.raster import LabelMap
from weedmap.stats import (
    ClassFrequency,
    class_weights,
    compute_foa,
    covered_area,
    theoretical_gsd,
)


def _lm(arr):
    return LabelMap(labels=np.asarray(arr), class_count=3)


class TestFoA:
    def test_single_map(self):
        lm = _lm([[0, 0, 1], [0, 2, 2]])
        freq = compute_foa([lm])
        assert freq.pixel_counts == (3, 1, 2)
        assert freq.presence_pixel_totals == (6, 6, 6)
        assert freq.foa == (0.5, 1 / 6, 2 / 6)

    def test_presence_denominator_excludes_absent_images(self):
        # class 2 appears only in the second map, so its denominator is
        # that map's pixel count alone
        a = _lm(np.zeros((4, 4), dtype=int))          # 16 px, class 0 only
        b = _lm([[0, 2], [2, 2]])                     # 4 px, classes 0 and 2
        freq = compute_foa([a, b])
        assert freq.pixel_counts == (17, 0, 3)
        assert freq.presence_pixel_totals == (20, 0, 4)
        assert freq.foa == (17 / 20, 0.0, 3 / 4)

    def test_empty_dataset(self):
        with pytest.raises(EmptyDatasetError):
            compute_foa([])


class TestWeights:
    def test_median_class_gets_weight_one(self):
        freq = ClassFrequency(
            pixel_counts=(0, 0, 0), presence_pixel_totals=(0, 0, 0),
            foa=(0.9, 0.09, 0.01),
        )
        w = class_weights(freq)
        assert w.weights[1] == pytest.approx(1.0)
        assert w.weights[0] == pytest.approx(0.1)
        assert w.weights[2] == pytest.approx(9.0)
        assert w.absent == (False, False, False)

    def test_absent_class_flagged_and_zeroed(self):
        freq = ClassFrequency(
            pixel_counts=(0, 0, 0), presence_pixel_totals=(0, 0, 0),
            foa=(0.8, 0.0, 0.2),
        )
        w = class_weights(freq)
        assert w.weights[1] == 0.0
        assert w.absent == (False, True, False)
        # median over the remaining pair only
        assert w.weights[0] == pytest.approx(0.5 / 0.8)
        assert w.weights[2] == pytest.approx(0.5 / 0.2)

    def test_all_absent_raises(self):
        freq = ClassFrequency(
            pixel_counts=(0, 0, 0), presence_pixel_totals=(0, 0, 0),
            foa=(0.0, 0.0, 0.0),
        )
        with pytest.raises(AllClassesAbsentError):
            class_weights(freq)

    def test_end_to_end_from_maps(self):
        rng = np.random.default_rng(0)
        maps = [
            _lm(rng.choice(3, size=(32, 32), p=[0.9, 0.07, 0.03]))
            for _ in range(5)
        ]
        w = class_weights(compute_foa(maps))
        # heavy background class gets the small weight
        assert w.weights[0] < w.weights[1] <= w.weights[2]


class TestGSD:
    def test_formula_value(self):
        # 3.75 um pixels, 5.5 mm lens, 120 m altitude
        assert theoretical_gsd(3.75, 5.5, 120.0) == pytest.approx(8.1818, abs=1e-4)

    def test_scales_linearly_with_altitude(self):
        assert theoretical_gsd(3.75, 5.5, 240.0) == pytest.approx(
            2 * theoretical_gsd(3.75, 5.5, 120.0)
        )

    def test_rejects_nonpositive(self):
        with pytest.raises(NonPositiveInputError):
            theoretical_gsd(0.0, 5.5, 120.0)
        with pytest.raises(NonPositiveInputError):
            theoretical_gsd(3.75, -5.5, 120.0)
        with pytest.raises(NonPositiveInputError):
            theoretical_gsd(3.75, 5.5, 0.0)


class TestCoveredArea:
    def test_hand_value(self):
        # 10000 px at 10 cm/px: each px is 0.01 m2, so 100 m2 = 0.01 ha
        mask = np.ones((100, 100), dtype=bool)
        assert covered_area(mask, 10.0) == pytest.approx(0.01)

    def test_counts_only_nonzero(self):
        mask = np.zeros((10, 10))
        mask[:5] = 3.0
        assert covered_area(mask, 100.0) == pytest.approx(50 * 1.0 / 1e4)

    def test_rejects_nonpositive_gsd(self):
        with pytest.raises(NonPositiveInputError):
            covered_area(np.ones((2, 2)), 0.0)
