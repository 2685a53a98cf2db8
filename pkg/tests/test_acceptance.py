"""Acceptance suite: one test per release criterion.

Each test prints a single PASS/FAIL line (visible with ``pytest -s`` or
in the captured output) and asserts at the stated tolerance. Run the
whole file with::

    pytest tests/test_acceptance.py -v -s
"""

import json
import subprocess
import sys
import textwrap
import time

import numpy as np
import pytest

from weedmap.calib import (
    PanelSpec,
    RadiometricParams,
    calibrate_band,
    reflectance_factor,
    vignette_factor,
)
from weedmap.classify import BaselineClassifier, classify_tiles
from weedmap.cli import run as cli_run
from weedmap.compose import PRESET_REDEDGE12, build_stack
from weedmap.evaluate import auc, pr_curve
from weedmap.stats import ClassFrequency, class_weights, theoretical_gsd
from weedmap.synth import FieldConfig, generate_field
from weedmap.tiling import assemble, extract_tiles, plan_tiling
from tests.test_tiling import _stack


def _report(num, ok, detail):
    print(f"\n{'PASS' if ok else 'FAIL'} criterion {num:02d}: {detail}")
    assert ok, detail


# survey-plot tile grids: (map_w, map_h) -> (rows, cols, pad_rows, pad_cols)
SURVEY_GRIDS = {
    (5995, 5854): (17, 13, 266, 245),
    (4867, 5574): (16, 11, 186, 413),
    (6403, 6405): (18, 14, 75, 317),
    (5470, 5995): (17, 12, 125, 290),
    (4319, 4506): (13, 9, 174, 1),
    (7221, 5909): (17, 16, 211, 459),
    (5601, 5027): (14, 12, 13, 159),
    (6074, 6889): (20, 13, 311, 166),
}


def test_criterion_01_survey_grid_bookkeeping():
    t0 = time.perf_counter()
    mismatches = []
    for (w, h), (rows, cols, pr, pc) in SURVEY_GRIDS.items():
        plan = plan_tiling(w, h)
        got = (plan.tiles_per_row, plan.tiles_per_col, plan.pad_rows, plan.pad_cols)
        if got != (rows, cols, pr, pc):
            mismatches.append((w, h, got))
    elapsed = time.perf_counter() - t0
    ok = not mismatches and elapsed < 1.0
    _report(1, ok,
            f"all {len(SURVEY_GRIDS)} survey grids reproduced in {elapsed:.3f}s"
            + (f" mismatches={mismatches}" if mismatches else ""))


def test_criterion_02_extract_assemble_identity():
    rng = np.random.default_rng(20)
    checked = 0
    for _ in range(100):
        h = int(rng.integers(1, 2001))
        w = int(rng.integers(1, 2001))
        c = int(rng.integers(1, 4))
        stack = _stack(h, w, c, seed=int(rng.integers(1 << 31)))
        plan = plan_tiling(
            w, h, int(rng.integers(1, 601)), int(rng.integers(1, 601))
        )
        out = assemble(plan, extract_tiles(stack, plan), class_count=c)
        assert np.array_equal(out.planes, stack.data), (h, w, c)
        checked += 1
    _report(2, checked >= 100,
            f"{checked} random stacks round-tripped bit-exactly")


def test_criterion_03_theoretical_gsd():
    narrowband = theoretical_gsd(3.75, 5.5, 120.0)
    wideband = theoretical_gsd(3.75, 3.98, 120.0)
    ok = abs(narrowband - 8.2) <= 0.05 and abs(wideband - 11.3) <= 0.05
    _report(3, ok,
            f"gsd(3.75um, 5.5mm, 120m) = {narrowband:.4f} cm (8.2 +- 0.05), "
            f"gsd(3.75um, 3.98mm, 120m) = {wideband:.4f} cm (11.3 +- 0.05)")


def test_criterion_04_median_frequency_weights():
    published = [
        # (foa per class, published weight vector)
        ((0.9304, 0.0586, 0.0356), (0.0638, 1.0, 1.6817)),
        ((0.9732, 0.0265, 0.0060), (0.0273, 1.0, 4.3802)),
    ]
    worst = 0.0
    for foa, expected in published:
        freq = ClassFrequency(
            pixel_counts=(0, 0, 0), presence_pixel_totals=(0, 0, 0), foa=foa
        )
        got = class_weights(freq).weights
        for g, e in zip(got, expected):
            worst = max(worst, abs(g - e) / e)
    ok = worst <= 0.03
    _report(4, ok,
            f"both camera weight vectors within {worst * 100:.2f}% of "
            "published values (limit 3%)")


def test_criterion_05_pr_auc_against_recount_oracle():
    from tests.test_eval import _oracle_auc, _oracle_pr

    rng = np.random.default_rng(21)
    worst = 0.0
    for trial in range(1000):
        h = int(rng.integers(1, 33))
        w = int(rng.integers(1, 33))
        if trial % 3 == 0:
            scores = rng.random((h, w))
        elif trial % 3 == 1:
            levels = int(rng.integers(2, 9))
            scores = rng.integers(0, levels, size=(h, w)) / (levels - 1)
        else:
            scores = np.where(rng.random((h, w)) < 0.5, 0.0, 1.0)
        gt = rng.random((h, w)) < rng.uniform(0.05, 0.9)
        if not gt.any():
            gt.flat[int(rng.integers(h * w))] = True
        curve = pr_curve(scores, gt)
        expected = _oracle_pr(scores, gt)
        assert len(curve) == len(expected), trial
        for (t, p, r), tt, pp, rr in zip(
            expected, curve.thresholds, curve.precisions, curve.recalls
        ):
            worst = max(worst, abs(t - tt), abs(p - pp), abs(r - rr))
        worst = max(worst, abs(auc(curve) - _oracle_auc(expected)))
    ok = worst <= 1e-9
    _report(5, ok,
            f"1000 instances: max |fast - oracle| = {worst:.2e} (limit 1e-9)")


def test_criterion_06_panel_self_consistency():
    rng = np.random.default_rng(22)
    worst_rel = 0.0
    for _ in range(100):
        bit_depth = int(rng.choice([8, 10, 12, 16]))
        h = int(rng.integers(60, 200))
        w = int(rng.integers(60, 200))
        # vignette coefficients scaled so the divisor stays in [0.85, 1.15]
        r_max = float(np.hypot(h, w))
        u = rng.uniform(-1, 1, size=6)
        u *= 0.15 / np.abs(u).sum()
        coeffs = tuple(u[t] / r_max ** (t + 1) for t in range(6))
        params = RadiometricParams(
            a1=float(rng.uniform(0.1, 2.0)),
            a2=float(rng.uniform(0.0, 1e-5)),
            a3=float(rng.uniform(0.0, 1e-3)),
            exposure_s=float(rng.uniform(1e-4, 1e-2)),
            gain=float(rng.choice([1.0, 2.0, 4.0, 8.0])),
            black_level=float(rng.uniform(0.0, 0.2)),
            bit_depth=bit_depth,
            vignette_center=(float(rng.uniform(0, h)), float(rng.uniform(0, w))),
            vignette_coeffs=coeffs,
        )
        full = 2 ** bit_depth
        raw = rng.integers(int(0.60 * full), int(0.70 * full), size=(h, w))
        rw = int(rng.integers(8, w // 2 + 1))
        rh = int(rng.integers(8, h // 2 + 1))
        x = int(rng.integers(0, w - rw + 1))
        y = int(rng.integers(0, h - rh + 1))
        spec = PanelSpec(rho=float(rng.uniform(0.2, 0.85)), region=(x, y, rw, rh))
        factor = reflectance_factor(raw, spec, params)
        band = calibrate_band(raw, params, factor)
        mean = float(band.plane[y:y + rh, x:x + rw].astype(np.float64).mean())
        worst_rel = max(worst_rel, abs(mean - spec.rho) / spec.rho)
        # vignette exactness: equal integer radii agree exactly
        ci, cj = 100.0, 100.0
        p2 = RadiometricParams(
            a1=1.0, a2=0.0, a3=0.0, exposure_s=1.0, gain=1.0, black_level=0.0,
            bit_depth=16, vignette_center=(ci, cj), vignette_coeffs=coeffs,
        )
        assert vignette_factor(103, 104, p2) == vignette_factor(104, 103, p2)
        assert vignette_factor(105, 100, p2) == vignette_factor(100, 105, p2)
    ok = worst_rel <= 1e-6
    _report(6, ok,
            f"100 parameter sets: worst panel relative error {worst_rel:.2e} "
            "(limit 1e-6)")


def test_criterion_07_confusion_merge_invariance():
    from weedmap.evaluate import ConfusionMatrix, confusion
    from weedmap.raster import LabelMap

    rng = np.random.default_rng(23)
    for _ in range(30):
        n = int(rng.integers(50, 400))
        c = int(rng.integers(2, 6))
        gt = rng.integers(0, c, size=n)
        pred = rng.integers(0, c, size=n)
        full = confusion(
            LabelMap(pred[None], class_count=c), LabelMap(gt[None], class_count=c), c
        )
        # random partition into chunks
        k = int(rng.integers(1, 9))
        cuts = np.sort(rng.choice(np.arange(1, n), size=min(k, n - 1),
                                  replace=False))
        bounds = [0, *cuts.tolist(), n]
        parts = [
            confusion(
                LabelMap(pred[a:b][None], class_count=c),
                LabelMap(gt[a:b][None], class_count=c), c,
            )
            for a, b in zip(bounds, bounds[1:])
        ]
        # left fold in a random order and a right fold in another
        order = rng.permutation(len(parts))
        acc = ConfusionMatrix.zero(c)
        for i in order:
            acc = acc.merge(parts[i])
        assert acc == full
        acc2 = parts[-1]
        for part in parts[-2::-1]:
            acc2 = part.merge(acc2)
        assert acc2 == full
    _report(7, True,
            "30 random partitions merge to the full matrix under any order")


def test_criterion_08_baseline_on_synthetic_fields():
    t0 = time.perf_counter()
    crop_aucs = []
    weed_aucs = []
    for seed in range(5):
        raster, labels = generate_field(FieldConfig(seed=seed))
        stack = build_stack(raster, PRESET_REDEDGE12)
        plan = plan_tiling(stack.width, stack.height)
        preds = classify_tiles(BaselineClassifier(), extract_tiles(stack, plan))
        pmap = assemble(plan, preds, class_count=3)
        crop_aucs.append(auc(pr_curve(pmap.planes[1], labels.labels == 1)))
        weed_aucs.append(auc(pr_curve(pmap.planes[2], labels.labels == 2)))
    elapsed = time.perf_counter() - t0
    ok = (min(crop_aucs) >= 0.85 and min(weed_aucs) >= 0.75 and elapsed < 60.0)
    _report(8, ok,
            f"5 fields in {elapsed:.1f}s: crop AUC >= {min(crop_aucs):.3f} "
            f"(floor 0.85), weed AUC >= {min(weed_aucs):.3f} (floor 0.75)")


def test_criterion_09_pipeline_determinism(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"field_width_m": 6.0, "field_height_m": 5.0}))
    for name in ("f1", "f2"):
        assert cli_run(["synth", "--out", str(tmp_path / name),
                        "--config", str(cfg), "--seed", "31"]) == 0
    field_files = ["manifest.json", "labels.png", "band_nir.png", "band_red.png"]
    synth_same = all(
        (tmp_path / "f1" / n).read_bytes() == (tmp_path / "f2" / n).read_bytes()
        for n in field_files
    )
    for run_dir, workers in (("r1", "1"), ("r2", "1"), ("r4", "4")):
        assert cli_run(["pipeline", "--manifest",
                        str(tmp_path / "f1" / "manifest.json"),
                        "--out", str(tmp_path / run_dir),
                        "--workers", workers]) == 0
    capsys.readouterr()
    m1 = (tmp_path / "r1" / "map.prob").read_bytes()
    repeat_same = m1 == (tmp_path / "r2" / "map.prob").read_bytes()
    workers_same = m1 == (tmp_path / "r4" / "map.prob").read_bytes()
    report_same = ((tmp_path / "r1" / "report.json").read_bytes()
                   == (tmp_path / "r2" / "report.json").read_bytes())
    ok = synth_same and repeat_same and workers_same and report_same
    _report(9, ok,
            f"equal seeds byte-identical={synth_same and repeat_same}, "
            f"4 workers == 1 worker={workers_same}")


LARGE_MAP_SCRIPT = textwrap.dedent("""
    import json, resource, sys, time
    import numpy as np
    from weedmap.compose import ChannelStack
    from weedmap.tiling import assemble, extract_tiles, plan_tiling

    rng = np.random.default_rng(0)
    data = rng.random((12, 6405, 6403), dtype=np.float32)
    stack = ChannelStack(names=tuple(f"c{i}" for i in range(12)), data=data)
    footprint = stack.data.nbytes

    t0 = time.perf_counter()
    plan = plan_tiling(6403, 6405)
    out = assemble(plan, extract_tiles(stack, plan), class_count=12)
    elapsed = time.perf_counter() - t0

    identical = all(
        np.array_equal(out.planes[k], stack.data[k]) for k in range(12)
    )
    peak = resource.getrusage(resource.RUSAGE_SELF).ru_maxrss * 1024
    print(json.dumps({
        "elapsed": elapsed,
        "identical": identical,
        "footprint": footprint,
        "peak": peak,
        "grid": [plan.tiles_per_row, plan.tiles_per_col],
    }))
""")


def test_criterion_10_large_map_time_and_memory():
    proc = subprocess.run(
        [sys.executable, "-c", LARGE_MAP_SCRIPT],
        capture_output=True, text=True, timeout=300,
    )
    assert proc.returncode == 0, proc.stderr[-2000:]
    result = json.loads(proc.stdout.strip().splitlines()[-1])
    ratio = result["peak"] / result["footprint"]
    ok = (result["identical"] and result["elapsed"] < 10.0 and ratio < 2.5
          and result["grid"] == [18, 14])
    _report(10, ok,
            f"6403x6405x12 map tiled+assembled in {result['elapsed']:.2f}s "
            f"(limit 10s), peak RSS {ratio:.2f}x footprint (limit 2.5x), "
            f"identity={result['identical']}")
