"""Command-line front end for the weed mapping pipeline.

Subcommands cover each stage (calibrate, compose, tile, infer,
assemble, eval, stats, synth) plus an end-to-end ``pipeline`` runner.
Stage failures exit with status 1 and a single machine-parsable stderr
line of the form ``error: <ExceptionName>: <message>``; usage errors
exit with status 2. Set WEEDMAP_LOG=INFO (or DEBUG) for progress
logging.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import shutil
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace
from pathlib import Path

import numpy as np
from PIL import Image

from .calib import PanelSpec, RadiometricParams, calibrate_band, reflectance_factor
from .classify import (
    BaselineClassifier,
    BaselineConfig,
    classify_tile,
    ingest_predictions,
    prediction_filename,
)
from .compose import PRESET_REDEDGE12, PRESET_SEQUOIA8, ChannelStack, build_stack
from .errors import ConfigInvalidError, WeedMapError
from .evaluate import DEFAULT_PR_POINTS, argmax_labels, evaluate_map
from .raster import (
    BandEntry,
    DatasetManifest,
    LabelMap,
    MultispectralRaster,
    ProbabilityMap,
    load_labelmap,
    load_manifest,
    load_plane,
    load_raster,
    quantize_unit,
    read_probability_map,
    save_plane,
    write_manifest,
    write_probability_map,
)
from .stats import class_weights, compute_foa, covered_area, theoretical_gsd
from .synth import FieldConfig, generate_field, save_field
from .tiling import TilingPlan, assemble, extract_tiles, plan_tiling

log = logging.getLogger("weedmap")

# class colors for exported maps: background blue, crop green, weed red
CLASS_COLORS = np.array(
    [[0, 0, 255], [0, 255, 0], [255, 0, 0]], dtype=np.uint8
)

_CAMERA_PRESETS = {"RedEdgeM": PRESET_REDEDGE12, "Sequoia": PRESET_SEQUOIA8}


def ndvi_to_uint8(plane: np.ndarray) -> np.ndarray:
    """Map NDVI in [-1, 1] onto the full 8-bit range."""
    scaled = (np.asarray(plane, dtype=np.float64) + 1.0) * (255.0 / 2.0)
    return np.clip(np.round(scaled), 0, 255).astype(np.uint8)


def export_colorized(labels: LabelMap, path: str | Path):
    """Write a label map as an RGB image using the fixed class colors."""
    Image.fromarray(CLASS_COLORS[labels.labels], mode="RGB").save(path)


def _export_color(path: Path, planes: np.ndarray):
    rgb = np.clip(np.round(planes * 255.0), 0, 255).astype(np.uint8)
    Image.fromarray(np.moveaxis(rgb, 0, -1), mode="RGB").save(path)


def _load_json(path: str | Path, what: str) -> dict:
    try:
        with open(path) as fh:
            return json.load(fh)
    except FileNotFoundError:
        raise ConfigInvalidError(f"{what} file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise ConfigInvalidError(f"{what} is not valid JSON: {exc}") from None


def _calibrated_raster(manifest: DatasetManifest) -> MultispectralRaster:
    """Load raw planes and run the radiometric chain in memory."""
    cal = manifest.calibration
    params = RadiometricParams.from_block(cal)
    panel_plane, _ = load_plane(manifest.resolve(cal.panel_image))
    bands = []
    for idx, entry in enumerate(manifest.bands):
        raw, _ = load_plane(manifest.resolve(entry.path))
        spec = PanelSpec(rho=cal.panel_rho[idx], region=tuple(cal.panel_region))
        factor = reflectance_factor(panel_plane, spec, params)
        bands.append(calibrate_band(
            raw, params, factor,
            name=entry.name, center_nm=entry.center_nm,
            bandwidth_nm=entry.bandwidth_nm,
        ))
        log.info("calibrated band %s (f=%.6g)", entry.name, factor)
    return MultispectralRaster(bands=bands, gsd_cm=manifest.gsd_cm)


def _load_reflectance(manifest: DatasetManifest) -> MultispectralRaster:
    if manifest.calibration is not None:
        return _calibrated_raster(manifest)
    return load_raster(manifest)


def _pick_preset(manifest: DatasetManifest, override: str | None) -> str:
    if override:
        return override
    preset = _CAMERA_PRESETS.get(manifest.camera)
    if preset is None:
        raise ConfigInvalidError(
            f"camera {manifest.camera!r} has no default stack preset; "
            "pass --preset"
        )
    return preset


def cmd_synth(args) -> int:
    if args.config:
        config = FieldConfig.from_dict(_load_json(args.config, "field config"))
    else:
        config = FieldConfig()
    if args.seed is not None:
        config = replace(config, seed=args.seed)
    raster, labels = generate_field(config)
    path = save_field(raster, labels, args.out, config=config)
    print(f"synthetic field {raster.width}x{raster.height} -> {path}")
    return 0


def cmd_calibrate(args) -> int:
    manifest = load_manifest(args.manifest)
    if manifest.calibration is None:
        raise ConfigInvalidError("manifest has no calibration block")
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    raster = _calibrated_raster(manifest)
    entries = []
    for band in raster.bands:
        filename = f"refl_{band.name}.png"
        # clamp to [0, 1] for 16-bit storage; specular values above 1 saturate
        save_plane(
            out_dir / filename,
            quantize_unit(np.clip(band.plane, 0.0, 1.0), 65535),
            65535,
        )
        entries.append(BandEntry(
            name=band.name, center_nm=band.center_nm,
            bandwidth_nm=band.bandwidth_nm, path=filename,
        ))
    labels_rel = None
    if manifest.labels is not None:
        shutil.copyfile(manifest.resolve(manifest.labels), out_dir / "labels.png")
        labels_rel = "labels.png"
    write_manifest(DatasetManifest(
        camera=manifest.camera,
        gsd_cm=manifest.gsd_cm,
        tile_width=manifest.tile_width,
        tile_height=manifest.tile_height,
        bands=entries,
        labels=labels_rel,
    ), out_dir / "manifest.json")
    print(f"calibrated {len(entries)} bands -> {out_dir}")
    return 0


def cmd_compose(args) -> int:
    manifest = load_manifest(args.manifest)
    raster = _load_reflectance(manifest)
    preset = _pick_preset(manifest, args.preset)
    stack = build_stack(raster, preset)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    np.save(out_dir / "stack.npy", stack.data)
    with open(out_dir / "stack.json", "w") as fh:
        json.dump({
            "preset": stack.preset,
            "channels": list(stack.names),
            "width": stack.width,
            "height": stack.height,
            "data": "stack.npy",
            "gsd_cm": manifest.gsd_cm,
            "tile_width": manifest.tile_width,
            "tile_height": manifest.tile_height,
        }, fh, indent=2)
    if preset == PRESET_REDEDGE12:
        _export_color(out_dir / "rgb.png", stack.data[4:7])
    _export_color(
        out_dir / "cir.png",
        np.stack([stack.plane("cir.nir"), stack.plane("cir.r"),
                  stack.plane("cir.g")]),
    )
    save_plane(out_dir / "ndvi.png", ndvi_to_uint8(stack.plane("ndvi")), 255)
    print(f"stack {preset} {stack.width}x{stack.height}x{stack.channel_count} "
          f"-> {out_dir}")
    return 0


def _load_stack(stack_arg: str) -> tuple[ChannelStack, dict]:
    path = Path(stack_arg)
    if path.is_dir():
        path = path / "stack.json"
    info = _load_json(path, "stack description")
    data = np.load(path.parent / info["data"], mmap_mode="r")
    stack = ChannelStack(
        names=tuple(info["channels"]), data=data, preset=info.get("preset", "custom")
    )
    return stack, info


def cmd_tile(args) -> int:
    stack, info = _load_stack(args.stack)
    plan = plan_tiling(stack.width, stack.height, args.tile_w, args.tile_h)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    effective = []
    for tile in extract_tiles(stack, plan):
        np.save(out_dir / f"r{tile.grid_row}_c{tile.grid_col}.npy", tile.planes)
        if tile.effective:
            effective.append([tile.grid_row, tile.grid_col])
    payload = plan.to_dict()
    payload["channels"] = list(stack.names)
    payload["effective"] = effective
    with open(out_dir / "plan.json", "w") as fh:
        json.dump(payload, fh, indent=2)
    print(f"grid {plan.tiles_per_row}x{plan.tiles_per_col} "
          f"pad {plan.pad_rows}/{plan.pad_cols}")
    return 0


def _read_plan_dir(tiles_dir: Path) -> tuple[TilingPlan, dict]:
    info = _load_json(tiles_dir / "plan.json", "tiling plan")
    return TilingPlan.from_dict(info), info


def cmd_infer(args) -> int:
    from .tiling import Tile

    tiles_dir = Path(args.tiles)
    plan, info = _read_plan_dir(tiles_dir)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    if args.backend == "ingest":
        if not args.pred_dir:
            raise ConfigInvalidError("--backend ingest requires --pred-dir")
        preds = ingest_predictions(args.pred_dir, plan)
        for pred in preds:
            write_probability_map(
                ProbabilityMap(pred.planes),
                out_dir / prediction_filename(pred.grid_row, pred.grid_col),
            )
        print(f"ingested {len(preds)} predictions -> {out_dir}")
        return 0
    if args.config:
        config = BaselineConfig.from_dict(_load_json(args.config, "baseline config"))
    else:
        config = BaselineConfig()
    classifier = BaselineClassifier(config)
    channels = tuple(info.get("channels") or ())
    cells = [tuple(c) for c in info.get("effective", [])]

    def work(cell):
        row, col = cell
        planes = np.load(tiles_dir / f"r{row}_c{col}.npy")
        tile = Tile(grid_row=row, grid_col=col, planes=planes,
                    channel_names=channels or None)
        pred = classify_tile(classifier, tile)
        write_probability_map(
            ProbabilityMap(pred.planes), out_dir / prediction_filename(row, col)
        )

    with ThreadPoolExecutor(max_workers=args.workers) as pool:
        list(pool.map(work, cells))
    print(f"classified {len(cells)} tiles -> {out_dir}")
    return 0


def cmd_assemble(args) -> int:
    info = _load_json(args.plan, "tiling plan")
    plan = TilingPlan.from_dict(info)
    preds = ingest_predictions(args.pred_dir, plan)
    pmap = assemble(plan, preds, class_count=args.classes)
    write_probability_map(pmap, args.out)
    print(f"assembled {len(preds)} tiles into "
          f"{pmap.width}x{pmap.height}x{pmap.class_count} -> {args.out}")
    return 0


def cmd_eval(args) -> int:
    pmap = read_probability_map(args.pred)
    gt = load_labelmap(args.gt, class_count=pmap.class_count)
    report = evaluate_map(pmap, gt)
    payload = report.to_dict(max_pr_points=args.pr_points)
    if args.out:
        with open(args.out, "w") as fh:
            json.dump(payload, fh, indent=2)
        print(f"pa {report.pa:.4f} mpa {report.mpa:.4f} "
              f"miou {report.miou:.4f} fwiou {report.fwiou:.4f}")
    else:
        json.dump(payload, sys.stdout, indent=2)
        print()
    return 0


def cmd_stats(args) -> int:
    manifest = load_manifest(args.manifest)
    label_paths = list(args.labels or [])
    if not label_paths and manifest.labels is not None:
        label_paths = [manifest.resolve(manifest.labels)]
    payload: dict = {"camera": manifest.camera, "gsd_cm": manifest.gsd_cm}
    if label_paths:
        maps = [load_labelmap(p) for p in label_paths]
        freq = compute_foa(maps)
        weights = class_weights(freq)
        payload["pixel_counts"] = list(freq.pixel_counts)
        payload["foa"] = list(freq.foa)
        payload["weights"] = list(weights.weights)
        payload["absent"] = list(weights.absent)
    if args.pixel_um is not None:
        payload["theoretical_gsd_cm"] = theoretical_gsd(
            args.pixel_um, args.focal_mm, args.altitude_m
        )
    raster = load_raster(manifest)
    mask = np.zeros((raster.height, raster.width), dtype=bool)
    for band in raster.bands:
        mask |= band.plane > 0
    payload["covered_ha"] = covered_area(mask, manifest.gsd_cm)
    if args.out:
        with open(args.out, "w") as fh:
            json.dump(payload, fh, indent=2)
        print(f"stats -> {args.out}")
    else:
        json.dump(payload, sys.stdout, indent=2)
        print()
    return 0


def cmd_pipeline(args) -> int:
    manifest = load_manifest(args.manifest)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    raster = _load_reflectance(manifest)
    preset = _pick_preset(manifest, args.preset)
    stack = build_stack(raster, preset)
    plan = plan_tiling(
        stack.width, stack.height, manifest.tile_width, manifest.tile_height
    )
    print(f"grid {plan.tiles_per_row}x{plan.tiles_per_col} "
          f"pad {plan.pad_rows}/{plan.pad_cols}")
    pred_dir = out_dir / "predictions"
    pred_dir.mkdir(exist_ok=True)
    if args.backend == "ingest":
        if not args.pred_dir:
            raise ConfigInvalidError("--backend ingest requires --pred-dir")
        for pred in ingest_predictions(args.pred_dir, plan):
            write_probability_map(
                ProbabilityMap(pred.planes),
                pred_dir / prediction_filename(pred.grid_row, pred.grid_col),
            )
    else:
        if args.config:
            config = BaselineConfig.from_dict(
                _load_json(args.config, "baseline config")
            )
        else:
            config = BaselineConfig()
        classifier = BaselineClassifier(config)

        def work(tile):
            pred = classify_tile(classifier, tile)
            write_probability_map(
                ProbabilityMap(pred.planes),
                pred_dir / prediction_filename(tile.grid_row, tile.grid_col),
            )

        effective = (t for t in extract_tiles(stack, plan) if t.effective)
        with ThreadPoolExecutor(max_workers=args.workers) as pool:
            list(pool.map(work, effective))
    preds = ingest_predictions(pred_dir, plan)
    pmap = assemble(plan, preds, class_count=3)
    write_probability_map(pmap, out_dir / "map.prob")
    export_colorized(argmax_labels(pmap), out_dir / "weedmap.png")
    if manifest.labels is not None:
        gt = load_labelmap(manifest.resolve(manifest.labels))
        report = evaluate_map(pmap, gt)
        with open(out_dir / "report.json", "w") as fh:
            json.dump(report.to_dict(max_pr_points=args.pr_points), fh, indent=2)
        print(f"pa {report.pa:.4f} mpa {report.mpa:.4f} "
              f"miou {report.miou:.4f} fwiou {report.fwiou:.4f}")
    print(f"done -> {out_dir}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="weedmap",
        description="weed mapping pipeline for multispectral orthomosaics",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a synthetic labeled field")
    p.add_argument("--out", required=True, help="output dataset directory")
    p.add_argument("--config", help="field config JSON")
    p.add_argument("--seed", type=int, default=None, help="override RNG seed")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("calibrate", help="raw counts to reflectance bands")
    p.add_argument("--manifest", required=True)
    p.add_argument("--out", required=True, help="output dataset directory")
    p.set_defaults(func=cmd_calibrate)

    p = sub.add_parser("compose", help="build the classifier input stack")
    p.add_argument("--manifest", required=True)
    p.add_argument("--out", required=True, help="output stack directory")
    p.add_argument("--preset", choices=[PRESET_REDEDGE12, PRESET_SEQUOIA8])
    p.set_defaults(func=cmd_compose)

    p = sub.add_parser("tile", help="cut a stack into padded tiles")
    p.add_argument("--stack", required=True, help="stack directory or stack.json")
    p.add_argument("--out", required=True, help="output tiles directory")
    p.add_argument("--tile-w", type=int, default=480)
    p.add_argument("--tile-h", type=int, default=360)
    p.set_defaults(func=cmd_tile)

    p = sub.add_parser("infer", help="classify tiles into probability planes")
    p.add_argument("--tiles", required=True, help="tiles directory with plan.json")
    p.add_argument("--out", required=True, help="output predictions directory")
    p.add_argument("--backend", choices=["baseline", "ingest"], default="baseline")
    p.add_argument("--pred-dir", help="existing predictions (ingest backend)")
    p.add_argument("--config", help="baseline config JSON")
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_infer)

    p = sub.add_parser("assemble", help="merge tile predictions into one map")
    p.add_argument("--plan", required=True, help="plan.json path")
    p.add_argument("--pred-dir", required=True)
    p.add_argument("--out", required=True, help="output .prob path")
    p.add_argument("--classes", type=int, default=3)
    p.set_defaults(func=cmd_assemble)

    p = sub.add_parser("eval", help="evaluate a probability map against truth")
    p.add_argument("--pred", required=True, help="assembled .prob map")
    p.add_argument("--gt", required=True, help="ground-truth label image")
    p.add_argument("--out", help="report JSON path (default: stdout)")
    p.add_argument("--pr-points", type=int, default=DEFAULT_PR_POINTS)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("stats", help="dataset statistics and class weights")
    p.add_argument("--manifest", required=True)
    p.add_argument("--labels", nargs="*", help="label maps (default: manifest's)")
    p.add_argument("--pixel-um", type=float, help="sensor pixel size, um")
    p.add_argument("--focal-mm", type=float, default=5.5)
    p.add_argument("--altitude-m", type=float, default=120.0)
    p.add_argument("--out", help="stats JSON path (default: stdout)")
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("pipeline", help="run every stage end to end")
    p.add_argument("--manifest", required=True)
    p.add_argument("--out", required=True, help="run directory")
    p.add_argument("--backend", choices=["baseline", "ingest"], default="baseline")
    p.add_argument("--pred-dir", help="existing predictions (ingest backend)")
    p.add_argument("--config", help="baseline config JSON")
    p.add_argument("--preset", choices=[PRESET_REDEDGE12, PRESET_SEQUOIA8])
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--pr-points", type=int, default=DEFAULT_PR_POINTS)
    p.set_defaults(func=cmd_pipeline)

    return parser


def run(argv=None) -> int:
    """Parse and execute; returns the process exit code."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except WeedMapError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


def main():
    logging.basicConfig(
        level=os.environ.get("WEEDMAP_LOG", "WARNING").upper(),
        format="%(levelname)s %(name)s: %(message)s",
    )
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
