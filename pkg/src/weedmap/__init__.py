"""Weed mapping from multispectral UAV orthomosaics.

The package turns raw narrowband imagery into dense crop/weed
probability maps: radiometric calibration to reflectance, channel
composition (RGB/CIR composites and NDVI), tiling of arbitrarily large
maps, pluggable per-tile classification with a training-free baseline,
reassembly, and an evaluation protocol with PR/AUC and IoU-style
metrics. A synthetic field generator provides labeled data for end to
end runs without flying a camera.
"""

from .calib import (
    PanelSpec,
    RadiometricParams,
    calibrate_band,
    radiance,
    radiance_plane,
    reflectance_factor,
    vignette_factor,
)
from .classify import (
    BaselineClassifier,
    BaselineConfig,
    TileClassifier,
    TileProbabilities,
    baseline_probabilities,
    classify_tile,
    classify_tiles,
    detect_rows,
    ingest_predictions,
    prediction_filename,
)
from .compose import (
    PRESET_REDEDGE12,
    PRESET_SEQUOIA8,
    REDEDGE12_CHANNELS,
    SEQUOIA8_CHANNELS,
    ChannelStack,
    build_stack,
    compose_false_color,
    compute_ndvi,
)
from .errors import *  # noqa: F401,F403
from .evaluate import (
    ConfusionMatrix,
    EvaluationReport,
    PRCurve,
    argmax_labels,
    auc,
    confusion,
    evaluate_map,
    pixel_metrics,
    pr_curve,
)
from .raster import (
    CLASS_COUNT,
    CLASS_NAMES,
    Band,
    BandEntry,
    CalibrationBlock,
    DatasetManifest,
    LabelMap,
    MultispectralRaster,
    ProbabilityMap,
    load_labelmap,
    load_manifest,
    load_plane,
    load_raster,
    read_probability_map,
    save_labelmap,
    save_plane,
    write_manifest,
    write_probability_map,
)
from .stats import (
    ClassFrequency,
    ClassWeights,
    class_weights,
    compute_foa,
    covered_area,
    theoretical_gsd,
)
from .synth import FieldConfig, generate_field, save_field
from .tiling import Tile, TilingPlan, assemble, extract_tiles, plan_tiling

__version__ = "0.1.0"
