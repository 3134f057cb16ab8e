"""roadsight: post-processing for driver-assistance perception.

Fuses upstream vision model outputs (detections, segmentation, monocular
depth, lane key-points) into driver-assistance results: a dynamic road
ROI with filtered lanes, refined segmentation, per-object metric
distances, traffic messages, annotated frames, and an evaluation and
benchmark harness verifiable against synthetic-scene oracles.
"""

from .config import PipelineConfig, load_config
from .distance import (
    DistanceEstimate,
    average_pool,
    crop_and_mask,
    estimate_distance,
    gaussian_inliers,
    grouped_average_pool,
    min_pool,
)
from .errors import (
    ConfigError,
    FormatError,
    InvalidDetectionError,
    InvalidLabelError,
    RoadsightError,
    SceneSpecError,
)
from .hull import convex_hull, rasterize_hull
from .metrics import (
    ConfusionCounts,
    bbox_iou,
    detection_metrics,
    distance_report,
    mask_iou,
    match_detections,
    relative_accuracy,
)
from .morphology import (
    Contour,
    StructuringElement,
    connected_components,
    dilate,
    erode,
    fill_holes,
    opening,
)
from .pipeline import (
    FrameBundle,
    PerceptionFrameOutput,
    benchmark,
    process_frame,
    read_bundle,
    run_directory,
    write_bundle,
)
from .roi import RoiMask, build_dynamic_roi, filter_lanes, lane_regions
from .segmentation import RefinedSegMap, refine_all, refine_class
from .synth import (
    NoiseSpec,
    PortableRng,
    RenderedScene,
    SceneObject,
    SceneSpec,
    inject_noise,
    render_scene,
    sample_scene,
)
from .traffic import (
    TrafficMessage,
    classify_light_state,
    light_message,
    proximity_warnings,
)
from .types import ClassRegistry, Detection, LaneInstance

__version__ = "0.1.0"
