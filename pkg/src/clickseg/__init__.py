"""clickseg: click-driven video object segmentation.

A two-stage superpixel MRF pipeline that turns noisy human clicks into
per-frame binary object masks, plus the game mechanics that gather those
clicks, an evaluation/simulation harness, a CLI and an HTTP game service.
"""

__version__ = "0.1.0"

from .media import Click, ClickLog, FrameSequence, MaskSequence
from .mrf import EnergyProblem, MinimizeResult, evaluate, minimize
from .params import Params
from .superpixels import (
    AdjacencyGraph,
    SuperpixelMap,
    build_adjacency,
    chi_square,
    rgb_histogram,
    slic_segment,
)
from .flow import FlowField, TemporalLinks, estimate_flow, temporal_links
from .superclick import SuperclickLabeling, extract_superclicks, shift_clicks
from .temporal import compute_artifacts, segment_stage1, smooth_segment
from .game import (
    ScoreSegmentation,
    SessionState,
    apply_click,
    award_points,
    bootstrap_segmentation,
    classify_click,
    click_quality,
    penalty,
    required_points,
)
from .evaluation import ClickerProfile, ablation_run, pom, prf, simulate_clicks

__all__ = [
    "AdjacencyGraph",
    "ClickerProfile",
    "Click",
    "ClickLog",
    "EnergyProblem",
    "FlowField",
    "FrameSequence",
    "MaskSequence",
    "MinimizeResult",
    "Params",
    "ScoreSegmentation",
    "SessionState",
    "SuperclickLabeling",
    "SuperpixelMap",
    "TemporalLinks",
    "ablation_run",
    "apply_click",
    "award_points",
    "bootstrap_segmentation",
    "build_adjacency",
    "chi_square",
    "classify_click",
    "click_quality",
    "compute_artifacts",
    "estimate_flow",
    "evaluate",
    "extract_superclicks",
    "minimize",
    "penalty",
    "pom",
    "prf",
    "required_points",
    "rgb_histogram",
    "segment_stage1",
    "shift_clicks",
    "simulate_clicks",
    "slic_segment",
    "smooth_segment",
    "temporal_links",
]
