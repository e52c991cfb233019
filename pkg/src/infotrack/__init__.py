"""Tracking-by-detection with two co-trained online SVMs and a sample critic."""

__version__ = "0.1.0"

from .config import TrackerConfig, load_config_file, parse_config_text
from .critic import Critic, CriticConfig, CriticProposeError, joint_vector
from .evaluation import EvalCurves, compare, evaluate
from .features import (DegenerateSampleError, FeatureConfig,
                       PatchFeatureExtractor, extract_features)
from .geometry import (BoundingBox, Transformation, center_distance, compose,
                       iou)
from .imaging import Frame, IntegralImage, integral, load_sequence, read_pgm
from .sampler import Sampler, SamplerConfig, gaussian_only_batch, hybrid_batch
from .svm import BudgetedSvm, LabeledExample
from .synth import Scenario, generate
from .tracker import (CoTracker, FrameContext, ScoredSample, StepResult,
                      compute_errors_weights, estimate_state, fuse_labels,
                      uncertainty_threshold)

__all__ = [
    "__version__",
    "BoundingBox", "Transformation", "compose", "iou", "center_distance",
    "Frame", "IntegralImage", "integral", "read_pgm", "load_sequence",
    "FeatureConfig", "PatchFeatureExtractor", "extract_features",
    "DegenerateSampleError",
    "BudgetedSvm", "LabeledExample",
    "Critic", "CriticConfig", "CriticProposeError", "joint_vector",
    "Sampler", "SamplerConfig", "hybrid_batch", "gaussian_only_batch",
    "CoTracker", "ScoredSample", "FrameContext", "StepResult",
    "uncertainty_threshold", "fuse_labels", "compute_errors_weights",
    "estimate_state",
    "TrackerConfig", "parse_config_text", "load_config_file",
    "Scenario", "generate",
    "EvalCurves", "evaluate", "compare",
]
