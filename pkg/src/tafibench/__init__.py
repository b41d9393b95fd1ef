"""tafibench: texture-aware video frame interpolation benchmark.

Synthesizes homogeneous texture corpora for three texture classes, tunes a
classical block-motion interpolator per class, and measures whether per-class
specialization beats one generic configuration, with full statistical tests.
"""

__version__ = "0.1.0"

from .config import RunConfig
from .interp import DEFAULT_PARAMS, InterpParams, estimate_motion, interpolate
from .media import Clip, Frame, read_y4m, write_y4m
from .metrics import psnr, ssim
from .pipeline import run_full_pipeline
from .stats import one_way_anova, reg_inc_beta, welch_t_test
from .taxonomy import TextureClass
from .texclass import classify, extract_features
from .texgen import SynthSpec, synth_clip, synth_corpus
from .tuning import TunedProfileSet, TuningSpec, route, tune_profile

__all__ = [
    "Clip", "DEFAULT_PARAMS", "Frame", "InterpParams", "RunConfig", "SynthSpec",
    "TextureClass", "TunedProfileSet", "TuningSpec", "classify",
    "estimate_motion", "extract_features", "interpolate", "one_way_anova",
    "psnr", "read_y4m", "reg_inc_beta", "route", "run_full_pipeline", "ssim",
    "synth_clip", "synth_corpus", "tune_profile", "welch_t_test", "write_y4m",
]
