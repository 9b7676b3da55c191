"""Streaming detectors over per-round alert vectors."""
from .base import DETECTORS, Detector, load_state, make_detector, save_state
from .baselines import ILOF, SAD, SlidingLOF
from .features import FeatureVector, feature_dim, synthesize_features
from .fuhst import FuHST, PlainHST
from .hst import HSTEnsemble, hst_score, hst_train

__all__ = [
    "DETECTORS", "Detector", "FeatureVector", "FuHST", "HSTEnsemble", "ILOF", "PlainHST", "SAD",
    "SlidingLOF", "feature_dim", "hst_score", "hst_train", "load_state", "make_detector", "save_state",
    "synthesize_features",
]
