"""Random and/or trees and the Boolean functions they compute."""

from .boolfn import BoolFn, decode, encode
from .complexity import build_complexity_table
from .exprtree import Gate, Literal, eval_tree, parse, serialize
from .limitdist import (NOT_STABILIZED, REFUTED, DistEstimate, exact_dist, forest_stats,
                        mc_dist, mc_indicator, pair_prob, repetition_bound_check,
                        scaling_exponent, theta_true_sandwich)
from .rng import StreamFactory, StreamRandom
from .treegen import make_finite, make_spine
from .trimming import lazy_trim, trim

__all__ = [
    "BoolFn", "decode", "encode", "build_complexity_table", "Gate", "Literal", "eval_tree",
    "parse", "serialize", "NOT_STABILIZED", "REFUTED", "DistEstimate", "exact_dist",
    "forest_stats", "mc_dist", "mc_indicator", "pair_prob", "repetition_bound_check",
    "scaling_exponent", "theta_true_sandwich", "StreamFactory", "StreamRandom", "make_finite",
    "make_spine", "lazy_trim", "trim",
]
__version__ = "0.1.0"
