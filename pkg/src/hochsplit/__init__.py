"""Splitting maps and norm audits for point cohomology of l1(Z+), l1(G+) and L1(R+)."""

from .cochain import Cochain, coboundary, cochain_norm, random_cochain
from .discsplit import (
    SplitReport,
    derivation_stabilize,
    norm_audit,
    peak_delta_net,
    peak_split,
    split_map,
    splitting_identity_check,
    stabilize,
)
from .errors import ChainNotRefining, ConfigError, GridMismatch, HochsplitError, NotInIdeal, WindowTooSmall
from .seriesalg import DiscPoint, TensorSeries, TruncatedSeries, blaschke, blaschke_divide, convolve, sigma

__version__ = "0.1.0"

__all__ = [
    "Cochain", "coboundary", "cochain_norm", "random_cochain",
    "SplitReport", "derivation_stabilize", "norm_audit", "peak_delta_net", "peak_split",
    "split_map", "splitting_identity_check", "stabilize",
    "ChainNotRefining", "ConfigError", "GridMismatch", "HochsplitError", "NotInIdeal", "WindowTooSmall",
    "DiscPoint", "TensorSeries", "TruncatedSeries", "blaschke", "blaschke_divide", "convolve", "sigma",
]
