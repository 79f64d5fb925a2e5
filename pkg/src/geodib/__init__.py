"""Geometric clustering with the deterministic information bottleneck."""
from .data import PointSet, preset_dataset, load_points, save_points
from .smoothing import build_grid, smooth_joint, JointDistribution
from .info import entropy, kl_divergence, mutual_information, fractional_spatial_info
from .dib import HardClustering, SolutionRecord, dib_solve, dib_step, merge_pass
from .selection import beta_sweep, default_schedule, information_curve, select_n_clusters, kink_angle

__all__ = [
    "PointSet", "preset_dataset", "load_points", "save_points",
    "build_grid", "smooth_joint", "JointDistribution",
    "entropy", "kl_divergence", "mutual_information", "fractional_spatial_info",
    "HardClustering", "SolutionRecord", "dib_solve", "dib_step", "merge_pass",
    "beta_sweep", "default_schedule", "information_curve", "select_n_clusters", "kink_angle",
]
