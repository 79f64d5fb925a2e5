"""Exact entropy, KL divergence and mutual information on tabulated distributions.

All quantities are in nats.
"""
from __future__ import annotations

import numpy as np
from scipy.special import xlogy

# I(i;x) at or below this is rounding noise from identical rows
INFO_FLOOR = 1e-14


def entropy(p) -> float:
    p = np.asarray(p, dtype=float)
    return float(max(-xlogy(p, p).sum(), 0.0)) + 0.0  # no negative zero


def kl_divergence(p, q) -> float:
    """KL[p || q]; +inf when p puts mass where q has none."""
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    if p.shape != q.shape:
        raise ValueError(f"support mismatch: {p.shape} vs {q.shape}")
    support = p > 0
    if np.any(q[support] <= 0):
        return float("inf")
    ps, qs = p[support], q[support]
    return float(max(np.sum(ps * (np.log(ps) - np.log(qs))), 0.0))


def kl_matrix(rows, targets) -> np.ndarray:
    """Pairwise KL[rows[i] || targets[c]] as an (n_rows, n_targets) array.

    Entries are +inf where a row has mass on a cell that the target lacks.
    """
    rows = np.asarray(rows, dtype=float)
    targets = np.asarray(targets, dtype=float)
    neg_h = xlogy(rows, rows).sum(axis=1)
    pos = targets > 0
    log_t = np.log(np.where(pos, targets, 1.0))
    cross = rows @ log_t.T
    out = neg_h[:, None] - cross
    missing = (rows > 0).astype(float) @ (~pos).astype(float).T
    out[missing > 0] = np.inf
    return np.maximum(out, 0.0)


def mutual_information(joint) -> float:
    """I between the row and column variables of a joint probability table."""
    joint = np.asarray(joint, dtype=float)
    pr = joint.sum(axis=1, keepdims=True)
    pc = joint.sum(axis=0, keepdims=True)
    denom = pr * pc
    nz = joint > 0
    val = np.sum(joint[nz] * (np.log(joint[nz]) - np.log(denom[nz])))
    return float(max(val, 0.0))


def fractional_spatial_info(clustering, joint) -> float:
    """Share of the index-location information kept by a hard clustering."""
    from .dib import HardClustering

    if not isinstance(clustering, HardClustering):
        clustering = HardClustering.from_assignment(clustering, joint)
    if clustering.n_points != joint.n:
        raise ValueError("clustering and joint cover different numbers of points")
    total = joint.info_ix
    if total <= INFO_FLOOR:
        raise ValueError("no spatial information: all conditionals are identical")
    return clustering.info_cx(joint) / total
