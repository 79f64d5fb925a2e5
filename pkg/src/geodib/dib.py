"""Deterministic information bottleneck on a smoothed joint p(i, x).

The hard iteration alternates

    c*(i) = argmax_c  log q(c) - beta * KL[p(x|i) || q(x|c)]
    q(c) = n_c / N,   q(x|c) = mean of member rows p(x|i)

and, once it stalls, greedily applies the pairwise cluster merge that lowers
L = H(T) - beta * I(T; x) the most.
"""
from __future__ import annotations

import hashlib
import logging
from dataclasses import asdict, dataclass
from functools import cached_property

import numpy as np
from scipy.special import logsumexp, xlogy

from .info import INFO_FLOOR, entropy, kl_matrix
from .smoothing import JointDistribution

log = logging.getLogger(__name__)

MAX_ITER = 500
TOL = 1e-10
MAX_INIT_CLUSTERS = 16
# merges must lower L by more than this to count as an improvement
MERGE_TOL = 1e-12
# increases of L beyond this are reported as monotonicity violations
MONOTONE_TOL = 1e-9


@dataclass(frozen=True)
class HardClustering:
    assignment: np.ndarray
    counts: np.ndarray
    cluster_conditional: np.ndarray

    @classmethod
    def from_assignment(cls, assignment, joint: JointDistribution) -> "HardClustering":
        """Compact labels to 0..n_c-1 (order preserved) and tabulate q(c), q(x|c)."""
        assignment = np.asarray(assignment)
        if assignment.shape != (joint.n,):
            raise ValueError("assignment must have one label per data point")
        _, compact = np.unique(assignment, return_inverse=True)
        compact = compact.astype(np.int64)
        n_c = int(compact.max()) + 1
        counts = np.bincount(compact, minlength=n_c)
        sums = np.zeros((n_c, joint.m))
        np.add.at(sums, compact, joint.conditional)
        cond = sums / counts[:, None]
        for arr in (compact, counts, cond):
            arr.setflags(write=False)
        return cls(compact, counts, cond)

    @property
    def n_points(self) -> int:
        return self.assignment.shape[0]

    @property
    def n_c(self) -> int:
        return self.counts.shape[0]

    @property
    def cluster_mass(self) -> np.ndarray:
        return self.counts / self.n_points

    @cached_property
    def entropy_t(self) -> float:
        return entropy(self.cluster_mass)

    def info_cx(self, joint: JointDistribution) -> float:
        """I(c; x) = sum_c q(c) KL[q(x|c) || p(x)]."""
        return float(np.dot(self.cluster_mass, _kl_to_marginal(self.cluster_conditional, joint.p_x)))

    def encoder(self) -> np.ndarray:
        """q(c|i) as an N x n_c one-hot table."""
        enc = np.zeros((self.n_points, self.n_c))
        enc[np.arange(self.n_points), self.assignment] = 1.0
        return enc

    def same_partition(self, other: "HardClustering") -> bool:
        return np.array_equal(self.assignment, other.assignment)


def _kl_to_marginal(rows: np.ndarray, p_x: np.ndarray) -> np.ndarray:
    # rows are mixtures of the rows averaged into p_x, so rows > 0 implies p_x > 0
    safe = np.where(p_x > 0, p_x, 1.0)
    return np.maximum(xlogy(rows, rows).sum(axis=1) - rows @ np.log(safe), 0.0)


def dib_cost(joint: JointDistribution, clustering: HardClustering, beta: float) -> float:
    return clustering.entropy_t - beta * clustering.info_cx(joint)


def _scores(joint, beta, clustering) -> np.ndarray:
    div = kl_matrix(joint.conditional, clustering.cluster_conditional)
    with np.errstate(invalid="ignore"):
        sc = np.log(clustering.cluster_mass)[None, :] - beta * div
    sc[np.isinf(div)] = -np.inf
    return sc


def _fallback(joint, i, clustering, assignment) -> int:
    """Label for a point whose divergence to every cluster is infinite."""
    support = joint.conditional[i] > 0
    for c in range(clustering.n_c):
        members = np.flatnonzero(clustering.assignment == c)
        if np.any(np.all(joint.conditional[members][:, support] > 0, axis=1)):
            return c
    return int(assignment.max()) + 1


def dib_step(joint: JointDistribution, beta: float, current: HardClustering,
             sequential: bool = False) -> HardClustering:
    """One reassignment of every point followed by a refresh of q(c), q(x|c).

    With ``sequential=True`` the cluster tables are refreshed after each
    individual point move instead of once per sweep.
    """
    if sequential:
        return _sequential_step(joint, beta, current)
    sc = _scores(joint, beta, current)
    new = np.argmax(sc, axis=1)
    dead = np.flatnonzero(np.all(np.isneginf(sc), axis=1))
    for i in dead:
        new[i] = _fallback(joint, i, current, new)
    if np.array_equal(new, current.assignment):
        return current
    return HardClustering.from_assignment(new, joint)


def _sequential_step(joint, beta, current):
    assign = current.assignment.copy()
    counts = current.counts.astype(float).copy()
    sums = current.cluster_conditional * counts[:, None]
    rows = joint.conditional
    for i in range(joint.n):
        live = counts > 0
        cond = np.where(live[:, None], sums / np.maximum(counts, 1)[:, None], 0.0)
        div = kl_matrix(rows[i:i + 1], cond)[0]
        with np.errstate(divide="ignore"):
            sc = np.log(counts / joint.n) - beta * div
        sc[~live | np.isinf(div)] = -np.inf
        if np.all(np.isneginf(sc)):
            continue
        c = int(np.argmax(sc))
        old = assign[i]
        if c != old:
            counts[old] -= 1
            sums[old] -= rows[i]
            counts[c] += 1
            sums[c] += rows[i]
            assign[i] = c
    if np.array_equal(assign, current.assignment):
        return current
    return HardClustering.from_assignment(assign, joint)


def merge_candidates(joint: JointDistribution, beta: float, current: HardClustering):
    """Cost of every pairwise merge, as ``{(a, b): L_merged}``."""
    q = current.cluster_mass
    kl = _kl_to_marginal(current.cluster_conditional, joint.p_x)
    base = dib_cost(joint, current, beta)
    out = {}
    for a in range(current.n_c):
        for b in range(a + 1, current.n_c):
            qab = q[a] + q[b]
            r = (current.counts[a] * current.cluster_conditional[a]
                 + current.counts[b] * current.cluster_conditional[b]) / (current.counts[a] + current.counts[b])
            d_h = -xlogy(qab, qab) + xlogy(q[a], q[a]) + xlogy(q[b], q[b])
            d_i = qab * _kl_to_marginal(r[None, :], joint.p_x)[0] - q[a] * kl[a] - q[b] * kl[b]
            out[(a, b)] = base + d_h - beta * d_i
    return out


def merge_pass(joint: JointDistribution, beta: float, current: HardClustering) -> HardClustering:
    """Apply the single pairwise merge that lowers L the most, if any does."""
    if current.n_c < 2:
        return current
    cands = merge_candidates(joint, beta, current)
    (a, b), best = min(cands.items(), key=lambda kv: (kv[1], kv[0]))
    if best >= dib_cost(joint, current, beta) - MERGE_TOL:
        return current
    assign = np.where(current.assignment == b, a, current.assignment)
    return HardClustering.from_assignment(assign, joint)


@dataclass(frozen=True)
class SolutionRecord:
    beta: float
    s: float | None
    n_c: int
    entropy_T: float
    info_TX: float
    cost_L: float
    frac_info: float
    digest: str
    assignment: tuple[int, ...]
    converged: bool
    iterations: int
    max_cost_increase: float = 0.0

    def to_json(self) -> dict:
        d = asdict(self)
        d["assignment"] = list(self.assignment)
        return d

    @classmethod
    def from_json(cls, d: dict) -> "SolutionRecord":
        d = dict(d)
        d["assignment"] = tuple(int(v) for v in d["assignment"])
        return cls(**d)


def assignment_digest(assignment) -> str:
    return hashlib.sha1(np.asarray(assignment, dtype="<i8").tobytes()).hexdigest()[:16]


def make_record(joint, beta, clustering, converged=True, iterations=0, max_increase=0.0) -> SolutionRecord:
    h = clustering.entropy_t
    i_cx = clustering.info_cx(joint)
    total = joint.info_ix
    return SolutionRecord(
        beta=float(beta),
        s=joint.s,
        n_c=clustering.n_c,
        entropy_T=h,
        info_TX=i_cx,
        cost_L=h - beta * i_cx,
        frac_info=i_cx / total if total > INFO_FLOOR else 0.0,
        digest=assignment_digest(clustering.assignment),
        assignment=tuple(int(v) for v in clustering.assignment),
        converged=converged,
        iterations=iterations,
        max_cost_increase=max_increase,
    )


def default_init_clusters(n: int, expected: int | None = None) -> int:
    cap = MAX_INIT_CLUSTERS if expected is None else min(2 * expected, MAX_INIT_CLUSTERS)
    return max(1, min(n, cap))


def random_assignment(n: int, k: int, rng) -> np.ndarray:
    """Uniform labels in 0..k-1 with every label used at least once."""
    lab = rng.integers(k, size=n)
    lab[rng.permutation(n)[:k]] = np.arange(k)
    return lab


def dib_solve_clustering(joint, beta, init_clusters=None, seed=0, max_iter=MAX_ITER, tol=TOL,
                         sequential=False, init=None):
    """Run DIB with merge passes from a random start; returns (clustering, converged, iterations, worst increase)."""
    if init is None:
        k = default_init_clusters(joint.n) if init_clusters is None else init_clusters
        if not 1 <= k <= joint.n:
            raise ValueError("init_clusters must lie in [1, N]")
        init = random_assignment(joint.n, k, np.random.default_rng(seed))
    cur = HardClustering.from_assignment(init, joint)
    cost = dib_cost(joint, cur, beta)
    worst = -np.inf
    iterations = 0
    converged = True

    def note(kind, before, after):
        nonlocal worst
        worst = max(worst, after - before)
        if after - before > MONOTONE_TOL:
            log.warning("%s raised L from %.15g to %.15g (beta=%g)", kind, before, after, beta)

    while True:
        steps = 0
        while True:
            nxt = dib_step(joint, beta, cur, sequential=sequential)
            steps += 1
            iterations += 1
            new_cost = dib_cost(joint, nxt, beta)
            note("dib_step", cost, new_cost)
            changed = not nxt.same_partition(cur)
            delta = abs(new_cost - cost)
            cur, cost = nxt, new_cost
            if not changed or delta < tol:
                break
            if steps >= max_iter:
                converged = False
                break
        merged = merge_pass(joint, beta, cur)
        if merged is cur:
            break
        new_cost = dib_cost(joint, merged, beta)
        note("merge_pass", cost, new_cost)
        cur, cost = merged, new_cost
    return cur, converged, iterations, max(worst, 0.0) if np.isfinite(worst) else 0.0


def dib_solve(joint: JointDistribution, beta: float, init_clusters: int | None = None, seed: int = 0,
              max_iter: int = MAX_ITER, tol: float = TOL, sequential: bool = False) -> SolutionRecord:
    clustering, converged, iters, worst = dib_solve_clustering(
        joint, beta, init_clusters, seed, max_iter, tol, sequential)
    return make_record(joint, beta, clustering, converged, iters, worst)


@dataclass(frozen=True)
class SoftEncoder:
    encoder: np.ndarray
    marginal: np.ndarray
    conditional: np.ndarray


def soft_tables(joint: JointDistribution, encoder: np.ndarray):
    """q(t) and q(x|t) induced by a stochastic encoder q(t|i)."""
    encoder = np.asarray(encoder, dtype=float)
    p_i = joint.marginal
    q_t = encoder.T @ p_i
    with np.errstate(invalid="ignore", divide="ignore"):
        q_xt = (encoder * p_i[:, None]).T @ joint.conditional / q_t[:, None]
    q_xt[q_t <= 0] = 0.0
    return q_t, q_xt


def ib_step(joint: JointDistribution, beta: float, current_soft) -> SoftEncoder:
    """Soft IB update q(t|i) ∝ q(t) exp(-beta KL[p(x|i) || q(x|t)])."""
    current_soft = np.asarray(current_soft, dtype=float)
    if not np.allclose(current_soft.sum(axis=1), 1.0, atol=1e-10):
        raise ValueError("encoder rows must sum to 1")
    q_t, q_xt = soft_tables(joint, current_soft)
    live = q_t > 0
    div = np.full((joint.n, q_t.size), np.inf)
    div[:, live] = kl_matrix(joint.conditional, q_xt[live])
    with np.errstate(divide="ignore", invalid="ignore"):
        logits = np.log(q_t)[None, :] - beta * div
    logits[:, ~live] = -np.inf
    logits[np.isinf(div)] = -np.inf
    enc = np.exp(logits - logsumexp(logits, axis=1, keepdims=True))
    q_t, q_xt = soft_tables(joint, enc)
    return SoftEncoder(enc, q_t, q_xt)
