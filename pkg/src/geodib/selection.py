"""Beta sweeps, the information-plane frontier, and kink-angle model selection."""
from __future__ import annotations

import csv
import json
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .dib import SolutionRecord, dib_solve
from .smoothing import JointDistribution

log = logging.getLogger(__name__)

BETA_MIN = 0.1
BETA_MAX = 1e4
BETA_STEPS = 60
RESTARTS = 5
DEDUP_DECIMALS = 9
HULL_RTOL = 1e-12
# kink angles closer than this count as a tie (fewer clusters wins)
THETA_TIE = 1e-12


def default_schedule(beta_min=BETA_MIN, beta_max=BETA_MAX, steps=BETA_STEPS) -> list[float]:
    return [float(b) for b in np.geomspace(beta_min, beta_max, steps)]


def _restart_seed(seed: int, k: int, r: int) -> int:
    return int(np.random.SeedSequence([seed, k, r]).generate_state(1)[0])


def _solve_beta(args):
    joint, k, beta, restarts, seed, init_clusters = args
    best = None
    for r in range(restarts):
        rec = dib_solve(joint, beta, init_clusters=init_clusters, seed=_restart_seed(seed, k, r))
        if best is None or rec.cost_L < best.cost_L:
            best = rec
    return best


def beta_sweep(joint: JointDistribution, schedule, restarts: int = RESTARTS, seed: int = 0,
               init_clusters: int | None = None, workers: int = 1) -> list[SolutionRecord]:
    """Best-of-``restarts`` DIB solution at each beta of an ascending schedule."""
    schedule = [float(b) for b in schedule]
    if not schedule:
        raise ValueError("empty beta schedule")
    if any(b <= 0 for b in schedule) or any(b2 < b1 for b1, b2 in zip(schedule, schedule[1:])):
        raise ValueError("schedule must be positive and ascending")
    jobs = [(joint, k, b, restarts, seed, init_clusters) for k, b in enumerate(schedule)]
    if workers > 1:
        with ProcessPoolExecutor(workers) as pool:
            return list(pool.map(_solve_beta, jobs))
    return [_solve_beta(job) for job in jobs]


def kink_angle(beta_min: float, beta_max: float) -> float:
    """pi/2 - arctan(beta_min) - arctan(1/beta_max), written so equal betas give exactly 0."""
    return math.atan2(1.0, beta_min) - math.atan2(1.0, beta_max)


@dataclass
class InformationCurve:
    """Solutions in the (H(T), I(T;x)) plane with frontier annotations.

    ``frontier`` holds indices into ``solutions`` of the Pareto set, sorted by H;
    ``hull`` the subset on the upper concave majorant. Kink quantities are
    keyed by solution index and only exist for interior hull points.
    """

    solutions: list[SolutionRecord]
    frontier: list[int]
    hull: list[int] = field(default_factory=list)
    beta_min: dict[int, float] = field(default_factory=dict)
    beta_max: dict[int, float] = field(default_factory=dict)
    theta: dict[int, float] = field(default_factory=dict)
    beta_seen: dict[int, tuple[float, float]] = field(default_factory=dict)

    def point(self, k: int) -> tuple[float, float]:
        r = self.solutions[k]
        return r.entropy_T, r.info_TX

    def frontier_records(self) -> list[SolutionRecord]:
        return [self.solutions[k] for k in self.frontier]

    def rows(self) -> list[dict]:
        out = []
        for k in self.frontier:
            r = self.solutions[k]
            out.append({
                "n_c": r.n_c,
                "H": r.entropy_T,
                "I": r.info_TX,
                "frac_info": r.frac_info,
                "on_hull": k in self.hull,
                "beta_min": self.beta_min.get(k, math.nan),
                "beta_max": self.beta_max.get(k, math.nan),
                "theta": self.theta.get(k, math.nan),
                "beta_seen_min": self.beta_seen.get(k, (math.nan, math.nan))[0],
                "beta_seen_max": self.beta_seen.get(k, (math.nan, math.nan))[1],
                "digest": r.digest,
            })
        return out

    def to_json(self) -> dict:
        return {
            "solutions": [r.to_json() for r in self.solutions],
            "frontier": [_finite_or_none(row) for row in self.rows()],
        }

    def write_csv(self, path) -> None:
        cols = ["n_c", "H", "I", "frac_info", "on_hull", "beta_min", "beta_max", "theta",
                "beta_seen_min", "beta_seen_max", "digest"]
        with open(path, "w", newline="") as fh:
            w = csv.DictWriter(fh, fieldnames=cols)
            w.writeheader()
            for row in self.rows():
                w.writerow({k: (repr(v) if isinstance(v, float) else v) for k, v in row.items()})


def _finite_or_none(row):
    return {k: (None if isinstance(v, float) and not math.isfinite(v) else v) for k, v in row.items()}


def _dedupe(records):
    seen = {}
    for r in records:
        key = (r.n_c, round(r.entropy_T, DEDUP_DECIMALS), round(r.info_TX, DEDUP_DECIMALS))
        seen.setdefault(key, r)
    return list(seen.values())


def pareto_frontier(records) -> InformationCurve:
    """Deduplicate and keep solutions not dominated in (lower H, higher I)."""
    records = list(records)
    if not records:
        raise ValueError("need at least one solution")
    sols = sorted(_dedupe(records), key=lambda r: (r.entropy_T, -r.info_TX, r.n_c))
    frontier = []
    best_i = -math.inf
    for k, r in enumerate(sols):
        # sorted by H then descending I, so r is dominated iff an earlier record reached its I
        if r.info_TX > best_i:
            frontier.append(k)
            best_i = r.info_TX
    curve = InformationCurve(sols, frontier)
    for k in frontier:
        key = (sols[k].n_c, round(sols[k].entropy_T, DEDUP_DECIMALS), round(sols[k].info_TX, DEDUP_DECIMALS))
        betas = [r.beta for r in records
                 if (r.n_c, round(r.entropy_T, DEDUP_DECIMALS), round(r.info_TX, DEDUP_DECIMALS)) == key]
        curve.beta_seen[k] = (min(betas), max(betas))
    return curve


def concave_majorant(xy) -> list[int]:
    """Indices of the upper concave envelope of points sorted by x."""
    hull = []
    for k, (x, y) in enumerate(xy):
        while len(hull) >= 2:
            (x0, y0), (x1, y1) = xy[hull[-2]], xy[hull[-1]]
            # drop the middle point unless it sits strictly above the chord; the
            # relative margin keeps collinear runs from flickering under rescaling
            a, b = (x1 - x0) * (y - y0), (y1 - y0) * (x - x0)
            if a - b >= -HULL_RTOL * (abs(a) + abs(b)):
                hull.pop()
            else:
                break
        hull.append(k)
    return hull


def _chord_beta(dh: float, di: float) -> float:
    return math.inf if di <= 0 else dh / di


def _runs(hull, solutions, group_by_nc):
    """Split hull positions into runs that count as one solution."""
    runs = []
    for j, k in enumerate(hull):
        if group_by_nc and runs and solutions[hull[runs[-1][-1]]].n_c == solutions[k].n_c:
            runs[-1].append(j)
        else:
            runs.append([j])
    return runs


def kink_angles(curve: InformationCurve, group_by_nc: bool = True) -> InformationCurve:
    """Annotate interior concave-frontier solutions with beta_min, beta_max and theta.

    Consecutive hull vertices sharing a cluster count are one solution drifting
    with beta: the kink is taken between the chord entering the first of them and
    the chord leaving the last, and recorded on the run's most informative vertex.
    """
    pts = [curve.point(k) for k in curve.frontier]
    keep = concave_majorant(pts)
    hull = [curve.frontier[j] for j in keep]
    dropped = len(curve.frontier) - len(hull)
    if dropped:
        log.info("trimmed %d frontier solution(s) below the concave majorant", dropped)
    curve.hull = hull
    curve.beta_min.clear()
    curve.beta_max.clear()
    curve.theta.clear()
    runs = _runs(hull, curve.solutions, group_by_nc)
    for r in range(1, len(runs) - 1):
        first, last = runs[r][0], runs[r][-1]
        (h0, i0), (h1, i1) = curve.point(hull[first - 1]), curve.point(hull[first])
        (h2, i2), (h3, i3) = curve.point(hull[last]), curve.point(hull[last + 1])
        b_lo = _chord_beta(h1 - h0, i1 - i0)
        b_hi = _chord_beta(h3 - h2, i3 - i2)
        k = hull[last]
        curve.beta_min[k] = b_lo
        curve.beta_max[k] = b_hi
        curve.theta[k] = kink_angle(b_lo, b_hi)
    return curve


def information_curve(records, group_by_nc: bool = True) -> InformationCurve:
    return kink_angles(pareto_frontier(records), group_by_nc)


class Selection(NamedTuple):
    n_c: int
    theta: float
    fallback: bool


def select_n_clusters(curve: InformationCurve) -> Selection:
    """n_c of the maximal-kink solution; smaller n_c wins ties."""
    if not curve.theta:
        log.warning("no interior frontier point; falling back to the most informative solution")
        best = max(curve.frontier, key=lambda k: (curve.solutions[k].info_TX, -curve.solutions[k].n_c))
        return Selection(curve.solutions[best].n_c, math.nan, True)
    top = max(curve.theta.values())
    tied = [k for k, th in curve.theta.items() if th >= top - THETA_TIE]
    k = min(tied, key=lambda k: (curve.solutions[k].n_c, -curve.theta[k]))
    return Selection(curve.solutions[k].n_c, curve.theta[k], False)


def theta_by_nc(curve: InformationCurve) -> dict[int, float]:
    """Largest kink angle seen for each cluster count."""
    out: dict[int, float] = {}
    for k, th in curve.theta.items():
        n = curve.solutions[k].n_c
        out[n] = max(out.get(n, -math.inf), th)
    return dict(sorted(out.items()))


def frac_info_by_nc(records) -> dict[int, float]:
    """Largest fractional spatial information reached at each cluster count."""
    out: dict[int, float] = {}
    for r in records:
        out[r.n_c] = max(out.get(r.n_c, -math.inf), r.frac_info)
    return dict(sorted(out.items()))


def dump_json(records, curve: InformationCurve, path, meta=None) -> None:
    payload = {"meta": meta or {}, "records": [r.to_json() for r in records], "curve": curve.to_json()}
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=1, sort_keys=True)
