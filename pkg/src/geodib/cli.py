"""Command-line front end: generate, smooth-dump, cluster, sweep, boundaries.

Exit codes: 0 success, 1 usage error, 2 data error, 3 too many unconverged solves.
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import sys
from dataclasses import asdict, dataclass, fields
from pathlib import Path

import numpy as np

from . import baselines as bl
from . import plots
from .data import PRESETS, PointFileError, PointSet, load_points, preset_dataset, save_points
from .dib import dib_solve
from .selection import (BETA_MAX, BETA_MIN, BETA_STEPS, RESTARTS, beta_sweep, default_schedule,
                        dump_json, frac_info_by_nc, information_curve, select_n_clusters, theta_by_nc)
from .smoothing import DEFAULT_BINS, build_grid, smooth_joint, write_joint_csv

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_UNCONVERGED = 0, 1, 2, 3
MAX_TABLE_ENTRIES = 10**7
DIB_BOUNDARY_BETA = 5.0

log = logging.getLogger("geodib")


class UsageError(Exception):
    pass


class DataError(Exception):
    pass


@dataclass
class RunConfig:
    dataset: str = "three_equal"
    s: float = 2.0
    bins: int = DEFAULT_BINS
    beta_min: float = BETA_MIN
    beta_max: float = BETA_MAX
    beta_steps: int = BETA_STEPS
    restarts: int = RESTARTS
    seed: int = 0
    out: str = "."
    init_clusters: int | None = None
    beta: float | None = None
    s_list: tuple[float, ...] = (0.5, 2.0, 4.0)
    k: int = 2
    dib_beta: float = DIB_BOUNDARY_BETA
    resolution: int = 200
    workers: int = 1
    reference: str | None = None
    max_unconverged: float = 0.1

    def validate(self):
        for name in ("s", "beta_min", "beta_max"):
            if not getattr(self, name) > 0:
                raise UsageError(f"--{name.replace('_', '-')} must be positive")
        for name in ("bins", "beta_steps", "restarts", "k", "resolution", "workers"):
            if getattr(self, name) < 1:
                raise UsageError(f"--{name.replace('_', '-')} must be at least 1")
        if self.bins < 2 or self.resolution < 2:
            raise UsageError("--bins and --resolution must be at least 2")
        if self.beta_max < self.beta_min:
            raise UsageError("--beta-max must not be below --beta-min")
        if self.beta is not None and not self.beta > 0:
            raise UsageError("--beta must be positive")
        if self.init_clusters is not None and self.init_clusters < 1:
            raise UsageError("--init-clusters must be at least 1")
        if not self.s_list or any(not v > 0 for v in self.s_list):
            raise UsageError("--s-list needs positive values")
        if self.seed < 0:
            raise UsageError("--seed must be non-negative")
        if not 0 <= self.max_unconverged <= 1:
            raise UsageError("--max-unconverged must lie in [0, 1]")

    def meta(self) -> dict:
        d = asdict(self)
        d.pop("out")
        d["s_list"] = list(self.s_list)
        return d


_FIELDS = {f.name for f in fields(RunConfig)}


def _float_list(text):
    try:
        return tuple(float(v) for v in text.split(",") if v.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _common(p, *names):
    add = {
        "dataset": lambda: p.add_argument("--dataset", help="preset name or CSV point file"),
        "s": lambda: p.add_argument("--s", type=float, help="smoothing width"),
        "bins": lambda: p.add_argument("--bins", type=int, help="grid bins per dimension"),
        "schedule": lambda: (p.add_argument("--beta-min", type=float),
                             p.add_argument("--beta-max", type=float),
                             p.add_argument("--beta-steps", type=int)),
        "restarts": lambda: p.add_argument("--restarts", type=int),
        "init": lambda: p.add_argument("--init-clusters", type=int, help="clusters in the random start"),
    }
    for n in names:
        add[n]()
    p.add_argument("--seed", type=int)
    p.add_argument("--out", help="output directory")
    p.add_argument("--config", help="JSON file of settings; flags take precedence")
    p.add_argument("-v", "--verbose", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="geodib", description=__doc__.splitlines()[0],
                                     argument_default=argparse.SUPPRESS)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="write a preset point set as CSV", argument_default=argparse.SUPPRESS)
    p.add_argument("preset", nargs="?", help=f"one of: {', '.join(PRESETS)}")
    _common(p, "dataset")

    p = sub.add_parser("smooth-dump", help="write the smoothed joint table and heat map",
                       argument_default=argparse.SUPPRESS)
    _common(p, "dataset", "s", "bins")

    p = sub.add_parser("cluster", help="single DIB solve at one beta", argument_default=argparse.SUPPRESS)
    _common(p, "dataset", "s", "bins", "restarts", "init")
    p.add_argument("--beta", type=float)

    p = sub.add_parser("sweep", help="beta sweep, information curve and kink selection",
                       argument_default=argparse.SUPPRESS)
    _common(p, "dataset", "s", "bins", "schedule", "restarts", "init")
    p.add_argument("--workers", type=int)
    p.add_argument("--reference", help="dataset whose best kink a robust solution must reach")
    p.add_argument("--max-unconverged", type=float, help="tolerated fraction of unconverged solves")

    p = sub.add_parser("boundaries", help="k-means, GMM and DIB decision boundaries",
                       argument_default=argparse.SUPPRESS)
    _common(p, "dataset", "bins")
    p.add_argument("--s-list", type=_float_list, help="comma-separated smoothing widths")
    p.add_argument("--k", type=int)
    p.add_argument("--dib-beta", type=float)
    p.add_argument("--resolution", type=int)
    return parser


def resolve_config(args: argparse.Namespace) -> RunConfig:
    given = {k: v for k, v in vars(args).items() if k in _FIELDS}
    values = {}
    if getattr(args, "config", None):
        try:
            with open(args.config) as fh:
                values = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config {args.config}: {exc}") from None
        if not isinstance(values, dict):
            raise UsageError("config file must hold a JSON object")
        unknown = sorted(set(values) - _FIELDS)
        if unknown:
            raise UsageError(f"unknown config keys: {', '.join(unknown)}")
        if "s_list" in values:
            values["s_list"] = tuple(values["s_list"])
    values.update(given)
    if getattr(args, "preset", None):
        values["dataset"] = args.preset
    if args.command == "boundaries" and "dataset" not in values:
        values["dataset"] = "symmetric_plus_skew"
    cfg = RunConfig(**values)
    cfg.validate()
    return cfg


def load_dataset(name: str, seed: int) -> PointSet:
    if name in PRESETS:
        return preset_dataset(name, seed)
    path = Path(name)
    if path.suffix.lower() == ".csv" or path.exists():
        try:
            return load_points(path)
        except OSError as exc:
            raise DataError(f"cannot read {path}: {exc.strerror}") from None
        except PointFileError as exc:
            raise DataError(str(exc)) from None
    raise UsageError(f"unknown dataset {name!r}; presets are: {', '.join(PRESETS)} (or give a CSV path)")


def _outdir(cfg: RunConfig) -> Path:
    out = Path(cfg.out)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise UsageError(f"cannot create output directory {out}: {exc.strerror}") from None
    return out


def _stem(cfg: RunConfig) -> str:
    return Path(cfg.dataset).stem if cfg.dataset not in PRESETS else cfg.dataset


def _require_2d(points: PointSet, what: str):
    if points.dim != 2:
        raise DataError(f"{what} needs 2-D points, got {points.dim}-D")


# -- commands -----------------------------------------------------------------------

def cmd_generate(cfg: RunConfig) -> int:
    if cfg.dataset not in PRESETS:
        raise UsageError(f"unknown preset {cfg.dataset!r}; choose from {', '.join(PRESETS)}")
    pts = preset_dataset(cfg.dataset, cfg.seed)
    path = _outdir(cfg) / f"{cfg.dataset}.csv"
    save_points(pts, path)
    print(f"wrote {path}: N={pts.n}, {len(pts.spec.components)} component(s)")
    for k, (comp, w) in enumerate(zip(pts.spec.components, pts.spec.weights)):
        mean = ", ".join(f"{v:g}" for v in comp.mean)
        print(f"  component {k}: mean=({mean}) weight={w:.3f} n={int(np.sum(pts.labels == k))}")
    return EXIT_OK


def cmd_smooth_dump(cfg: RunConfig) -> int:
    pts = load_dataset(cfg.dataset, cfg.seed)
    entries = pts.n * cfg.bins ** pts.dim
    if entries > MAX_TABLE_ENTRIES:
        cap = int((MAX_TABLE_ENTRIES / pts.n) ** (1 / pts.dim))
        raise DataError(f"table would hold {entries} entries (limit {MAX_TABLE_ENTRIES}); "
                        f"use --bins {cap} or fewer")
    joint = smooth_joint(pts, cfg.s, build_grid(pts, cfg.s, cfg.bins))
    out = _outdir(cfg)
    stem = f"{_stem(cfg)}_s{cfg.s:g}_joint"
    write_joint_csv(joint, out / f"{stem}.csv")
    plots.heatmap_svg(joint.conditional, out / f"{stem}.svg",
                      title=f"p(x|i), {_stem(cfg)}, s={cfg.s:g}",
                      xlabel=f"flattened cell (row-major over {' x '.join(map(str, joint.grid.shape))} bins)")
    print(f"wrote {out / stem}.csv/.svg: {joint.n} x {joint.m} table, I(i;x)={joint.info_ix:.6f} nats")
    return EXIT_OK


def _best_of(joint, beta, cfg):
    best = None
    for r in range(cfg.restarts):
        rec = dib_solve(joint, beta, init_clusters=cfg.init_clusters,
                        seed=int(np.random.SeedSequence([cfg.seed, r]).generate_state(1)[0]))
        if best is None or rec.cost_L < best.cost_L:
            best = rec
    return best


def cmd_cluster(cfg: RunConfig) -> int:
    if cfg.beta is None:
        raise UsageError("cluster needs --beta")
    pts = load_dataset(cfg.dataset, cfg.seed)
    _require_2d(pts, "cluster")
    joint = smooth_joint(pts, cfg.s, build_grid(pts, cfg.s, cfg.bins))
    rec = _best_of(joint, cfg.beta, cfg)
    out = _outdir(cfg)
    stem = f"{_stem(cfg)}_s{cfg.s:g}_beta{cfg.beta:g}"
    with open(out / f"{stem}_assignment.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["i", "x1", "x2", "cluster"])
        for i, (p, c) in enumerate(zip(pts.points, rec.assignment)):
            w.writerow([i, repr(float(p[0])), repr(float(p[1])), c])
    with open(out / f"{stem}_solution.json", "w") as fh:
        json.dump({"meta": cfg.meta(), "solution": rec.to_json()}, fh, indent=1, sort_keys=True)
    plots.scatter_svg(pts.points, rec.assignment, out / f"{stem}_clusters.svg",
                      title=f"{_stem(cfg)}, s={cfg.s:g}, beta={cfg.beta:g}: {rec.n_c} cluster(s)")
    print(f"beta={cfg.beta:g} s={cfg.s:g}: n_c={rec.n_c} H={rec.entropy_T:.6f} I={rec.info_TX:.6f} "
          f"frac_info={rec.frac_info:.4f} converged={rec.converged}")
    return EXIT_OK if rec.converged else EXIT_UNCONVERGED


def _sweep(pts, cfg):
    joint = smooth_joint(pts, cfg.s, build_grid(pts, cfg.s, cfg.bins))
    sched = default_schedule(cfg.beta_min, cfg.beta_max, cfg.beta_steps)
    recs = beta_sweep(joint, sched, cfg.restarts, cfg.seed, cfg.init_clusters, cfg.workers)
    return recs, information_curve(recs)


def _max_multi_theta(curve) -> float:
    th = [t for n, t in theta_by_nc(curve).items() if n > 1]
    return max(th) if th else 0.0


def cmd_sweep(cfg: RunConfig) -> int:
    pts = load_dataset(cfg.dataset, cfg.seed)
    recs, curve = _sweep(pts, cfg)
    sel = select_n_clusters(curve)
    out = _outdir(cfg)
    stem = f"{_stem(cfg)}_s{cfg.s:g}"
    meta = cfg.meta()
    meta["selected_n_c"] = sel.n_c
    meta["selected_theta"] = None if math.isnan(sel.theta) else sel.theta

    lines = []
    if cfg.reference is not None:
        ref_pts = load_dataset(cfg.reference, cfg.seed)
        _, ref_curve = _sweep(ref_pts, cfg)
        ref_theta = _max_multi_theta(ref_curve)
        own = _max_multi_theta(curve)
        meta["reference_theta"] = ref_theta
        if own < ref_theta:
            lines.append(f"no robust multi-cluster solution (max theta {own:.4f} < reference {ref_theta:.4f})")
    if not lines:
        if sel.fallback:
            lines.append(f"no interior frontier point; most informative solution has n_c={sel.n_c}")
        else:
            lines.append(f"selected n_c={sel.n_c} (theta={sel.theta:.4f} rad)")
    bad = sum(not r.converged for r in recs)
    if bad:
        lines.append(f"warning: {bad} of {len(recs)} solves did not converge")

    dump_json(recs, curve, out / f"{stem}_solutions.json", meta)
    curve.write_csv(out / f"{stem}_frontier.csv")
    fi = frac_info_by_nc(recs)
    th = theta_by_nc(curve)
    plots.line_panels_svg([
        {"title": "fraction of spatial information", "xlabel": "number of clusters", "ylabel": "I(c;x)/I(i;x)",
         "series": {"frac": (list(fi), list(fi.values()))}},
        {"title": "kink angle", "xlabel": "number of clusters", "ylabel": "theta (rad)",
         "series": {"theta": (list(th), list(th.values()))}},
    ], out / f"{stem}_sweep.svg")
    for ln in lines:
        print(ln)
    return EXIT_UNCONVERGED if bad > cfg.max_unconverged * len(recs) else EXIT_OK


def _dib_boundary(pts, s, cfg, region, init, gmm):
    cell = min(float(e[1] - e[0]) for e in build_grid(pts, s, cfg.bins).edges)
    if s < cell / 2 and gmm is not None:
        # below the grid resolution the table degenerates; use the closed form on the fitted mixture
        clf = bl.dib_score_classifier(gmm.components, s, cfg.dib_beta, gmm.weights)
        return bl.decision_boundary(clf, region, cfg.resolution), "closed form"
    clf, clus, conv = bl.fit_dib_classifier(pts, s, cfg.dib_beta, init, cfg.bins)
    note = f"{clus.n_c} cluster(s)" + ("" if conv else ", unconverged")
    return bl.decision_boundary(clf, region, cfg.resolution), note


def cmd_boundaries(cfg: RunConfig) -> int:
    pts = load_dataset(cfg.dataset, cfg.seed)
    _require_2d(pts, "boundaries")
    if pts.n < cfg.k:
        raise DataError(f"need at least {cfg.k} points")
    x = pts.points
    region = ((float(x[:, 0].min()), float(x[:, 0].max())), (float(x[:, 1].min()), float(x[:, 1].max())))
    named, notes = {}, {}
    km = gmm = None
    try:
        km = bl.kmeans(pts, cfg.k, cfg.seed)
        named["kmeans"] = bl.decision_boundary(km.predict, region, cfg.resolution)
    except Exception as exc:  # noqa: BLE001 - report and carry on with the others
        notes["kmeans"] = f"failed: {exc}"
    try:
        gmm = bl.gmm_em(pts, cfg.k, cfg.seed)
        named["gmm"] = bl.decision_boundary(gmm.predict, region, cfg.resolution)
    except Exception as exc:  # noqa: BLE001
        notes["gmm"] = f"failed: {exc}"
    init = gmm.predict(x) if gmm is not None else (km.assignment if km is not None else None)
    for s in cfg.s_list:
        key = f"dib_s{s:g}"
        try:
            named[key], notes[key] = _dib_boundary(pts, s, cfg, region, init, gmm)
        except Exception as exc:  # noqa: BLE001
            notes[key] = f"failed: {exc}"

    out = _outdir(cfg)
    stem = f"{_stem(cfg)}_boundaries"
    bl.write_polylines_csv(named, out / f"{stem}.csv")
    plots.scatter_svg(x, None, out / f"{stem}.svg", title=f"decision boundaries, {_stem(cfg)}", boundaries=named)
    summary = {}
    for key, polys in named.items():
        row = {"polylines": len(polys), "note": notes.get(key, "")}
        for ref in ("kmeans", "gmm"):
            if key.startswith("dib") and ref in named:
                d = bl.boundary_distance(polys, named[ref])
                row[f"dist_{ref}"] = d if math.isfinite(d) else None
        summary[key] = row
    for key, note in notes.items():
        summary.setdefault(key, {"polylines": 0, "note": note})
    with open(out / f"{stem}.json", "w") as fh:
        json.dump({"meta": cfg.meta(), "region": region, "curves": summary}, fh, indent=1, sort_keys=True)
    for key, row in summary.items():
        dists = " ".join(f"{k}={v:.4f}" if v is not None else f"{k}=n/a"
                         for k, v in row.items() if k.startswith("dist_"))
        print(f"{key}: {row['polylines']} polyline(s) {dists} {row['note']}".rstrip())
    failed = [k for k, n in notes.items() if n.startswith("failed")]
    return EXIT_DATA if failed and len(failed) == len(summary) else EXIT_OK


COMMANDS = {
    "generate": cmd_generate,
    "smooth-dump": cmd_smooth_dump,
    "cluster": cmd_cluster,
    "sweep": cmd_sweep,
    "boundaries": cmd_boundaries,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    logging.basicConfig(level=logging.INFO if getattr(args, "verbose", False) else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = resolve_config(args)
        return COMMANDS[args.command](cfg)
    except UsageError as exc:
        print(f"geodib {args.command}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DataError, PointFileError) as exc:
        print(f"geodib {args.command}: {exc}", file=sys.stderr)
        return EXIT_DATA
    except TypeError as exc:
        print(f"geodib {args.command}: bad setting: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
