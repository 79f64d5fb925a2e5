#!/usr/bin/env python3
"""Render p(x|i) for a preset as a heat map (rows = points, columns = flattened cells)."""
import argparse
from pathlib import Path

import numpy as np

from geodib import plots
from geodib.data import preset_dataset
from geodib.smoothing import smooth_joint


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--dataset", default="three_equal")
    ap.add_argument("--s", type=float, default=2.0)
    ap.add_argument("--sort", action="store_true", help="order rows by generative label")
    ap.add_argument("--out", default="results/heatmap")
    args = ap.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    ps = preset_dataset(args.dataset)
    cond = smooth_joint(ps, args.s).conditional
    if args.sort:
        cond = cond[np.argsort(ps.labels, kind="stable")]
    path = out / f"{args.dataset}_s{args.s:g}.svg"
    plots.heatmap_svg(cond, path, title=f"p(x|i), {args.dataset}, s={args.s:g}")
    print(f"wrote {path}")


if __name__ == "__main__":
    main()
