#!/usr/bin/env python3
"""Plots per-round MSE and accuracy curves from a sweep output directory.

Usage: plot_results.py <sweep_output_dir> [--out plots]

Reads every <cell>/rounds.csv produced by `airfl sweep` and draws the
average-MSE and test-accuracy trajectories, one line per (N, P_s) cell
averaged over seeds.
"""

import argparse
import collections
import csv
import pathlib
import re

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

CELL_RE = re.compile(r"N(\d+)_Ps(-?[\d.]+)dBW_seed(\d+)")


def load_cells(root: pathlib.Path):
    cells = collections.defaultdict(list)
    for rounds_csv in sorted(root.glob("*/rounds.csv")):
        match = CELL_RE.match(rounds_csv.parent.name)
        if not match:
            continue
        n, ps = int(match.group(1)), float(match.group(2))
        with open(rounds_csv) as fh:
            rows = list(csv.DictReader(fh))
        cells[(n, ps)].append(rows)
    return cells


def seed_average(runs, column):
    length = min(len(rows) for rows in runs)
    return [
        sum(float(rows[i][column]) for rows in runs) / len(runs)
        for i in range(length)
    ]


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("sweep_dir", type=pathlib.Path)
    parser.add_argument("--out", type=pathlib.Path, default=pathlib.Path("plots"))
    args = parser.parse_args()

    cells = load_cells(args.sweep_dir)
    if not cells:
        raise SystemExit(f"no cell outputs under {args.sweep_dir}")
    args.out.mkdir(parents=True, exist_ok=True)

    for column, ylabel, fname, log_scale in [
        ("mse_avg_analytic", "average MSE", "mse_vs_rounds.png", True),
        ("test_accuracy_avg", "test accuracy", "accuracy_vs_rounds.png", False),
    ]:
        fig, ax = plt.subplots(figsize=(7, 4.5))
        for (n, ps), runs in sorted(cells.items()):
            values = seed_average(runs, column)
            ax.plot(
                range(1, len(values) + 1),
                values,
                label=f"N={n}, Ps={ps:g} dBW",
            )
        if log_scale:
            ax.set_yscale("log")
        ax.set_xlabel("training round")
        ax.set_ylabel(ylabel)
        ax.legend()
        ax.grid(True, alpha=0.3)
        fig.tight_layout()
        fig.savefig(args.out / fname, dpi=150)
        print(f"wrote {args.out / fname}")


if __name__ == "__main__":
    main()
