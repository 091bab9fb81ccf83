#!/usr/bin/env python3
"""Run the bundled experiment configs and write CSV bundles under results/.

Each config in configs/ becomes one results/<name>/ directory holding the
full report (runs.csv plus the aggregate files).  A short median summary
per agent is printed as each sweep finishes.  Runs are deterministic, so
repeating this script reproduces the CSVs byte for byte.
"""

from __future__ import annotations

import argparse
import os
import statistics
import sys
import time

from mazeswarm import emit_report, load_config, run_sweep

HERE = os.path.dirname(os.path.abspath(__file__))
CONFIG_DIR = os.path.join(HERE, os.pardir, "configs")


def summarize(report) -> None:
    cfg = report.config
    sweep_points = [None] if cfg.sweep_param is None else list(cfg.sweep_values)
    for value in sweep_points:
        for agent in cfg.agents:
            group = report.group(agent, value)
            if not group:
                continue
            cov = statistics.median(r.final_coverage_pct for r in group)
            over = statistics.median(r.final_overlap_pct for r in group)
            t99 = [r.ticks_to_99 for r in group if r.ticks_to_99 is not None]
            t99_txt = str(statistics.median(t99)) if t99 else "-"
            tag = "" if value is None else f" {cfg.sweep_param}={value:g}"
            print(f"  {agent:>14}{tag}: cov {cov:6.2f}%  overlap {over:6.2f}%"
                  f"  t99 {t99_txt} ({len(t99)}/{len(group)} reached)")


def main() -> int:
    parser = argparse.ArgumentParser(description="run the bundled experiments")
    parser.add_argument("--jobs", type=int, default=1,
                        help="worker processes (output identical for any value)")
    parser.add_argument("--out", default=os.path.join(HERE, os.pardir, "results"),
                        help="base output directory (default: results/)")
    parser.add_argument("--only", default=None,
                        help="run just the config with this stem, e.g. baseline")
    args = parser.parse_args()

    names = sorted(n for n in os.listdir(CONFIG_DIR) if n.endswith(".cfg"))
    if args.only is not None:
        names = [n for n in names if os.path.splitext(n)[0] == args.only]
        if not names:
            print(f"no config named {args.only!r} in {CONFIG_DIR}", file=sys.stderr)
            return 1

    for name in names:
        stem = os.path.splitext(name)[0]
        cfg = load_config(os.path.join(CONFIG_DIR, name))
        started = time.perf_counter()
        report = run_sweep(cfg, jobs=args.jobs)
        elapsed = time.perf_counter() - started
        out_dir = os.path.join(args.out, stem)
        emit_report(report, out_dir)
        print(f"{stem}: {len(report.runs)} runs in {elapsed:.1f}s -> {out_dir}")
        summarize(report)
    return 0


if __name__ == "__main__":
    sys.exit(main())
