#!/usr/bin/env python3
"""Run the full operating-characteristic matrix and print trend summaries.

Every design (mtpi, keyboard, boin) crosses every mode (plain, tite,
ei_tite) on the shipped default scenarios plus optional random ones; the
per-cell campaign summaries land in a CSV and the mode-vs-mode percent
changes are printed per design.

Usage:
    python3 scripts/run_matrix.py --reps 1000 --out matrix.csv \
        --random 2 --scenario-seed 9005 [--workers 4]
"""

import argparse
import statistics

import numpy as np

from eidose.designs import DesignKind
from eidose.simulator import (
    CSV_HEADER,
    DEFAULT_SCENARIOS,
    TrialConfig,
    TrialMode,
    percent_change,
    random_scenario,
    run_campaign,
)


def main() -> None:
    parser = argparse.ArgumentParser(description="operating-characteristic matrix")
    parser.add_argument("--reps", type=int, default=1000)
    parser.add_argument("--seed", type=int, default=0, help="first replication seed")
    parser.add_argument("--random", type=int, default=0,
                        help="number of random scenarios to add")
    parser.add_argument("--scenario-seed", type=int, default=9005,
                        help="rng seed for the random scenarios")
    parser.add_argument("--workers", type=int, default=1)
    parser.add_argument("--out", default="matrix.csv")
    args = parser.parse_args()

    scenarios = list(DEFAULT_SCENARIOS)
    rng = np.random.default_rng(args.scenario_seed)
    for i in range(args.random):
        scenarios.append(random_scenario(rng, 6, 0.3, f"random-{i + 1}"))

    rows = {}
    with open(args.out, "w") as fh:
        fh.write(CSV_HEADER + "\n")
        for design in (DesignKind.MTPI, DesignKind.KEYBOARD, DesignKind.BOIN):
            for mode in (TrialMode.PLAIN, TrialMode.TITE, TrialMode.EI_TITE):
                cfg = TrialConfig(design=design, mode=mode, seed=args.seed)
                for scen in scenarios:
                    summary = run_campaign(cfg, scen, args.reps, args.workers)
                    rows[(design, mode, scen.label)] = summary
                    fh.write(summary.csv_row() + "\n")
            print(f"{design.value} done", flush=True)

    labels = [s.label for s in scenarios]
    for design in (DesignKind.MTPI, DesignKind.KEYBOARD, DesignKind.BOIN):
        gaps = [
            percent_change(
                rows[(design, TrialMode.TITE, lb)],
                rows[(design, TrialMode.EI_TITE, lb)],
            )[2]
            for lb in labels
        ]
        dvp = [
            -percent_change(
                rows[(design, TrialMode.PLAIN, lb)],
                rows[(design, TrialMode.EI_TITE, lb)],
            )[0]
            for lb in labels
        ]
        dvt = [
            -percent_change(
                rows[(design, TrialMode.TITE, lb)],
                rows[(design, TrialMode.EI_TITE, lb)],
            )[0]
            for lb in labels
        ]
        nvt = [
            -percent_change(
                rows[(design, TrialMode.TITE, lb)],
                rows[(design, TrialMode.EI_TITE, lb)],
            )[1]
            for lb in labels
        ]
        ei = [rows[(design, TrialMode.EI_TITE, lb)].ei_rate for lb in labels]
        print(
            f"{design.value:8s} worst |pcms gap| {max(abs(g) for g in gaps):.2f}pp; "
            f"mean ei {statistics.mean(ei):.3f}; "
            f"duration vs plain -{statistics.mean(dvp):.1f}%; "
            f"duration vs tite -{statistics.mean(dvt):.1f}%; "
            f"n vs tite -{statistics.mean(nvt):.1f}%"
        )


if __name__ == "__main__":
    main()
