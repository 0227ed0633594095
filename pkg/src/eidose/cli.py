"""Operator command line: boundary tables, campaigns, worked-example replays.

Subcommands:

- ``boundaries``: print a design's decision-boundary table; optionally write
  it as JSON.
- ``simulate``: run a campaign described by a JSON config document and write
  summary CSV rows (plus a percent-change CSV when several modes run).
- ``scenarios``: list the shipped default scenarios or generate random ones.
- ``reproduce-example``: replay the three built-in worked examples and check
  their published values.
- ``report``: pretty-print any CSV written by ``simulate``.

Campaign config document (JSON object):

    {
      "designs": ["mtpi", "keyboard", "boin"],
      "modes": ["plain", "tite", "ei_tite"],
      "replications": 1000,
      "parallelism": null,            // default: EIDOSE_PARALLELISM or 1
      "scenarios": "default",         // or a list of scenario objects, or
                                      // {"random": N, "seed": S}
      "trial": { ... TrialConfig fields except design/mode ... }
    }

Exit codes: 0 success, 2 usage or validation error, 1 internal error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .designs import DesignKind, DesignParams, boundary_table
from .early_stop import (
    RemainingBudget,
    ThresholdConfig,
    dose_position,
    effective_shape,
    evaluate_early_stop,
    retainment_probability,
)
from .mathcore import DomainError, beta_binomial_cdf
from .simulator import (
    CSV_HEADER,
    DEFAULT_SCENARIOS,
    CampaignSummary,
    Scenario,
    TrialConfig,
    TrialMode,
    percent_change,
    random_scenario,
    remaining_schedule_days,
    run_campaign,
)
from .tite import DoseSnapshot

CHANGES_HEADER = (
    "scenario,design,variant_mode,baseline_mode,duration_pct,n_pct,pcms_delta,replications,seed"
)

_EXAMPLE_NAMES = ("figure1", "tbcrc-no-dlt", "tbcrc-one-dlt")


def _fail(message: str) -> int:
    print(f"error: {message}", file=sys.stderr)
    return 2


def _boundary_text(table) -> str:
    lines = [
        f"design={table.kind.value} target={table.params.target} "
        f"interval=({table.params.interval_lo}, {table.params.interval_hi})",
        f"{'n':>4} {'escalate<=':>11} {'deescalate>=':>13} {'eliminate>=':>12}",
    ]
    for row in table.rows:
        esc = "-" if row.escalate_max < 0 else str(row.escalate_max)
        dee = "-" if row.deescalate_min > row.n else str(row.deescalate_min)
        eli = "-" if row.eliminate_min is None else str(row.eliminate_min)
        lines.append(f"{row.n:>4} {esc:>11} {dee:>13} {eli:>12}")
    return "\n".join(lines)


def cmd_boundaries(args: argparse.Namespace) -> int:
    params = (
        DesignParams(args.target, args.interval[0], args.interval[1])
        if args.interval
        else DesignParams.defaults_for(DesignKind(args.design), args.target)
    )
    table = boundary_table(DesignKind(args.design), params, args.n_max)
    print(_boundary_text(table))
    if args.out:
        Path(args.out).write_text(json.dumps(table.to_dict(), indent=2) + "\n")
        print(f"wrote {args.out}")
    return 0


def _report_check(name: str, value: float, expected: float, tol: float) -> bool:
    ok = abs(value - expected) <= tol
    print(f"  {name}: {value:.6f} (expected {expected} +/- {tol}) {'ok' if ok else 'FAIL'}")
    return ok


def _example_figure1() -> bool:
    """Mid-trial state: 18 planned, 12 enrolled, 9 at an interior dose with
    3 DLT, 4 complete, and 2 pending at 60 and 30 days of a 90-day window."""
    print("interior-dose early-identification example")
    table = boundary_table(DesignKind.BOIN, DesignParams.defaults_for(DesignKind.BOIN, 0.3), 18)
    snap = DoseSnapshot(
        dose_level=3, n=9, n_dlt=3, n_nodlt=4, pending_count=2,
        pend_observed_frac=1.0, pend_unobserved_frac=1.0, n_e=5.0,
    )
    budget = RemainingBudget.from_snapshot(6, snap)
    row = table.row(snap.n + budget.r)
    print(f"  snapshot: n=9 n_dlt=3 n_e={snap.n_e} | budget r={budget.r} r_pend={budget.r_pend}")
    print(f"  boundary row n=15: escalate<={row.escalate_max} deescalate>={row.deescalate_min}")
    shape = effective_shape(snap)
    stay = beta_binomial_cdf(row.deescalate_min - 1 - snap.n_dlt, budget.r_pend, shape)
    esc = beta_binomial_cdf(row.escalate_max - snap.n_dlt, budget.r_pend, shape)
    outcome = evaluate_early_stop(snap, budget, table, dose_position(3, 6), ThresholdConfig())
    ok = _report_check("keep-below-deescalation term", stay, 0.500, 0.001)
    ok &= _report_check("escalate-away term", esc, 0.096, 0.001)
    ok &= _report_check("retainment", outcome.retainment, 0.404, 0.001)
    print(f"  threshold {outcome.threshold_used}: "
          f"{'identified' if outcome.identified else 'not identified'}")
    return ok and outcome.identified


def _tbcrc_state(n: int, n_dlt: int, n_nodlt: int, observed_days: float, r: int):
    """Top-dose state in a 30-patient, 4-dose trial with a 70-day window and
    one enrollment every 60 days: every patient but the latest has completed
    assessment, and the latest has observed_days of clean follow-up."""
    window = 70.0
    pending_obs = observed_days / window
    snap = DoseSnapshot(
        dose_level=4, n=n, n_dlt=n_dlt, n_nodlt=n_nodlt, pending_count=1,
        pend_observed_frac=pending_obs, pend_unobserved_frac=1.0 - pending_obs,
        n_e=n_nodlt + pending_obs,
    )
    return snap, RemainingBudget.from_snapshot(r, snap)


def _example_tbcrc(one_dlt: bool) -> bool:
    table = boundary_table(DesignKind.BOIN, DesignParams.defaults_for(DesignKind.BOIN, 0.3), 30)
    cfg = ThresholdConfig()
    window, spacing, observed = 70.0, 60.0, 35.0
    if not one_dlt:
        print("top-dose example, first cohort clean")
        snap, budget = _tbcrc_state(n=3, n_dlt=0, n_nodlt=2, observed_days=observed, r=6)
        p = retainment_probability(snap, budget, table, at_max_dose=True)
        ok = _report_check("retainment", p, 0.93, 0.03)
        identified = p > cfg.tau_edge
        print(f"  threshold {cfg.tau_edge}: {'identified' if identified else 'not identified'}")
        saved = remaining_schedule_days(budget.r, spacing, window, observed)
        print(f"  days saved by stopping now: {saved:.0f} (expected 395)")
        return ok and identified and saved == 395.0
    print("top-dose example, one DLT in the first cohort")
    snap, budget = _tbcrc_state(n=3, n_dlt=1, n_nodlt=1, observed_days=observed, r=6)
    p1 = retainment_probability(snap, budget, table, at_max_dose=True)
    ok = _report_check("first-cohort retainment", p1, 0.55, 0.03)
    first_identified = p1 > cfg.tau_edge
    print(f"  threshold {cfg.tau_edge}: "
          f"{'identified' if first_identified else 'not identified (enrollment continues)'}")
    snap2, budget2 = _tbcrc_state(n=6, n_dlt=1, n_nodlt=4, observed_days=observed, r=3)
    p2 = retainment_probability(snap2, budget2, table, at_max_dose=True)
    ok &= _report_check("second-cohort retainment", p2, 0.98, 0.03)
    second_identified = p2 > cfg.tau_edge
    print(f"  threshold {cfg.tau_edge}: {'identified' if second_identified else 'not identified'}")
    saved = remaining_schedule_days(budget2.r, spacing, window, observed)
    print(f"  days saved by stopping now: {saved:.0f} (expected 215)")
    return ok and (not first_identified) and second_identified and saved == 215.0


def cmd_reproduce_example(args: argparse.Namespace) -> int:
    runners = {
        "figure1": _example_figure1,
        "tbcrc-no-dlt": lambda: _example_tbcrc(one_dlt=False),
        "tbcrc-one-dlt": lambda: _example_tbcrc(one_dlt=True),
    }
    names = _EXAMPLE_NAMES if args.which == "all" else (args.which,)
    all_ok = True
    for name in names:
        ok = runners[name]()
        print(f"{name}: {'PASS' if ok else 'FAIL'}")
        all_ok &= ok
    return 0 if all_ok else 1


def _load_scenarios(spec, seed: int) -> list[Scenario]:
    if spec == "default" or spec is None:
        return list(DEFAULT_SCENARIOS)
    if isinstance(spec, dict) and "random" in spec:
        import numpy as np

        rng = np.random.default_rng(spec.get("seed", seed))
        n_doses = spec.get("n_doses", 6)
        target = spec.get("target", 0.3)
        return [
            random_scenario(rng, n_doses, target, label=f"random-{i + 1}")
            for i in range(int(spec["random"]))
        ]
    if isinstance(spec, list):
        return [Scenario.from_dict(d) for d in spec]
    raise DomainError("scenarios must be 'default', a list, or {'random': N}")


def cmd_simulate(args: argparse.Namespace) -> int:
    doc = json.loads(Path(args.config).read_text())
    if not isinstance(doc, dict):
        raise DomainError("config document must be a JSON object")
    designs = [DesignKind(d) for d in doc.get("designs", ["boin"])]
    modes = [TrialMode(m) for m in doc.get("modes", ["ei_tite"])]
    replications = int(args.reps or doc.get("replications", 100))
    parallelism = args.parallel if args.parallel is not None else doc.get("parallelism")
    base = dict(doc.get("trial", {}))
    if args.seed is not None:
        base["seed"] = args.seed
    scenarios_spec = doc.get("scenarios", "default")
    if args.scenarios:
        scenarios_spec = json.loads(Path(args.scenarios).read_text())
    if args.random:
        scenarios_spec = {"random": args.random, "seed": base.get("seed", 0)}
    scenarios = _load_scenarios(scenarios_spec, int(base.get("seed", 0)))

    summaries: dict[tuple[str, DesignKind, TrialMode], CampaignSummary] = {}
    rows = [CSV_HEADER]
    for scenario in scenarios:
        for design in designs:
            for mode in modes:
                config = TrialConfig.from_dict({**base, "design": design.value, "mode": mode.value})
                summary = run_campaign(config, scenario, replications, parallelism)
                summaries[(scenario.label, design, mode)] = summary
                rows.append(summary.csv_row())
    out = Path(args.out)
    out.write_text("\n".join(rows) + "\n")
    print(f"wrote {out} ({len(rows) - 1} rows)")

    if TrialMode.EI_TITE in modes and len(modes) > 1:
        change_rows = [CHANGES_HEADER]
        for scenario in scenarios:
            for design in designs:
                variant = summaries[(scenario.label, design, TrialMode.EI_TITE)]
                for base_mode in (TrialMode.PLAIN, TrialMode.TITE):
                    if base_mode not in modes:
                        continue
                    baseline = summaries[(scenario.label, design, base_mode)]
                    d_pct, n_pct, p_delta = percent_change(baseline, variant)
                    change_rows.append(
                        ",".join(
                            [
                                scenario.label,
                                design.value,
                                TrialMode.EI_TITE.value,
                                base_mode.value,
                                repr(d_pct),
                                repr(n_pct),
                                repr(p_delta),
                                str(replications),
                                str(variant.seed),
                            ]
                        )
                    )
        changes_path = out.with_suffix(".changes.csv")
        changes_path.write_text("\n".join(change_rows) + "\n")
        print(f"wrote {changes_path} ({len(change_rows) - 1} rows)")
    return 0


def cmd_scenarios(args: argparse.Namespace) -> int:
    if args.random:
        import numpy as np

        rng = np.random.default_rng(args.seed)
        scen = [
            random_scenario(rng, args.n_doses, args.target, label=f"random-{i + 1}")
            for i in range(args.random)
        ]
    else:
        scen = list(DEFAULT_SCENARIOS)
    for s in scen:
        probs = ", ".join(f"{p:.3f}" for p in s.true_dlt_probs)
        print(f"{s.label}: ({probs})")
    if args.out:
        Path(args.out).write_text(json.dumps([s.to_dict() for s in scen], indent=2) + "\n")
        print(f"wrote {args.out}")
    return 0


def cmd_report(args: argparse.Namespace) -> int:
    text = Path(args.path).read_text().strip().splitlines()
    if not text:
        raise DomainError("empty report file")
    header, body = text[0], text[1:]
    if header == CSV_HEADER:
        print(f"{'scenario':<12} {'design':<9} {'mode':<8} {'pcms':>6} {'ei':>6} "
              f"{'duration':>9} {'mean_n':>7}")
        for line in body:
            s = CampaignSummary.from_csv_row(line)
            print(f"{s.scenario_label:<12} {s.design.value:<9} {s.mode.value:<8} "
                  f"{s.pcms:>6.3f} {s.ei_rate:>6.3f} {s.mean_duration_days:>9.1f} "
                  f"{s.mean_n:>7.2f}")
    elif header == CHANGES_HEADER:
        print(f"{'scenario':<12} {'design':<9} {'baseline':<9} {'duration%':>10} "
              f"{'n%':>8} {'pcms_pp':>8}")
        for line in body:
            parts = line.split(",")
            if len(parts) != 9:
                raise DomainError(f"expected 9 fields, got {len(parts)}")
            print(f"{parts[0]:<12} {parts[1]:<9} {parts[3]:<9} {float(parts[4]):>10.1f} "
                  f"{float(parts[5]):>8.1f} {float(parts[6]):>8.2f}")
    else:
        raise DomainError("unrecognized report header")
    print(f"({len(body)} rows)")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="eidose",
        description="Dose-finding decision tables, trial simulation, and worked examples.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("boundaries", help="print a decision-boundary table")
    p.add_argument("--design", required=True, choices=[k.value for k in DesignKind])
    p.add_argument("--target", type=float, default=0.3)
    p.add_argument("--interval", type=float, nargs=2, metavar=("LO", "HI"))
    p.add_argument("--n-max", type=int, default=18, dest="n_max")
    p.add_argument("--out", help="also write the table as JSON")
    p.set_defaults(func=cmd_boundaries)

    p = sub.add_parser("simulate", help="run a campaign from a JSON config")
    p.add_argument("--config", required=True)
    p.add_argument("--scenarios", help="JSON file with a scenario list")
    p.add_argument("--random", type=int, help="use N random scenarios instead")
    p.add_argument("--reps", type=int, help="override replications")
    p.add_argument("--parallel", type=int, help="worker processes")
    p.add_argument("--seed", type=int, help="override the base seed")
    p.add_argument("--out", default="campaign.csv")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("scenarios", help="list shipped or random scenarios")
    p.add_argument("--random", type=int)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--n-doses", type=int, default=6, dest="n_doses")
    p.add_argument("--target", type=float, default=0.3)
    p.add_argument("--out", help="write scenarios as JSON")
    p.set_defaults(func=cmd_scenarios)

    p = sub.add_parser("reproduce-example", help="replay a built-in worked example")
    p.add_argument("which", choices=_EXAMPLE_NAMES + ("all",))
    p.set_defaults(func=cmd_reproduce_example)

    p = sub.add_parser("report", help="pretty-print a CSV written by simulate")
    p.add_argument("path")
    p.set_defaults(func=cmd_report)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse exits 2 on usage errors
        return int(exc.code or 0)
    try:
        return args.func(args)
    except (DomainError, ValueError, KeyError, OSError, json.JSONDecodeError) as exc:
        return _fail(str(exc))
    except Exception as exc:  # pragma: no cover - defensive
        print(f"internal error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
