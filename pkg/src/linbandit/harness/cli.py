"""Command line entry point: ``linbandit {run,sweep,verify,report}``."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import yaml

from .config import ConfigError, ExperimentConfig
from .runner import read_csv, run_replications, summarize, write_csv, write_summary
from .verify import SUITES, verify


def _parse_set(items: list[str]) -> dict:
    overrides = {}
    for item in items:
        key, sep, value = item.partition("=")
        if not sep:
            raise ConfigError(f"--set expects key=value, got {item!r}")
        overrides[key] = yaml.safe_load(value)
    return overrides


def load_config(args) -> ExperimentConfig:
    """Config file (if any), then dedicated flags, then ``--set`` overrides."""
    data = {}
    if args.config:
        data = yaml.safe_load(Path(args.config).read_text(encoding="utf-8")) or {}
    cfg = ExperimentConfig.from_dict(data) if data else ExperimentConfig()
    overrides = {}
    if args.dim is not None:
        overrides["arm_set.dim"] = args.dim
    if args.policy is not None:
        overrides["policy"] = {"name": args.policy}
    if args.alpha is not None:
        overrides["policy.alpha"] = args.alpha
    for key in ("horizon", "replications", "seed", "output"):
        value = getattr(args, key)
        if value is not None:
            overrides[key] = value
    overrides.update(_parse_set(args.set))
    return cfg.with_overrides(overrides) if overrides else cfg


def _summary_path(csv_path: Path) -> Path:
    return csv_path.with_name(csv_path.stem + ".summary.txt")


def _print_summary(stats) -> None:
    for key, value in stats.as_items():
        print(f"{key} = {value}")


def cmd_run(args) -> int:
    cfg = load_config(args)
    result = run_replications(cfg, workers=args.workers)
    r = cfg.build_arm_set().dim
    stats = summarize(result.checkpoints, result.cumulative_regret, {"policy": cfg.policy_label, "r": r})
    _print_summary(stats)
    if cfg.output:
        out = Path(cfg.output)
        write_csv(out, cfg.policy_label, r, result)
        write_summary(_summary_path(out), [stats])
        print(f"wrote {out}")
    return 0


def cmd_sweep(args) -> int:
    base = load_config(args)
    out = Path(base.output or "sweep.csv")
    summaries = []
    first = True
    for policy in args.policies.split(","):
        for dim in [int(d) for d in args.dims.split(",")]:
            for horizon in [int(h) for h in args.horizons.split(",")]:
                spec = {"name": policy}
                if base.policy.get("alpha") is not None and policy.split("+")[-1] == "ue":
                    spec["alpha"] = base.policy["alpha"]
                cfg = base.with_overrides({"arm_set.dim": dim, "horizon": horizon, "policy": spec, "checkpoints": None})
                result = run_replications(cfg, workers=args.workers)
                write_csv(out, cfg.policy_label, dim, result, append=not first)
                first = False
                stats = summarize(result.checkpoints, result.cumulative_regret, {"policy": cfg.policy_label, "r": dim})
                summaries.append(stats)
                mean, se = stats.at(horizon)
                print(f"{cfg.policy_label} r={dim} T={horizon}: mean={mean:.6g} stderr={se:.3g}")
    write_summary(_summary_path(out), summaries)
    print(f"wrote {out}")
    return 0


def cmd_verify(args) -> int:
    results = verify(args.suite, quick=args.quick)
    for check in results:
        print(check.line())
    failed = sum(not c.passed for c in results)
    print(f"{len(results) - failed}/{len(results)} checks passed")
    return 1 if failed else 0


def cmd_report(args) -> int:
    summaries = []
    for path in args.csv:
        for (policy, r), (checkpoints, values) in sorted(read_csv(path).items()):
            stats = summarize(checkpoints, values, {"policy": policy, "r": r})
            summaries.append(stats)
            print(f"# {path}: policy={policy} r={r}")
            _print_summary(stats)
    if args.output:
        write_summary(args.output, summaries)
    return 0


def _add_experiment_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="YAML experiment config")
    p.add_argument("--policy", help="pege, ue, greedy, ucb1 or extreme+<name>")
    p.add_argument("--alpha", type=float, help="override the uncertainty-ellipsoid alpha")
    p.add_argument("--dim", type=int, help="arm set dimension r")
    p.add_argument("--horizon", type=int)
    p.add_argument("--replications", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--output", help="CSV path; a .summary.txt is written next to it")
    p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                   help="dotted override, e.g. --set noise.sigma=0.5 (repeatable)")
    p.add_argument("--workers", type=int, help="worker processes (default: LINBANDIT_WORKERS or all cores)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="linbandit", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run one experiment")
    _add_experiment_flags(p)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("sweep", help="grid over policies, dimensions and horizons")
    _add_experiment_flags(p)
    p.add_argument("--policies", default="pege,ue,greedy")
    p.add_argument("--dims", default="2,4,8")
    p.add_argument("--horizons", default="1024")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("verify", help="run invariant suites")
    p.add_argument("--suite", default="all", choices=sorted(SUITES) + ["all"])
    p.add_argument("--quick", action="store_true", help="smaller sample sizes")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("report", help="summaries from stored CSVs")
    p.add_argument("csv", nargs="+")
    p.add_argument("--output", help="write the key-value summary here")
    p.set_defaults(func=cmd_report)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, ValueError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
