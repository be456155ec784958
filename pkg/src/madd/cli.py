"""Command-line entry point.

Subcommands: validate, defaults, profiles, network, run, experiment.
Data artifacts land under --out together with a manifest.json naming every
file written (with content digests), the scenario digest and the seed, so
reruns can be compared byte-for-byte. Diagnostics go to stderr; exit codes:
0 success, 1 validation failure, 2 runtime failure.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
from dataclasses import replace
from pathlib import Path

from . import engine
from .attributes import derive_profiles
from .content import CONTROL_PLAN, make_plan
from .errors import MaddError, ScenarioError
from .evaluator import make_evaluator
from .network import assign_communities, build_network
from .powerlaw import fit_truncated_power_law
from .report import compare_interventions
from .scenario import defaults_as_json, load_scenario, validate_params, with_seed

_STRATEGY_BY_FLAG = {"fact": "fact_based", "narrative": "narrative_based"}


class _CliError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse would sys.exit(2); map to validation failure
        raise _CliError(message)


class ArtifactWriter:
    """Writes files under the output directory and records them for the
    manifest; nothing is written outside this path."""

    def __init__(self, out_dir: Path):
        self.out_dir = Path(out_dir)
        self.out_dir.mkdir(parents=True, exist_ok=True)
        self.files: dict[str, str] = {}

    def write_text(self, relpath: str, text: str) -> Path:
        path = self.out_dir / relpath
        path.parent.mkdir(parents=True, exist_ok=True)
        data = text.encode("utf-8")
        path.write_bytes(data)
        self.files[relpath] = hashlib.sha256(data).hexdigest()
        return path

    def write_manifest(self, scenario_digest: str, seed: int) -> Path:
        manifest = {
            "scenario_digest": scenario_digest,
            "seed": seed,
            "files": dict(sorted(self.files.items())),
        }
        text = json.dumps(manifest, indent=2, sort_keys=True) + "\n"
        path = self.out_dir / "manifest.json"
        path.write_text(text, encoding="utf-8")
        return path


def _build_parser() -> _Parser:
    parser = _Parser(prog="madd", description=__doc__)
    parser.add_argument("--print-defaults", action="store_true",
                        help="print default parameters and exit")
    sub = parser.add_subparsers(dest="command")

    def add_common(p, *, seed_required=False):
        p.add_argument("--scenario", required=True, help="scenario JSON file")
        p.add_argument("--seed", type=int, required=seed_required,
                       help="run seed (overrides the scenario's rng_seed)")
        p.add_argument("--backend", choices=["synthetic", "remote"],
                       help="evaluator backend override")

    sub.add_parser("defaults", help="print default parameters")

    p = sub.add_parser("validate", help="validate a scenario file")
    add_common(p)

    p = sub.add_parser("profiles", help="derive agent profiles")
    add_common(p)
    p.add_argument("--out", required=True)

    p = sub.add_parser("network", help="build the propagation network")
    add_common(p)
    p.add_argument("--out", required=True)

    p = sub.add_parser("run", help="run one simulation")
    add_common(p, seed_required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--stage", choices=["early", "mid", "late"],
                   help="intervention stage (omit for a control run)")
    p.add_argument("--strategy", choices=["fact", "narrative"],
                   help="correction strategy (requires --stage)")
    p.add_argument("--topic", help="disinformation topic (default: first in catalog)")
    p.add_argument("--record-cadence", type=int, default=engine.DEFAULT_RECORD_CADENCE)
    p.add_argument("--dump-profiles", action="store_true")
    p.add_argument("--dump-network", action="store_true")
    p.add_argument("--trajectories", action="store_true",
                   help="record per-agent trust trajectories")

    p = sub.add_parser("experiment", help="control + strategy runs + comparison")
    add_common(p, seed_required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--stage", choices=["early", "mid", "late"], required=True)
    p.add_argument("--strategy", choices=["fact", "narrative", "both"], default="both")
    p.add_argument("--topic")
    p.add_argument("--record-cadence", type=int, default=engine.DEFAULT_RECORD_CADENCE)
    p.add_argument("--dump-profiles", action="store_true")
    p.add_argument("--dump-network", action="store_true")
    return parser


def _load(args):
    scenario = load_scenario(args.scenario)
    if args.seed is not None:
        scenario = with_seed(scenario, args.seed)
    if args.backend:
        scenario = replace(
            scenario,
            evaluator_config=replace(scenario.evaluator_config, backend=args.backend),
        )
    return scenario


def _progress_printer(payload: dict) -> None:
    sys.stderr.write(json.dumps(payload, sort_keys=True) + "\n")


def _prepare(scenario):
    """Profiles, community index, network and share-count fit for a scenario."""
    seed = scenario.params.rng_seed
    evaluator = make_evaluator(scenario.evaluator_config, seed)
    profiles = derive_profiles(scenario, evaluator)
    index = assign_communities(profiles, scenario.params.tau, scenario.communities)
    net = build_network(profiles, index, scenario.params, seed)
    fit = fit_truncated_power_law(
        [p.share_total for p in profiles if not p.is_bot and p.share_total >= 1]
    )
    return profiles, index, net, fit


def _dump_optional(writer, args, profiles, net) -> None:
    if getattr(args, "dump_profiles", False):
        writer.write_text(
            "profiles.json",
            json.dumps([p.to_dict() for p in profiles], indent=2, sort_keys=True) + "\n",
        )
    if getattr(args, "dump_network", False):
        writer.write_text("edges.txt", net.edge_text())
        writer.write_text(
            "network.json", json.dumps(net.to_dict(), indent=2, sort_keys=True) + "\n"
        )


def _cmd_validate(args) -> int:
    scenario = _load(args)
    violations = validate_params(scenario.params)
    if violations:
        for v in violations:
            sys.stderr.write(f"violation: {v}\n")
        return 1
    print(
        f"OK: {len(scenario.users)} users, {len(scenario.communities)} communities, "
        f"{len(scenario.content_catalog)} content items, digest {scenario.digest()[:12]}"
    )
    return 0


def _cmd_profiles(args) -> int:
    scenario = _load(args)
    writer = ArtifactWriter(Path(args.out))
    evaluator = make_evaluator(scenario.evaluator_config, scenario.params.rng_seed)
    profiles = derive_profiles(scenario, evaluator)
    writer.write_text(
        "profiles.json",
        json.dumps([p.to_dict() for p in profiles], indent=2, sort_keys=True) + "\n",
    )
    writer.write_manifest(scenario.digest(), scenario.params.rng_seed)
    print(f"wrote {len(profiles)} profiles to {args.out}")
    return 0


def _cmd_network(args) -> int:
    scenario = _load(args)
    writer = ArtifactWriter(Path(args.out))
    profiles, index, net, _ = _prepare(scenario)
    writer.write_text("edges.txt", net.edge_text())
    writer.write_text(
        "network.json", json.dumps(net.to_dict(), indent=2, sort_keys=True) + "\n"
    )
    writer.write_manifest(scenario.digest(), scenario.params.rng_seed)
    print(f"network: {len(net.nodes)} nodes, {len(net.edges)} edges -> {args.out}")
    return 0


def _cmd_run(args) -> int:
    scenario = _load(args)
    if args.strategy and not args.stage:
        raise _CliError("--strategy requires --stage")
    plan = (
        make_plan(scenario.params, args.stage, _STRATEGY_BY_FLAG[args.strategy])
        if args.stage and args.strategy
        else CONTROL_PLAN
    )
    writer = ArtifactWriter(Path(args.out))
    profiles, index, net, fit = _prepare(scenario)
    run_evaluator = make_evaluator(scenario.evaluator_config, scenario.params.rng_seed)
    report = engine.run(
        scenario,
        net,
        profiles,
        plan,
        run_evaluator,
        seed=scenario.params.rng_seed,
        topic=args.topic,
        record_cadence=args.record_cadence,
        collect_trajectories=args.trajectories,
        progress=_progress_printer,
        fit=fit,
    )
    writer.write_text("report.json", report.to_json() + "\n")
    writer.write_text("report.csv", report.to_csv())
    _dump_optional(writer, args, profiles, net)
    writer.write_manifest(scenario.digest(), scenario.params.rng_seed)
    final = {c: report.ratios[c][-1] for c in sorted(report.ratios)}
    for community, record in final.items():
        sys.stderr.write(
            f"final {community}: SR={record.sr:.3f} ER={record.er:.3f} "
            f"IR={record.ir:.3f} UR={record.ur:.3f}\n"
        )
    print(f"run complete: {args.out}/report.json")
    return 0


def _cmd_experiment(args) -> int:
    scenario = _load(args)
    strategies = (
        list(_STRATEGY_BY_FLAG.values())
        if args.strategy == "both"
        else [_STRATEGY_BY_FLAG[args.strategy]]
    )
    writer = ArtifactWriter(Path(args.out))
    profiles, index, net, fit = _prepare(scenario)

    plans = [("control", CONTROL_PLAN)]
    for strategy in strategies:
        plans.append((strategy, make_plan(scenario.params, args.stage, strategy)))

    reports = []
    for label, plan in plans:
        run_evaluator = make_evaluator(scenario.evaluator_config, scenario.params.rng_seed)
        report = engine.run(
            scenario,
            net,
            profiles,
            plan,
            run_evaluator,
            seed=scenario.params.rng_seed,
            topic=args.topic,
            record_cadence=args.record_cadence,
            progress=_progress_printer,
            fit=fit,
        )
        writer.write_text(f"{label}/report.json", report.to_json() + "\n")
        writer.write_text(f"{label}/report.csv", report.to_csv())
        reports.append(report)

    comparison = compare_interventions(reports)
    writer.write_text("comparison.json", comparison.to_json() + "\n")
    _dump_optional(writer, args, profiles, net)
    writer.write_manifest(scenario.digest(), scenario.params.rng_seed)
    print(f"experiment complete: {len(reports)} runs -> {args.out}")
    return 0


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        if args.print_defaults or args.command == "defaults":
            print(defaults_as_json())
            return 0
        if args.command is None:
            raise _CliError("a subcommand is required (see --help)")
        handler = {
            "validate": _cmd_validate,
            "profiles": _cmd_profiles,
            "network": _cmd_network,
            "run": _cmd_run,
            "experiment": _cmd_experiment,
        }[args.command]
        return handler(args)
    except (_CliError, ScenarioError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 1
    except MaddError as exc:
        sys.stderr.write(f"runtime error: {exc}\n")
        return 2
    except Exception as exc:  # never panic on malformed input
        sys.stderr.write(f"unexpected error: {type(exc).__name__}: {exc}\n")
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
