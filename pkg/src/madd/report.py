"""Run reports, intervention comparisons and exports.

A RunReport carries the recorded per-community ratio series, trust
trajectory statistics, final state sets and the resource ledger for one
simulation. Reports serialize byte-stably (sorted keys, fixed float
formatting) so determinism can be checked by comparing files.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

from .errors import IoFailure, MismatchedRuns, UnknownCommunity

CSV_HEADER = "step,community,SR,ER,IR,UR,tt_mean,tt_std"


@dataclass(frozen=True)
class RatioRecord:
    step: int
    sr: float
    er: float
    ir: float
    ur: float

    def to_list(self) -> list:
        return [self.step, self.sr, self.er, self.ir, self.ur]


@dataclass(frozen=True)
class TrustRecord:
    step: int
    mean: float
    std: float

    def to_list(self) -> list:
        return [self.step, self.mean, self.std]


@dataclass
class RunReport:
    scenario_digest: str
    seed: int
    topic: str
    plan_stage: str
    plan_strategy: str
    record_cadence: int
    total_steps: int
    ratios: dict = field(default_factory=dict)  # community -> [RatioRecord]
    trust: dict = field(default_factory=dict)  # community -> [TrustRecord]
    trajectories: dict = field(default_factory=dict)  # agent -> [[step, tt]] (optional)
    final_states: dict = field(default_factory=dict)  # status -> sorted agent ids
    resource_ledger: dict = field(default_factory=dict)
    complete: bool = True

    def recorded_steps(self) -> list:
        for series in self.ratios.values():
            return [r.step for r in series]
        return []

    def ir_series(self, community: str) -> list:
        if community not in self.ratios:
            raise UnknownCommunity(community, "report ratios")
        return [(r.step, r.ir) for r in self.ratios[community]]

    def final_ir(self, community: str) -> float:
        return self.ratios[community][-1].ir

    def validate(self) -> None:
        """Re-check the engine's structural guarantees on ingest."""
        for community, series in self.ratios.items():
            prev_er = -1.0
            for record in series:
                if abs(record.sr + record.er - 1.0) > 1e-9:
                    raise ValueError(
                        f"SR + ER != 1 at step {record.step} in {community!r}"
                    )
                if record.ir + record.ur > record.er + 1e-9:
                    raise ValueError(
                        f"IR + UR > ER at step {record.step} in {community!r}"
                    )
                if record.er + 1e-12 < prev_er:
                    raise ValueError(f"ER decreased at step {record.step} in {community!r}")
                prev_er = record.er
        for community, series in self.trust.items():
            for record in series:
                if not 0.0 <= record.mean <= 1.0 or record.std < 0.0:
                    raise ValueError(
                        f"trust stats out of range at step {record.step} in {community!r}"
                    )

    def to_dict(self) -> dict:
        out = {
            "scenario_digest": self.scenario_digest,
            "seed": self.seed,
            "topic": self.topic,
            "plan": {"stage": self.plan_stage, "strategy": self.plan_strategy},
            "record_cadence": self.record_cadence,
            "total_steps": self.total_steps,
            "ratios": {c: [r.to_list() for r in series] for c, series in self.ratios.items()},
            "trust": {c: [r.to_list() for r in series] for c, series in self.trust.items()},
            "final_states": {k: list(v) for k, v in self.final_states.items()},
            "resource_ledger": self.resource_ledger,
            "complete": self.complete,
        }
        if self.trajectories:
            out["trajectories"] = {
                agent: [list(point) for point in series]
                for agent, series in self.trajectories.items()
            }
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "RunReport":
        report = cls(
            scenario_digest=data["scenario_digest"],
            seed=data["seed"],
            topic=data["topic"],
            plan_stage=data["plan"]["stage"],
            plan_strategy=data["plan"]["strategy"],
            record_cadence=data["record_cadence"],
            total_steps=data["total_steps"],
            ratios={
                c: [RatioRecord(*row) for row in series]
                for c, series in data["ratios"].items()
            },
            trust={
                c: [TrustRecord(*row) for row in series]
                for c, series in data["trust"].items()
            },
            trajectories={
                agent: [tuple(point) for point in series]
                for agent, series in data.get("trajectories", {}).items()
            },
            final_states={k: list(v) for k, v in data["final_states"].items()},
            resource_ledger=data["resource_ledger"],
            complete=data["complete"],
        )
        report.validate()
        return report

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))

    def to_csv(self) -> str:
        lines = [CSV_HEADER]
        trust_by_step = {
            community: {record.step: record for record in series}
            for community, series in self.trust.items()
        }
        for community in sorted(self.ratios):
            for record in self.ratios[community]:
                trust = trust_by_step.get(community, {}).get(record.step)
                mean = trust.mean if trust else 0.0
                std = trust.std if trust else 0.0
                lines.append(
                    f"{record.step},{community}"
                    f",{record.sr:.9f},{record.er:.9f},{record.ir:.9f},{record.ur:.9f}"
                    f",{mean:.9f},{std:.9f}"
                )
        return "\n".join(lines) + "\n"


def trust_trajectory_stats(report: RunReport, community: str) -> list:
    """(step, mean, population std) series for one community."""
    if community not in report.trust:
        raise UnknownCommunity(community, "report trust series")
    return [(r.step, r.mean, r.std) for r in report.trust[community]]


def population_stats(values) -> tuple:
    """Mean and population (not sample) standard deviation."""
    values = list(values)
    if not values:
        return 0.0, 0.0
    mean = sum(values) / len(values)
    var = sum((v - mean) ** 2 for v in values) / len(values)
    return mean, math.sqrt(var)


@dataclass
class ComparisonReport:
    scenario_digest: str
    seed: int
    control_stage: str
    deltas: dict = field(default_factory=dict)  # strategy -> community -> [[step, dIR]]
    final_step_deltas: dict = field(default_factory=dict)  # strategy -> community -> float
    peak_ir_deltas: dict = field(default_factory=dict)  # strategy -> community -> float

    def to_dict(self) -> dict:
        return {
            "scenario_digest": self.scenario_digest,
            "seed": self.seed,
            "control_stage": self.control_stage,
            "deltas": self.deltas,
            "final_step_deltas": self.final_step_deltas,
            "peak_ir_deltas": self.peak_ir_deltas,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))


def compare_interventions(reports) -> ComparisonReport:
    """Per-community infected-ratio deltas of each strategy run against the
    control run sharing its scenario digest and seed."""
    reports = list(reports)
    if len(reports) < 2:
        raise MismatchedRuns("need at least two reports to compare")
    digests = {r.scenario_digest for r in reports}
    seeds = {r.seed for r in reports}
    if len(digests) != 1 or len(seeds) != 1:
        raise MismatchedRuns(
            f"reports span {len(digests)} digests and {len(seeds)} seeds; expected one of each"
        )
    controls = [r for r in reports if r.plan_strategy == "none"]
    if not controls:
        raise MismatchedRuns("no control run (strategy 'none') among the reports")
    control = controls[0]
    others = [r for r in reports if r is not control]

    comparison = ComparisonReport(
        scenario_digest=control.scenario_digest,
        seed=control.seed,
        control_stage=control.plan_stage,
    )
    control_ir = {c: dict(control.ir_series(c)) for c in control.ratios}
    for run in others:
        label = f"{run.plan_stage}:{run.plan_strategy}"
        if set(run.ratios) != set(control.ratios):
            raise MismatchedRuns(f"run {label} covers different communities than control")
        per_community = {}
        finals = {}
        peaks = {}
        for community in sorted(run.ratios):
            base = control_ir[community]
            series = []
            for step, ir in run.ir_series(community):
                if step not in base:
                    raise MismatchedRuns(f"run {label} recorded step {step} missing in control")
                series.append([step, ir - base[step]])
            per_community[community] = series
            finals[community] = series[-1][1]
            peak_run = max(ir for _, ir in run.ir_series(community))
            peak_control = max(base.values())
            peaks[community] = peak_run - peak_control
        comparison.deltas[label] = per_community
        comparison.final_step_deltas[label] = finals
        comparison.peak_ir_deltas[label] = peaks
    return comparison


def export(report, fmt: str, path) -> None:
    """Write a report as csv or json; output bytes are stable per report."""
    if fmt not in ("csv", "json"):
        raise ValueError(f"format must be csv or json, got {fmt!r}")
    if fmt == "csv" and not isinstance(report, RunReport):
        raise ValueError("csv export applies to RunReport only")
    try:
        if fmt == "json":
            payload = report.to_json() + "\n"
        else:
            payload = report.to_csv()
        with open(path, "w", encoding="utf-8", newline="") as handle:
            handle.write(payload)
    except OSError as exc:
        raise IoFailure(f"writing {path}: {exc}") from exc


def load_report(path) -> RunReport:
    with open(path, encoding="utf-8") as handle:
        return RunReport.from_dict(json.load(handle))
