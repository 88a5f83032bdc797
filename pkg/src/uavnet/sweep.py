"""Parameter sweeps: one config, one varied key, several replications.

Replication seeds are derived from ``(root seed, value index, rep index)``
only, so every protocol swept from the same config sees the same
placements, trajectories and traffic.
"""

from __future__ import annotations

import csv
import io
import math
import statistics
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from .config import ScenarioConfig, dump_config, parse_config
from .rng import derive_seed
from .simulation import RunReport, run_scenario

METRICS = ("pdr", "e2e_delay_s", "throughput_kbps", "routing_load", "hop_count")


@dataclass
class Replication:
    value: str
    rep: int
    seed: int
    report: RunReport


@dataclass
class SweepResult:
    param: str
    values: list[str]
    runs: list[Replication] = field(default_factory=list)

    def cell(self, value) -> list[RunReport]:
        return [r.report for r in self.runs if r.value == str(value)]

    def rows(self) -> list[dict]:
        out = []
        for v in self.values:
            reps = self.cell(v)
            row = {"routing": reps[0].config.routing if reps else "", self.param: v, "reps": len(reps)}
            for m in METRICS:
                xs = [r.metrics[m] for r in reps if not math.isnan(r.metrics[m])]
                row[f"{m}_mean"] = statistics.fmean(xs) if xs else math.nan
                row[f"{m}_std"] = statistics.stdev(xs) if len(xs) > 1 else 0.0 if xs else math.nan
            out.append(row)
        return out


def with_overrides(cfg: ScenarioConfig, **overrides) -> ScenarioConfig:
    """Copy of ``cfg`` with dotted keys replaced, validated like a config file."""
    return parse_config(dump_config(cfg), {k: str(v) for k, v in overrides.items()})


def _run(job) -> RunReport:
    cfg, out_dir = job
    rep = run_scenario(cfg, out_dir=out_dir, trace=True if out_dir is not None else None)
    rep.ledger = None  # keep workers' return values small
    return rep


def sweep(cfg: ScenarioConfig, param: str, values, reps: int, workers: int = 1,
          progress=None, trace_dir: str | Path | None = None) -> SweepResult:
    """Run ``reps`` replications per value of ``param``.

    With ``trace_dir`` every run writes its report and full trace under
    ``trace_dir/<param>=<value>/rep<r>/``.
    """
    values = [str(v) for v in values]
    if reps < 1:
        raise ValueError("reps must be >= 1")
    jobs = []
    for vi, v in enumerate(values):
        for ri in range(reps):
            seed = derive_seed(cfg.seed, vi, ri)
            out = None if trace_dir is None else Path(trace_dir) / f"{param}={v}" / f"rep{ri}"
            jobs.append((v, ri, seed, (with_overrides(cfg, **{param: v, "seed": seed}), out)))
    result = SweepResult(param, values)
    if workers > 1:
        with ProcessPoolExecutor(workers) as ex:
            reports = list(ex.map(_run, [j[3] for j in jobs]))
    else:
        reports = []
        for j in jobs:
            reports.append(_run(j[3]))
            if progress is not None:
                progress(j, reports[-1])
    for (v, ri, seed, _), rep in zip(jobs, reports):
        result.runs.append(Replication(v, ri, seed, rep))
    return result


def write_csv(rows: list[dict], path: str | Path | None = None) -> str:
    """Comma-separated table with a header row; returns the text."""
    buf = io.StringIO()
    if rows:
        w = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
        w.writeheader()
        for r in rows:
            w.writerow({k: (repr(v) if isinstance(v, float) else v) for k, v in r.items()})
    text = buf.getvalue()
    if path is not None:
        Path(path).write_text(text, encoding="utf-8")
    return text
