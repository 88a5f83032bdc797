"""Command line: ``uavnet run|sweep|compare|connectivity|aloha``."""

from __future__ import annotations

import argparse
import csv
import logging
import sys
from pathlib import Path

from . import plotting
from .config import ConfigError, parse_config
from .harness import (aloha_saturation, compare_protocols, connectivity_experiment, verdict_rows)
from .kernel import SimulationFault
from .oracles import pure_aloha_success
from .simulation import run_scenario
from .sweep import METRICS, sweep, write_csv, with_overrides
from .trace import read_trace

log = logging.getLogger("uavnet")


def _load(path: str, seed: int | None):
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError("config", f"cannot read {path}: {exc}") from exc
    cfg = parse_config(text)
    if seed is not None:
        cfg = with_overrides(cfg, seed=seed)
    return cfg


def _out(path: str | None) -> Path | None:
    if path is None:
        return None
    p = Path(path)
    p.mkdir(parents=True, exist_ok=True)
    return p


def cmd_run(args) -> int:
    cfg = _load(args.config, args.seed)
    out = _out(args.out)
    rep = run_scenario(cfg, out_dir=out, trace=args.trace or None)
    sys.stdout.write(rep.to_text())
    sys.stdout.flush()
    print(f"# runtime_s = {rep.runtime_s:.3f}", file=sys.stderr)
    if out is not None:
        row = {"routing": cfg.routing, "seed": cfg.seed, **rep.metrics, **rep.counts}
        write_csv([row], out / "metrics.csv")
        if (out / "trace.csv").exists():
            plotting.plot_trajectories(read_trace(out / "trace.csv"), out / "trajectories.png")
    return 0


def cmd_sweep(args) -> int:
    cfg = _load(args.config, args.seed)
    values = [v.strip() for v in args.values.split(",") if v.strip()]
    res = sweep(cfg, args.param, values, args.reps, workers=args.workers)
    rows = res.rows()
    out = _out(args.out)
    sys.stdout.write(write_csv(rows, out / "sweep.csv" if out else None))
    if out is not None:
        for m in METRICS:
            plotting.plot_metric(rows, args.param, m, out / f"{m}.png")
    return 0


def cmd_compare(args) -> int:
    cfg = _load(args.config, args.seed)
    vels = [v.strip() for v in args.velocities.split(",") if v.strip()]
    cmp = compare_protocols(cfg, vels, args.reps, workers=args.workers)
    rows = cmp.rows()
    checks = cmp.checks()
    out = _out(args.out)
    write_csv(rows, out / "comparison.csv" if out else None)
    sys.stdout.write(write_csv(verdict_rows(checks), out / "verdict.csv" if out else None))
    if out is not None:
        plotting.plot_metric(rows, "velocity", "pdr", out / "pdr_vs_velocity.png")
        plotting.plot_metric(rows, "velocity", "e2e_delay_s", out / "delay_vs_velocity.png")
    return 0 if all(c.passed for c in checks) or not args.strict else 3


def cmd_connectivity(args) -> int:
    cfg = _load(args.config, args.seed)
    runs = connectivity_experiment(cfg, args.seeds, args.duration)
    out = _out(args.out)
    rows = [{"seed": r.seed, "t_ns": t, "components": c, "edges": e, "largest": l}
            for r in runs for (t, c, e, l) in r.series]
    text = write_csv(rows, out / "connectivity.csv" if out else None)
    if out is None:
        sys.stdout.write(text)
    else:
        plotting.plot_connectivity(runs, out / "connectivity.png")
        w = csv.writer(sys.stdout, lineterminator="\n")
        w.writerow(["seed", "components_start", "edges_start", "components_end", "edges_end"])
        for r in runs:
            w.writerow([r.seed, r.start[1], r.start[2], r.end[1], r.end[2]])
    return 0


def cmd_aloha(args) -> int:
    loads = [float(v) for v in args.loads.split(",")]
    results = [aloha_saturation(g, n_nodes=args.nodes, frames=args.frames, seed=args.seed or 1) for g in loads]
    rows = [{"load": r.load, "frames": r.frames, "successes": r.successes,
             "success_ratio": r.success_ratio, "e_minus_2g": pure_aloha_success(r.load)} for r in results]
    out = _out(args.out)
    sys.stdout.write(write_csv(rows, out / "aloha.csv" if out else None))
    if out is not None:
        plotting.plot_aloha(results, pure_aloha_success, out / "aloha.png")
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="uavnet", description="UAV ad-hoc network simulator")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, config=True):
        if config:
            p.add_argument("--config", required=True, help="scenario file (key = value lines)")
        p.add_argument("--seed", type=int, default=None, help="override the config seed")
        p.add_argument("--out", default=None, help="output directory for reports and figures")

    p = sub.add_parser("run", help="one replication")
    common(p)
    p.add_argument("--trace", action="store_true", help="write trace.csv")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("sweep", help="vary one key over values with replications")
    common(p)
    p.add_argument("--param", required=True)
    p.add_argument("--values", required=True, help="comma-separated")
    p.add_argument("--reps", type=int, default=1)
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("compare", help="opar vs greedy vs dsdv over velocity")
    common(p)
    p.add_argument("--velocities", default="5,10,15,20,25")
    p.add_argument("--reps", type=int, default=10)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--strict", action="store_true", help="exit 3 when an ordinal check fails")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("connectivity", help="virtual-force topology control from random starts")
    common(p)
    p.add_argument("--seeds", type=int, default=10)
    p.add_argument("--duration", type=float, default=60.0)
    p.set_defaults(func=cmd_connectivity)

    p = sub.add_parser("aloha", help="pure ALOHA success ratio at given offered loads")
    common(p, config=False)
    p.add_argument("--loads", default="0.25,0.5,1.0")
    p.add_argument("--nodes", type=int, default=10)
    p.add_argument("--frames", type=int, default=100_000)
    p.set_defaults(func=cmd_aloha)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except SimulationFault as exc:
        print(f"simulation fault: {exc}", file=sys.stderr)
        return 1
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
