"""Command-line front end: single runs and paired-protocol sweeps."""

import argparse
import dataclasses
import math
import sys
import time
from multiprocessing import Pool
from pathlib import Path

from .metrics import MetricsReport
from .runner import run_scenario
from .scenario import (DEFAULT_POINTS, DEFAULT_SEEDS, PROTOCOLS, SWEEP_AXES,
                       ConfigError, ScenarioConfig, apply_axis, load_config)

CSV_HEADER = ("axis_value,protocol,seed,srn,td,dm,ecp,etecn,term,"
              "data_sent,data_received,routing_packets,"
              "drop_ifq,drop_nrte,drop_tout,drop_ttl")


def _num(x) -> str:
    if isinstance(x, float) and math.isnan(x):
        return "nan"
    return str(x)


def _report_row(axis_value, protocol, seed, rep: MetricsReport) -> list[str]:
    return [
        _num(axis_value), protocol, str(seed),
        _num(rep.srn), _num(rep.td), _num(rep.dm),
        _num(rep.ecp), _num(rep.etecn), _num(rep.term),
        str(rep.data_sent), str(rep.data_received), str(rep.routing_packets),
        str(rep.drops.get("IFQ", 0)), str(rep.drops.get("NRTE", 0)),
        str(rep.drops.get("TOUT", 0)), str(rep.drops.get("TTL", 0)),
    ]


def _print_summary(rep: MetricsReport) -> None:
    print(f"packet delivery fraction {_num(rep.td * 100)}")
    print(f"TOUT {rep.drops.get('TOUT', 0)}")
    print(f"TTL {rep.drops.get('TTL', 0)}")
    print(f"NRTE {rep.drops.get('NRTE', 0)}")
    print(f"IFQ {rep.drops.get('IFQ', 0)}")
    print(f"normalized routing overhead {_num(rep.srn)}")
    print(f"average end to end delay {_num(rep.dm)}")
    print(f"energy consumed per packet {_num(rep.ecp)}")
    print(f"deviation {_num(rep.etecn)}")
    print(f"minimal residual energy {_num(rep.term * 100)}")


def cmd_run(args) -> int:
    try:
        cfg = load_config(args.config) if args.config else ScenarioConfig()
        if args.protocol:
            cfg = dataclasses.replace(cfg, protocol=args.protocol)
        if args.seed is not None:
            cfg = dataclasses.replace(cfg, seed=args.seed)
        cfg.validate()
    except (ConfigError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2

    out = Path(args.out)
    try:
        out.mkdir(parents=True, exist_ok=True)
        sink = None
        if args.trace == "on":
            sink = open(out / f"trace_{cfg.protocol}_{cfg.seed}.tr", "w")
        try:
            result = run_scenario(cfg, keep_records=False, trace_sink=sink)
        finally:
            if sink is not None:
                sink.close()
        row = _report_row("-", cfg.protocol, cfg.seed, result.report)
        with open(out / "metrics.csv", "w") as f:
            f.write(CSV_HEADER + "\n")
            f.write(",".join(row) + "\n")
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    _print_summary(result.report)
    return 0


def _sweep_worker(spec):
    axis_value, cfg = spec
    t0 = time.monotonic()
    try:
        result = run_scenario(cfg, keep_records=False)
        return (axis_value, cfg.protocol, cfg.seed,
                _report_row(axis_value, cfg.protocol, cfg.seed, result.report),
                time.monotonic() - t0, None)
    except Exception as e:     # partial-failure policy: record, keep sweeping
        return (axis_value, cfg.protocol, cfg.seed, None,
                time.monotonic() - t0, f"{type(e).__name__}: {e}")


def _mean_row(axis_value, protocol, rows, complete: bool) -> list[str]:
    cols = list(zip(*rows))
    label = "mean" if complete else "mean-partial"
    out = [_num(axis_value), protocol, label]
    for col in cols[3:]:
        vals = [float(v) for v in col]
        out.append(_num(sum(vals) / len(vals)))
    return out


def cmd_sweep(args) -> int:
    try:
        cfg = load_config(args.config) if args.config else ScenarioConfig()
        cfg.validate()
        if args.axis not in SWEEP_AXES:
            raise ConfigError(f"unknown axis {args.axis!r}; expected one of {SWEEP_AXES}")
    except (ConfigError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2

    points = args.points.split(",") if args.points else DEFAULT_POINTS[args.axis]
    seeds = [int(s) for s in args.seeds.split(",")] if args.seeds else list(DEFAULT_SEEDS)
    specs = []
    for point in points:
        cfg_point = apply_axis(cfg, args.axis, point)
        for protocol in PROTOCOLS:
            for seed in seeds:
                specs.append((point, dataclasses.replace(
                    cfg_point, protocol=protocol, seed=seed)))

    if args.jobs > 1:
        with Pool(args.jobs) as pool:
            results = pool.map(_sweep_worker, specs)
    else:
        results = [_sweep_worker(s) for s in specs]

    out = Path(args.out)
    try:
        out.mkdir(parents=True, exist_ok=True)
        path = out / f"sweep_{args.axis}.csv"
        with open(path, "w") as f:
            f.write(CSV_HEADER + "\n")
            i = 0
            for point in points:
                for protocol in PROTOCOLS:
                    group = results[i:i + len(seeds)]
                    i += len(seeds)
                    ok_rows = []
                    for axis_value, proto, seed, row, wall, err in group:
                        if err is None:
                            f.write(",".join(row) + "\n")
                            ok_rows.append(row)
                        else:
                            f.write(f"{axis_value},{proto},{seed},"
                                    + ",".join(["error"] * 13) + "\n")
                            print(f"warning: {proto} seed {seed} at {axis_value}: {err}",
                                  file=sys.stderr)
                    if ok_rows:
                        f.write(",".join(_mean_row(point, protocol, ok_rows,
                                                   len(ok_rows) == len(group))) + "\n")
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    print(f"wrote {path}")
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="manetsim",
        description="Discrete-event MANET simulator comparing MEA-DSR with DSR")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run one simulation")
    p_run.add_argument("--config", help="scenario config file (key=value)")
    p_run.add_argument("--protocol", choices=PROTOCOLS)
    p_run.add_argument("--seed", type=int)
    p_run.add_argument("--trace", choices=["on", "off"], default="on")
    p_run.add_argument("--out", default=".")
    p_run.set_defaults(fn=cmd_run)

    p_sweep = sub.add_parser("sweep", help="run a sweep over one axis, both protocols")
    p_sweep.add_argument("--config", help="base scenario config file")
    p_sweep.add_argument("--axis", required=True)
    p_sweep.add_argument("--out", required=True)
    p_sweep.add_argument("--jobs", type=int, default=1)
    p_sweep.add_argument("--points", help="comma-separated axis points (default: paper grid)")
    p_sweep.add_argument("--seeds", help="comma-separated seeds (default: 1-5)")
    p_sweep.set_defaults(fn=cmd_sweep)

    args = parser.parse_args(argv)
    return args.fn(args)


if __name__ == "__main__":
    sys.exit(main())
