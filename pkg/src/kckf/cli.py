"""Command-line interface: ``kckf {sim,run,bench,flops,compare,equiv,config}``.

Exit codes: 0 success, 1 usage or configuration error, 2 data error,
3 numerical failure (a filter diverged or an equivalence check failed).
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Sequence

import numpy as np

from . import config as cfg
from .errors import DatasetError, InvalidArgumentError, KckfError
from .evaluation import benchmark_many, compare_runs, compare_timing, equivalence_check, rmse_euler
from .filters.runner import run_filter
from .flops import ckf_prediction_flops, format_breakdown, kckf_prediction_flops, reduction_ratio
from .io import parse_dataset, read_attitude, write_attitude, write_dataset
from .models import ImuData, preprocess
from .sim import DEFAULT_DIP, DEFAULT_NOISE, ProfileKind, Scenario, SensorNoiseModel, TrajectoryProfile, inject_acceleration_bursts

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_NUMERIC = 0, 1, 2, 3

BENCH_FILTERS = ("kckf", "ckf", "ukf", "ekf")


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _common(p: argparse.ArgumentParser, filters: bool = True) -> None:
    p.add_argument("--config", type=Path, help="flat key = value config file")
    p.add_argument("--seed", type=int, help="override the config seed")
    p.add_argument("--mode", choices=("redraw", "reuse"), help="update point source")
    if filters:
        p.add_argument(
            "--filter", action="append", metavar="NAMES",
            help="filter name(s), comma separated or repeated",
        )
    p.add_argument("--json", action="store_true", help="print JSON instead of tables")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="kckf", description="Quaternion cubature attitude filters")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sim", help="generate a synthetic dataset and its truth file")
    _common(p, filters=False)
    p.add_argument("--output", type=Path, required=True, help="dataset CSV to write")
    p.add_argument("--truth", type=Path, help="truth CSV (default: <output>_truth.csv)")
    p.add_argument("--profile", choices=[k.value for k in ProfileKind], default="walk-like")
    p.add_argument("--duration", type=float, default=60.0, help="seconds")
    p.add_argument("--dip", type=float, default=DEFAULT_DIP, help="magnetic dip in degrees")
    p.add_argument("--noise", choices=("default", "none"), default="default")
    p.add_argument("--bursts", type=int, default=0, help="external-acceleration bursts to inject")

    p = sub.add_parser("run", help="filter a dataset and write per-sample estimates")
    _common(p)
    p.add_argument("--input", type=Path, required=True, help="dataset CSV")
    p.add_argument(
        "--output", type=Path, required=True,
        help="estimate CSV; with several filters, <stem>_<filter><suffix> per filter",
    )

    p = sub.add_parser("bench", help="time filters per measurement")
    _common(p)
    p.add_argument("--input", type=Path, help="dataset CSV (default: simulated walk-like data)")
    p.add_argument("--samples", type=int, default=60000, help="simulated samples when no --input")
    p.add_argument("--repeat", type=int, default=10, help="repetitions (>= 3)")
    p.add_argument("--passes", type=int, default=5, help="dataset passes per repetition; the fastest counts")
    p.add_argument("--warmup", type=int, default=1)
    p.add_argument("--output", type=Path, help="tidy CSV of per-repetition times")

    p = sub.add_parser("flops", help="print the prediction FLOP breakdown")
    p.add_argument("--json", action="store_true")

    p = sub.add_parser("compare", help="RMSE of an estimate file against a reference file")
    p.add_argument("--input", type=Path, required=True, help="estimate CSV")
    p.add_argument("--reference", type=Path, required=True, help="truth CSV")
    p.add_argument("--json", action="store_true")

    p = sub.add_parser("equiv", help="check CKF and KCKF agree step by step")
    _common(p, filters=False)
    p.add_argument("--input", type=Path, help="dataset CSV (default: every simulator profile)")
    p.add_argument("--tolerance", type=float, default=1e-10)
    p.add_argument("--duration", type=float, default=60.0, help="simulated seconds when no --input")

    p = sub.add_parser("config", help="print the effective configuration")
    _common(p)
    return parser


def _load_config(args: argparse.Namespace) -> cfg.RunConfig:
    base = cfg.load(args.config) if getattr(args, "config", None) else cfg.RunConfig()
    filters = getattr(args, "filter", None)
    return base.with_overrides(
        seed=getattr(args, "seed", None),
        mode=getattr(args, "mode", None),
        filters=",".join(filters) if filters else None,
    )


def _emit(args: argparse.Namespace, payload, text: str) -> None:
    print(json.dumps(payload, indent=2) if args.json else text)


def _output_paths(output: Path, filters: Sequence[str]) -> dict[str, Path]:
    if len(filters) == 1:
        return {filters[0]: output}
    return {f: output.with_name(f"{output.stem}_{f}{output.suffix or '.csv'}") for f in filters}


def cmd_sim(args: argparse.Namespace) -> int:
    conf = _load_config(args)
    noise = DEFAULT_NOISE if args.noise == "default" else SensorNoiseModel()
    profile = TrajectoryProfile(ProfileKind(args.profile), duration=args.duration, rate=conf.rate)
    truth, raw = Scenario(profile, noise, args.dip, conf.seed).build()
    if args.bursts:
        raw = inject_acceleration_bursts(raw, n_bursts=args.bursts, seed=conf.seed)
    truth_path = args.truth or args.output.with_name(f"{args.output.stem}_truth{args.output.suffix or '.csv'}")
    write_dataset(args.output, raw)
    write_attitude(truth_path, truth.t, truth.q)
    _emit(
        args,
        {"dataset": str(args.output), "truth": str(truth_path), "samples": len(raw)},
        f"wrote {len(raw)} samples to {args.output} and truth to {truth_path}",
    )
    return EXIT_OK


def cmd_run(args: argparse.Namespace) -> int:
    conf = _load_config(args)
    data = preprocess(parse_dataset(args.input), conf.lowpass())
    if len(data) == 0:
        raise DatasetError(f"{args.input}: no samples")
    settings = conf.settings()
    paired = {"ckf", "kckf"} <= set(conf.filters)
    paths = _output_paths(args.output, conf.filters)
    runs = {}
    summary = []
    failed = []
    for name in conf.filters:
        run = run_filter(name, data, settings, store_cov=paired and name in ("ckf", "kckf"))
        runs[name] = run
        # on failure the rows before the failing sample are still written
        write_attitude(paths[name], data.t[: len(run.q)], run.q)
        summary.append(
            {"filter": name, "output": str(paths[name]), "rows": len(run.q), "ok": run.ok, "failed_at": run.failed_at}
        )
        if not run.ok:
            failed.append(name)
    lines = [f"{s['filter']:>5}: {s['rows']} rows -> {s['output']}" + ("" if s["ok"] else f"  FAILED at sample {s['failed_at']}") for s in summary]
    payload: dict = {"runs": summary}
    if paired:
        rep = compare_runs(runs["ckf"], runs["kckf"], 1e-10)
        payload["equivalence"] = rep.as_dict()
        lines.append(
            f"ckf vs kckf: max |dq| = {rep.max_dq:.3e}, max |dP| = {rep.max_dP:.3e} "
            f"over {rep.steps} steps ({'equivalent' if rep.passed else 'NOT equivalent'} at 1e-10)"
        )
    _emit(args, payload, "\n".join(lines))
    if failed:
        for name in failed:
            try:
                runs[name].raise_for_status()
            except KckfError as exc:
                print(f"kckf: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK


def _simulated(profile: ProfileKind, duration: float, conf: cfg.RunConfig) -> ImuData:
    p = TrajectoryProfile(profile, duration=duration, rate=conf.rate)
    _, raw = Scenario(p, DEFAULT_NOISE, DEFAULT_DIP, conf.seed).build()
    return raw


def cmd_bench(args: argparse.Namespace) -> int:
    conf = _load_config(args)
    filters = conf.filters if args.filter else BENCH_FILTERS
    if args.input:
        raw = parse_dataset(args.input)
    else:
        if args.samples < 2:
            raise InvalidArgumentError("--samples must be at least 2")
        raw = _simulated(ProfileKind.WALK_LIKE, (args.samples - 1) / conf.rate, conf)
    data = preprocess(raw, conf.lowpass())
    reports = benchmark_many(filters, data, args.repeat, conf.settings(), args.warmup, args.passes)
    if args.output:
        with args.output.open("w") as fh:
            fh.write("filter,repetition,ms_per_measurement\n")
            for name, rep in reports.items():
                for i, v in enumerate(rep.per_rep_ms):
                    fh.write(f"{name},{i},{v!r}\n")
    payload: dict = {"timings": [r.as_dict() for r in reports.values()]}
    lines = [f"{len(data)} samples, {args.repeat} repetitions, best of {args.passes} passes each"]
    lines.append(f"{'filter':<8}{'mean us':>10}{'std us':>10}")
    for r in reports.values():
        lines.append(f"{r.filter:<8}{1e3 * r.mean_ms:>10.4f}{1e3 * r.std_ms:>10.4f}")
    if "kckf" in reports and "ckf" in reports:
        s = compare_timing(reports["kckf"], reports["ckf"])
        payload["kckf_vs_ckf"] = {
            "gap_ms": s.gap_ms, "reduction": s.reduction, "pooled_std_ms": s.pooled_std_ms, "gap_in_std": s.gap_in_std
        }
        lines.append(f"kckf vs ckf: {100 * s.reduction:.2f}% lower, gap = {s.gap_in_std:.1f} pooled std")
    _emit(args, payload, "\n".join(lines))
    return EXIT_OK


def cmd_flops(args: argparse.Namespace) -> int:
    ckf, kckf = ckf_prediction_flops(), kckf_prediction_flops()
    ratio = reduction_ratio()
    text = f"{format_breakdown(ckf)}\n\n{format_breakdown(kckf)}\n\nreduction: {100 * ratio:.2f}%"
    _emit(args, {"ckf": ckf.as_dict(), "kckf": kckf.as_dict(), "reduction": ratio}, text)
    return EXIT_OK


def cmd_compare(args: argparse.Namespace) -> int:
    t_est, _, est = read_attitude(args.input)
    t_ref, _, ref = read_attitude(args.reference)
    if t_est.shape != t_ref.shape or not np.array_equal(t_est, t_ref):
        raise DatasetError(f"timestamps of {args.input} and {args.reference} are not aligned")
    r = rmse_euler(est, ref)
    _emit(args, r.as_dict(), f"RMSE over {r.n} samples: roll {r.roll:.4f} deg, pitch {r.pitch:.4f} deg, yaw {r.yaw:.4f} deg")
    return EXIT_OK


def cmd_equiv(args: argparse.Namespace) -> int:
    conf = _load_config(args)
    if args.input:
        sets = {str(args.input): parse_dataset(args.input)}
    else:
        sets = {k.value: _simulated(k, args.duration, conf) for k in ProfileKind}
    settings = conf.settings()
    reports = {name: equivalence_check(preprocess(raw, conf.lowpass()), args.tolerance, settings) for name, raw in sets.items()}
    lines = [
        f"{name}: {r.steps} steps, max |dq| = {r.max_dq:.3e}, max |dP| = {r.max_dP:.3e} -> {'PASS' if r.passed else 'FAIL'}"
        for name, r in reports.items()
    ]
    _emit(args, {name: r.as_dict() for name, r in reports.items()}, "\n".join(lines))
    return EXIT_OK if all(r.passed for r in reports.values()) else EXIT_NUMERIC


def cmd_config(args: argparse.Namespace) -> int:
    conf = _load_config(args)
    if args.json:
        print(json.dumps({k: list(v) if isinstance(v, tuple) else v for k, v in vars(conf).items()}, indent=2))
    else:
        print(conf.dumps(), end="")
    return EXIT_OK


COMMANDS = {
    "sim": cmd_sim,
    "run": cmd_run,
    "bench": cmd_bench,
    "flops": cmd_flops,
    "compare": cmd_compare,
    "equiv": cmd_equiv,
    "config": cmd_config,
}


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except NotImplementedError as exc:
        print(f"kckf: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DatasetError, OSError) as exc:
        print(f"kckf: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except InvalidArgumentError as exc:
        print(f"kckf: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ArithmeticError, KckfError) as exc:
        print(f"kckf: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
