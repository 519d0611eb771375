"""Command-line interface.

Subcommands:
  run           execute a sweep from a YAML config
  check         run property suites (lemmas | oracles | subproblem | schedules | all)
  rate-study    fit the stationarity-decay exponent over a horizon grid
  dataset-info  parse a LIBSVM file and print shape / label statistics

Exit codes: 0 success, 1 config error, 2 run failure, 3 check failure.
"""

from __future__ import annotations

import argparse
import json
import sys

from .exceptions import InvalidInputError


def _cmd_run(args) -> int:
    from . import harness

    try:
        cfg = harness.load_config(args.config)
    except harness.ConfigError as exc:
        print(exc, file=sys.stderr)
        return 1
    except (OSError, InvalidInputError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    if args.jobs is not None:
        cfg["jobs"] = args.jobs
    if args.output_dir is not None:
        cfg["output_dir"] = args.output_dir
    if args.plots:
        cfg["plots"] = True
    try:
        result = harness.run_sweep(cfg)
    except Exception as exc:  # noqa: BLE001 - surface any run failure as exit 2
        print(f"run failure: {exc}", file=sys.stderr)
        return 2
    aborted = [t for t in result.traces if t.aborted]
    print(f"wrote {len(result.trace_paths)} trace files to {result.output_dir}")
    print(f"f_star = {result.f_star!r}")
    for t in result.traces:
        flags = []
        if t.schedule_invalid:
            flags.append("schedule_invalid")
        if t.converged:
            flags.append("converged")
        if t.aborted:
            flags.append(f"aborted({t.abort_reason})")
        print(
            f"  {t.algorithm} seed={t.seed}: final f = {t.final_f!r}"
            f" gap = {t.final_f - result.f_star:.3e}"
            + (f"  [{', '.join(flags)}]" if flags else "")
        )
    if aborted:
        print(f"{len(aborted)} run(s) aborted", file=sys.stderr)
        return 2
    return 0


def _cmd_check(args) -> int:
    from . import checks

    try:
        results = checks.run_suite(args.suite)
    except InvalidInputError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    report = checks.report_dict(results)
    for r in results:
        status = "PASS" if r.passed else "FAIL"
        print(f"[{status}] {r.suite}/{r.check}: {r.detail} ({r.seconds:.2f}s)")
    if args.report:
        with open(args.report, "w", encoding="utf-8") as fh:
            json.dump(report, fh, indent=2)
        print(f"report written to {args.report}")
    return 0 if report["passed"] else 3


def _cmd_rate_study(args) -> int:
    from . import harness

    try:
        grid = [int(k) for k in args.horizons.split(",")]
        result = harness.rate_study(args.method, grid, n_seeds=args.seeds,
                                    sigma=args.sigma, base_seed=args.base_seed,
                                    exact_oracles=args.exact)
    except InvalidInputError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # noqa: BLE001
        print(f"run failure: {exc}", file=sys.stderr)
        return 2
    print(result)
    return 0


def _cmd_dataset_info(args) -> int:
    from . import datasets

    try:
        ds = datasets.parse_libsvm(args.path)
    except InvalidInputError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return 1
    info = datasets.dataset_summary(ds)
    for key, val in info.items():
        print(f"{key}: {val}")
    if info["name"] in datasets.KNOWN_DATASETS:
        print(f"canonical source: {datasets.KNOWN_DATASETS[info['name']]}")
    else:
        print(f"dataset collection: {datasets.LIBSVM_SITE}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="scrn",
        description="Momentum-based stochastic cubic-Newton benchmark harness",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run a sweep from a YAML config")
    p_run.add_argument("config", help="path to the YAML run configuration")
    p_run.add_argument("--jobs", type=int, default=None,
                       help="parallel (algorithm, seed) cells")
    p_run.add_argument("--output-dir", default=None)
    p_run.add_argument("--plots", action="store_true",
                       help="also write SVG gap plots derived from the CSVs")
    p_run.set_defaults(fn=_cmd_run)

    p_check = sub.add_parser("check", help="run a property-check suite")
    p_check.add_argument("suite", choices=["lemmas", "oracles", "subproblem",
                                           "schedules", "all"])
    p_check.add_argument("--report", default=None,
                         help="write a JSON report to this path")
    p_check.set_defaults(fn=_cmd_check)

    p_rate = sub.add_parser("rate-study", help="fit the decay exponent of the "
                                               "stationarity measure vs horizon")
    p_rate.add_argument("--method", choices=["pm", "rm"], required=True)
    p_rate.add_argument("--horizons", default="64,128,256,512,1024",
                        help="comma-separated horizon grid")
    p_rate.add_argument("--seeds", type=int, default=20)
    p_rate.add_argument("--sigma", type=float, default=0.2,
                        help="third-moment scale of the Hessian noise")
    p_rate.add_argument("--base-seed", type=int, default=0)
    p_rate.add_argument("--exact", action="store_true",
                        help="noiseless sanity run (2 seeds suffice)")
    p_rate.set_defaults(fn=_cmd_rate_study)

    p_info = sub.add_parser("dataset-info", help="inspect a LIBSVM file")
    p_info.add_argument("path")
    p_info.set_defaults(fn=_cmd_dataset_info)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.fn(args)


if __name__ == "__main__":
    sys.exit(main())
