"""Command-line front end.

Subcommands:

* ``list``                          print the experiment catalog
* ``run <id> [--seed S] [--sims K] [--out DIR] [--format F] [--config P]``
* ``run-all [--seed S] [--sims K] [--out DIR] [--config P]``
* ``gen-data <task> <n> --out FILE [--size N] [--seed S]``
* ``stats compare <csvA> <csvB> [--alpha A]``

``--config`` points at a plain key=value file (keys: seed, sims, out,
format); explicit flags win over the file, which wins over the
``RELBIAS_SEED`` environment variable and catalog defaults.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from .data import TaskKind, gen_equality_dataset, gen_task_dataset, write_dataset_csv
from .errors import ConfigurationError
from .experiments import (
    ExperimentSpec,
    catalog,
    emit_report,
    find_experiment,
    parse_report_csv,
    run_experiment,
)
from .stats import wilcoxon_signed_rank

_FORMAT_EXT = {"csv": "csv", "markdown": "md", "plotdata": "tsv"}


def _read_config_file(path: str) -> dict[str, str]:
    out = {}
    for raw in Path(path).read_text(encoding="utf-8").splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigurationError(f"bad config line (expected key=value): {raw!r}")
        key, value = line.split("=", 1)
        out[key.strip()] = value.strip()
    return out


def _resolve_run_options(args) -> dict:
    file_opts = _read_config_file(args.config) if args.config else {}
    seed = args.seed
    if seed is None and "seed" in file_opts:
        seed = int(file_opts["seed"])
    if seed is None and os.environ.get("RELBIAS_SEED"):
        seed = int(os.environ["RELBIAS_SEED"])
    sims = args.sims
    if sims is None and "sims" in file_opts:
        sims = int(file_opts["sims"])
    out_dir = getattr(args, "out", None) or file_opts.get("out")
    fmt = getattr(args, "format", None) or file_opts.get("format") or "csv"
    if fmt not in _FORMAT_EXT:
        raise ConfigurationError(f"unknown format {fmt!r} (csv, markdown or plotdata)")
    return {"seed": seed, "sims": sims, "out": out_dir, "format": fmt}


def _write_or_print(content: str, out_dir: str | None, filename: str) -> None:
    if out_dir is None:
        sys.stdout.write(content)
        return
    path = Path(out_dir)
    path.mkdir(parents=True, exist_ok=True)
    (path / filename).write_text(content, encoding="utf-8")
    print(f"wrote {path / filename}")


def _progress(message: str) -> None:
    print(f"  {message}", file=sys.stderr)


def _cmd_list(_args) -> int:
    for spec in catalog():
        values = ", ".join(str(getattr(v, "value", v)) for v in spec.sweep_values)
        print(f"{spec.id:20s} {spec.description} [{spec.sweep_param}: {values}]")
    return 0


def _run_one(spec: ExperimentSpec, opts: dict, verbose: bool) -> str:
    rows = run_experiment(spec, base_seed=opts["seed"], simulations=opts["sims"],
                          progress=_progress if verbose else None)
    return emit_report(rows, opts["format"])


def _cmd_run(args) -> int:
    opts = _resolve_run_options(args)
    spec = find_experiment(args.experiment)
    content = _run_one(spec, opts, args.verbose)
    _write_or_print(content, opts["out"], f"{spec.id}.{_FORMAT_EXT[opts['format']]}")
    return 0


def _cmd_run_all(args) -> int:
    opts = _resolve_run_options(args)
    out_dir = opts["out"] or "results"
    all_csv_rows = []
    for spec in catalog():
        rows = run_experiment(spec, base_seed=opts["seed"], simulations=opts["sims"],
                              progress=_progress if args.verbose else None)
        all_csv_rows.extend(rows)
        _write_or_print(emit_report(rows, opts["format"]), out_dir,
                        f"{spec.id}.{_FORMAT_EXT[opts['format']]}")
    _write_or_print(emit_report(all_csv_rows, "csv"), out_dir, "summary.csv")
    return 0


def _cmd_gen_data(args) -> int:
    task = TaskKind(args.task)
    seed = args.seed if args.seed is not None else int(os.environ.get("RELBIAS_SEED", 0))
    if task is TaskKind.EQUALITY:
        data = gen_equality_dataset(args.n, seed)
    else:
        data = gen_task_dataset(task, args.n, args.size, seed)
    write_dataset_csv(data, args.out)
    print(f"wrote {args.out} ({len(data)} pairs, n={args.n}, task={task.value})")
    return 0


def _cmd_stats_compare(args) -> int:
    rows_a = parse_report_csv(Path(args.csv_a).read_text(encoding="utf-8"))
    rows_b = parse_report_csv(Path(args.csv_b).read_text(encoding="utf-8"))
    pooled_a = [acc for r in rows_a for acc in r.accuracies]
    pooled_b = [acc for r in rows_b for acc in r.accuracies]
    if len(pooled_a) != len(pooled_b):
        raise ConfigurationError(
            f"cannot pair {len(pooled_a)} vs {len(pooled_b)} pooled accuracies"
        )
    result = wilcoxon_signed_rank(pooled_a, pooled_b)
    name = f"{Path(args.csv_a).stem}_vs_{Path(args.csv_b).stem}"
    print("comparison,W,p,significant")
    print(f"{name},{result.w_statistic!r},{result.p_value!r},{result.p_value < args.alpha}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="relbias",
        description="Identity-relation generalisation experiments for feed-forward networks with DR units.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("list", help="print the experiment catalog").set_defaults(func=_cmd_list)

    def add_run_options(p):
        p.add_argument("--seed", type=int, default=None, help="base seed (default: config file, RELBIAS_SEED, catalog)")
        p.add_argument("--sims", type=int, default=None, help="simulations per grid cell (default 10)")
        p.add_argument("--out", default=None, help="output directory (default: print to stdout)")
        p.add_argument("--format", choices=sorted(_FORMAT_EXT), default=None)
        p.add_argument("--config", default=None, help="key=value config file")
        p.add_argument("--verbose", action="store_true", help="print per-cell progress to stderr")

    p_run = sub.add_parser("run", help="run one experiment")
    p_run.add_argument("experiment")
    add_run_options(p_run)
    p_run.set_defaults(func=_cmd_run)

    p_all = sub.add_parser("run-all", help="run the whole catalog")
    add_run_options(p_all)
    p_all.set_defaults(func=_cmd_run_all)

    p_gen = sub.add_parser("gen-data", help="write a dataset CSV")
    p_gen.add_argument("task", choices=[t.value for t in TaskKind])
    p_gen.add_argument("n", type=int)
    p_gen.add_argument("--out", required=True)
    p_gen.add_argument("--size", type=int, default=10_000, help="pair count for non-equality tasks")
    p_gen.add_argument("--seed", type=int, default=None)
    p_gen.set_defaults(func=_cmd_gen_data)

    p_stats = sub.add_parser("stats", help="statistics over results files")
    stats_sub = p_stats.add_subparsers(dest="stats_command", required=True)
    p_cmp = stats_sub.add_parser("compare", help="Wilcoxon signed-rank test over two results CSVs")
    p_cmp.add_argument("csv_a")
    p_cmp.add_argument("csv_b")
    p_cmp.add_argument("--alpha", type=float, default=0.05)
    p_cmp.set_defaults(func=_cmd_stats_compare)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigurationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (OSError, ValueError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
