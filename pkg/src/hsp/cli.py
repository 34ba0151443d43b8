"""Command-line entry point: ``hsp fit|simulate|metrics|summarize|tune``.

Exit codes: 0 success, 2 usage or configuration error, 3 data error,
4 internal failure.  Output goes to ``--out``, else the config's ``out``
key, else ``$HSP_OUTPUT_DIR``, else ``./hsp_out``.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .errors import DataFormatError, DegenerateDataError, HSPError, InvalidArgumentError
from .io import (
    read_config, read_data_matrix, read_partitions, read_trace, write_coclustering,
    write_data_matrix, write_json, write_partitions, write_sensitivity, write_trace,
)
from .metrics import (
    adjusted_rand_index, coclustering_matrix, symmetrized_f1, variation_of_information,
    vi_point_estimate,
)
from .model import standardize
from .sampler import PartitionTrace, run_chain
from .simgen import generate
from .tuning import GridPointError, GridSpec, heuristic_select

log = logging.getLogger("hsp")

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_INTERNAL = 0, 2, 3, 4
OUTPUT_ENV = "HSP_OUTPUT_DIR"
CONDITIONING_RULE = (
    "condition co-clustering per estimated subject group: pi_j draws pooled over "
    "subjects j assigned to the group by the VI point estimate of c"
)


def _out_dir(args, cfg_out=None) -> Path:
    out = args.out or cfg_out or os.environ.get(OUTPUT_ENV) or "hsp_out"
    out = Path(out)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise InvalidArgumentError(f"cannot create output directory {out}: {exc.strerror}")
    return out


def write_summaries(trace: PartitionTrace, out: Path, subject_names=None,
                    condition_names=None) -> dict:
    """VI point estimates and co-clustering CSVs for a trace. Returns a summary dict."""
    J, I = trace.n_subjects, trace.n_conditions
    subject_names = subject_names or [f"subject_{j + 1}" for j in range(J)]
    condition_names = condition_names or [f"condition_{i + 1}" for i in range(I)]
    c_hat = vi_point_estimate(trace.subject)
    pis = [vi_point_estimate(trace.condition[:, j]) for j in range(J)]
    write_partitions([c_hat], out / "subject_estimate.txt")
    write_partitions(pis, out / "condition_estimates.txt")
    write_coclustering(coclustering_matrix(trace.subject, subject_names),
                       out / "subject_coclustering.csv")
    groups = np.asarray(c_hat.labels)
    files = []
    for k in range(1, c_hat.num_clusters + 1):
        members = np.flatnonzero(groups == k)
        pooled = trace.condition[:, members, :].reshape(-1, I)
        name = f"condition_coclustering_group_{k}.csv"
        write_coclustering(coclustering_matrix(pooled, condition_names), out / name)
        files.append(name)
    return {
        "subject_estimate": list(c_hat.labels),
        "n_groups": c_hat.num_clusters,
        "group_files": files,
        "conditioning_rule": CONDITIONING_RULE,
    }


def cmd_fit(args) -> int:
    cfg = read_config(args.config)
    if args.seed is not None:
        cfg.seed = args.seed
    if cfg.data is None:
        raise InvalidArgumentError("config must set 'data'")
    raw = read_data_matrix(cfg.data)
    data = standardize(raw) if cfg.standardize else raw
    h = cfg.hyperparams(data)
    sc = cfg.sampler_config()
    out = _out_dir(args, cfg.out)
    log.info("fitting %d conditions x %d subjects, %d iterations", *raw.values.shape,
             sc.iterations)
    trace = run_chain(data, h, sc, progress=_progress(sc.iterations) if args.verbose else None)
    write_trace(trace, out / "trace.txt")
    summary = write_summaries(trace, out, data.subject_names, data.condition_names)
    write_json({
        "seed": cfg.seed,
        "config": cfg.as_dict(),
        "hyperparameters": {
            "tau": h.tau, "rho": h.rho, "lambda": h.lam, "alpha0": h.alpha0,
            "beta0": h.beta0, "beta": h.beta, "a0": h.a0.tolist(), "b0": h.b0.tolist(),
            "d0": h.d0.tolist(), "e0": h.e0.tolist(),
            "c0": list(h.c0.labels), "nu0": list(h.nu0.labels),
        },
        "kept_count": trace.kept_count,
        "acceptance": trace.acceptance,
        "summary": summary,
    }, out / "run.json")
    # wall time lives apart so run.json stays byte-identical across reruns
    write_json({"wall_time_seconds": trace.wall_time}, out / "timing.json")
    print(f"wrote {trace.kept_count} draws and summaries to {out}")
    return EXIT_OK


def _progress(total):
    step = max(total // 20, 1)

    def report(it):
        if it % step == 0 or it == total:
            log.info("iteration %d / %d", it, total)
    return report


def cmd_simulate(args) -> int:
    if args.replicates < 1:
        raise InvalidArgumentError("--replicates must be at least 1")
    out = _out_dir(args)
    for r in range(1, args.replicates + 1):
        rng = np.random.default_rng(np.random.SeedSequence(args.seed, spawn_key=(r,)))
        ds = generate(args.scenario, rng, seed=args.seed)
        stem = f"dataset_{r:03d}"
        write_data_matrix(ds.data, out / f"{stem}.csv")
        write_json({
            "scenario": ds.scenario,
            "seed": args.seed,
            "replicate": r,
            "true_subject_partition": list(ds.true_subject_partition.labels),
            "true_condition_partitions": [list(p.labels) for p in ds.true_condition_partitions],
            "metadata": ds.metadata,
        }, out / f"{stem}.json")
    print(f"wrote {args.replicates} {args.scenario} datasets to {out}")
    return EXIT_OK


def cmd_metrics(args) -> int:
    a = read_partitions(args.a)
    b = read_partitions(args.b)
    if len(a) != len(b):
        raise DataFormatError(f"files hold {len(a)} and {len(b)} partitions")
    if a[0].n_items != b[0].n_items:
        raise DataFormatError(f"partitions have {a[0].n_items} and {b[0].n_items} items")
    print("ari,f1,vi")
    for p, q in zip(a, b):
        vals = (adjusted_rand_index(p, q), symmetrized_f1(p, q), variation_of_information(p, q))
        print(",".join(format(v, ".17g") for v in vals))
    return EXIT_OK


def cmd_summarize(args) -> int:
    trace = read_trace(args.trace)
    out = _out_dir(args)
    summary = write_summaries(trace, out)
    write_json(summary, out / "summary.json")
    print(f"subject estimate: {','.join(map(str, summary['subject_estimate']))}")
    return EXIT_OK


def _parse_grid(text, name):
    try:
        return tuple(float(v) for v in text.split(",") if v.strip())
    except ValueError as exc:
        raise InvalidArgumentError(f"bad grid for {name}: {text!r}") from exc


def _read_grid_file(path):
    grids = {}
    try:
        lines = Path(path).read_text().splitlines()
    except OSError as exc:
        raise InvalidArgumentError(f"cannot read grid file {path}: {exc.strerror}")
    for line in lines:
        line = line.split("#", 1)[0].strip()
        if line:
            key, _, vals = line.partition("=")
            grids[key.strip()] = _parse_grid(vals, key.strip())
    return grids


def cmd_tune(args) -> int:
    cfg = read_config(args.config)
    if args.seed is not None:
        cfg.seed = args.seed
    if cfg.data is None:
        raise InvalidArgumentError("config must set 'data'")
    grids = _read_grid_file(args.grid_file) if args.grid_file else {}
    for key, flag in (("lambda", args.grid_lambda), ("rho", args.grid_rho),
                      ("tau", args.grid_tau)):
        if flag is not None:
            grids[key] = _parse_grid(flag, key)
    grids = {("lam" if k == "lambda" else k): v for k, v in grids.items()}
    missing = [k for k in ("lam", "rho", "tau") if k not in grids]
    if missing:
        raise InvalidArgumentError(f"no grid given for {', '.join(missing)}")
    specs = {k: GridSpec(k, v, iterations=args.grid_iterations) for k, v in grids.items()}
    raw = read_data_matrix(cfg.data)
    data = standardize(raw) if cfg.standardize else raw
    h = cfg.hyperparams(data)
    out = _out_dir(args, cfg.out)
    rng = np.random.default_rng(np.random.SeedSequence(cfg.seed, spawn_key=(0xD,)))
    sel = heuristic_select(data, h, specs, cfg.sampler_config(), rng, rho=args.rho,
                           threshold=args.threshold)
    names = {"lam": "lambda", "rho": "rho", "tau": "tau"}
    for key, rows in sel.tables.items():
        write_sensitivity(rows, names[key], out / f"sensitivity_{names[key]}.csv")
    write_json({"lambda": sel.lam, "rho": sel.rho, "tau": sel.tau,
                "threshold": args.threshold, "seed": cfg.seed}, out / "selection.json")
    print(f"selected lambda={sel.lam:g} rho={sel.rho:g} tau={sel.tau:g}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="hsp", description="Batch interface to the HSP model.")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    ap.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fit", help="run the sampler on a data matrix")
    p.add_argument("--config", required=True, help="flat key = value run configuration")
    p.add_argument("--seed", type=int, help="override the config seed")
    p.add_argument("--out", help="output directory")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("simulate", help="write synthetic datasets with truth sidecars")
    p.add_argument("--scenario", required=True,
                   help="sim1a, sim1b:<level>, sim2, large or shared")
    p.add_argument("--replicates", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", help="output directory")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("metrics", help="ARI, F1 and VI between two partition files")
    p.add_argument("a")
    p.add_argument("b")
    p.set_defaults(func=cmd_metrics)

    p = sub.add_parser("summarize", help="point estimates and co-clustering from a trace")
    p.add_argument("trace")
    p.add_argument("--out", help="output directory")
    p.set_defaults(func=cmd_summarize)

    p = sub.add_parser("tune", help="step-by-step shrinkage parameter selection")
    p.add_argument("--config", required=True)
    p.add_argument("--grid-lambda", help="comma-separated lambda values")
    p.add_argument("--grid-rho", help="comma-separated rho values")
    p.add_argument("--grid-tau", help="comma-separated tau values")
    p.add_argument("--grid-file", help="file with lambda=..., rho=..., tau=... lines")
    p.add_argument("--grid-iterations", type=int, help="iterations per grid point")
    p.add_argument("--rho", type=float, help="fix the starting rho instead of drawing it")
    p.add_argument("--threshold", type=float, default=0.02, help="plateau threshold")
    p.add_argument("--seed", type=int)
    p.add_argument("--out", help="output directory")
    p.set_defaults(func=cmd_tune)
    return ap


def _exit_code(exc) -> int:
    if isinstance(exc, GridPointError) and exc.__cause__ is not None:
        return _exit_code(exc.__cause__)
    if isinstance(exc, (DataFormatError, DegenerateDataError)):
        return EXIT_DATA
    if isinstance(exc, InvalidArgumentError):
        return EXIT_USAGE
    return EXIT_INTERNAL


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except HSPError as exc:
        print(f"hsp {args.command}: error: {exc}", file=sys.stderr)
        return _exit_code(exc)
    except Exception as exc:  # noqa: BLE001
        log.exception("internal error")
        print(f"hsp {args.command}: internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
