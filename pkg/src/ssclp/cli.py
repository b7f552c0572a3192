"""Command-line interface.

Exit status: 0 on full success, 2 when some trials or columns failed, 1 on
configuration or input errors.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import bench, dataio
from . import certify as cert
from .complete import SVTParams, complete_by_cluster
from .exceptions import ParameterError
from .kernels import BACKEND
from .metrics import clustering_error, completion_error
from .model import (GenerationMode, ObservedDataset, generate_ensemble,
                    sample_case1, sample_case2, sample_case3, zero_fill)
from .selfrep import (ALGORITHMS, SSC_EWZF, SSC_LP, affinity_from_coefficients,
                      ssc_ewzf_coefficients, ssc_lp_coefficients, tsc_affinity)
from .spectral import spectral_cluster

EXIT_OK, EXIT_CONFIG, EXIT_PARTIAL = 0, 1, 2
log = logging.getLogger("ssclp")


def _cmd_generate(args):
    ens, X = generate_ensemble(args.n, args.d, args.L, args.N_per, args.mode, args.seed)
    N = X.shape[1]
    if args.case == 1:
        pattern = sample_case1(args.n, N, args.p)
    elif args.case == 2:
        pattern = sample_case2(args.n, N, args.d, args.seed)
    else:
        pattern = sample_case3(args.n, N, args.p, args.seed)
    ds = zero_fill(X, pattern, ens.labels,
                   {"L": args.L, "d": args.d, "counts": ens.counts, "seed": args.seed,
                    "mode": GenerationMode(args.mode).value, "case": args.case,
                    "p": args.p})
    dataio.write_dataset(args.out, ds)
    dataio.write_ensemble(Path(args.out) / "ensemble.npz", ens)
    print(f"wrote {args.out}: n={args.n} N={N} observed={int(ds.mask.sum())}")
    return EXIT_OK


def _num_clusters(args, ds):
    L = args.L if args.L is not None else ds.meta.get("L")
    if L is None:
        raise ParameterError("number of clusters unknown: pass --L")
    return int(L)


def _cmd_cluster(args):
    ds = dataio.read_dataset(args.dataset)
    L = _num_clusters(args, ds)
    failed = 0
    if args.algorithm == SSC_LP:
        coeffs = ssc_lp_coefficients(ds, normalize_columns=args.normalize)
    elif args.algorithm == SSC_EWZF:
        coeffs = ssc_ewzf_coefficients(ds, alpha=args.alpha)
    else:
        coeffs = None
    if coeffs is None:
        W, q, notes = tsc_affinity(ds, q=args.q)
        for note in notes:
            log.warning(note)
    else:
        failed = coeffs.n_failed
        W = affinity_from_coefficients(coeffs)
        if args.coeffs_dir:
            dataio.write_coefficients(args.coeffs_dir, coeffs)
    assign = spectral_cluster(W, L, seed=args.seed, kmeans_restarts=args.kmeans_restarts)
    dataio.write_labels(args.out, assign.labels)
    msg = f"wrote {args.out}: {L} clusters"
    if ds.true_labels is not None:
        msg += f", clustering_error={clustering_error(assign.labels, ds.true_labels):.6g}"
    if assign.flags:
        msg += " flags=" + ",".join(assign.flags)
    if failed:
        msg += f", {failed} columns failed"
    print(msg)
    return EXIT_PARTIAL if failed else EXIT_OK


def _cmd_complete(args):
    ds = dataio.read_dataset(args.dataset)
    labels = dataio.read_labels(args.labels)
    params = SVTParams(args.tau, args.delta, args.svt_tol, args.max_iter)
    res = complete_by_cluster(ds, labels, args.d or ds.meta.get("d"), params)
    out = ObservedDataset(res.recovered, ds.pattern, ds.full_matrix, ds.true_labels,
                          dict(ds.meta))
    out.pattern = ds.pattern.from_matrix(np.ones_like(ds.mask), ds.pattern.case_tag)
    dataio.write_dataset(args.out, out, {
        "completed_from": str(args.dataset),
        "svt_iterations": {str(k): v for k, v in res.iterations.items()},
        "svt_residuals": {str(k): v for k, v in res.residuals.items()},
        "flags": res.flags})
    msg = f"wrote {args.out}"
    if ds.full_matrix is not None:
        msg += f": completion_error={completion_error(res.recovered, ds.full_matrix):.6g}"
    print(msg)
    for f in res.flags:
        log.warning(f)
    return EXIT_PARTIAL if res.flags else EXIT_OK


def _print_table(case, table):
    print(f"case {case}: certified&correct={table[(True, True)]} "
          f"certified&incorrect={table[(True, False)]} "
          f"uncertified&correct={table[(False, True)]} "
          f"uncertified&incorrect={table[(False, False)]}")


def _cmd_certify(args):
    if args.config:
        cfg = bench.CertifyConfig.from_json(args.config)
        out = args.out or cfg.output_dir
        cases = [args.case] if args.case else [1, 2, 3]
        bad = 0
        for case in cases:
            table, records = bench.run_certify(cfg, case)
            bench.write_certify(out, case, table, records)
            _print_table(case, table)
            bad += table[(True, False)]
        return EXIT_PARTIAL if bad else EXIT_OK
    if not args.dataset or not args.case:
        raise ParameterError("certify needs a dataset directory and --case, or --config")
    ds = dataio.read_dataset(args.dataset)
    npz = Path(args.dataset) / "ensemble.npz"
    if not npz.exists():
        raise ParameterError(f"{npz} not found: certificates need the ground-truth ensemble")
    ens = dataio.read_ensemble(npz)
    points = None if args.points is None else range(min(args.points, ds.N))
    report = cert.certify_points(ens, ds.pattern, ds, args.case, points)
    text = report.to_text()
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    counts = report.counts()
    print(" ".join(f"{v.value}={c}" for v, c in counts.items()),
          file=sys.stderr if not args.out else sys.stdout)
    return EXIT_OK


def _cmd_sweep(args):
    cfg = bench.ExperimentConfig.from_json(args.config)
    threads = args.threads if args.threads is not None else bench.worker_count()
    rows = bench.run_sweep(cfg, args.out, threads)
    bad = [r for r in rows if r["status"] != "OK"]
    out = args.out or cfg.output_dir
    print(f"wrote {out}/results.csv: {len(rows)} rows, {len(bad)} not OK "
          f"(backend {BACKEND}, {threads} workers)")
    return EXIT_PARTIAL if bad else EXIT_OK


def build_parser():
    p = argparse.ArgumentParser(prog="ssclp", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="write a synthetic dataset directory")
    g.add_argument("--out", required=True)
    g.add_argument("--n", type=int, default=50)
    g.add_argument("--d", type=int, default=3)
    g.add_argument("--L", type=int, default=3)
    g.add_argument("--N-per", dest="N_per", type=int, default=150)
    g.add_argument("--mode", choices=[m.value for m in GenerationMode], default="gaussian")
    g.add_argument("--case", type=int, choices=(1, 2, 3), default=3)
    g.add_argument("--p", type=float, default=0.5)
    g.add_argument("--seed", type=int, default=0)
    g.set_defaults(func=_cmd_generate)

    c = sub.add_parser("cluster", help="cluster a dataset, write labels CSV")
    c.add_argument("dataset")
    c.add_argument("--out", required=True)
    c.add_argument("--algorithm", choices=ALGORITHMS, default=SSC_LP)
    c.add_argument("--L", type=int)
    c.add_argument("--alpha", type=float, default=7.34)
    c.add_argument("--normalize", action="store_true",
                   help="scale each SSC-LP problem to unit columns")
    c.add_argument("--q", type=int, help="TSC neighbours (default round(sqrt(N log N)))")
    c.add_argument("--seed", type=int, default=0)
    c.add_argument("--kmeans-restarts", type=int, default=20)
    c.add_argument("--coeffs-dir", help="also write coeffs.csv and coeffs_meta.json here")
    c.set_defaults(func=_cmd_cluster)

    m = sub.add_parser("complete", help="per-cluster SVT completion")
    m.add_argument("dataset")
    m.add_argument("--labels", required=True)
    m.add_argument("--out", required=True)
    m.add_argument("--d", type=int)
    m.add_argument("--tau", type=float)
    m.add_argument("--delta", type=float)
    m.add_argument("--svt-tol", type=float, default=1e-4)
    m.add_argument("--max-iter", type=int, default=500)
    m.set_defaults(func=_cmd_complete)

    r = sub.add_parser("certify", help="check the sufficient conditions point by point")
    r.add_argument("dataset", nargs="?")
    r.add_argument("--case", type=int, choices=(1, 2, 3))
    r.add_argument("--points", type=int, help="only the first k points")
    r.add_argument("--config", help="JSON certify config: tabulate against SSC-LP")
    r.add_argument("--out")
    r.set_defaults(func=_cmd_certify)

    s = sub.add_parser("sweep", help="run a sampling-ratio sweep from a JSON config")
    s.add_argument("config")
    s.add_argument("--out")
    s.add_argument("--threads", type=int, help="overrides UOS_THREADS")
    s.set_defaults(func=_cmd_sweep)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (ParameterError, FileNotFoundError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
