"""``cndiversity`` command line front end.

Each subcommand reads files, writes files and leaves
``<prefix>.<command>.meta.json`` next to its outputs, recording the resolved
configuration, the tool version and the list of files produced. Domain failures print a single line
``error: <ExceptionClass>: <message>`` to stderr and exit with status 1.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import __version__
from ._kernels import resolve_jobs
from .canon import MAX_K, build_catalog
from .census import CensusMode, CensusTable, run_census
from .exceptions import DiversityError
from .graph import (CleaningPolicy, DirectedMode, load_edge_list, network_stats,
                    write_edge_list, write_id_map)
from .inference import (FEATURES, InferenceDataset, evaluate_predictors, fit_rows,
                        regression_rows, write_evaluation_csv, write_pr_curves_csv,
                        write_regression_csv)
from .randgraph import (FAMILIES, GeneratorSpec, generate, reference_manifest, read_manifest,
                        write_manifest)
from .signature import build_signature
from .superfamily import (DISTANCES, PROFILE_KINDS, ProfileMatrix, baseline_profile,
                          correlation_matrix, flat_clusters, heatmap_svg, impute_correlations,
                          profile_labels, ward_cluster, write_profile_csv)

log = logging.getLogger("cndiversity")


def _write_meta(prefix, args, outputs, **extra):
    config = {k: v for k, v in vars(args).items() if k != "func"}
    doc = {"tool": "cndiversity", "version": __version__, "command": args.command,
           "config": config, "outputs": [str(p) for p in outputs]}
    doc.update(extra)
    path = Path(f"{prefix}.{args.command}.meta.json")
    path.write_text(json.dumps(doc, indent=2, default=str) + "\n")
    return path


def _policy(args):
    return CleaningPolicy(DirectedMode(args.directed_mode), keep_lcc=not args.no_lcc)


def _add_policy(p, default_lcc=True):
    p.add_argument("--directed-mode", default="already_undirected",
                   choices=[m.value for m in DirectedMode])
    p.add_argument("--no-lcc", action="store_true", default=not default_lcc,
                   help="keep every component instead of the largest one")


def _ensure_parent(prefix):
    Path(str(prefix)).parent.mkdir(parents=True, exist_ok=True)


# -- subcommands ------------------------------------------------------------

def cmd_stats(args):
    g = load_edge_list(args.edges, _policy(args))
    st = network_stats(g, args.diameter, n_jobs=args.threads)
    _ensure_parent(args.out)
    outs = [Path(args.out + ".stats.csv"), Path(args.out + ".stats.json")]
    st.to_csv(outs[0])
    st.to_json(outs[1])
    _write_meta(args.out, args, outs)


def cmd_clean(args):
    g = load_edge_list(args.edges, _policy(args))
    _ensure_parent(args.out)
    outs = [Path(args.out + ".edges"), Path(args.out + ".ids")]
    write_edge_list(g, outs[0])
    write_id_map(g, outs[1])
    _write_meta(args.out, args, outs, node_count=g.node_count, edge_count=g.edge_count)


def cmd_census(args):
    g = load_edge_list(args.edges, _policy(args))
    if args.mode == "exact":
        mode = CensusMode.exact()
    else:
        if args.seed is None:
            raise ValueError("node_sampled census needs --seed")
        mode = CensusMode.node_sampled(args.rate, args.seed)
    census = run_census(g, build_catalog(args.cap), mode, n_jobs=args.threads)
    _ensure_parent(args.out)
    census.to_files(args.out, {"source": str(args.edges), "version": __version__})
    _write_meta(args.out, args, [args.out + ".census.csv", args.out + ".census.json"],
                catalog_version=census.catalog_version)


def cmd_signature(args):
    census = CensusTable.from_files(args.census)
    sig = build_signature(census, args.k_min, args.k_max, args.confidence)
    _ensure_parent(args.out)
    outs = [args.out + ".signature.csv", args.out + ".signature.json"]
    sig.to_csv(outs[0])
    sig.to_json(outs[1], {"catalog_version": census.catalog_version})
    _write_meta(args.out, args, outs)


def cmd_compare(args):
    profiles = ProfileMatrix.from_directory(args.directory, args.pattern)
    names = profiles.network_names
    corr = correlation_matrix(profiles)
    filled, n_imputed = impute_correlations(corr)
    dend = ward_cluster(filled, args.distance)
    k = min(args.clusters, len(names))
    if k != args.clusters:
        log.warning("only %d networks; using %d clusters", len(names), k)
    labels = flat_clusters(dend, k)
    _ensure_parent(args.out)

    outs = [Path(args.out + ".corr.csv"), Path(args.out + ".merges.csv"),
            Path(args.out + ".clusters.csv"), Path(args.out + ".leaf_order.txt")]
    with open(outs[0], "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["network", *names])
        for name, row in zip(names, corr):
            w.writerow([name, *("" if np.isnan(r) else repr(float(r)) for r in row)])
    dend.to_csv(outs[1])
    with open(outs[2], "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["network", "cluster"])
        for name, lab in zip(names, labels):
            w.writerow([name, int(lab)])
    outs[3].write_text("".join(names[i] + "\n" for i in dend.leaf_order))
    if args.svg:
        svg = Path(args.out + ".heatmap.svg")
        svg.write_text(heatmap_svg(corr, names, dend.leaf_order))
        outs.append(svg)
    _write_meta(args.out, args, outs, kind=profiles.kind, n_imputed=n_imputed,
                imputation="symmetric_column_mean",
                clusters_used=k)


def cmd_baselines(args):
    g = load_edge_list(args.edges, _policy(args))
    kinds = PROFILE_KINDS[1:] if args.kinds == ["all"] else args.kinds
    census = None
    if "bag_of_cns" in kinds:
        census = run_census(g, build_catalog(1), cap=1, n_jobs=args.threads)
    _ensure_parent(args.out)
    outs = []
    for kind in kinds:
        vec = baseline_profile(g, census, kind, args.cap, args.threads)
        path = Path(f"{args.out}.{kind}.profile.csv")
        write_profile_csv(path, kind, vec, profile_labels(kind, args.cap))
        outs.append(path)
    _write_meta(args.out, args, outs)


def cmd_infer(args):
    census = CensusTable.from_files(args.census)
    rows = regression_rows(census, k_min=args.k_min, k_max=args.k_max, response=args.response)
    diversity = fit_rows(rows, FEATURES, args.weighted)
    homophily = fit_rows(rows, ("cn",), args.weighted)
    dataset = InferenceDataset.from_census(census, args.k_min, args.k_max)
    reports = evaluate_predictors(None, dataset, diversity)
    _ensure_parent(args.out)
    outs = [args.out + ".regression.csv", args.out + ".evaluation.csv",
            args.out + ".pr_curves.csv"]
    write_regression_csv(outs[0], diversity, homophily)
    write_evaluation_csv(outs[1], reports)
    write_pr_curves_csv(outs[2], reports)
    _write_meta(args.out, args, outs, catalog_version=census.catalog_version)


def _spec_from_args(args):
    if args.family is None:
        raise ValueError("give --family or --manifest")
    if args.seed is None:
        raise ValueError("generate needs an explicit --seed")
    if args.family == "er":
        return GeneratorSpec.er(args.n, args.p, args.seed)
    if args.family == "ba":
        return GeneratorSpec.ba(args.n, args.m, args.seed)
    return GeneratorSpec.ws(args.n, args.k, args.beta, args.seed)


def cmd_generate(args):
    if args.manifest == "builtin":
        specs = reference_manifest(args.n or 1_000_000, args.seed or 0)
    elif args.manifest:
        specs = read_manifest(args.manifest)
    else:
        specs = [_spec_from_args(args)]
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    outs = []
    for spec in specs:
        path = out_dir / f"{spec.name}.edges"
        write_edge_list(generate(spec), path)
        outs.append(path)
        log.info("wrote %s", path)
    write_manifest(specs, out_dir / "manifest.json")
    _write_meta(out_dir / "run", args, outs, specs=[s.to_dict() for s in specs])


def cmd_catalog(args):
    catalog = build_catalog(args.max_k)
    text = catalog.to_csv()
    if args.out is None:
        sys.stdout.write(text)
        return
    _ensure_parent(args.out)
    Path(args.out).write_text(text)
    _write_meta(args.out, args, [args.out], catalog_version=catalog.version())


# -- parser -----------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cndiversity",
        description="Structural diversity of common neighborhoods in undirected networks.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--log-level", default="WARNING",
                        choices=["DEBUG", "INFO", "WARNING", "ERROR"])
    parser.add_argument("--threads", type=int, default=None,
                        help="worker threads (default: $CNDIVERSITY_THREADS or all cores)")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    p = sub.add_parser("stats", help="summary statistics of an edge list")
    p.add_argument("edges")
    p.add_argument("--out", required=True, help="output prefix")
    p.add_argument("--diameter", default="exact",
                   choices=["exact", "double_sweep_lower_bound", "skip"])
    _add_policy(p)
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("clean", help="clean an edge list and write it with dense ids")
    p.add_argument("edges")
    p.add_argument("--out", required=True, help="output prefix")
    _add_policy(p)
    p.set_defaults(func=cmd_clean)

    p = sub.add_parser("census", help="common-neighborhood census of a cleaned graph")
    p.add_argument("edges")
    p.add_argument("--out", required=True, help="output prefix")
    p.add_argument("--cap", type=int, default=MAX_K, choices=range(1, MAX_K + 1),
                   metavar=f"1..{MAX_K}")
    p.add_argument("--mode", default="exact", choices=["exact", "node_sampled"])
    p.add_argument("--rate", type=float, default=1.0)
    p.add_argument("--seed", type=int, default=None)
    _add_policy(p, default_lcc=False)
    p.set_defaults(func=cmd_census)

    p = sub.add_parser("signature", help="diversity signature from a census")
    p.add_argument("census", help="census prefix or .census.csv path")
    p.add_argument("--out", required=True, help="output prefix")
    p.add_argument("--k-min", type=int, default=2)
    p.add_argument("--k-max", type=int, default=4)
    p.add_argument("--confidence", type=float, default=0.95)
    p.set_defaults(func=cmd_signature)

    p = sub.add_parser("compare", help="correlate and cluster a directory of profiles")
    p.add_argument("directory")
    p.add_argument("--out", required=True, help="output prefix")
    p.add_argument("--pattern", default="*.csv")
    p.add_argument("--clusters", type=int, default=4)
    p.add_argument("--distance", default="one_minus_r", choices=DISTANCES)
    p.add_argument("--svg", action="store_true", help="also write a heatmap")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("baselines", help="baseline comparison profiles of a graph")
    p.add_argument("edges")
    p.add_argument("--out", required=True, help="output prefix")
    p.add_argument("--kinds", nargs="+", default=["all"],
                   choices=["all", *PROFILE_KINDS[1:]])
    p.add_argument("--cap", type=int, default=1024)
    _add_policy(p, default_lcc=False)
    p.set_defaults(func=cmd_baselines)

    p = sub.add_parser("infer", help="regression and link-inference tables from a census")
    p.add_argument("census", help="census prefix or .census.csv path")
    p.add_argument("--out", required=True, help="output prefix")
    p.add_argument("--k-min", type=int, default=2)
    p.add_argument("--k-max", type=int, default=6)
    p.add_argument("--response", default="relative_rate", choices=["rate", "relative_rate"])
    p.add_argument("--weighted", action="store_true", help="weight classes by pair count")
    p.set_defaults(func=cmd_infer)

    p = sub.add_parser("generate", help="seeded random graphs")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--family", choices=FAMILIES)
    p.add_argument("--n", type=int)
    p.add_argument("--p", type=float)
    p.add_argument("--m", type=int)
    p.add_argument("--k", type=int)
    p.add_argument("--beta", type=float)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--manifest", default=None,
                   help="JSON manifest path, or 'builtin' for the 32-graph reference grid")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("catalog", help="dump the isomorphism class catalog as CSV")
    p.add_argument("--max-k", type=int, default=MAX_K, choices=range(1, MAX_K + 1),
                   metavar=f"1..{MAX_K}")
    p.add_argument("--out", default=None, help="CSV path (default: stdout)")
    p.set_defaults(func=cmd_catalog)
    return parser


def dispatch(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=args.log_level, format="%(levelname)s %(message)s")
    args.threads = resolve_jobs(args.threads)
    try:
        args.func(args)
    except (DiversityError, ValueError, OSError) as exc:
        msg = " ".join(str(exc).split())
        print(f"error: {type(exc).__name__}: {msg}", file=sys.stderr)
        return 1
    return 0


def main(argv=None):
    sys.exit(dispatch(argv))


if __name__ == "__main__":
    main()
