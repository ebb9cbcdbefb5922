"""Command-line entry point.

File formats
------------
population CSV  header ``unit_id,prob`` (probabilities summing to an integer n)
                or ``unit_id,size`` together with ``--n`` (pi-ps probabilities;
                units reaching 1 are taken with certainty).
sample CSV      header ``unit_id``, one selected unit per row.  A sidecar
                ``<output>.json`` records method, seed and permutation start.
values CSV      header ``unit_id,<name>``.
matrix CSV      header ``unit_id,<id1>,...,<idN>``; row k starts with the
                k-th id.  Full and symmetric, diagonal = first-order
                probabilities.  Sidecar ``<output>.json`` records provenance.
design JSON     ``{"id1,id2,...": "p/q"}`` over sorted sample tuples.

Exit status: 0 success, 1 invalid input (error JSON on stderr), 2 usage
error, 3 unreadable or unwritable file, 4 internal invariant failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys

import numpy as np

from . import __version__
from .chromy import chromy_sample, randomized_chromy_sample
from .clusters import build_clustered, transition_table
from .errors import CorruptionError, DimensionMismatch, ValidationError
from .estimators import Z_95, estimate
from .frame import DesignParams, build_frame
from .io import (
    IoError,
    fmt,
    read_ids,
    read_matrix,
    read_population,
    read_values,
    sidecar_path,
    write_csv,
    write_json,
)
from .jip import PERMUTATION_AVERAGED, chromy_matrix, monte_carlo_matrix, randomized_matrix
from .oracle import SAMPLERS, enumerate_design
from .pivotal import pivotal_sample
from .simulation import ExperimentConfig, run_experiment

SAMPLE_METHODS = ("chromy", "randomized-chromy", "pivotal")


def _mode(args, default: str) -> str:
    return args.mode or default


def _seed(args) -> int:
    if args.seed is not None:
        return args.seed
    seed = int(np.random.SeedSequence().entropy)
    print(f"seed: {seed}", file=sys.stderr)
    return seed


def _threads(args) -> int:
    return args.threads or os.cpu_count() or 1


def cmd_sample(args) -> None:
    pop = read_population(args.input, _mode(args, "float"), args.n)
    seed = _seed(args)
    start = None
    chosen: list = []
    if pop.params is not None:
        frame = build_frame(pop.params)
        if args.method == "chromy":
            s = chromy_sample(frame, seed)
        elif args.method == "randomized-chromy":
            s = randomized_chromy_sample(frame, seed)
            start = pop.sampled[s.permutation_start - 1]
        else:
            s = pivotal_sample(frame, seed)
        chosen = [pop.sampled[k - 1] for k in s.selected]
    picked = set(chosen) | set(pop.certainty)
    rows = [[u] for u in pop.labels if u in picked]
    write_csv(args.output, ["unit_id"], rows)
    write_json(
        sidecar_path(args.output),
        {
            "method": args.method,
            "seed": seed,
            "permutation_start": start,
            "certainty": list(pop.certainty),
            "n": len(rows),
        },
    )


def _full_matrix(pop, inner: np.ndarray, exact: bool) -> np.ndarray:
    """Embed the matrix of the sampled units; certainty units have pi = 1."""
    N = len(pop.labels)
    pi = pop.full_probs()
    M = np.empty((N, N), dtype=object if exact else np.float64)
    for i in range(N):
        for j in range(N):
            M[i, j] = pi[i] * pi[j]
    pos = {u: i for i, u in enumerate(pop.labels)}
    idx = [pos[u] for u in pop.sampled]
    if idx:
        M[np.ix_(idx, idx)] = inner
    for u in pop.certainty:
        M[pos[u], pos[u]] = pi[pos[u]]
    return M


def cmd_jip(args) -> None:
    mode = _mode(args, "float")
    pop = read_population(args.input, mode, args.n)
    exact = mode == "exact"
    record: dict
    if pop.params is None:
        inner = np.empty((0, 0))
        record = {"provenance": PERMUTATION_AVERAGED, "N": 0}
    elif args.mc is not None:
        seed = _seed(args)
        jm = monte_carlo_matrix(pop.params, args.mc, seed, workers=_threads(args))
        inner, record = jm.values, jm.provenance_record()
        record["seed"] = seed
    elif args.design == "chromy":
        jm = chromy_matrix(build_frame(pop.params))
        inner, record = jm.values, jm.provenance_record()
    else:
        jm = randomized_matrix(pop.params, workers=_threads(args))
        inner, record = jm.values, jm.provenance_record()
    M = _full_matrix(pop, inner, exact and args.mc is None)
    record.update({"design": args.design, "mode": mode, "certainty": list(pop.certainty)})
    labels = list(pop.labels)
    write_csv(args.output, ["unit_id", *labels], ([u, *row] for u, row in zip(labels, M)))
    write_json(sidecar_path(args.output), record)


def cmd_enumerate(args) -> None:
    pop = read_population(args.input, _mode(args, "exact"))
    dist = enumerate_design(args.method, pop.params, args.cap)
    write_json(args.output, dist.to_json(pop.labels))


def cmd_estimate(args) -> None:
    mode = _mode(args, "float")
    labels, M = read_matrix(args.matrix, mode)
    pos = {u: i for i, u in enumerate(labels)}
    sample = read_ids(args.sample)
    values = read_values(args.values, mode)
    missing = [u for u in labels if u not in values]
    if missing:
        raise DimensionMismatch(len(labels), len(labels) - len(missing), "values for matrix units")
    unknown = [u for u in sample if u not in pos]
    if unknown:
        raise ValidationError(f"sampled unit {unknown[0]!r} is not in the matrix")
    probs = tuple(M[i, i] for i in range(len(labels)))
    for u, p in zip(labels, probs):
        if not 0 < p <= 1:
            raise ValidationError(f"diagonal entry of {u!r} is not a probability: {p}")
    params = DesignParams(probs, round(float(sum(probs))), mode)
    y = [values[u] for u in labels]
    rec = estimate([pos[u] + 1 for u in sample], y, params, M, args.z)
    json.dump(rec.to_dict(), sys.stdout)
    sys.stdout.write("\n")


def cmd_simulate(args) -> None:
    try:
        with open(args.config) as fh:
            raw = json.load(fh)
    except OSError as exc:
        raise IoError(f"cannot read {args.config}: {exc.strerror or exc}") from exc
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{args.config}: {exc}") from exc
    try:
        config = ExperimentConfig.from_dict(raw)
    except (TypeError, KeyError) as exc:
        raise ValidationError(f"{args.config}: {exc}") from exc
    rows = run_experiment(config, args.seed)
    header = list(rows[0].as_dict()) if rows else ["label"]
    out = [[("" if v is None else v) for v in r.as_dict().values()] for r in rows]
    write_csv(args.out, header, out)


def cmd_inspect(args) -> None:
    pop = read_population(args.input, _mode(args, "exact"))
    frame = build_frame(pop.params)
    lab = pop.labels
    out: dict = {
        "n": frame.n,
        "cross_border": [lab[k - 1] for k in frame.cross_border],
        "a": [fmt(v) for v in frame.a],
        "b": [fmt(v) for v in frame.b],
    }
    if args.clusters:
        cl = build_clustered(frame)
        tt = transition_table(frame)
        out["clusters"] = [
            {"index": j, "units": [lab[k - 1] for k in members], "phi": fmt(phi)}
            for j, (members, phi) in enumerate(zip(cl.clusters, cl.phi), start=1)
        ]
        out["transition"] = {
            "initial": {str(j): fmt(p) for j, p in tt.initial.items()},
            "rows": {f"{i},{j}": {str(t): fmt(p) for t, p in row.items()} for (i, j), row in tt.rows.items()},
        }
    if args.output:
        write_json(args.output, out)
    else:
        json.dump(out, sys.stdout, indent=2)
        sys.stdout.write("\n")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="chromysamp",
        description="Sequential unequal-probability sampling, joint inclusion probabilities and variance estimation.",
        epilog=__doc__.split("File formats", 1)[1].split("\n", 2)[2],
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("--seed", type=int, help="master seed; drawn from OS entropy and printed when absent")
    arith = parser.add_mutually_exclusive_group()
    arith.add_argument("--rational", dest="mode", action="store_const", const="exact",
                       help="exact rational arithmetic (decimal strings read verbatim)")
    arith.add_argument("--float", dest="mode", action="store_const", const="float", help="IEEE double arithmetic")
    parser.add_argument("--threads", type=int, default=None, help="worker threads (default: all cores)")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sample", help="draw one sample")
    p.add_argument("--method", choices=SAMPLE_METHODS, default="randomized-chromy")
    p.add_argument("--input", required=True, help="population CSV")
    p.add_argument("--output", required=True, help="sample CSV (sidecar written to <output>.json)")
    p.add_argument("--n", type=int, help="sample size for a size column")
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("jip", help="joint inclusion probability matrix")
    how = p.add_mutually_exclusive_group()
    how.add_argument("--exact", action="store_true", help="closed form (default)")
    how.add_argument("--mc", type=int, metavar="DRAWS", help="Monte-Carlo estimate from DRAWS randomized draws")
    p.add_argument("--design", choices=("randomized-chromy", "chromy"), default="randomized-chromy")
    p.add_argument("--input", required=True)
    p.add_argument("--output", required=True)
    p.add_argument("--n", type=int)
    p.set_defaults(func=cmd_jip)

    p = sub.add_parser("enumerate", help="exact design of a small population (rational)")
    p.add_argument("--method", choices=SAMPLERS, default="chromy")
    p.add_argument("--input", required=True)
    p.add_argument("--output", required=True, help="design JSON")
    p.add_argument("--cap", type=int, default=12, help="largest population enumerated")
    p.set_defaults(func=cmd_enumerate)

    p = sub.add_parser("estimate", help="Horvitz-Thompson total, SYG variance and interval (JSON on stdout)")
    p.add_argument("--sample", required=True)
    p.add_argument("--values", required=True)
    p.add_argument("--matrix", required=True)
    p.add_argument("--z", type=float, default=Z_95)
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser(
        "simulate",
        help="replicate study",
        description=(
            "Config JSON keys: population (preset name or object with N, x_law, x_params, "
            "rescale, coefficients, preset), sample_sizes, replicates, seed, z, exact_max_N, "
            "mc_draws, label.  --seed overrides the config seed."
        ),
    )
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True, help="results CSV")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("inspect", help="cross-border units, clusters and transition table (JSON)")
    p.add_argument("--input", required=True)
    p.add_argument("--clusters", action="store_true")
    p.add_argument("--output")
    p.set_defaults(func=cmd_inspect)
    return parser


def _fail(payload: dict, code: int) -> int:
    print(json.dumps(payload), file=sys.stderr)
    return code


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        args.func(args)
    except IoError as exc:
        return _fail(exc.to_dict(), 3)
    except ValidationError as exc:
        return _fail(exc.to_dict(), 1)
    except CorruptionError as exc:
        return _fail(exc.to_dict(), 4)
    return 0


if __name__ == "__main__":
    sys.exit(main())
