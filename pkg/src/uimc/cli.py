"""Command-line harness: synthesize data, apply masks, run methods, evaluate.

Subcommands:
  synth  write a synthetic multi-view dataset (manifest + CSVs + labels)
  mask   apply per-view missingness to a dataset and write the masked files
  run    run selected methods, write metrics, traces, figures and a summary
  eval   score a predicted labeling against ground truth
"""

import argparse
import json
import sys
from dataclasses import fields
from pathlib import Path

import numpy as np

from . import metrics
from .dataset import (
    MaskSpec,
    apply_mask,
    load_dataset,
    load_mask_spec,
    save_dataset,
    save_incomplete,
)
from .experiment import ExperimentSpec, resolve_rates, run_experiment
from .solver import SolverConfig
from .synth import make_synthetic

_CONFIG_FLOATS = ("alpha", "beta", "eta", "gamma", "theta0", "phi", "theta_max",
                  "rel_tol", "inner_tol", "l21_eps", "mu_strong", "mu_weak", "mu_neutral")
_CONFIG_INTS = ("k_exp", "max_iters", "seed", "max_inner_iters", "knn_neighbors")


def load_solver_config(path=None, overrides=None):
    """Build a SolverConfig from an optional key-value file plus overrides.

    The file is JSON or flat ``key = value`` lines (# comments allowed);
    flag overrides take precedence over file values.
    """
    values = {}
    if path:
        text = Path(path).read_text()
        try:
            doc = json.loads(text)
        except json.JSONDecodeError:
            doc = {}
            for line in text.splitlines():
                line = line.split("#", 1)[0].strip()
                if not line:
                    continue
                if "=" not in line:
                    raise ValueError(f"bad config line: {line!r}")
                key, raw = (part.strip() for part in line.split("=", 1))
                doc[key] = raw.strip("\"'")
        known = {f.name for f in fields(SolverConfig)}
        for key, raw in doc.items():
            if key not in known:
                raise ValueError(f"unknown solver config key '{key}'")
            values[key] = raw
    if overrides:
        values.update({k: v for k, v in overrides.items() if v is not None})
    cast = {}
    for key, raw in values.items():
        if key in _CONFIG_FLOATS:
            cast[key] = float(raw)
        elif key in _CONFIG_INTS:
            cast[key] = int(raw)
        elif key == "normalize_columns":
            cast[key] = raw if isinstance(raw, bool) else str(raw).lower() in ("1", "true", "yes")
        else:
            cast[key] = raw
    return SolverConfig(**cast)


def _parse_floats(text):
    return tuple(float(x) for x in text.split(","))


def _parse_ints(text):
    return tuple(int(x) for x in text.split(","))


def cmd_synth(args):
    data = make_synthetic(
        m=args.m,
        c=args.c,
        dims=_parse_ints(args.dims),
        noise=args.noise,
        seed=args.seed,
        separation=args.separation,
    )
    manifest = save_dataset(data, args.out, name=args.name)
    print(manifest)
    return 0


def _mask_spec_from_args(args, n_views=None):
    if args.mask_file:
        return load_mask_spec(args.mask_file, n_views)
    if args.rates:
        rates = _parse_floats(args.rates)
    elif args.multipliers:
        if args.per is None:
            raise ValueError("--multipliers requires --per")
        rates = resolve_rates(_parse_floats(args.multipliers), args.per)
    else:
        raise ValueError("give --rates, --multipliers/--per, or --mask-file")
    return MaskSpec(rates=rates, seed=args.mask_seed)


def cmd_mask(args):
    data = load_dataset(args.manifest)
    spec = _mask_spec_from_args(args, data.n_views)
    if isinstance(spec, MaskSpec):
        incomplete = apply_mask(data, spec)
    else:
        from .dataset import mask_from_presented

        incomplete = mask_from_presented(data, spec)
    manifest = save_incomplete(incomplete, args.out, name=args.name)
    print(manifest)
    return 0


def cmd_run(args):
    overrides = {
        "alpha": args.alpha, "beta": args.beta, "eta": args.eta,
        "gamma": args.gamma, "theta0": args.theta0, "theta_max": args.theta_max,
        "max_iters": args.max_iters, "rel_tol": args.rel_tol,
        "q2_update": args.q2_update, "q2_row_sum": args.q2_row_sum,
    }
    config = load_solver_config(args.config, overrides)
    synth = None
    if args.synth:
        synth = {}
        for piece in args.synth.split(","):
            key, raw = piece.split("=", 1)
            key = key.strip()
            if key == "dims":
                synth[key] = tuple(int(x) for x in raw.split("x"))
            elif key in ("m", "c", "seed"):
                synth[key] = int(raw)
            else:
                synth[key] = float(raw)
    mask = None
    if args.rates or args.multipliers or args.mask_file:
        mask = _mask_spec_from_args(args, n_views=None)
    spec = ExperimentSpec(
        manifest=args.manifest,
        synth=synth,
        mask=mask,
        config=config,
        methods=tuple(args.methods.split(",")),
        repeat=args.repeat,
        seed=args.seed,
        out_dir=args.out,
        figures=not args.no_figures,
    )
    summary = run_experiment(spec)
    for method, res in summary["results"].items():
        mean = res["mean"]
        if mean["acc"] is None:
            print(f"{method}: run (no ground truth for metrics)")
        else:
            print(
                f"{method}: acc={mean['acc']:.4f} nmi={mean['nmi']:.4f} "
                f"purity={mean['purity']:.4f}"
            )
    return 0


def cmd_eval(args):
    truth = np.loadtxt(args.truth, dtype=np.int64, ndmin=1)
    pred = np.loadtxt(args.pred, dtype=np.int64, ndmin=1)
    scores = metrics.evaluate(truth, pred)
    line = json.dumps({k: round(v, 6) for k, v in scores.items()}, sort_keys=True)
    print(line)
    if args.out:
        Path(args.out).write_text(line + "\n")
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="uimc",
        description="Unbalanced incomplete multi-view clustering harness",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a synthetic dataset")
    p.add_argument("--m", type=int, required=True, help="instance count")
    p.add_argument("--c", type=int, required=True, help="cluster count")
    p.add_argument("--dims", required=True, help="per-view dims, e.g. 25,20,15")
    p.add_argument("--noise", type=float, default=1.0)
    p.add_argument("--separation", type=float, default=6.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--name", default="dataset")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("mask", help="apply missingness to a dataset")
    p.add_argument("--manifest", required=True)
    p.add_argument("--rates", help="per-view rates, e.g. 0.1,0.3,0.6")
    p.add_argument("--multipliers", help="per-view multipliers applied to --per")
    p.add_argument("--per", type=float, help="average missing rate")
    p.add_argument("--mask-file", help="JSON mask spec (rates+seed or presented)")
    p.add_argument("--mask-seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.add_argument("--name", default="masked")
    p.set_defaults(func=cmd_mask)

    p = sub.add_parser("run", help="run clustering methods and write reports")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--manifest", help="dataset manifest (complete data)")
    src.add_argument("--synth", help="synthetic params, e.g. m=150,c=3,dims=25x20x15,noise=0.5,seed=7")
    p.add_argument("--rates")
    p.add_argument("--multipliers")
    p.add_argument("--per", type=float)
    p.add_argument("--mask-file")
    p.add_argument("--mask-seed", type=int, default=0)
    p.add_argument("--config", help="solver config file (JSON or key=value lines)")
    p.add_argument("--alpha", type=float)
    p.add_argument("--beta", type=float)
    p.add_argument("--eta", type=float)
    p.add_argument("--gamma", type=float)
    p.add_argument("--theta0", type=float)
    p.add_argument("--theta-max", dest="theta_max", type=float)
    p.add_argument("--max-iters", dest="max_iters", type=int)
    p.add_argument("--rel-tol", dest="rel_tol", type=float)
    p.add_argument("--q2-update", dest="q2_update", choices=("verbatim", "shrink"))
    p.add_argument("--q2-row-sum", dest="q2_row_sum", choices=("none", "affine", "simplex"))
    p.add_argument("--methods", default="uimc,bsv,concat")
    p.add_argument("--repeat", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.add_argument("--no-figures", action="store_true")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("eval", help="score predicted labels against truth")
    p.add_argument("--pred", required=True, help="one predicted label per line")
    p.add_argument("--truth", required=True, help="one true label per line")
    p.add_argument("--out", help="optional JSON output path")
    p.set_defaults(func=cmd_eval)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except Exception as exc:  # surface a clean diagnostic, nonzero exit
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
