"""Command line interface: ``forestdensity <subcommand> ...``.

Exit codes: 0 success, 2 usage, 3 data error, 4 numeric error.  Failures are
reported on stderr as ``error: <code>: <detail>``.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .config import ESTIMATORS, RunConfig
from .density import ForestDensityModel, fit_gaussian, heldout_loglik_fde, heldout_loglik_gauss
from .errors import DataError, ForestDensityError, NumericError
from .io import (provenance, read_csv, read_forest_tsv, write_csv, write_forest_tsv, write_json,
                 write_matrix_tsv, write_table)
from .kde import Grid, KERNELS, fit_univariate, rescale_to_unit_cube, GridFits
from .mutual_info import mi_matrix
from .pipeline import fit_forest, fit_restricted, split_data
from .synth import SynthSpec, generate, sample_gaussian_precision

log = logging.getLogger("forestdensity")

EXIT_USAGE, EXIT_DATA, EXIT_NUMERIC = 2, 3, 4


def _config(args) -> RunConfig:
    return RunConfig(m=args.m, beta=args.beta, kernel=args.kernel, floor=args.floor, split=args.split,
                     estimator=args.estimator, seed=args.seed, mode=getattr(args, "mode", "sample"),
                     n_jobs=args.jobs)


def _outdir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _write_split(out, split, header):
    write_csv(out / "train.csv", split.train_raw, header)
    write_csv(out / "heldout.csv", split.heldout_raw, header)


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def cmd_mi(args):
    cfg = _config(args)
    data, _ = read_csv(args.data)
    scaled, _ = rescale_to_unit_cube(data)
    M = mi_matrix(GridFits.from_config(scaled, cfg), cfg.estimator, n_jobs=cfg.n_jobs)
    out = _outdir(args)
    write_matrix_tsv(out / "mi.tsv", M.entries, provenance(cfg.digest(), [args.data]))
    print(f"wrote {out / 'mi.tsv'} (d={M.d}, estimator={M.estimator_tag})")


def _selection_outputs(out, result, cfg, header):
    sel = result.selection
    write_table(out / "curve.csv", [(k, v) for k, v in enumerate(sel.curve)], ["k", "heldout_loglik"], header)
    write_forest_tsv(out / "forest.tsv", sel.forest, sel.k, header)
    write_forest_tsv(out / "sequence.tsv", result.sequence.prefix(len(result.sequence)),
                     len(result.sequence), header)


def cmd_select(args):
    cfg = _config(args)
    data, _ = read_csv(args.data)
    result = fit_forest(data, cfg)
    out = _outdir(args)
    header = provenance(cfg.digest(), [args.data])
    _selection_outputs(out, result, cfg, header)
    print(f"k_hat={result.selection.k} mode={cfg.mode} "
          f"heldout_loglik={result.selection.curve[result.selection.k]:.12g}")


def cmd_fit(args):
    cfg = _config(args)
    data, _ = read_csv(args.data)
    result = fit_forest(data, cfg)
    out = _outdir(args)
    header = provenance(cfg.digest(), [args.data])
    _selection_outputs(out, result, cfg, header)
    write_matrix_tsv(out / "mi.tsv", result.weights.entries, header)
    _write_split(out, result.split, header)
    write_json(out / "model.json", result.model.to_dict(), header)
    print(f"k_hat={result.selection.k} edges={len(result.model.forest)} model={out / 'model.json'}")


def cmd_restricted(args):
    cfg = _config(args)
    data, _ = read_csv(args.data)
    kappa_max = args.kappa_max if args.kappa_max is not None else data.shape[1] - 1
    result = fit_restricted(data, kappa_max, cfg)
    out = _outdir(args)
    header = provenance(cfg.digest(), [args.data])
    rows = [(c.kappa, c.weight, c.pruned_weight, c.n_edges, c.risk) for c in result.candidates]
    write_table(out / "candidates.tsv", rows, ["kappa", "weight", "pruned_weight", "n_edges", "heldout_risk"],
                header, sep="\t")
    write_forest_tsv(out / "forest.tsv", result.forest, len(result.forest), header)
    split = split_data(data, cfg)
    _write_split(out, split, header)
    write_json(out / "model.json", result.model.to_dict(), header)
    for c in result.candidates:
        print(f"kappa={c.kappa}\tweight={c.weight:.12g}\tpruned_weight={c.pruned_weight:.12g}"
              f"\tedges={c.n_edges}\trisk={c.risk:.12g}")
    print(f"kappa_hat={result.kappa} edges={len(result.forest)}")


def cmd_synth(args):
    spec = SynthSpec(d=args.d, n=args.n, mean=args.mean, diag=args.diag,
                     offdiag_range=(args.offdiag_lo, args.offdiag_hi), max_block=args.max_block,
                     coverage=args.coverage, seed=args.seed, transform=args.transform)
    res = generate(spec)
    out = _outdir(args)
    header = provenance()
    write_csv(out / "data.csv", res.data, header, [f"x{k}" for k in range(spec.d)])
    with open(out / "truth.tsv", "w") as fh:
        fh.write(header + "\n")
        fh.write(f"# d={spec.d} k={len(res.truth)}\n")
        for i, j in res.truth:
            fh.write(f"{i}\t{j}\t{res.precision[i, j]!r}\n")
    if args.n_test:
        rng = np.random.Generator(np.random.PCG64(spec.seed + 1))
        test = sample_gaussian_precision(res.precision, args.n_test, np.full(spec.d, spec.mean), rng)
        if spec.transform == "cdf":
            # map fresh draws through the empirical CDF of the training draws
            raw = sample_gaussian_precision(res.precision, spec.n, np.full(spec.d, spec.mean),
                                            np.random.Generator(np.random.PCG64(spec.seed)))
            test = np.column_stack([np.searchsorted(np.sort(raw[:, k]), test[:, k]) for k in range(spec.d)])
            test = np.clip(test, 1, spec.n) / (spec.n + 1)
        write_csv(out / "test.csv", test, header, [f"x{k}" for k in range(spec.d)])
    write_json(out / "spec.json", {"spec": spec.to_dict(), "blocks": res.blocks}, header)
    print(f"wrote {out / 'data.csv'} n={spec.n} d={spec.d} truth_edges={len(res.truth)}")


def _load_model(args):
    train, _ = read_csv(args.train)
    return ForestDensityModel.load(args.model, train), train


def _to_cube(model, data):
    scaled = data if model.rescale is None else model.rescale.apply(data)
    outside = int(np.sum(np.any((scaled < 0) | (scaled > 1), axis=1)))
    if outside:
        log.warning("%d evaluation rows fall outside the training range and are clipped", outside)
    return np.clip(scaled, 0.0, 1.0)


def cmd_eval(args):
    model, _ = _load_model(args)
    data, _ = read_csv(args.data)
    if data.shape[1] != model.d:
        raise DataError(f"{args.data}: expected {model.d} columns, got {data.shape[1]}")
    X = _to_cube(model, data)
    l_fde = heldout_loglik_fde(model, X)
    l_gauss = heldout_loglik_gauss(fit_gaussian(model.train), X)
    print(f"loglik_fde={l_fde:.12g}")
    print(f"loglik_gauss={l_gauss:.12g}")
    if args.out:
        out = _outdir(args)
        write_json(out / "eval.json", {"loglik_fde": l_fde, "loglik_gauss": l_gauss, "n": int(X.shape[0])},
                   provenance(inputs=[args.model, args.train, args.data]))


def cmd_export(args):
    model, _ = _load_model(args)
    out = _outdir(args)
    header = provenance(inputs=[args.model, args.train])
    write_json(out / "model.json", model.to_dict(), header)
    write_forest_tsv(out / "forest.tsv", model.forest, len(model.forest), header)
    grid = Grid(model.m)
    cols = [fit_univariate(model.train[:, k], model.kernel, grid, model.h1[k], model.floor).values
            for k in range(model.d)]
    write_csv(out / "marginals.csv", np.column_stack([grid.points] + cols), header,
              ["x"] + [f"p{k}" for k in range(model.d)])
    print(f"exported model with {len(model.forest)} edges to {out}")


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------


def _common(p, data=True):
    if data:
        p.add_argument("data", help="input CSV (numeric, optional header row)")
    p.add_argument("--m", type=int, default=128, help="grid points per dimension")
    p.add_argument("--beta", type=float, default=2.0, help="smoothness used by the bandwidth rule")
    p.add_argument("--kernel", choices=sorted(KERNELS), default="epanechnikov")
    p.add_argument("--floor", type=float, default=RunConfig.floor, help="lower truncation of density values")
    p.add_argument("--split", type=float, default=0.5, help="fraction of rows used for training")
    p.add_argument("--estimator", choices=ESTIMATORS, default="medium")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--jobs", type=int, default=1, help="threads for the MI matrix")
    p.add_argument("--out", default=".", help="output directory")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="forestdensity", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("mi", help="pairwise mutual information matrix as TSV")
    _common(p)
    p.set_defaults(func=cmd_mi)

    for name, func, help_ in (("fit", cmd_fit, "fit a forest density and save the model"),
                              ("select", cmd_select, "held-out curve over Chow-Liu forest sizes")):
        p = sub.add_parser(name, help=help_)
        _common(p)
        p.add_argument("--mode", choices=("sample", "grid"), default="sample")
        p.set_defaults(func=func)

    p = sub.add_parser("restricted", help="kappa-restricted forest density estimation")
    _common(p)
    p.add_argument("--kappa-max", type=int, default=None, help="largest kappa tried (default d-1)")
    p.set_defaults(func=cmd_restricted)

    p = sub.add_parser("synth", help="generate a block-sparse Gaussian benchmark")
    p.add_argument("--d", type=int, default=100)
    p.add_argument("--n", type=int, default=800)
    p.add_argument("--n-test", type=int, default=0, help="also write a fresh test.csv with this many rows")
    p.add_argument("--mean", type=float, default=0.5)
    p.add_argument("--diag", type=float, default=62.0)
    p.add_argument("--offdiag-lo", type=float, default=-30.0)
    p.add_argument("--offdiag-hi", type=float, default=-10.0)
    p.add_argument("--max-block", type=int, default=8)
    p.add_argument("--coverage", type=float, default=1.0)
    p.add_argument("--transform", choices=("none", "cdf"), default="none")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=".")
    p.set_defaults(func=cmd_synth)

    for name, func, help_ in (("eval", cmd_eval, "held-out log-likelihoods of a saved model"),
                              ("export", cmd_export, "re-export a saved model with plot tables")):
        p = sub.add_parser(name, help=help_)
        p.add_argument("model", help="model JSON written by fit/restricted")
        p.add_argument("--train", required=True, help="training CSV the model was fitted on")
        if name == "eval":
            p.add_argument("--data", required=True, help="CSV of evaluation rows")
            p.add_argument("--out", default=None)
        else:
            p.add_argument("--out", default=".")
        p.set_defaults(func=func)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s")
    try:
        args.func(args)
    except NumericError as exc:
        print(f"error: {exc.code}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (DataError, FileNotFoundError) as exc:
        code = getattr(exc, "code", "io")
        print(f"error: {code}: {exc}", file=sys.stderr)
        return EXIT_DATA
    except ValueError as exc:
        print(f"error: usage: {exc}", file=sys.stderr)
        return EXIT_USAGE
    return 0


if __name__ == "__main__":
    sys.exit(main())
