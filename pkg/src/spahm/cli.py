"""Command-line front end: ``spahm simulate | fuse | sweep | evaluate``.

Exit codes: 0 success, 1 monotonicity violation under ``--certify``,
2 input error. The default seed comes from ``SPAHM_SEED`` when set.
"""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import time
import warnings
from pathlib import Path

import numpy as np

from . import __version__
from .fusion import (COST_PATHS, FusionConfig, MonotonicityError, as_groups, fuse,
                     initial_hyper)
from .io import (FusionOutput, GroundTruth, InputError, LocalParams, SCHEMA_VERSION,
                 finite_or_none, write_raw_data)
from .simbench import (DEFAULT_GRIDS, SWEEP_VARS, SimSpec, SweepConfig, co_cluster_fraction,
                       generate, hausdorff, rel_error, rows_to_csv, run_sweep, summarize)

SEED_ENV = "SPAHM_SEED"
EXIT_OK, EXIT_CERTIFY, EXIT_INPUT = 0, 1, 2

log = logging.getLogger("spahm")


def _default_seed() -> int:
    raw = os.environ.get(SEED_ENV)
    if raw is None:
        return 0
    try:
        return int(raw)
    except ValueError:
        raise InputError(f"{SEED_ENV} must be an integer, got {raw!r}") from None


def _mu0_arg(text: str) -> np.ndarray:
    try:
        return np.array([float(x) for x in text.split(",")], dtype=np.float64)
    except ValueError:
        raise argparse.ArgumentTypeError(f"--mu0 expects a number or comma-separated numbers, got {text!r}")


def _positive(kind):
    def parse(text):
        value = kind(text)
        if not value > 0:
            raise argparse.ArgumentTypeError(f"expected a positive value, got {text}")
        return value
    return parse


def _seed_arg(p: argparse.ArgumentParser) -> None:
    p.add_argument("--seed", type=int, default=None,
                   help=f"random seed (default: ${SEED_ENV} or 0)")


def _add_sim_flags(p: argparse.ArgumentParser, base: SimSpec) -> None:
    g = p.add_argument_group("generator")
    g.add_argument("--L-true", type=_positive(int), default=base.L_true, help="number of true global atoms")
    g.add_argument("--dim", type=_positive(int), default=base.d, help="atom dimension d")
    g.add_argument("--groups", type=_positive(int), default=base.J, help="number of groups J")
    g.add_argument("--mu0", type=float, default=base.mu0, help="prior mean (every coordinate)")
    g.add_argument("--sigma0-sq", type=_positive(float), default=base.sigma0_sq, help="prior variance of global atoms")
    g.add_argument("--sigma-sq", type=float, default=base.sigma_sq, help="local noise variance")
    g.add_argument("--subset-prob", type=float, default=base.subset_prob,
                   help="probability that a group keeps a given global atom")
    g.add_argument("--points-per-atom", type=int, default=base.points_per_atom,
                   help="raw points drawn around each local atom (0: none)")


def _sim_spec(args, seed: int) -> SimSpec:
    try:
        return SimSpec(L_true=args.L_true, d=args.dim, J=args.groups, mu0=args.mu0,
                       sigma0_sq=args.sigma0_sq, sigma_sq=args.sigma_sq, subset_prob=args.subset_prob,
                       points_per_atom=args.points_per_atom, seed=seed)
    except ValueError as exc:
        raise InputError(str(exc)) from None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="spahm", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="count", default=0, help="more log output")
    sub = parser.add_subparsers(dest="command", required=True)
    base = SimSpec()

    p = sub.add_parser("simulate", help="generate a synthetic fusion instance")
    p.add_argument("--out-dir", type=Path, required=True,
                   help="directory for local_params.json, raw_data.npz and truth.json")
    _seed_arg(p)
    _add_sim_flags(p, base)

    p = sub.add_parser("fuse", help="fuse local parameter sets into global atoms")
    p.add_argument("input", type=Path, help="local parameters file (JSON)")
    p.add_argument("--out", type=Path, default=None, help="result file (default: stdout)")
    p.add_argument("--alpha", type=_positive(float), default=1.0, help="concentration (default 1)")
    p.add_argument("--gamma0", type=_positive(float), default=1.0, help="mass parameter (default 1)")
    p.add_argument("--sigma-sq", type=_positive(float), default=None,
                   help="fix the local noise variance (default: learned)")
    p.add_argument("--sigma0-sq", type=_positive(float), default=None,
                   help="fix the prior variance of global atoms (default: learned)")
    p.add_argument("--mu0", type=_mu0_arg, default=None,
                   help="fix the prior mean; one number or d comma-separated numbers (default: learned)")
    p.add_argument("--no-learn-hypers", action="store_true",
                   help="keep hyperparameters at their starting values")
    _seed_arg(p)
    p.add_argument("--tol", type=_positive(float), default=1e-6, help="convergence tolerance on the objective")
    p.add_argument("--max-outer", type=_positive(int), default=100, help="maximum outer iterations")
    p.add_argument("--inner", type=_positive(int), default=None,
                   help="group re-matches per outer iteration (default: number of groups)")
    p.add_argument("--cost-path", choices=COST_PATHS, default="gaussian", help="cost matrix construction")
    p.add_argument("--rank-penalty", action="store_true",
                   help="include the -log(rank) term on new-atom slots (may break monotonicity)")
    p.add_argument("--certify", action="store_true",
                   help="fail with exit code 1 if any step lowers the objective")

    p = sub.add_parser("sweep", help="run a noise or group-count sweep and write a CSV")
    p.add_argument("--var", choices=SWEEP_VARS, default="sigma",
                   help="swept quantity; sigma values are sigma/sigma0")
    p.add_argument("--values", type=lambda s: [float(x) for x in s.split(",")], default=None,
                   help="comma-separated grid (default depends on --var)")
    p.add_argument("--reps", type=_positive(int), default=10, help="repetitions per grid value")
    p.add_argument("--out", type=Path, required=True, help="CSV output path")
    p.add_argument("--summary", type=Path, default=None,
                   help="summary JSON path (default: <out>.summary.json)")
    _seed_arg(p)
    p.add_argument("--kmeans-restarts", type=_positive(int), default=3, help="k-means restarts per fit")
    p.add_argument("--max-outer", type=_positive(int), default=50, help="fusion outer iterations")
    p.add_argument("--workers", type=_positive(int), default=1, help="parallel worker processes")
    p.add_argument("--record-timing", action="store_true",
                   help="fill the wall_ms column (outputs are then not reproducible)")
    _add_sim_flags(p, base)

    p = sub.add_parser("evaluate", help="score a fusion result against ground truth")
    p.add_argument("result", type=Path, help="result file written by 'fuse'")
    p.add_argument("--truth", type=Path, required=True, help="truth file written by 'simulate'")
    p.add_argument("--local", type=Path, default=None,
                   help="local parameters file with true_assignments (alternative source of the true matching)")
    p.add_argument("--out", type=Path, default=None, help="write the report here as well as to stdout")
    return parser


def cmd_simulate(args) -> int:
    seed = args.seed if args.seed is not None else _default_seed()
    spec = _sim_spec(args, seed)
    inst = generate(spec)
    out = args.out_dir
    out.mkdir(parents=True, exist_ok=True)
    ids = [f"g{j}" for j in range(spec.J)]
    LocalParams(ids, inst.local_atoms, inst.true_assignments).write(out / "local_params.json")
    truth_hyper = {"mu0": spec.mu0_vector(), "sigma0_sq": spec.sigma0_sq, "sigma_sq": spec.sigma_sq}
    GroundTruth(inst.true_global, ids, inst.true_assignments, truth_hyper, spec.as_dict()).write(out / "truth.json")
    if inst.raw_data is not None:
        write_raw_data(out / "raw_data.npz", ids, inst.raw_data)
    print(f"wrote {spec.J} groups ({sum(inst.group_sizes)} local atoms) to {out}")
    return EXIT_OK


def _initial_hyper(args, groups):
    h = initial_hyper(groups, args.alpha, args.gamma0)
    overrides = {}
    if args.mu0 is not None:
        mu0 = args.mu0
        if mu0.size == 1:
            mu0 = np.full(h.dim, mu0[0])
        if mu0.size != h.dim:
            raise InputError(f"--mu0 has {mu0.size} values but atoms have dimension {h.dim}")
        overrides["mu0"] = mu0
    if args.sigma0_sq is not None:
        overrides["sigma0_sq"] = args.sigma0_sq
    if args.sigma_sq is not None:
        overrides["sigma_sq"] = args.sigma_sq
    return h.replace(**overrides), tuple(sorted(overrides))


def cmd_fuse(args) -> int:
    seed = args.seed if args.seed is not None else _default_seed()
    local = LocalParams.read(args.input)
    groups = as_groups(local.atoms)
    hyper0, fixed = _initial_hyper(args, groups)
    config = FusionConfig(inner=args.inner, max_outer=args.max_outer, tol=args.tol, seed=seed,
                          learn_hypers=not args.no_learn_hypers, fixed_hypers=fixed,
                          cost_path=args.cost_path, rank_penalty=args.rank_penalty, certify=args.certify)
    t0 = time.perf_counter()
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        try:
            res = fuse(groups, config, hyper0)
        except MonotonicityError as exc:
            print(f"spahm fuse: certification failed: {exc}", file=sys.stderr)
            return EXIT_CERTIFY
    notes = list(dict.fromkeys(str(w.message) for w in caught))
    if not res.converged:
        notes.insert(0, f"max_outer={args.max_outer} reached before convergence")
    cfg = config.as_dict()
    cfg.update(alpha=args.alpha, gamma0=args.gamma0)
    cfg.pop("backend")
    out = FusionOutput(
        global_atoms=res.global_atoms,
        group_ids=local.group_ids,
        assignments=res.assignments,
        hyperparameters=res.hyper.as_dict(),
        trace=[{"step": e.step, "kind": e.kind, "group": e.group, "objective": e.objective}
               for e in res.trace.entries],
        config={k: (list(v) if isinstance(v, tuple) else v) for k, v in cfg.items()},
        seed=seed,
        converged=res.converged,
        warning="; ".join(notes) or None,
        metadata={"wall_seconds": time.perf_counter() - t0, "version": __version__},
    )
    if args.out is None:
        sys.stdout.write(out.to_json())
    else:
        out.write(args.out)
        print(f"L={res.n_global} global atoms, converged={res.converged}, "
              f"objective={res.trace.entries[-1].objective:.6f} -> {args.out}")
    if out.warning:
        print(f"warning: {out.warning}", file=sys.stderr)
    return EXIT_OK


def cmd_sweep(args) -> int:
    seed = args.seed if args.seed is not None else _default_seed()
    base = _sim_spec(args, seed)
    values = args.values if args.values is not None else list(DEFAULT_GRIDS[args.var])
    if args.var == "J":
        values = [int(v) for v in values]
    config = SweepConfig(kmeans_restarts=args.kmeans_restarts,
                         fusion=FusionConfig(max_outer=args.max_outer),
                         record_timing=args.record_timing)
    try:
        rows = run_sweep(base, args.var, values, args.reps, seed=seed, config=config, workers=args.workers)
    except ValueError as exc:
        raise InputError(str(exc)) from None
    args.out.parent.mkdir(parents=True, exist_ok=True)
    args.out.write_text(rows_to_csv(rows), encoding="utf-8")
    summary = summarize(rows)
    summary_path = args.summary or args.out.with_name(args.out.name + ".summary.json")
    summary_path.write_text(json.dumps({"schema_version": SCHEMA_VERSION, "sweep_var": args.var,
                                        "repetitions": args.reps, "seed": seed, "cells": summary},
                                       indent=1) + "\n", encoding="utf-8")
    for s in summary:
        print(f"{args.var}={s['value']:<8g} {s['method']:<16} hausdorff {s['hausdorff_mean']:.4f} "
              f"+/- {s['hausdorff_se']:.4f}  L {s['L_est_mean']:.1f}")
    return EXIT_OK


def evaluate(result: FusionOutput, truth: GroundTruth, true_assignments=None) -> dict:
    """Metrics of a fusion result against the generating truth."""
    report = {
        "hausdorff": hausdorff(result.global_atoms, truth.global_atoms),
        "L_est": int(result.global_atoms.shape[0]),
        "L_true": int(truth.global_atoms.shape[0]),
    }
    for name in ("mu0", "sigma0_sq", "sigma_sq"):
        if name in truth.hyperparameters and name in result.hyperparameters:
            try:
                err = rel_error(result.hyperparameters[name], truth.hyperparameters[name])
            except ZeroDivisionError:
                err = float("nan")
            report[f"{name}_relerr"] = finite_or_none(err)
    if true_assignments is None and truth.assignments:
        true_assignments = dict(zip(truth.group_ids, truth.assignments))
    if true_assignments:
        missing = set(result.group_ids) - set(true_assignments)
        if missing:
            raise InputError(f"no true assignments for group(s) {sorted(missing)}")
        true = [true_assignments[g] for g in result.group_ids]
        for gid, est, ref in zip(result.group_ids, result.assignments, true):
            if est.shape != ref.shape:
                raise InputError(f"group {gid!r}: result has {est.size} local atoms, truth has {ref.size}")
        report["co_cluster_fraction"] = co_cluster_fraction(result.assignments, true)
    return report


def cmd_evaluate(args) -> int:
    result = FusionOutput.read(args.result)
    truth = GroundTruth.read(args.truth)
    true_assignments = None
    if args.local is not None:
        local = LocalParams.read(args.local)
        if local.true_assignments is None:
            raise InputError(f"{args.local}: no true_assignments")
        true_assignments = dict(zip(local.group_ids, local.true_assignments))
    if result.global_atoms.shape[1] != truth.global_atoms.shape[1]:
        raise InputError("result and truth atoms have different dimensions")
    report = evaluate(result, truth, true_assignments)
    text = json.dumps(report, indent=1) + "\n"
    sys.stdout.write(text)
    if args.out is not None:
        args.out.write_text(text, encoding="utf-8")
    return EXIT_OK


COMMANDS = {"simulate": cmd_simulate, "fuse": cmd_fuse, "sweep": cmd_sweep, "evaluate": cmd_evaluate}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2),
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except (InputError, ValueError) as exc:
        print(f"spahm {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
