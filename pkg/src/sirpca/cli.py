"""Command-line front end.

Subcommands: ``decompose``, ``synth``, ``phase``, ``sweep``, ``bgsub`` and
``scene``. Every subcommand also takes ``--config FILE`` with ``key=value``
lines named after its long options (``max-iter=500``); explicit flags win
over the file.

Exit codes: 0 success, 2 usage or validation error, 3 I/O error,
4 numerical failure, 5 non-convergence under ``--require-convergence``.
"""

import argparse
import logging
import math
import sys
from pathlib import Path

import numpy as np

from . import bench, formats, imaging, matops, synth
from .errors import (
    DimensionError,
    FactorizationError,
    FormatError,
    InvalidInputError,
    UndefinedCriterionError,
)
from .solvers import FeaturePair, SolverConfig, objective, solve_pcp, solve_pcpf, solve_pcps, solve_pcpsf
from .staging import StagedOutput

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_IO = 3
EXIT_NUMERICAL = 4
EXIT_NOT_CONVERGED = 5

SPARSE_TOL = 1e-6

log = logging.getLogger("sirpca")


class UsageError(Exception):
    pass


class NotConverged(Exception):
    pass


# ------------------------------------------------------------------ parsing


def _floats(text):
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _ints(text):
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _auto_float(text):
    if text == "auto":
        return None
    return float(text)


def _add_solver_flags(p, kappa_default):
    g = p.add_argument_group("solver")
    g.add_argument("--kappa", type=float, default=kappa_default, help="side-information weight")
    g.add_argument("--lambda", dest="lam", type=_auto_float, default=None,
                   help="sparsity weight (default auto = 1/sqrt(max(n1, n2)))")
    g.add_argument("--alpha", type=float, default=1.1, help="penalty growth ratio")
    g.add_argument("--mu-init", type=_auto_float, default=None, help="initial penalty (default auto)")
    g.add_argument("--mu-max", type=float, default=1e18, help="penalty cap")
    g.add_argument("--epsilon", type=float, default=1e-7, help="stopping tolerance")
    g.add_argument("--max-iter", type=int, default=1000, help="iteration budget")


def _solver_config(args):
    return SolverConfig(lam=args.lam, kappa=args.kappa, alpha=args.alpha, mu_init=args.mu_init,
                        mu_max=args.mu_max, epsilon=args.epsilon, max_iter=args.max_iter)


def build_parser():
    parser = argparse.ArgumentParser(prog="sirpca", description="Robust PCA with side information")
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("decompose", help="split a matrix into low-rank and sparse parts")
    p.add_argument("--config")
    p.add_argument("--input", help="observation matrix file")
    p.add_argument("--side", help="side-information matrix file")
    p.add_argument("--features", nargs=2, metavar=("X", "Y"), help="feature matrix files")
    p.add_argument("--out-prefix")
    p.add_argument("--require-convergence", action="store_true")
    _add_solver_flags(p, 0.2)

    p = sub.add_parser("synth", help="generate a synthetic instance")
    p.add_argument("--config")
    p.add_argument("--n1", type=int, default=200)
    p.add_argument("--n2", type=int, default=200)
    p.add_argument("--rank", type=int, default=10)
    p.add_argument("--rho", type=float, default=0.05)
    p.add_argument("--signs", choices=synth.SIGN_MODELS, default="bernoulli")
    p.add_argument("--side-model", choices=synth.SIDE_MODELS, default="none")
    p.add_argument("--d", type=int, default=None, help="extra feature directions")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out-prefix")

    p = sub.add_parser("phase", help="phase-transition grid")
    p.add_argument("--config")
    p.add_argument("--solver", choices=sorted(bench.SOLVERS), default="pcp")
    p.add_argument("--signs", choices=synth.SIGN_MODELS, default="bernoulli")
    p.add_argument("--side-model", choices=synth.SIDE_MODELS, default="none")
    p.add_argument("--ranks", type=_ints, default=list(bench.DEFAULT_RANKS))
    p.add_argument("--rhos", type=_floats, default=list(bench.DEFAULT_RHOS))
    p.add_argument("--trials", type=int, default=3)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--n", type=int, default=200, help="matrix size")
    p.add_argument("--d", type=int, default=10, help="extra feature directions")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--out")
    _add_solver_flags(p, 0.2)

    p = sub.add_parser("sweep", help="kappa-lambda sweep of PCPS on one instance")
    p.add_argument("--config")
    p.add_argument("--instance", help="prefix written by 'synth'")
    p.add_argument("--kappas", type=_floats)
    p.add_argument("--lambdas", type=_floats)
    p.add_argument("--out")
    _add_solver_flags(p, 0.2)

    p = sub.add_parser("bgsub", help="background subtraction on a PGM frame directory")
    p.add_argument("--config")
    p.add_argument("--frames")
    p.add_argument("--side", help="PGM background photo")
    p.add_argument("--truth", help="directory of ground-truth mask PGMs")
    p.add_argument("--solver", choices=("pcp", "pcps"), default="pcp")
    p.add_argument("--threshold", type=float, default=imaging.DEFAULT_THRESHOLD)
    p.add_argument("--out")
    p.add_argument("--require-convergence", action="store_true")
    _add_solver_flags(p, imaging.VIDEO_KAPPA)

    p = sub.add_parser("scene", help="write a synthetic moving-square video")
    p.add_argument("--config")
    p.add_argument("--frames", type=int, default=100)
    p.add_argument("--height", type=int, default=64)
    p.add_argument("--width", type=int, default=64)
    p.add_argument("--square", type=int, default=16)
    p.add_argument("--amplitude", type=float, default=100.0)
    p.add_argument("--speed", type=float, default=1.0)
    p.add_argument("--salt-pepper", type=float, default=0.05)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    return parser


REQUIRED = {
    "decompose": ("input", "out_prefix"),
    "synth": ("out_prefix",),
    "phase": ("out",),
    "sweep": ("instance", "kappas", "lambdas", "out"),
    "bgsub": ("frames", "out"),
    "scene": ("out",),
}


def _subparser(parser, name):
    for action in parser._actions:
        if isinstance(action, argparse._SubParsersAction):
            return action.choices[name]
    raise KeyError(name)


def _config_defaults(sp, path):
    """Convert a ``key=value`` file into parser defaults for subparser `sp`."""
    options = {}
    for action in sp._actions:
        for opt in action.option_strings:
            if opt.startswith("--") and opt not in ("--config", "--help"):
                options[opt[2:]] = action
    defaults = {}
    for key, raw in formats.read_config(path, allowed=set(options)).items():
        action = options[key]
        if action.nargs == 0:
            defaults[action.dest] = raw.lower() in ("1", "true", "yes")
            continue
        if action.nargs == 2:
            defaults[action.dest] = [v.strip() for v in raw.split(",")]
            continue
        try:
            value = action.type(raw) if action.type else raw
        except (argparse.ArgumentTypeError, ValueError) as exc:
            raise UsageError(f"{path}: bad value for {key}: {exc}") from None
        if action.choices is not None and value not in action.choices:
            raise UsageError(f"{path}: {key} must be one of {sorted(action.choices)}")
        defaults[action.dest] = value
    return defaults


def parse_args(argv):
    """Parse `argv`, merging a ``--config`` file under the explicit flags."""
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "config", None):
        sp = _subparser(parser, args.command)
        sp.set_defaults(**_config_defaults(sp, args.config))
        args = parser.parse_args(argv)
    missing = [d for d in REQUIRED[args.command] if getattr(args, d) is None]
    if missing:
        flags = ", ".join("--" + d.replace("_", "-") for d in missing)
        raise UsageError(f"{args.command}: missing required option(s) {flags}")
    return args


# ---------------------------------------------------------------- helpers


def _require_files(*paths):
    for p in paths:
        if p is not None and not Path(p).is_file():
            raise FileNotFoundError(f"no such file: {p}")


def _require_dirs(*paths):
    for p in paths:
        if p is not None and not Path(p).is_dir():
            raise FileNotFoundError(f"no such directory: {p}")


def _require_output_location(path):
    parent = Path(path).absolute().parent
    while not parent.exists():
        parent = parent.parent
    if not parent.is_dir():
        raise NotADirectoryError(f"cannot create outputs under {parent}")


# ------------------------------------------------------------- subcommands


def cmd_decompose(args):
    feats = args.features or (None, None)
    _require_files(args.input, args.side, *feats)
    _require_output_location(args.out_prefix + "L.mtx")
    cfg = _solver_config(args)

    M = formats.read_matrix(args.input)
    W = formats.read_matrix(args.side) if args.side else None
    features = None
    if args.features:
        features = FeaturePair(formats.read_matrix(feats[0]), formats.read_matrix(feats[1]))
    if W is not None and W.shape != M.shape:
        raise DimensionError(f"side information is {W.shape[0]}x{W.shape[1]}, "
                             f"observation is {M.shape[0]}x{M.shape[1]}")

    if W is None and features is None:
        name, res = "pcp", solve_pcp(M, cfg)
    elif features is None:
        name, res = "pcps", solve_pcps(M, W, cfg)
    elif W is None:
        name, res = "pcpf", solve_pcpf(M, features, cfg)
    else:
        name, res = "pcpsf", solve_pcpsf(M, W, features, cfg)
    if args.require_convergence and not res.converged:
        raise NotConverged(f"{name} did not converge in {res.iterations} iterations")

    lam = cfg.resolve_lambda(M.shape)
    kappa = 0.0 if name in ("pcp", "pcpf") else cfg.kappa
    nnz = int(np.count_nonzero(np.abs(res.sparse) > SPARSE_TOL))
    report = {
        "solver": name,
        "iterations": res.iterations,
        "converged": res.converged,
        "residual_primal": res.residual_primal,
        "residual_side": res.residual_side,
        "rank": matops.rank(res.low_rank),
        "sparse_nonzeros": nnz,
        "sparsity": nnz / res.sparse.size,
        "objective": objective(res.low_rank, res.sparse, lam, kappa, W),
        "lambda": lam,
        "kappa": kappa,
    }
    with StagedOutput() as out:
        out.write_text(args.out_prefix + "L.mtx", formats.matrix_text(res.low_rank))
        out.write_text(args.out_prefix + "S.mtx", formats.matrix_text(res.sparse))
        out.write_text(args.out_prefix + "report.txt", formats.config_text(report))
    print(f"{name}: {res.iterations} iterations, rank {report['rank']}, "
          f"sparsity {100 * report['sparsity']:.2f}%, converged={res.converged}")


def cmd_synth(args):
    _require_output_location(args.out_prefix + "m.mtx")
    inst = synth.assemble_instance(args.n1, args.n2, args.rank, args.rho, args.signs,
                                   args.side_model, args.d, args.seed)
    meta = {
        "n1": args.n1, "n2": args.n2, "rank": args.rank, "rho": args.rho, "signs": args.signs,
        "side-model": args.side_model, "d": args.d, "seed": args.seed,
        "sparse_nonzeros": int(np.count_nonzero(inst.s0)),
    }
    with StagedOutput() as out:
        out.write_text(args.out_prefix + "l0.mtx", formats.matrix_text(inst.l0))
        out.write_text(args.out_prefix + "s0.mtx", formats.matrix_text(inst.s0))
        out.write_text(args.out_prefix + "m.mtx", formats.matrix_text(inst.m))
        if inst.w is not None:
            out.write_text(args.out_prefix + "w.mtx", formats.matrix_text(inst.w))
        if inst.features is not None:
            out.write_text(args.out_prefix + "x.mtx", formats.matrix_text(inst.features.x))
            out.write_text(args.out_prefix + "y.mtx", formats.matrix_text(inst.features.y))
        out.write_text(args.out_prefix + "meta.txt", formats.config_text(meta))
    print(f"wrote instance {args.out_prefix}* ({meta['sparse_nonzeros']} corrupted entries)")


def cmd_phase(args):
    _require_output_location(args.out)
    if not args.ranks or not args.rhos:
        raise UsageError("--ranks and --rhos must be non-empty")
    if args.trials < 1 or args.jobs < 1:
        raise UsageError("--trials and --jobs must be positive")
    for r in args.ranks:
        if not 1 <= r <= args.n:
            raise UsageError(f"rank {r} outside [1, {args.n}]")
    for rho in args.rhos:
        if not 0 <= rho <= 1:
            raise UsageError(f"rho {rho} outside [0, 1]")
    if args.solver in ("pcps", "pcpsf", "subtract_baseline") and args.side_model == "none":
        raise UsageError(f"--solver {args.solver} needs --side-model")
    cfg = _solver_config(args)

    def progress(done, total):
        log.info("phase: %d/%d trials", done, total)

    grid = bench.run_phase_grid(args.ranks, args.rhos, args.solver, args.signs, args.side_model,
                                args.trials, cfg, args.seed, args.n, args.d, args.jobs, progress)
    with StagedOutput() as out:
        out.write_text(args.out, formats.phase_csv(grid))
    print(f"{args.solver}: {grid.success_count()} of {len(grid.cells)} cells recovered")


def cmd_sweep(args):
    prefix = args.instance
    _require_files(prefix + "l0.mtx", prefix + "m.mtx", prefix + "w.mtx")
    _require_output_location(args.out)
    if not args.kappas or not args.lambdas:
        raise UsageError("--kappas and --lambdas must be non-empty")
    if any(k < 0 for k in args.kappas) or any(l <= 0 for l in args.lambdas):
        raise UsageError("kappas must be non-negative and lambdas positive")
    l0 = formats.read_matrix(prefix + "l0.mtx")
    m = formats.read_matrix(prefix + "m.mtx")
    w = formats.read_matrix(prefix + "w.mtx")
    if not (l0.shape == m.shape == w.shape):
        raise DimensionError(f"instance shapes differ: l0 {l0.shape}, m {m.shape}, w {w.shape}")
    inst = synth.ProblemInstance(l0=l0, s0=m - l0, m=m, rank=0, sparsity=math.nan,
                                 sign_model="unknown", side_model="file", seed=0, w=w)
    res = bench.run_param_sweep(inst, args.kappas, args.lambdas, _solver_config(args))
    with StagedOutput() as out:
        out.write_text(args.out, formats.sweep_csv(res))
    i, j = np.unravel_index(np.argmin(res.rel_error), res.rel_error.shape)
    print(f"minimum rel_error {res.rel_error[i, j]:.3e} at kappa={res.kappa_axis[i]}, "
          f"lambda={res.lambda_axis[j]}")


def cmd_bgsub(args):
    if args.solver == "pcps" and not args.side:
        raise UsageError("--solver pcps requires --side")
    if not 0 <= args.threshold <= 255:
        raise UsageError("--threshold must lie in [0, 255]")
    _require_dirs(args.frames, args.truth)
    _require_files(args.side)
    _require_output_location(Path(args.out) / "x")
    cfg = _solver_config(args)
    result = imaging.run_bgsub(args.frames, args.side, args.solver, cfg, args.threshold,
                               None, args.truth)
    if args.require_convergence and not result.decomposition.converged:
        raise NotConverged(f"{args.solver} did not converge")
    imaging.write_bgsub_outputs(result, args.out)
    msg = f"{args.solver}: {len(result.background)} frames in {result.elapsed:.1f}s"
    if result.mean_f1 is not None:
        msg += f", mean F1 {result.mean_f1:.4f}"
    print(msg)


def cmd_scene(args):
    _require_output_location(Path(args.out) / "x")
    scene = imaging.moving_square_scene(args.frames, args.height, args.width, args.square,
                                        args.amplitude, args.speed, args.salt_pepper,
                                        seed=args.seed)
    imaging.write_scene(scene, args.out)
    print(f"wrote {args.frames} frames to {args.out}")


COMMANDS = {
    "decompose": cmd_decompose,
    "synth": cmd_synth,
    "phase": cmd_phase,
    "sweep": cmd_sweep,
    "bgsub": cmd_bgsub,
    "scene": cmd_scene,
}


def main(argv=None):
    argv = list(sys.argv[1:] if argv is None else argv)
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        args = parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    except FormatError as exc:
        print(f"sirpca: parse error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except UsageError as exc:
        print(f"sirpca: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"sirpca: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    if args.verbose:
        logging.getLogger().setLevel(logging.INFO if args.verbose == 1 else logging.DEBUG)
    try:
        COMMANDS[args.command](args)
    except FormatError as exc:
        print(f"sirpca: parse error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (UsageError, InvalidInputError, DimensionError, UndefinedCriterionError, ValueError) as exc:
        print(f"sirpca: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"sirpca: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (FactorizationError, ArithmeticError) as exc:
        print(f"sirpca: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except NotConverged as exc:
        print(f"sirpca: {exc}", file=sys.stderr)
        return EXIT_NOT_CONVERGED
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
