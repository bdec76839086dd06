"""Recoverability experiments: phase grids and parameter sweeps."""

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import NamedTuple

import numpy as np

from .errors import SirpcaError, UndefinedCriterionError
from .solvers import SOLVERS, SolverConfig, solve_pcps
from .synth import RngSpec, assemble_instance

log = logging.getLogger(__name__)

SUCCESS_THRESHOLD = 1e-3

DEFAULT_RANKS = (10, 35, 60, 85, 110)
DEFAULT_RHOS = (0.05, 0.15, 0.25, 0.35, 0.45)


class Recovery(NamedTuple):
    success: bool
    rel_error: float


def relative_error(l, l0):
    l0 = np.asarray(l0, dtype=float)
    denom = np.linalg.norm(l0)
    if denom == 0:
        raise UndefinedCriterionError("relative error is undefined for a zero ground truth")
    return float(np.linalg.norm(np.asarray(l, dtype=float) - l0) / denom)


def is_recovered(rel_error):
    """Strict test ``rel_error < 1e-3``."""
    return bool(rel_error < SUCCESS_THRESHOLD)


def success(l, l0):
    """Relative Frobenius error of `l` against `l0` and the recovery verdict."""
    err = relative_error(l, l0)
    return Recovery(is_recovered(err), err)


@dataclass
class Cell:
    """Trial outcomes at one (rank, sparsity) point.

    ``outcomes[t]`` is the relative error of trial ``t``, or ``None`` when
    the solve raised.
    """

    rank: int
    rho: float
    outcomes: list = field(default_factory=list)

    @property
    def rel_errors(self):
        return [e for e in self.outcomes if e is not None]

    @property
    def errored(self):
        return any(e is None for e in self.outcomes)

    @property
    def successes(self):
        return sum(1 for e in self.rel_errors if is_recovered(e))

    @property
    def success(self):
        return bool(self.outcomes) and self.successes == len(self.outcomes)


@dataclass
class PhaseGrid:
    rank_axis: list
    sparsity_axis: list
    trials_per_cell: int
    solver_id: str
    sign_model: str
    side_model: str
    cells: dict = field(default_factory=dict)

    def cell(self, rank, rho):
        return self.cells[(rank, rho)]

    def success_set(self):
        return {key for key, c in self.cells.items() if c.success}

    def success_count(self):
        return len(self.success_set())


def _side_model_for(solver_id, side_model):
    if solver_id in ("pcps", "pcpsf", "subtract_baseline") and side_model == "none":
        raise ValueError(f"solver {solver_id} needs a side-information model")
    return side_model


def _run_trial(task):
    (n, rank, rho, sign_model, side_model, d, rng, solver_id, cfg) = task
    inst = assemble_instance(n, n, rank, rho, sign_model, side_model,
                             d if solver_id in ("pcpf", "pcpsf") else None, rng=rng)
    try:
        res = SOLVERS[solver_id](inst.m, inst.w, inst.features, cfg)
        err = relative_error(res.low_rank, inst.l0)
    except (SirpcaError, ArithmeticError) as exc:
        log.warning("trial r=%s rho=%s path=%s failed: %s", rank, rho, rng.path, exc)
        return None
    return err if math.isfinite(err) else None


def run_phase_grid(
    ranks=DEFAULT_RANKS,
    rhos=DEFAULT_RHOS,
    solver="pcp",
    sign_model="bernoulli",
    side_model="none",
    trials=3,
    cfg=None,
    seed=0,
    n=200,
    d=10,
    jobs=1,
    progress=None,
):
    """Evaluate recoverability over a (rank, sparsity) lattice.

    Each trial builds a fresh ``n x n`` instance from the seed path
    ``(seed, rank_index, rho_index, trial)``, so a grid whose axes are
    prefixes of another's reproduces the shared cells exactly. Instances do not depend on
    the solver, which makes grids for different solvers directly
    comparable.

    Parameters
    ----------
    solver : str
        One of ``pcp``, ``pcps``, ``pcpf``, ``pcpsf``, ``subtract_baseline``.
    d : int
        Extra feature directions for ``pcpf`` / ``pcpsf``.
    jobs : int
        Worker processes; 1 runs in-process.
    progress : callable, optional
        Called as ``progress(done, total)`` after each trial.
    """
    if solver not in SOLVERS:
        raise ValueError(f"unknown solver {solver!r}")
    if not ranks or not rhos:
        raise ValueError("grid axes must be non-empty")
    if trials < 1:
        raise ValueError("trials must be at least 1")
    side_model = _side_model_for(solver, side_model)
    cfg = cfg or SolverConfig()
    master = RngSpec(int(seed))
    grid = PhaseGrid(list(ranks), list(rhos), trials, solver, sign_model, side_model)

    keys, tasks = [], []
    for i, r in enumerate(ranks):
        for j, rho in enumerate(rhos):
            grid.cells[(r, rho)] = Cell(r, rho, [None] * trials)
            for t in range(trials):
                keys.append((r, rho, t))
                tasks.append((n, r, rho, sign_model, side_model, d,
                              master.child(i, j, t), solver, cfg))

    def record(key, outcome, done):
        r, rho, t = key
        grid.cells[(r, rho)].outcomes[t] = outcome
        log.info("%s r=%d rho=%g trial=%d rel_error=%s", solver, r, rho, t, outcome)
        if progress is not None:
            progress(done, len(tasks))

    if jobs <= 1:
        for done, (key, task) in enumerate(zip(keys, tasks), 1):
            record(key, _run_trial(task), done)
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            for done, (key, out) in enumerate(zip(keys, pool.map(_run_trial, tasks)), 1):
                record(key, out, done)
    return grid


@dataclass
class SweepGrid:
    kappa_axis: list
    lambda_axis: list
    rel_error: np.ndarray
    errored: np.ndarray
    side_model: str


def run_param_sweep(instance, kappas, lambdas, cfg=None):
    """Relative error of PCPS over a kappa x lambda lattice on one instance.

    ``kappa = 0`` is allowed and reduces to plain PCP.
    """
    if instance.w is None:
        raise ValueError("parameter sweep needs an instance with side information")
    if any(k < 0 for k in kappas) or any(l <= 0 for l in lambdas):
        raise ValueError("kappa values must be non-negative and lambda values positive")
    cfg = cfg or SolverConfig()
    err = np.zeros((len(kappas), len(lambdas)))
    bad = np.zeros(err.shape, dtype=bool)
    for i, kappa in enumerate(kappas):
        for j, lam in enumerate(lambdas):
            try:
                res = solve_pcps(instance.m, instance.w, replace(cfg, kappa=kappa, lam=lam))
                err[i, j] = relative_error(res.low_rank, instance.l0)
            except (SirpcaError, ArithmeticError) as exc:
                log.warning("sweep kappa=%g lambda=%g failed: %s", kappa, lam, exc)
                err[i, j] = math.inf
                bad[i, j] = True
            log.info("sweep kappa=%g lambda=%g rel_error=%.3e", kappa, lam, err[i, j])
    return SweepGrid(list(kappas), list(lambdas), err, bad, instance.side_model)
