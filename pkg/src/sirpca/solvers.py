"""ADMM solver for principal component pursuit with side information and features.

The general problem is

    minimise    ||H||_* + kappa ||E||_* + lambda ||S||_1
    subject to  X H Y^T + S = M,   H - E = X^T W Y

with orthonormal feature matrices ``X`` (n1 x d1) and ``Y`` (n2 x d2).
Every other model in this module is a special case:

* PCP:    ``kappa = 0``, ``W = 0``, ``X = Y = I``
* PCPS:   ``X = Y = I``
* PCPF:   ``kappa = 0``, ``W = 0``
* RAPS:   PCPF with ``Y = I``

Identity features are represented by ``None`` so that large problems
(e.g. video, with ``n1`` in the tens of thousands) never materialise an
``n1 x n1`` identity.
"""

import math
from dataclasses import dataclass, replace
from typing import Callable, NamedTuple

import numpy as np

from . import matops
from .errors import DimensionError, InvalidInputError


@dataclass(frozen=True)
class SolverConfig:
    """Tunables of the ADMM iteration.

    Attributes
    ----------
    lam : float or None
        Sparsity weight. ``None`` resolves to ``1/sqrt(max(n1, n2))`` of the
        observation at solve time.
    kappa : float
        Weight of the side-information term ``||L - W||_*``.
    alpha : float
        Geometric growth ratio of the penalty ``mu``; must exceed 1.
    mu_init : float or None
        Initial penalty. ``None`` means ``1 / ||M||_2``.
    mu_max : float
        Cap on the penalty.
    epsilon : float
        Stopping tolerance on the relative feasibility residuals.
    max_iter : int
        Iteration budget.
    """

    lam: float | None = None
    kappa: float = 0.2
    alpha: float = 1.1
    mu_init: float | None = None
    mu_max: float = 1e18
    epsilon: float = 1e-7
    max_iter: int = 1000

    def __post_init__(self):
        if self.lam is not None and not self.lam > 0:
            raise InvalidInputError(f"lam must be positive, got {self.lam}")
        if not self.kappa >= 0 or not math.isfinite(self.kappa):
            raise InvalidInputError(f"kappa must be non-negative, got {self.kappa}")
        if not self.alpha > 1:
            raise InvalidInputError(f"alpha must exceed 1, got {self.alpha}")
        if not self.epsilon > 0:
            raise InvalidInputError(f"epsilon must be positive, got {self.epsilon}")
        if not self.mu_max > 0:
            raise InvalidInputError(f"mu_max must be positive, got {self.mu_max}")
        if self.mu_init is not None:
            if not self.mu_init > 0:
                raise InvalidInputError(f"mu_init must be positive, got {self.mu_init}")
            if self.mu_max < self.mu_init:
                raise InvalidInputError("mu_max must be at least mu_init")
        if int(self.max_iter) != self.max_iter or self.max_iter < 1:
            raise InvalidInputError(f"max_iter must be a positive integer, got {self.max_iter}")

    def resolve_lambda(self, shape):
        if self.lam is not None:
            return float(self.lam)
        return 1.0 / math.sqrt(max(shape))


@dataclass(frozen=True)
class FeaturePair:
    """Column (``x``) and row (``y``) feature subspaces.

    ``None`` on either side stands for the identity of matching size.
    The solvers orthonormalize both on ingestion.
    """

    x: np.ndarray | None = None
    y: np.ndarray | None = None

    def orthonormalized(self):
        x = None if self.x is None else matops.orthonormalize(self.x)
        y = None if self.y is None else matops.orthonormalize(self.y)
        return FeaturePair(x, y)


@dataclass
class Decomposition:
    """Result of a solve.

    ``core`` is the matrix ``H`` with ``low_rank = X @ core @ Y.T``; with
    identity features it coincides with ``low_rank``.
    """

    low_rank: np.ndarray
    sparse: np.ndarray
    core: np.ndarray
    iterations: int
    converged: bool
    residual_primal: float
    residual_side: float


class IterationInfo(NamedTuple):
    iteration: int
    mu: float
    residual_primal: float
    residual_side: float


def _lift(X, H, Y):
    """``X @ H @ Y.T`` with identity shortcuts."""
    B = H if Y is None else H @ Y.T
    return B if X is None else X @ B


def _project(X, A, Y):
    """``X.T @ A @ Y`` with identity shortcuts."""
    B = A if X is None else X.T @ A
    return B if Y is None else B @ Y


def _check_inputs(M, W, features):
    M = matops.as_matrix(M, "observation")
    n1, n2 = M.shape
    if n1 == 0 or n2 == 0:
        raise DimensionError(f"observation must be non-empty, got {n1}x{n2}")
    if W is None:
        W = np.zeros_like(M)
    else:
        W = matops.as_matrix(W, "side information")
        if W.shape != M.shape:
            raise DimensionError(
                f"side information is {W.shape[0]}x{W.shape[1]}, observation is {n1}x{n2}"
            )
    if features is None:
        features = FeaturePair()
    if features.x is not None:
        x = matops.as_matrix(features.x, "column features")
        if x.shape[0] != n1:
            raise DimensionError(f"column features have {x.shape[0]} rows, observation has {n1}")
    if features.y is not None:
        y = matops.as_matrix(features.y, "row features")
        if y.shape[0] != n2:
            raise DimensionError(f"row features have {y.shape[0]} rows, observation has {n2} columns")
    return M, W, features.orthonormalized()


def solve_pcpsf(
    M,
    W=None,
    features: FeaturePair | None = None,
    cfg: SolverConfig | None = None,
    callback: Callable[[IterationInfo], None] | None = None,
) -> Decomposition:
    """Recover ``L = X H Y^T`` and sparse ``S`` from ``M`` guided by ``W``.

    One cycle updates, in this order: ``S`` by soft-thresholding, ``H`` by
    singular value thresholding projected onto the features, ``E`` by
    singular value thresholding, then both multipliers, then ``mu``. The
    iteration stops once both relative residuals

        ||M - S - X H Y^T||_F / ||M||_F,   ||H - E - X^T W Y||_F / ||M||_F

    are at most ``cfg.epsilon``, or after ``cfg.max_iter`` cycles. In the
    latter case the last iterate is returned with ``converged=False``.

    Parameters
    ----------
    M : (n1, n2) array_like
        Observation.
    W : (n1, n2) array_like, optional
        Side information; zeros when omitted.
    features : FeaturePair, optional
        Feature subspaces; identity when omitted.
    cfg : SolverConfig, optional
    callback : callable, optional
        Called after every cycle with an :class:`IterationInfo`.
    """
    cfg = cfg or SolverConfig()
    M, W, feats = _check_inputs(M, W, features)
    X, Y = feats.x, feats.y
    n1, n2 = M.shape
    d1 = n1 if X is None else X.shape[1]
    d2 = n2 if Y is None else Y.shape[1]
    lam = cfg.resolve_lambda(M.shape)
    kappa = cfg.kappa

    if kappa == 0:
        # the objective no longer depends on W
        W = np.zeros_like(M)

    norm_m = np.linalg.norm(M)
    if norm_m == 0:
        if np.any(W):
            raise InvalidInputError("zero observation with non-zero side information")
        zeros = np.zeros_like(M)
        return Decomposition(zeros, zeros.copy(), np.zeros((d1, d2)), 0, True, 0.0, 0.0)

    mu = cfg.mu_init if cfg.mu_init is not None else 1.0 / matops.spectral_norm(M)
    mu = min(mu, cfg.mu_max)
    D = _project(X, W, Y)
    H = np.zeros((d1, d2))
    E = np.zeros((d1, d2))
    N = np.zeros((d1, d2))
    Z = np.zeros_like(M)
    L = np.zeros_like(M)

    converged = False
    res_p = res_s = math.inf
    k = 0
    for k in range(1, cfg.max_iter + 1):
        S = matops.shrink_matrix(M - L + Z / mu, lam / mu)
        P = 0.5 * (M - S + W + Z / mu + _lift(X, E - N / mu, Y))
        H = _project(X, matops.svt(P, 1.0 / (2.0 * mu)), Y)
        E = matops.svt(H - D + N / mu, kappa / mu)
        L = _lift(X, H, Y)

        primal = M - S - L
        side = H - E - D
        Z = Z + mu * primal
        N = N + mu * side
        res_p = np.linalg.norm(primal) / norm_m
        res_s = np.linalg.norm(side) / norm_m
        if callback is not None:
            callback(IterationInfo(k, mu, res_p, res_s))
        mu = min(mu * cfg.alpha, cfg.mu_max)
        if max(res_p, res_s) <= cfg.epsilon:
            converged = True
            break

    return Decomposition(
        low_rank=L,
        sparse=S,
        core=H,
        iterations=k,
        converged=converged,
        residual_primal=float(res_p),
        residual_side=float(res_s),
    )


def solve_pcps(M, W, cfg=None, callback=None):
    """PCP with side information: features fixed at the identity."""
    if W is None:
        raise InvalidInputError("side information is required")
    return solve_pcpsf(M, W, None, cfg, callback)


def solve_pcp(M, cfg=None, callback=None):
    """Classical principal component pursuit, ``min ||L||_* + lam ||S||_1``."""
    cfg = _with_kappa_zero(cfg)
    return solve_pcpsf(M, None, None, cfg, callback)


def solve_pcpf(M, features, cfg=None, callback=None):
    """PCP with feature subspaces and no side information."""
    if features is None:
        raise InvalidInputError("features are required")
    cfg = _with_kappa_zero(cfg)
    return solve_pcpsf(M, None, features, cfg, callback)


def solve_raps(M, x, cfg=None, callback=None):
    """PCPF restricted to a column-space dictionary (row features = I)."""
    return solve_pcpf(M, FeaturePair(x, None), cfg, callback)


def solve_subtract_baseline(M, W, cfg=None, callback=None):
    """Run PCP on ``M - W`` and add ``W`` back to the low-rank part.

    A naive way to use side information, kept as a comparison point.
    """
    M = matops.as_matrix(M, "observation")
    W = matops.as_matrix(W, "side information")
    if W.shape != M.shape:
        raise DimensionError(
            f"side information is {W.shape[0]}x{W.shape[1]}, observation is {M.shape[0]}x{M.shape[1]}"
        )
    res = solve_pcp(M - W, cfg, callback)
    res.low_rank = res.low_rank + W
    res.core = res.low_rank
    return res


def _with_kappa_zero(cfg):
    cfg = cfg or SolverConfig()
    if cfg.kappa == 0:
        return cfg
    return replace(cfg, kappa=0.0)


def objective(L, S, lam, kappa=0.0, W=None):
    """``||L||_* + kappa ||L - W||_* + lam ||S||_1``."""
    value = matops.nuclear_norm(L) + lam * float(np.abs(S).sum())
    if kappa:
        W = np.zeros_like(L) if W is None else W
        value += kappa * matops.nuclear_norm(L - W)
    return value


SOLVERS = {
    "pcp": lambda M, W, F, cfg: solve_pcp(M, cfg),
    "pcps": lambda M, W, F, cfg: solve_pcps(M, W, cfg),
    "pcpf": lambda M, W, F, cfg: solve_pcpf(M, F, cfg),
    "pcpsf": lambda M, W, F, cfg: solve_pcpsf(M, W, F, cfg),
    "subtract_baseline": lambda M, W, F, cfg: solve_subtract_baseline(M, W, cfg),
}
