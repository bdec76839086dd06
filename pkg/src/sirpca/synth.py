"""Seeded generators for synthetic recovery experiments.

Ground truth is ``L0 = J K^T`` with Gaussian factors of variance ``5e-3``,
corrupted by a sparse ``S0`` whose support is drawn uniformly without
replacement. Side information ``W`` is a perturbed copy of ``L0``.

Randomness comes from :class:`RngSpec`, which hands out one independent
PCG64 stream per named artifact. The low-rank factors, the corruption
support and so on therefore do not depend on which other artifacts are
generated: a PCP instance and a PCPS instance with the same seed share
``L0`` and ``S0`` exactly.
"""

import math
import zlib
from dataclasses import dataclass, field

import numpy as np

from . import matops
from .errors import InvalidInputError
from .solvers import FeaturePair

FACTOR_VARIANCE = 5e-3
ENTRYWISE_VARIANCE_PER_RANK = 2.5e-9
SINGULAR_VALUE_NOISE = 0.01
RETAINED_FRACTION = 0.9

SIGN_MODELS = ("bernoulli", "coherent")
SIDE_MODELS = ("none", "entrywise", "deficient_rank", "distorted_sv", "exact", "observation")


@dataclass(frozen=True)
class RngSpec:
    """Master seed plus a key path, e.g. ``(rank_index, rho_index, trial)``."""

    seed: int
    path: tuple = ()

    def child(self, *keys):
        return RngSpec(self.seed, self.path + tuple(int(k) for k in keys))

    def stream(self, label):
        """Independent generator for the artifact called `label`."""
        key = self.path + (zlib.crc32(label.encode("ascii")),)
        ss = np.random.SeedSequence(entropy=self.seed & (2**64 - 1), spawn_key=key)
        return np.random.Generator(np.random.PCG64(ss))


def _rng(rng):
    return rng if isinstance(rng, RngSpec) else RngSpec(int(rng))


@dataclass
class ProblemInstance:
    l0: np.ndarray
    s0: np.ndarray
    m: np.ndarray
    rank: int
    sparsity: float
    sign_model: str
    side_model: str
    seed: int
    w: np.ndarray | None = None
    features: FeaturePair | None = None
    meta: dict = field(default_factory=dict)


def gen_low_rank(n1, n2, r, rng):
    """``J @ K.T`` with i.i.d. ``N(0, 5e-3)`` factors of width `r`."""
    if not 1 <= r <= min(n1, n2):
        raise InvalidInputError(f"rank must lie in [1, {min(n1, n2)}], got {r}")
    g = _rng(rng).stream("l0")
    sd = math.sqrt(FACTOR_VARIANCE)
    J = g.normal(0.0, sd, size=(n1, r))
    K = g.normal(0.0, sd, size=(n2, r))
    return J @ K.T


def gen_sparse(n1, n2, rho, sign_model="bernoulli", l0=None, rng=0):
    """Sparse corruption with exactly ``round(rho * n1 * n2)`` non-zeros.

    Parameters
    ----------
    sign_model : {"bernoulli", "coherent"}
        ``bernoulli`` draws each non-zero from {-1, +1} with equal
        probability; ``coherent`` copies ``sign(l0)`` on the support.
    l0 : ndarray, optional
        Needed only for the coherent model.
    """
    if not 0 <= rho <= 1:
        raise InvalidInputError(f"sparsity must lie in [0, 1], got {rho}")
    if sign_model not in SIGN_MODELS:
        raise InvalidInputError(f"unknown sign model {sign_model!r}")
    rng = _rng(rng)
    count = int(round(rho * n1 * n2))
    support = rng.stream("support").choice(n1 * n2, size=count, replace=False)
    S = np.zeros(n1 * n2)
    if sign_model == "bernoulli":
        S[support] = rng.stream("signs").choice([-1.0, 1.0], size=count)
    else:
        if l0 is None or l0.shape != (n1, n2):
            raise InvalidInputError("coherent signs need l0 of matching shape")
        S[support] = np.sign(l0.ravel()[support])
    return S.reshape(n1, n2)


def gen_side_entrywise(l0, r, rng, variance_scale=1.0):
    """``L0`` plus i.i.d. ``N(0, 2.5e-9 * r)`` noise (about 1% Frobenius error)."""
    var = ENTRYWISE_VARIANCE_PER_RANK * r * variance_scale
    noise = _rng(rng).stream("side").normal(0.0, math.sqrt(var), size=l0.shape)
    return l0 + noise


def _nonzero_count(sigma):
    if sigma.size == 0 or sigma[0] == 0:
        return 0
    return int(np.count_nonzero(sigma > matops.RANK_RTOL * sigma[0]))


def gen_side_deficient(l0):
    """Hard-threshold ``L0`` to its leading ``ceil(0.9 k)`` of ``k`` singular values."""
    u, s, v = matops.svd(l0)
    k = _nonzero_count(s)
    keep = math.ceil(RETAINED_FRACTION * k)
    return (u[:, :keep] * s[:keep]) @ v[:, :keep].T


def gen_side_distorted(l0, rng):
    """Perturb each singular value to ``sigma (1 + 0.01 g)``, ``g ~ N(0, 1)``.

    Perturbed values that come out negative are clamped to zero.
    """
    u, s, v = matops.svd(l0)
    g = _rng(rng).stream("side").standard_normal(s.size)
    s2 = np.maximum(s * (1.0 + SINGULAR_VALUE_NOISE * g), 0.0)
    return (u * s2) @ v.T


def _complete_basis(basis, d, g):
    n = basis.shape[0]
    B = g.standard_normal((n, d))
    B -= basis @ (basis.T @ B)
    B -= basis @ (basis.T @ B)
    B = matops.orthonormalize(B)
    Q = np.hstack([basis, B])
    return matops.orthonormalize(Q[:, g.permutation(Q.shape[1])])


def gen_features(l0, d, rng):
    """Feasible feature subspaces for `l0`.

    The exact column (row) space of `l0` is padded with `d` random
    orthonormal directions from its orthogonal complement and the columns
    are shuffled.
    """
    if d < 0:
        raise InvalidInputError(f"d must be non-negative, got {d}")
    u, s, v = matops.svd(l0)
    r = _nonzero_count(s)
    n1, n2 = l0.shape
    if r + d > min(n1, n2):
        raise InvalidInputError(f"rank {r} plus {d} extra directions exceeds min dimension {min(n1, n2)}")
    g = _rng(rng).stream("features")
    x = _complete_basis(u[:, :r], d, g)
    y = _complete_basis(v[:, :r], d, g)
    return FeaturePair(x, y)


def assemble_instance(
    n1=200,
    n2=200,
    rank=10,
    rho=0.05,
    sign_model="bernoulli",
    side_model="none",
    d=None,
    seed=0,
    rng=None,
):
    """Compose the generators into a :class:`ProblemInstance`.

    `side_model` is one of ``none``, ``entrywise``, ``deficient_rank``,
    ``distorted_sv``, ``exact`` (``W = L0``) or ``observation``
    (``W = M``). Features are built only when `d` is given.
    """
    if side_model not in SIDE_MODELS:
        raise InvalidInputError(f"unknown side model {side_model!r}")
    rng = rng if rng is not None else RngSpec(int(seed))
    l0 = gen_low_rank(n1, n2, rank, rng)
    s0 = gen_sparse(n1, n2, rho, sign_model, l0, rng)
    m = l0 + s0
    if side_model == "none":
        w = None
    elif side_model == "entrywise":
        w = gen_side_entrywise(l0, rank, rng)
    elif side_model == "deficient_rank":
        w = gen_side_deficient(l0)
    elif side_model == "distorted_sv":
        w = gen_side_distorted(l0, rng)
    elif side_model == "exact":
        w = l0.copy()
    else:
        w = m.copy()
    features = gen_features(l0, d, rng) if d is not None else None
    meta = dict(n1=n1, n2=n2, rank=rank, rho=rho, sign_model=sign_model,
                side_model=side_model, d=d, seed=rng.seed, path=rng.path)
    return ProblemInstance(
        l0=l0, s0=s0, m=m, rank=rank, sparsity=rho, sign_model=sign_model,
        side_model=side_model, seed=rng.seed, w=w, features=features, meta=meta,
    )


def benchmark_instance(seed=0, side_model="none", d=None):
    """The 200x200, rank-10, 5%-corruption calibration problem."""
    return assemble_instance(200, 200, 10, 0.05, "bernoulli", side_model, d, seed)
