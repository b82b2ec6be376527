"""Ranking and alignment objectives.

Every loss here takes embeddings as a matrix whose row ``i`` belongs to node
id ``i`` as it appears in the batch (callers remap ids when they only encode
the nodes touched by a batch).
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .encoders import EmbeddingMatrix, ShapeError, rowwise_cosine

TIGHT = "tight"
LOOSE = "loose"

SOFTPLUS_CUTOFF = 30.0


@dataclass
class HyperParams:
    """Knobs of the objective and of the link score.

    ``beta=None`` switches the distance weighting off (every negative gets
    weight 1). ``lam=None`` means "use the default for the split mode".
    """

    gamma1: float = 1.0
    b1: float = 0.0
    gamma2: float = 1.0
    b2: float = 0.0
    beta: float | None = 1.0
    theta: tuple = (1.0, 1.0, 1.0)
    lam: tuple | None = None
    align_mode: str = LOOSE
    tight_scope: str = "batch"
    symmetrize_loose_align: bool = False
    batch_size: int = 512
    pos_frac: float = 0.4

    def __post_init__(self):
        self.theta = tuple(float(t) for t in self.theta)
        if self.lam is not None:
            self.lam = tuple(float(t) for t in self.lam)
            if len(self.lam) != 3:
                raise ValueError("lambda needs three components")
        if self.gamma1 <= 0 or self.gamma2 <= 0:
            raise ValueError("gamma1 and gamma2 must be positive")
        if self.beta is not None and self.beta <= 0:
            raise ValueError("beta must be positive (use None to disable distance weighting)")
        if not 0 < self.pos_frac < 1:
            raise ValueError("pos_frac must lie in (0, 1)")
        if len(self.theta) != 3 or min(self.theta) < 0 or max(self.theta) == 0:
            raise ValueError("theta needs three non-negative components, not all zero")
        if self.align_mode not in (TIGHT, LOOSE):
            raise ValueError(f"align_mode must be 'tight' or 'loose', got {self.align_mode!r}")
        if self.tight_scope not in ("batch", "all"):
            raise ValueError("tight_scope must be 'batch' or 'all'")
        if self.batch_size < 2:
            raise ValueError("batch_size must be >= 2")

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class MiniBatch:
    """Node pairs ``(p[i], q[i])`` with link label ``y[i]`` and hop distance ``d[i]``."""

    p: np.ndarray
    q: np.ndarray
    y: np.ndarray
    d: np.ndarray = field(default=None)

    def __post_init__(self):
        self.p = np.asarray(self.p, dtype=np.int64).reshape(-1)
        self.q = np.asarray(self.q, dtype=np.int64).reshape(-1)
        self.y = np.asarray(self.y, dtype=np.int64).reshape(-1)
        if self.d is None:
            self.d = np.where(self.y == 1, 1.0, math.inf)
        self.d = np.asarray(self.d, dtype=np.float64).reshape(-1)
        k = self.p.size
        if not (self.q.size == self.y.size == self.d.size == k):
            raise ShapeError("batch fields must have equal length")
        if np.any(self.p == self.q):
            raise ValueError("batch pairs need distinct endpoints")
        if np.any((self.y == 1) & (self.d != 1)):
            raise ValueError("linked pairs must have hop distance 1")
        if np.any((self.y == 0) & (self.d < 2)):
            raise ValueError("unlinked pairs must have hop distance >= 2")

    def __len__(self):
        return self.p.size

    def nodes(self) -> np.ndarray:
        return np.unique(np.concatenate([self.p, self.q]))

    def remap(self):
        """Return ``(nodes, local_batch)`` with ids replaced by positions in ``nodes``."""
        nodes = self.nodes()
        local = MiniBatch(np.searchsorted(nodes, self.p), np.searchsorted(nodes, self.q), self.y, self.d)
        return nodes, local


def _rows(emb) -> np.ndarray:
    return emb.rows if isinstance(emb, EmbeddingMatrix) else np.asarray(emb, dtype=np.float64)


def generalized_logistic(x, gamma: float, b: float = 0.0):
    """``log(1 + exp(-gamma * x + b)) / gamma`` without overflow."""
    if gamma <= 0:
        raise ValueError("gamma must be positive")
    t = -gamma * np.asarray(x, dtype=np.float64) + b
    out = np.where(t > SOFTPLUS_CUTOFF, t, np.log1p(np.exp(np.minimum(t, SOFTPLUS_CUTOFF))))
    out = out / gamma
    return float(out) if out.ndim == 0 else out


def generalized_logistic_grad(x, gamma: float, b: float = 0.0):
    """Derivative of :func:`generalized_logistic` in ``x``: ``-sigmoid(-gamma*x + b)``."""
    t = -gamma * np.asarray(x, dtype=np.float64) + b
    return -_sigmoid(t)


def _sigmoid(t):
    e = np.exp(-np.abs(t))
    return np.where(t >= 0, 1.0 / (1.0 + e), e / (1.0 + e))


def negative_weight(d_sp, beta: float | None):
    d = np.asarray(d_sp, dtype=np.float64)
    if beta is None:
        out = np.ones_like(d)
    else:
        out = np.exp(beta / d)  # beta / inf == 0
    return float(out) if out.ndim == 0 else out


def pair_losses(s: np.ndarray, batch: MiniBatch, hp: HyperParams):
    """Per-pair loss terms and their derivative with respect to the similarity."""
    y = batch.y.astype(np.float64)
    alpha = negative_weight(batch.d, hp.beta)
    neg = alpha * generalized_logistic(-s, hp.gamma1, hp.b1)
    pos = generalized_logistic(s, hp.gamma2, hp.b2)
    terms = (1.0 - y) * neg + y * pos
    dneg = -alpha * generalized_logistic_grad(-s, hp.gamma1, hp.b1)
    dpos = generalized_logistic_grad(s, hp.gamma2, hp.b2)
    dterms = (1.0 - y) * dneg + y * dpos
    return np.atleast_1d(terms), np.atleast_1d(dterms)


def ranking_loss(batch: MiniBatch, emb, hp: HyperParams) -> float:
    if len(batch) == 0:
        raise ValueError("empty batch")
    z = _rows(emb)
    s = rowwise_cosine(z[batch.p], z[batch.q])
    terms, _ = pair_losses(s, batch, hp)
    return float(terms.sum() / len(batch))


def tight_align_loss(z_s, z_a) -> float:
    zs, za = _rows(z_s), _rows(z_a)
    if zs.shape[0] != za.shape[0]:
        raise ShapeError(f"row counts differ: {zs.shape[0]} vs {za.shape[0]}")
    if zs.shape[0] == 0:
        raise ValueError("no rows to align")
    return float(-rowwise_cosine(zs, za).sum() / zs.shape[0])


def loose_align_loss(batch: MiniBatch, z_s, z_a, hp: HyperParams) -> float:
    if len(batch) == 0:
        raise ValueError("empty batch")
    zs, za = _rows(z_s), _rows(z_a)
    terms, _ = pair_losses(rowwise_cosine(zs[batch.p], za[batch.q]), batch, hp)
    total = terms.sum()
    if hp.symmetrize_loose_align:
        mirrored, _ = pair_losses(rowwise_cosine(zs[batch.q], za[batch.p]), batch, hp)
        total += mirrored.sum()
    return float(total / len(batch))


def align_loss(batch: MiniBatch, z_s, z_a, hp: HyperParams, align_nodes=None) -> float:
    """Dispatch on ``hp.align_mode``; tight alignment averages over ``align_nodes``
    (default: the nodes of the batch)."""
    if hp.align_mode == TIGHT:
        nodes = batch.nodes() if align_nodes is None else np.asarray(align_nodes)
        return tight_align_loss(_rows(z_s)[nodes], _rows(z_a)[nodes])
    return loose_align_loss(batch, z_s, z_a, hp)


def total_loss(batch: MiniBatch, z_s, z_a, hp: HyperParams, align_nodes=None) -> float:
    t1, t2, t3 = hp.theta
    out = 0.0
    if t1:
        out += t1 * ranking_loss(batch, z_s, hp)
    if t2:
        out += t2 * ranking_loss(batch, z_a, hp)
    if t3:
        out += t3 * align_loss(batch, z_s, z_a, hp, align_nodes)
    return out
