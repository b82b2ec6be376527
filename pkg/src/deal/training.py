"""Mini-batch sampling and the joint training loop for both encoders."""

from __future__ import annotations

import csv
import logging
import math
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from .encoders import AttrEncoderParams, StructEncoderParams
from .evaluation import evaluate
from .grad import DealObjective, NonFiniteError, OptimizerState, ParamVector, adam_step, sgd_step
from .graph import AttributedGraph, DistanceCache, SplitSpec, _pair_keys
from .loss import HyperParams, MiniBatch
from .model import TrainedModel

logger = logging.getLogger(__name__)


class SamplingError(RuntimeError):
    pass


class TrainingError(RuntimeError):
    """Training hit a non-finite loss; carries the offending batch and the curve so far."""

    def __init__(self, message: str, epoch: int, batch: MiniBatch, curve: list):
        super().__init__(message)
        self.epoch = epoch
        self.batch = batch
        self.curve = curve


@dataclass
class TrainConfig:
    hp: HyperParams = field(default_factory=HyperParams)
    epochs: int = 500
    batches_per_epoch: int | None = None
    eval_every: int = 5
    patience: int = 10
    lr: float = 1e-2
    optimizer: str = "adam"
    adam_beta1: float = 0.9
    adam_beta2: float = 0.999
    adam_eps: float = 1e-8
    seed: int = 0
    hidden_dims: tuple = (256,)
    embed_dim: int = 64
    elu_alpha: float = 1.0
    d_max: int = 5
    symmetrize_scores: bool = False

    def __post_init__(self):
        self.hidden_dims = tuple(int(h) for h in self.hidden_dims)
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")
        if self.hp.pos_frac * self.hp.batch_size < 1:
            raise ValueError("pos_frac * batch_size must be >= 1")
        if self.eval_every < 1 or self.patience < 1:
            raise ValueError("eval_every and patience must be >= 1")
        if self.optimizer not in ("adam", "sgd"):
            raise ValueError(f"unknown optimizer {self.optimizer!r}")

    def with_seed(self, seed: int) -> "TrainConfig":
        return replace(self, seed=seed)

    def to_dict(self) -> dict:
        return asdict(self)


def _round_half_up(x: float) -> int:
    return int(math.floor(x + 0.5))


class BatchSampler:
    """Draws mini-batches of linked (positive) and unlinked (negative) training pairs.

    Positives are train edges drawn uniformly with a random orientation.
    Negatives are uniform pairs of distinct training nodes that are not train
    edges, annotated with their hop distance in the training graph.
    """

    def __init__(self, graph: AttributedGraph, split: SplitSpec, hp: HyperParams, dist: DistanceCache):
        self.train_edges = split.train_edges
        if len(self.train_edges) == 0:
            raise SamplingError("no training edges to sample from")
        self.n = graph.num_nodes
        self.train_keys = np.sort(_pair_keys(self.train_edges, self.n))
        self.nodes = split.training_nodes(graph.num_nodes)
        self.dist = dist
        self.n_pos = _round_half_up(hp.pos_frac * hp.batch_size)
        self.n_neg = hp.batch_size - self.n_pos

    def _is_train_edge(self, u, v) -> np.ndarray:
        keys = _pair_keys(np.column_stack([u, v]), self.n)
        pos = np.minimum(np.searchsorted(self.train_keys, keys), self.train_keys.size - 1)
        return self.train_keys[pos] == keys

    def sample(self, rng: np.random.Generator) -> MiniBatch:
        idx = rng.integers(0, len(self.train_edges), size=self.n_pos)
        flip = rng.random(self.n_pos) < 0.5
        e = self.train_edges[idx]
        pp = np.where(flip, e[:, 1], e[:, 0])
        pq = np.where(flip, e[:, 0], e[:, 1])

        nu, nv = [], []
        need, tries, cap = self.n_neg, 0, 100 * self.n_neg
        while need > 0:
            if tries >= cap:
                raise SamplingError(f"rejection sampling found only {self.n_neg - need} of "
                                    f"{self.n_neg} negative pairs")
            size = min(max(2 * need, 8), cap - tries)
            u = self.nodes[rng.integers(0, self.nodes.size, size=size)]
            v = self.nodes[rng.integers(0, self.nodes.size, size=size)]
            tries += size
            ok = (u != v) & ~self._is_train_edge(u, v)
            u, v = u[ok][:need], v[ok][:need]
            nu.append(u)
            nv.append(v)
            need -= u.size
        nu = np.concatenate(nu) if nu else np.zeros(0, dtype=np.int64)
        nv = np.concatenate(nv) if nv else np.zeros(0, dtype=np.int64)
        nd = np.array([self.dist.distance(int(a), int(b)) for a, b in zip(nu, nv)])

        return MiniBatch(
            p=np.concatenate([pp, nu]),
            q=np.concatenate([pq, nv]),
            y=np.concatenate([np.ones(self.n_pos, dtype=np.int64), np.zeros(nu.size, dtype=np.int64)]),
            d=np.concatenate([np.ones(self.n_pos), nd]),
        )


def training_graph(graph: AttributedGraph, split: SplitSpec) -> AttributedGraph:
    return AttributedGraph(graph.num_nodes, graph.num_attrs, split.train_edges, graph.features)


def sample_minibatch(graph: AttributedGraph, split: SplitSpec, hp: HyperParams, dist: DistanceCache,
                     rng: np.random.Generator) -> MiniBatch:
    return BatchSampler(graph, split, hp, dist).sample(rng)


def default_batches_per_epoch(num_train_edges: int, hp: HyperParams) -> int:
    return max(1, math.ceil(num_train_edges / (hp.pos_frac * hp.batch_size)))


def init_params(graph: AttributedGraph, cfg: TrainConfig, rng: np.random.Generator) -> ParamVector:
    attr = AttrEncoderParams.init(rng, graph.num_attrs, cfg.hidden_dims, cfg.embed_dim, cfg.elu_alpha)
    struct = StructEncoderParams.init(rng, graph.num_nodes, cfg.embed_dim)
    return ParamVector.pack(attr, struct)


def train(graph: AttributedGraph, split: SplitSpec, cfg: TrainConfig, batch_hook=None) -> TrainedModel:
    """Train both encoders jointly and return the best-validation snapshot.

    ``batch_hook(epoch, batch)`` is called for every sampled batch (used by
    tests to inspect batches).
    """
    hp = cfg.hp
    rng = np.random.default_rng(cfg.seed)
    params = init_params(graph, cfg, rng)
    step = adam_step if cfg.optimizer == "adam" else sgd_step
    state = OptimizerState.zeros(len(params), lr=cfg.lr, beta1=cfg.adam_beta1,
                                 beta2=cfg.adam_beta2, eps=cfg.adam_eps)

    train_nodes = split.training_nodes(graph.num_nodes)
    mask = np.zeros(graph.num_nodes, dtype=bool)
    mask[train_nodes] = True
    dist = DistanceCache(training_graph(graph, split), cfg.d_max, lazy=True)
    sampler = BatchSampler(graph, split, hp, dist)
    bpe = cfg.batches_per_epoch or default_batches_per_epoch(len(split.train_edges), hp)
    align_nodes = train_nodes if hp.tight_scope == "all" else None
    has_val = len(split.val_pos) > 0 and len(split.val_neg) > 0

    attr_view, struct_view = params.unpack(cfg.elu_alpha)
    live = TrainedModel(attr_view, struct_view, hp, mask, features=graph.features)

    best = {"auc": -math.inf, "ap": math.nan, "epoch": 0}
    best_data = params.data.copy()
    curve = []
    stale = 0
    for epoch in range(1, cfg.epochs + 1):
        losses = []
        for _ in range(bpe):
            batch = sampler.sample(rng)
            if batch_hook is not None:
                batch_hook(epoch, batch)
            objective = DealObjective(batch, graph.features, hp, cfg.elu_alpha, align_nodes)
            try:
                value, grad = objective.value_and_grad(params)
            except NonFiniteError as exc:
                raise TrainingError(f"epoch {epoch}: {exc}", epoch, batch, curve) from exc
            step(params, grad, state)
            losses.append(value)
        row = {"epoch": epoch, "mean_train_loss": float(np.mean(losses)),
               "val_auc": None, "val_ap": None, "snapshot_taken": False}

        if has_val and (epoch % cfg.eval_every == 0 or epoch == cfg.epochs):
            m = evaluate(live, split, which="val", symmetrize=cfg.symmetrize_scores)
            row["val_auc"], row["val_ap"] = m.auc, m.ap
            if m.auc > best["auc"]:
                best = {"auc": m.auc, "ap": m.ap, "epoch": epoch}
                best_data = params.data.copy()
                row["snapshot_taken"] = True
                stale = 0
            else:
                stale += 1
            logger.info("epoch %d loss %.5f val auc %.4f ap %.4f", epoch, row["mean_train_loss"], m.auc, m.ap)
        curve.append(row)
        if has_val and stale >= cfg.patience:
            break

    if not has_val:
        best_data = params.data.copy()
        best = {"epoch": curve[-1]["epoch"]}
        curve[-1]["snapshot_taken"] = True
    attr, struct = params.with_data(best_data).unpack(cfg.elu_alpha)
    return TrainedModel(attr, struct, hp, mask, best_val=best, curve=curve, features=graph.features)


REPORT_COLUMNS = ("epoch", "mean_train_loss", "val_auc", "val_ap", "snapshot_taken")


def write_run_report(curve, path, extra_rows=None):
    with open(path, "w", newline="", encoding="utf-8") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(REPORT_COLUMNS)
        for row in curve:
            w.writerow(["" if row[c] is None else (repr(row[c]) if isinstance(row[c], float) else row[c])
                        for c in REPORT_COLUMNS])
        for extra in extra_rows or ():
            w.writerow(extra)
