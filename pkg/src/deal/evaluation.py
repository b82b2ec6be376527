"""Link scoring, ranking metrics, multi-trial runs and hop-similarity profiles."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import rankdata

from .encoders import ATTRIBUTE, STRUCTURE, ShapeError, cosine_similarity, rowwise_cosine
from .graph import INDUCTIVE, TRANSDUCTIVE, AttributedGraph, DistanceCache, SplitSpec
from .model import TrainedModel

DEFAULT_LAMBDA = {
    TRANSDUCTIVE: (1 / 3, 1 / 3, 1 / 3),
    INDUCTIVE: (0.0, 0.7, 0.3),
}


class MetricError(ValueError):
    pass


def default_lambda(mode: str, hp=None) -> tuple:
    if hp is not None and hp.lam is not None:
        return tuple(hp.lam)
    return DEFAULT_LAMBDA[mode]


# --------------------------------------------------------------------------
# scoring


def _endpoint(model: TrainedModel, x):
    """Return ``(z_s or None, z_a)`` for a node id or a raw attribute vector."""
    if isinstance(x, (int, np.integer)):
        x = int(x)
        if not 0 <= x < model.num_nodes:
            raise IndexError(f"node id {x} out of range")
        z_a = model.attribute_embeddings([x])[0]
        z_s = model.structure_embeddings([x])[0] if model.trained_mask[x] else None
        return z_s, z_a
    vec = np.asarray(x, dtype=np.float64).reshape(1, -1) if not hasattr(x, "tocsr") else x
    if vec.shape[1] != model.attr.in_dim:
        raise ShapeError(f"attribute vector has width {vec.shape[1]}, model expects {model.attr.in_dim}")
    return None, model.attribute_embeddings(features=vec)[0]


def link_score(model: TrainedModel, p, q, lam) -> float:
    """Weighted sum of the three cosine similarities between endpoints ``p`` and ``q``.

    Each endpoint is a node id or an attribute vector. Terms that need a
    structure embedding the endpoint does not have are dropped.
    """
    l1, l2, l3 = lam
    zs_p, za_p = _endpoint(model, p)
    zs_q, za_q = _endpoint(model, q)
    score = l2 * cosine_similarity(za_p, za_q)
    if zs_p is not None and zs_q is not None:
        score += l1 * cosine_similarity(zs_p, zs_q)
    if zs_p is not None:
        score += l3 * cosine_similarity(zs_p, za_q)
    return float(score)


def score_pairs(model: TrainedModel, pairs, lam, symmetrize: bool = False) -> np.ndarray:
    """Vectorized :func:`link_score` over ``[k, 2]`` node-id pairs.

    Nodes whose structure embedding was not trained count as new nodes.
    """
    pairs = np.asarray(pairs, dtype=np.int64).reshape(-1, 2)
    if pairs.size == 0:
        return np.zeros(0)
    l1, l2, l3 = lam
    nodes = np.unique(pairs)
    pi = np.searchsorted(nodes, pairs[:, 0])
    qi = np.searchsorted(nodes, pairs[:, 1])
    za = model.attribute_embeddings(nodes)
    zs = model.structure_embeddings(nodes)
    known = model.trained_mask[nodes]

    def one_way(a, b):
        out = l2 * rowwise_cosine(za[a], za[b])
        both = known[a] & known[b]
        if l1:
            out += np.where(both, l1 * rowwise_cosine(zs[a], zs[b]), 0.0)
        if l3:
            out += np.where(known[a], l3 * rowwise_cosine(zs[a], za[b]), 0.0)
        return out

    scores = one_way(pi, qi)
    if symmetrize:
        scores = 0.5 * (scores + one_way(qi, pi))
    return scores


# --------------------------------------------------------------------------
# metrics


def _check_binary(labels, scores):
    y = np.asarray(labels).reshape(-1)
    s = np.asarray(scores, dtype=np.float64).reshape(-1)
    if y.shape != s.shape:
        raise MetricError(f"{y.size} labels vs {s.size} scores")
    if not np.all((y == 0) | (y == 1)):
        raise MetricError("labels must be 0/1")
    npos = int(y.sum())
    if npos == 0 or npos == y.size:
        raise MetricError("need at least one positive and one negative")
    return y.astype(np.int64), s


def auc(labels, scores) -> float:
    """Mann-Whitney AUC with average ranks for ties."""
    y, s = _check_binary(labels, scores)
    ranks = rankdata(s, method="average")
    npos = int(y.sum())
    nneg = y.size - npos
    u = ranks[y == 1].sum() - npos * (npos + 1) / 2.0
    return float(u / (npos * nneg))


def average_precision(labels, scores) -> float:
    """Mean precision at the rank of each positive (stable descending sort)."""
    y, s = _check_binary(labels, scores)
    order = np.argsort(-s, kind="stable")
    ranked = y[order]
    hits = np.cumsum(ranked)
    ranks = np.arange(1, y.size + 1)
    precisions = hits[ranked == 1] / ranks[ranked == 1]
    return math.fsum(precisions.tolist()) / int(y.sum())


@dataclass
class Metrics:
    auc: float
    ap: float
    trial_values: list = field(default_factory=list)
    auc_std: float = 0.0
    ap_std: float = 0.0

    @classmethod
    def aggregate(cls, trial_values) -> "Metrics":
        vals = np.asarray(trial_values, dtype=np.float64).reshape(-1, 2)
        if len(vals) == 0:
            raise ValueError("no trials to aggregate")
        mean = vals.mean(axis=0)
        std = vals.std(axis=0, ddof=1) if len(vals) > 1 else np.zeros(2)
        return cls(float(mean[0]), float(mean[1]), [tuple(map(float, v)) for v in vals],
                   float(std[0]), float(std[1]))


def evaluate(model: TrainedModel, split: SplitSpec, lam=None, which: str = "test",
             symmetrize: bool = False) -> Metrics:
    pairs, labels = split.pairs(which)
    lam = default_lambda(split.mode, model.hp) if lam is None else lam
    scores = score_pairs(model, pairs, lam, symmetrize)
    a, p = auc(labels, scores), average_precision(labels, scores)
    return Metrics(a, p, [(a, p)])


@dataclass
class SplitRecipe:
    mode: str = TRANSDUCTIVE
    val_frac: float = 0.1
    test_frac: float = 0.1
    hidden_frac: float = 0.1

    def make(self, graph: AttributedGraph, seed: int) -> SplitSpec:
        from .graph import split_inductive, split_transductive
        if self.mode == TRANSDUCTIVE:
            return split_transductive(graph, self.val_frac, self.test_frac, seed)
        if self.mode == INDUCTIVE:
            return split_inductive(graph, self.hidden_frac, self.val_frac, seed)
        raise ValueError(f"unknown split mode {self.mode!r}")


class TrialError(RuntimeError):
    def __init__(self, trial: int, cause: Exception):
        super().__init__(f"trial {trial} failed: {cause}")
        self.trial = trial


def _run_one(args):
    from .training import train
    graph, recipe, cfg, seed, symmetrize = args
    split = recipe.make(graph, seed)
    model = train(graph, split, cfg.with_seed(seed))
    m = evaluate(model, split, which="test", symmetrize=symmetrize)
    return m.auc, m.ap


def run_trials(graph: AttributedGraph, split_recipe: SplitRecipe, cfg, trials: int = 10,
               base_seed: int | None = None, symmetrize: bool = False, workers: int = 1) -> Metrics:
    """Train and test ``trials`` times with seeds ``base_seed + t``."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    base = cfg.seed if base_seed is None else base_seed
    jobs = [(graph, split_recipe, cfg, base + t, symmetrize) for t in range(trials)]
    results = []
    if workers > 1:
        from concurrent.futures import ProcessPoolExecutor
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(_run_one, job) for job in jobs]
            for t, fut in enumerate(futures):
                try:
                    results.append(fut.result())
                except Exception as exc:
                    raise TrialError(t, exc) from exc
    else:
        for t, job in enumerate(jobs):
            try:
                results.append(_run_one(job))
            except Exception as exc:
                raise TrialError(t, exc) from exc
    return Metrics.aggregate(results)


# --------------------------------------------------------------------------
# hop-similarity diagnostic


def hop_pairs(graph: AttributedGraph, h_max: int, rng: np.random.Generator,
              max_pairs: int = 20000, max_sources: int = 5000) -> dict:
    """Node pairs grouped by exact hop distance ``1..h_max``.

    All sources are used on graphs with at most ``max_sources`` nodes (each
    unordered pair counted once); larger graphs use a uniform sample of
    sources. Each hop is subsampled uniformly to ``max_pairs``.
    """
    n = graph.num_nodes
    cache = DistanceCache(graph, d_max=h_max, lazy=True)
    if n <= max_sources:
        sources, dedupe = np.arange(n), True
    else:
        sources, dedupe = np.sort(rng.choice(n, size=max_sources, replace=False)), False
    buckets: dict[int, list] = {h: [] for h in range(1, h_max + 1)}
    for s in sources:
        ids, dist = cache.row(int(s))
        keep = ids > s if dedupe else ids != s
        ids, dist = ids[keep], dist[keep]
        for h in range(1, h_max + 1):
            sel = ids[dist == h]
            if sel.size:
                buckets[h].append(np.column_stack([np.full(sel.size, s), sel]))
        cache._rows.pop(int(s), None)
    out = {}
    for h, chunks in buckets.items():
        if not chunks:
            continue
        pairs = np.concatenate(chunks)
        if len(pairs) > max_pairs:
            pairs = pairs[np.sort(rng.choice(len(pairs), size=max_pairs, replace=False))]
        out[h] = pairs
    return out


def hop_similarity_profile(model: TrainedModel, graph: AttributedGraph, h_max: int,
                           kind: str = STRUCTURE, max_pairs: int = 20000, seed: int = 0):
    """Mean cosine similarity of node pairs at each exact hop distance.

    Returns a list of ``(hop, mean_cosine, pair_count)``; hops without any
    pair are omitted.
    """
    if h_max < 1:
        raise ValueError("h_max must be >= 1")
    if kind == STRUCTURE:
        z = model.structure_embeddings()
    elif kind == ATTRIBUTE:
        z = model.attribute_embeddings(features=graph.features)
    else:
        raise ValueError(f"unknown embedding kind {kind!r}")
    rng = np.random.default_rng(seed)
    profile = []
    for h, pairs in sorted(hop_pairs(graph, h_max, rng, max_pairs).items()):
        s = rowwise_cosine(z[pairs[:, 0]], z[pairs[:, 1]])
        profile.append((h, float(s.mean()), int(len(pairs))))
    return profile


# --------------------------------------------------------------------------
# reports


def write_metrics_csv(metrics: Metrics, path):
    with open(path, "w", newline="", encoding="utf-8") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["trial", "auc", "ap"])
        for t, (a, p) in enumerate(metrics.trial_values):
            w.writerow([t, repr(float(a)), repr(float(p))])
        w.writerow(["mean", repr(float(metrics.auc)), repr(float(metrics.ap))])
        w.writerow(["stddev", repr(float(metrics.auc_std)), repr(float(metrics.ap_std))])


def read_metrics_csv(path) -> Metrics:
    with open(path, newline="", encoding="utf-8") as f:
        rows = list(csv.reader(f))
    trials = [(float(r[1]), float(r[2])) for r in rows[1:] if r[0] not in ("mean", "stddev")]
    footer = {r[0]: (float(r[1]), float(r[2])) for r in rows[1:] if r[0] in ("mean", "stddev")}
    return Metrics(footer["mean"][0], footer["mean"][1], trials, footer["stddev"][0], footer["stddev"][1])


def write_hop_profile_csv(profile, path):
    with open(path, "w", newline="", encoding="utf-8") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["hop", "mean_cosine", "pair_count"])
        for h, s, c in profile:
            w.writerow([h, repr(float(s)), c])
