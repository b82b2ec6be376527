"""Dataset conversion and a synthetic attributed-graph generator.

Benchmark graphs are not downloaded. Convert local copies of the public
files into the edge/feature text format with one of the ``convert_*``
functions (or ``deal convert`` on the command line):

* Planetoid pickles (``ind.cora.x`` ... as used by most GNN code) -> Cora,
  CiteSeer, PubMed with the node/edge counts usually reported for them.
* LINQS ``.content`` / ``.cites`` files.
* ``.npz`` files in the layout of the Amazon/Coauthor graphs (CS, Computers,
  Photo).
"""

from __future__ import annotations

import logging
import os
import pickle

import numpy as np
import scipy.sparse as sp

from .graph import AttributedGraph, _pair_keys, save_graph_files

logger = logging.getLogger(__name__)


def _dedupe_edges(pairs: np.ndarray, n: int) -> np.ndarray:
    pairs = np.asarray(pairs, dtype=np.int64).reshape(-1, 2)
    loops = pairs[:, 0] == pairs[:, 1]
    if loops.any():
        logger.warning("dropping %d self-loop(s)", int(loops.sum()))
    keys = np.unique(_pair_keys(pairs[~loops], n))
    return np.stack([keys // n, keys % n], axis=1)


def make_attributed_sbm(num_nodes: int = 600, num_communities: int = 6, num_attrs: int = 300,
                        avg_degree: float = 4.0, within_frac: float = 0.85, words_per_node: int = 12,
                        topic_frac: float = 0.6, seed: int = 0) -> AttributedGraph:
    """Planted-partition graph whose binary attributes depend on the community.

    Each community owns a block of "topic" attributes; a node draws
    ``words_per_node`` attributes, a ``topic_frac`` share of them from its
    community's block and the rest uniformly. ``within_frac`` of the edges
    join nodes of the same community.
    """
    rng = np.random.default_rng(seed)
    comm = rng.integers(0, num_communities, size=num_nodes)
    members = [np.flatnonzero(comm == c) for c in range(num_communities)]
    target = int(round(avg_degree * num_nodes / 2))

    edges: set = set()
    while len(edges) < target:
        if rng.random() < within_frac:
            c = comm[rng.integers(num_nodes)]
            if members[c].size < 2:
                continue
            u, v = rng.choice(members[c], size=2, replace=False)
        else:
            u, v = rng.integers(0, num_nodes, size=2)
        if u != v:
            edges.add((min(u, v), max(u, v)))
    edges = np.array(sorted(edges), dtype=np.int64)

    block = max(num_attrs // num_communities, 1)
    rows, cols = [], []
    for i in range(num_nodes):
        k_topic = rng.binomial(words_per_node, topic_frac)
        start = (comm[i] * block) % num_attrs
        topic = start + rng.choice(block, size=min(k_topic, block), replace=False)
        noise = rng.choice(num_attrs, size=words_per_node - k_topic, replace=False)
        words = np.unique(np.concatenate([topic, noise]) % num_attrs)
        rows.extend([i] * words.size)
        cols.extend(words.tolist())
    x = sp.csr_matrix((np.ones(len(rows)), (rows, cols)), shape=(num_nodes, num_attrs))
    x.data[:] = 1.0
    graph = AttributedGraph(num_nodes, num_attrs, edges, x)
    graph.communities = comm
    return graph


def _load_pickle(path):
    with open(path, "rb") as f:
        return pickle.load(f, encoding="latin1")


def convert_planetoid(root, name: str) -> AttributedGraph:
    """Read ``ind.<name>.{allx,tx,graph,test.index}`` from ``root``."""
    allx = sp.csr_matrix(_load_pickle(os.path.join(root, f"ind.{name}.allx")))
    tx = sp.csr_matrix(_load_pickle(os.path.join(root, f"ind.{name}.tx")))
    adjacency = _load_pickle(os.path.join(root, f"ind.{name}.graph"))
    with open(os.path.join(root, f"ind.{name}.test.index")) as f:
        test_index = np.array([int(line) for line in f if line.strip()], dtype=np.int64)
    sorted_test = np.sort(test_index)

    if name.lower() == "citeseer":
        # some test ids are isolated and missing from tx: pad them with zero rows
        full = sp.lil_matrix((sorted_test[-1] - sorted_test[0] + 1, tx.shape[1]))
        full[sorted_test - sorted_test[0], :] = tx
        tx = full.tocsr()

    x = sp.vstack([allx, tx]).tolil()
    x[test_index, :] = x[sorted_test, :]
    x = x.tocsr()
    n, m = x.shape
    pairs = [(u, v) for u, nbrs in adjacency.items() for v in nbrs if u < n and v < n]
    edges = _dedupe_edges(np.array(pairs, dtype=np.int64), n)
    return AttributedGraph(n, m, edges, x)


def convert_linqs(content_path, cites_path) -> AttributedGraph:
    """Read a LINQS ``.content`` (id, binary words, label) and ``.cites`` pair."""
    ids, rows = {}, []
    with open(content_path, encoding="utf-8") as f:
        for line in f:
            parts = line.split()
            if not parts:
                continue
            ids[parts[0]] = len(ids)
            rows.append(np.array(parts[1:-1], dtype=np.float64))
    x = sp.csr_matrix(np.vstack(rows))
    pairs, unknown = [], 0
    with open(cites_path, encoding="utf-8") as f:
        for line in f:
            parts = line.split()
            if len(parts) != 2:
                continue
            if parts[0] in ids and parts[1] in ids:
                pairs.append((ids[parts[0]], ids[parts[1]]))
            else:
                unknown += 1
    if unknown:
        logger.warning("skipped %d citation(s) to papers without content", unknown)
    n, m = x.shape
    return AttributedGraph(n, m, _dedupe_edges(np.array(pairs), n), x)


def convert_npz(path) -> AttributedGraph:
    """Read an Amazon/Coauthor style ``.npz`` (CSR adjacency and attributes)."""
    with np.load(path, allow_pickle=True) as data:
        adj = sp.csr_matrix((data["adj_data"], data["adj_indices"], data["adj_indptr"]),
                            shape=tuple(data["adj_shape"]))
        if "attr_data" in data:
            x = sp.csr_matrix((data["attr_data"], data["attr_indices"], data["attr_indptr"]),
                              shape=tuple(data["attr_shape"]))
        else:
            x = sp.csr_matrix(data["attr_matrix"])
    coo = sp.triu(adj + adj.T, k=1).tocoo()
    n, m = x.shape
    return AttributedGraph(n, m, _dedupe_edges(np.column_stack([coo.row, coo.col]), n), x)


def export(graph: AttributedGraph, out_dir, stem: str = "graph"):
    os.makedirs(out_dir, exist_ok=True)
    edges = os.path.join(out_dir, f"{stem}.edges")
    feats = os.path.join(out_dir, f"{stem}.features")
    save_graph_files(graph, edges, feats)
    return edges, feats
