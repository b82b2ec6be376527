"""Attributed graphs, hop-distance caches and train/validation/test splits."""

from __future__ import annotations

import io
import logging
import math
from dataclasses import dataclass, field
from typing import Iterable, TextIO

import numpy as np
import scipy.sparse as sp

logger = logging.getLogger(__name__)

INF = math.inf


class GraphFormatError(ValueError):
    """A graph or split file could not be parsed."""

    def __init__(self, message: str, line: int | None = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class GraphValidationError(ValueError):
    pass


class SplitError(RuntimeError):
    pass


def canonical(u: int, v: int) -> tuple[int, int]:
    return (u, v) if u < v else (v, u)


def _pair_keys(pairs: np.ndarray, n: int) -> np.ndarray:
    """Encode canonical pairs (rows of an [k, 2] array) as int64 keys."""
    pairs = np.asarray(pairs, dtype=np.int64).reshape(-1, 2)
    lo = np.minimum(pairs[:, 0], pairs[:, 1])
    hi = np.maximum(pairs[:, 0], pairs[:, 1])
    return lo * n + hi


class AttributedGraph:
    """Undirected, unweighted graph with a sparse attribute vector per node.

    ``edges`` is an ``[E, 2]`` int64 array of canonical pairs (``u < v``),
    sorted lexicographically. ``features`` is a CSR matrix of shape
    ``[num_nodes, num_attrs]``. Instances are treated as immutable.
    """

    def __init__(self, num_nodes: int, num_attrs: int, edges, features=None):
        edges = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
        if num_nodes < 1 or num_attrs < 0:
            raise GraphValidationError("node count must be positive and attribute count non-negative")
        if edges.size and (edges.min() < 0 or edges.max() >= num_nodes):
            raise GraphValidationError(f"edge endpoint outside [0, {num_nodes})")
        if np.any(edges[:, 0] == edges[:, 1]):
            raise GraphValidationError("self-loops are not allowed")
        keys = _pair_keys(edges, num_nodes)
        uniq = np.unique(keys)
        if uniq.size != keys.size:
            raise GraphValidationError("duplicate edges")
        self.num_nodes = int(num_nodes)
        self.num_attrs = int(num_attrs)
        self.edges = np.stack([uniq // num_nodes, uniq % num_nodes], axis=1)
        self.edges.setflags(write=False)
        self._edge_keys = uniq
        self._edge_keys.setflags(write=False)

        if features is None:
            features = sp.csr_matrix((num_nodes, num_attrs), dtype=np.float64)
        features = sp.csr_matrix(features, dtype=np.float64)
        if features.shape != (num_nodes, num_attrs):
            raise GraphValidationError(
                f"feature matrix shape {features.shape} != ({num_nodes}, {num_attrs})"
            )
        if not np.all(np.isfinite(features.data)):
            raise GraphValidationError("feature values must be finite")
        features.sum_duplicates()
        features.sort_indices()
        self.features = features

        self._adj = None

    @property
    def num_edges(self) -> int:
        return int(self.edges.shape[0])

    @property
    def adjacency(self) -> sp.csr_matrix:
        """Symmetric 0/1 adjacency in CSR form (built once, on first use)."""
        if self._adj is None:
            n = self.num_nodes
            rows = np.concatenate([self.edges[:, 0], self.edges[:, 1]])
            cols = np.concatenate([self.edges[:, 1], self.edges[:, 0]])
            adj = sp.csr_matrix((np.ones(rows.size, dtype=np.int8), (rows, cols)), shape=(n, n))
            adj.sort_indices()
            self._adj = adj
        return self._adj

    def has_edges(self, pairs) -> np.ndarray:
        """Vectorized membership test for an ``[k, 2]`` array of node pairs."""
        keys = _pair_keys(pairs, self.num_nodes)
        pos = np.searchsorted(self._edge_keys, keys)
        pos = np.minimum(pos, max(self._edge_keys.size - 1, 0))
        if self._edge_keys.size == 0:
            return np.zeros(keys.shape, dtype=bool)
        return self._edge_keys[pos] == keys

    def has_edge(self, u: int, v: int) -> bool:
        return bool(self.has_edges(np.array([[u, v]]))[0])

    def neighbors(self, u: int) -> np.ndarray:
        adj = self.adjacency
        return adj.indices[adj.indptr[u]:adj.indptr[u + 1]]

    def degree(self) -> np.ndarray:
        return np.diff(self.adjacency.indptr)

    def __eq__(self, other) -> bool:
        if not isinstance(other, AttributedGraph):
            return NotImplemented
        if (self.num_nodes, self.num_attrs) != (other.num_nodes, other.num_attrs):
            return False
        if not np.array_equal(self.edges, other.edges):
            return False
        return (self.features != other.features).nnz == 0

    def __repr__(self) -> str:
        return (f"AttributedGraph(num_nodes={self.num_nodes}, num_edges={self.num_edges}, "
                f"num_attrs={self.num_attrs})")


# --------------------------------------------------------------------------
# file formats


def _data_lines(stream: TextIO):
    for lineno, raw in enumerate(stream, start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        yield lineno, line


def load_graph(edges_source: TextIO, features_source: TextIO | None = None) -> AttributedGraph:
    """Parse an edge file and an optional sparse feature file.

    Edge file: header ``"n m"`` then one ``"u<TAB>v"`` per line. Feature file:
    ``"node<TAB>attr<TAB>value"`` triplets. Duplicate edges (in either
    orientation) and self-loops are dropped with a logged warning; the counts
    are available as ``graph.load_warnings``.
    """
    lines = _data_lines(edges_source)
    try:
        lineno, header = next(lines)
    except StopIteration:
        raise GraphFormatError("empty edge file") from None
    parts = header.split()
    if len(parts) != 2:
        raise GraphFormatError(f"expected header 'n m', got {header!r}", lineno)
    try:
        n, m = int(parts[0]), int(parts[1])
    except ValueError:
        raise GraphFormatError(f"non-integer header {header!r}", lineno) from None
    if n < 1 or m < 0:
        raise GraphValidationError(f"invalid header counts n={n}, m={m}")

    us, vs = [], []
    self_loops = 0
    for lineno, line in lines:
        parts = line.split()
        if len(parts) != 2:
            raise GraphFormatError(f"expected 'u v', got {line!r}", lineno)
        try:
            u, v = int(parts[0]), int(parts[1])
        except ValueError:
            raise GraphFormatError(f"non-integer node id in {line!r}", lineno) from None
        if not (0 <= u < n and 0 <= v < n):
            raise GraphValidationError(f"line {lineno}: node id out of range [0, {n}) in {line!r}")
        if u == v:
            self_loops += 1
            continue
        us.append(u)
        vs.append(v)
    if not us:
        raise GraphValidationError("graph has no edges")

    keys = _pair_keys(np.column_stack([us, vs]), n)
    uniq = np.unique(keys)
    duplicates = keys.size - uniq.size
    if self_loops:
        logger.warning("dropped %d self-loop(s)", self_loops)
    if duplicates:
        logger.warning("dropped %d duplicate edge(s)", duplicates)
    edges = np.stack([uniq // n, uniq % n], axis=1)

    rows, cols, vals = [], [], []
    if features_source is not None:
        for lineno, line in _data_lines(features_source):
            parts = line.split()
            if len(parts) != 3:
                raise GraphFormatError(f"expected 'node attr value', got {line!r}", lineno)
            try:
                i, j, x = int(parts[0]), int(parts[1]), float(parts[2])
            except ValueError:
                raise GraphFormatError(f"malformed feature triplet {line!r}", lineno) from None
            if not 0 <= i < n:
                raise GraphValidationError(f"line {lineno}: node id {i} out of range [0, {n})")
            if not 0 <= j < m:
                raise GraphValidationError(f"line {lineno}: attribute id {j} out of range [0, {m})")
            if not math.isfinite(x):
                raise GraphValidationError(f"line {lineno}: non-finite feature value")
            rows.append(i)
            cols.append(j)
            vals.append(x)
    features = sp.csr_matrix((vals, (rows, cols)), shape=(n, m), dtype=np.float64)

    graph = AttributedGraph(n, m, edges, features)
    graph.load_warnings = {"self_loops": self_loops, "duplicates": int(duplicates)}
    return graph


def load_graph_files(edges_path, features_path=None) -> AttributedGraph:
    with open(edges_path, encoding="utf-8") as fe:
        if features_path is None:
            return load_graph(fe)
        with open(features_path, encoding="utf-8") as ff:
            return load_graph(fe, ff)


def write_graph(graph: AttributedGraph, edges_sink: TextIO, features_sink: TextIO | None = None):
    edges_sink.write(f"{graph.num_nodes} {graph.num_attrs}\n")
    for u, v in graph.edges:
        edges_sink.write(f"{u}\t{v}\n")
    if features_sink is not None:
        coo = graph.features.tocoo()
        order = np.lexsort((coo.col, coo.row))
        for i, j, x in zip(coo.row[order], coo.col[order], coo.data[order]):
            if x != 0.0:
                features_sink.write(f"{i}\t{j}\t{float(x)!r}\n")


def save_graph_files(graph: AttributedGraph, edges_path, features_path):
    with open(edges_path, "w", encoding="utf-8") as fe, open(features_path, "w", encoding="utf-8") as ff:
        write_graph(graph, fe, ff)


# --------------------------------------------------------------------------
# hop distances


class DistanceCache:
    """Breadth-first hop distances from a set of sources, truncated at ``d_max``.

    Each cached source keeps the sorted ids of the nodes reached within the
    cap together with their distances; anything else reads as infinite. When
    constructed with ``lazy=True`` a lookup from an uncached source runs the
    BFS on demand and memoizes it, which keeps memory proportional to the
    sources actually queried.
    """

    def __init__(self, graph: AttributedGraph, d_max: int = 5, allowed=None, lazy: bool = False):
        if d_max < 1:
            raise ValueError("d_max must be >= 1")
        self.graph = graph
        self.d_max = int(d_max)
        self.lazy = lazy
        self._rows: dict[int, tuple[np.ndarray, np.ndarray]] = {}
        self._adj = graph.adjacency
        self._allowed = None
        if allowed is not None:
            mask = np.zeros(graph.num_nodes, dtype=bool)
            mask[np.asarray(list(allowed) if not isinstance(allowed, np.ndarray) else allowed, dtype=np.int64)] = True
            self._allowed = mask

    @property
    def sources(self) -> frozenset:
        return frozenset(self._rows)

    def _check(self, u: int):
        if not 0 <= u < self.graph.num_nodes:
            raise IndexError(f"node id {u} out of range [0, {self.graph.num_nodes})")

    def _bfs(self, source: int) -> tuple[np.ndarray, np.ndarray]:
        n = self.graph.num_nodes
        adj = self._adj
        dist = np.full(n, -1, dtype=np.int16)
        dist[source] = 0
        frontier = np.array([source], dtype=np.int64)
        for depth in range(1, self.d_max + 1):
            starts = adj.indptr[frontier]
            counts = adj.indptr[frontier + 1] - starts
            # gather every neighbour slice without building a sparse submatrix
            offsets = np.repeat(starts - np.cumsum(counts) + counts, counts)
            nbrs = np.unique(adj.indices[offsets + np.arange(counts.sum())])
            nbrs = nbrs[dist[nbrs] < 0]
            if self._allowed is not None:
                nbrs = nbrs[self._allowed[nbrs]]
            if nbrs.size == 0:
                break
            dist[nbrs] = depth
            frontier = nbrs
        reached = np.flatnonzero(dist >= 0)
        return reached.astype(np.int64), dist[reached].astype(np.int16)

    def add_source(self, source: int):
        self._check(source)
        if source not in self._rows:
            self._rows[source] = self._bfs(source)

    def row(self, source: int) -> tuple[np.ndarray, np.ndarray]:
        if source not in self._rows:
            if not self.lazy:
                raise KeyError(f"source {source} not cached")
            self.add_source(source)
        return self._rows[source]

    def distance(self, u: int, v: int) -> float:
        """Hop distance from ``u`` to ``v``, or ``inf`` if beyond the cap."""
        self._check(u)
        self._check(v)
        if u == v:
            return 0.0
        if u not in self._rows and v in self._rows:
            u, v = v, u
        ids, dist = self.row(u)
        pos = np.searchsorted(ids, v)
        if pos < ids.size and ids[pos] == v:
            return float(dist[pos])
        return INF

    def distances(self, pairs) -> np.ndarray:
        pairs = np.asarray(pairs, dtype=np.int64).reshape(-1, 2)
        return np.array([self.distance(int(p), int(q)) for p, q in pairs], dtype=np.float64)

    def to_dict(self, source: int) -> dict[int, int]:
        ids, dist = self.row(source)
        return {int(i): int(d) for i, d in zip(ids, dist)}


def shortest_path_distances(graph: AttributedGraph, sources: Iterable[int], d_max: int = 5) -> DistanceCache:
    cache = DistanceCache(graph, d_max=d_max)
    for s in sources:
        s = int(s)
        if not 0 <= s < graph.num_nodes:
            raise ValueError(f"invalid source node id {s}")
        cache.add_source(s)
    return cache


# --------------------------------------------------------------------------
# splits

TRANSDUCTIVE = "transductive"
INDUCTIVE = "inductive"


def _empty_pairs() -> np.ndarray:
    return np.zeros((0, 2), dtype=np.int64)


@dataclass
class SplitSpec:
    """Deterministic partition of node pairs for training and evaluation.

    ``hidden_nodes`` holds the test-time unseen nodes of an inductive split;
    ``val_nodes`` the (disjoint) nodes held out the same way for validation.
    Both are empty for transductive splits.
    """

    mode: str
    train_edges: np.ndarray
    val_pos: np.ndarray = field(default_factory=_empty_pairs)
    val_neg: np.ndarray = field(default_factory=_empty_pairs)
    test_pos: np.ndarray = field(default_factory=_empty_pairs)
    test_neg: np.ndarray = field(default_factory=_empty_pairs)
    hidden_nodes: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.int64))
    val_nodes: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.int64))
    seed: int = 0

    def __post_init__(self):
        if self.mode not in (TRANSDUCTIVE, INDUCTIVE):
            raise ValueError(f"unknown split mode {self.mode!r}")
        for name in ("train_edges", "val_pos", "val_neg", "test_pos", "test_neg"):
            setattr(self, name, np.asarray(getattr(self, name), dtype=np.int64).reshape(-1, 2))
        self.hidden_nodes = np.asarray(self.hidden_nodes, dtype=np.int64).reshape(-1)
        self.val_nodes = np.asarray(self.val_nodes, dtype=np.int64).reshape(-1)

    def unseen_nodes(self) -> np.ndarray:
        return np.union1d(self.hidden_nodes, self.val_nodes)

    def training_nodes(self, num_nodes: int) -> np.ndarray:
        """Nodes whose structure is visible during training."""
        mask = np.ones(num_nodes, dtype=bool)
        mask[self.unseen_nodes()] = False
        return np.flatnonzero(mask)

    def pairs(self, which: str) -> tuple[np.ndarray, np.ndarray]:
        """Return ``(pairs, labels)`` for ``which`` in {"val", "test"}."""
        if which not in ("val", "test"):
            raise ValueError(f"unknown evaluation set {which!r}")
        pos, neg = (self.val_pos, self.val_neg) if which == "val" else (self.test_pos, self.test_neg)
        pairs = np.concatenate([pos, neg], axis=0)
        labels = np.concatenate([np.ones(len(pos), dtype=np.int64), np.zeros(len(neg), dtype=np.int64)])
        return pairs, labels

    def check(self, graph: AttributedGraph):
        """Raise ``SplitError`` if any split invariant is violated."""
        n = graph.num_nodes
        groups = {"train": self.train_edges, "val_pos": self.val_pos, "test_pos": self.test_pos}
        seen = {}
        for name, pairs in groups.items():
            if len(pairs) and not graph.has_edges(pairs).all():
                raise SplitError(f"{name} contains a non-edge")
            for key in _pair_keys(pairs, n).tolist():
                if key in seen:
                    raise SplitError(f"pair {divmod(key, n)} in both {seen[key]} and {name}")
                seen[key] = name
        for name in ("val_neg", "test_neg"):
            pairs = getattr(self, name)
            if len(pairs) and (graph.has_edges(pairs).any() or np.any(pairs[:, 0] == pairs[:, 1])):
                raise SplitError(f"{name} contains an edge or a self pair")
        if len(self.val_neg) != len(self.val_pos) or len(self.test_neg) != len(self.test_pos):
            raise SplitError("negative and positive counts differ")
        if self.mode == INDUCTIVE:
            hidden = set(self.hidden_nodes.tolist())
            for name in ("test_pos", "test_neg"):
                if not set(getattr(self, name).ravel().tolist()) <= hidden:
                    raise SplitError(f"{name} endpoint outside hidden nodes")
            unseen = self.unseen_nodes()
            if np.isin(self.train_edges.ravel(), unseen).any():
                raise SplitError("train edge touches an unseen node")


def _fraction_count(frac: float, total: int) -> int:
    return int(math.floor(frac * total + 1e-9))


def sample_non_edges(graph: AttributedGraph, count: int, rng: np.random.Generator,
                     nodes=None, exclude=None, max_tries: int | None = None) -> np.ndarray:
    """Uniformly sample ``count`` distinct non-edges by rejection.

    Pairs are drawn among ``nodes`` (default: all nodes); pairs whose int64 key
    is in the ``exclude`` set are rejected too. Gives up after
    ``100 * count`` proposals.
    """
    if count == 0:
        return _empty_pairs()
    nodes = np.arange(graph.num_nodes) if nodes is None else np.asarray(nodes, dtype=np.int64)
    n = graph.num_nodes
    exclude = set() if exclude is None else exclude
    max_tries = 100 * count if max_tries is None else max_tries
    chosen: dict[int, None] = {}
    tries = 0
    while len(chosen) < count and tries < max_tries:
        batch = min(max(2 * (count - len(chosen)), 16), max_tries - tries)
        u = nodes[rng.integers(0, nodes.size, size=batch)]
        v = nodes[rng.integers(0, nodes.size, size=batch)]
        tries += batch
        cand = np.column_stack([u, v])
        ok = (u != v)
        ok &= ~graph.has_edges(cand)
        for key in _pair_keys(cand[ok], n).tolist():
            if key in exclude or key in chosen:
                continue
            chosen[key] = None
            if len(chosen) == count:
                break
    if len(chosen) < count:
        raise SplitError(f"could only sample {len(chosen)} of {count} non-edges after {tries} tries")
    keys = np.fromiter(chosen, dtype=np.int64, count=len(chosen))
    return np.stack([keys // n, keys % n], axis=1)


def split_transductive(graph: AttributedGraph, val_frac: float = 0.1, test_frac: float = 0.1,
                       seed: int = 0) -> SplitSpec:
    if not (0 <= val_frac and 0 <= test_frac and val_frac + test_frac < 1):
        raise ValueError("need val_frac, test_frac >= 0 and val_frac + test_frac < 1")
    if graph.num_edges < 10:
        raise SplitError("graph needs at least 10 edges")
    rng = np.random.default_rng(seed)
    n_val = _fraction_count(val_frac, graph.num_edges)
    n_test = _fraction_count(test_frac, graph.num_edges)
    perm = rng.permutation(graph.num_edges)
    val_pos = graph.edges[np.sort(perm[:n_val])]
    test_pos = graph.edges[np.sort(perm[n_val:n_val + n_test])]
    train = graph.edges[np.sort(perm[n_val + n_test:])]
    negs = sample_non_edges(graph, n_val + n_test, rng)
    return SplitSpec(TRANSDUCTIVE, train, val_pos, negs[:n_val], test_pos, negs[n_val:], seed=seed)


def _hold_out_nodes(graph, candidates, count, rng, edges):
    """Pick ``count`` of ``candidates`` as unseen; return (nodes, inner, kept)."""
    chosen = np.sort(rng.choice(candidates, size=count, replace=False))
    mask = np.zeros(graph.num_nodes, dtype=bool)
    mask[chosen] = True
    a, b = mask[edges[:, 0]], mask[edges[:, 1]]
    return chosen, edges[a & b], edges[~a & ~b]


def split_inductive(graph: AttributedGraph, hidden_frac: float = 0.1, val_frac: float = 0.1,
                    seed: int = 0) -> SplitSpec:
    """Hold out unseen nodes for testing and, from the rest, for validation.

    Edges with both endpoints hidden become test positives, edges with one
    hidden endpoint are dropped, and negatives are non-edges among the hidden
    nodes. The validation nodes are chosen the same way from the retained
    nodes.
    """
    if not 0 < hidden_frac < 1:
        raise ValueError("hidden_frac must lie in (0, 1)")
    if not 0 <= val_frac < 1:
        raise ValueError("val_frac must lie in [0, 1)")
    rng = np.random.default_rng(seed)
    n = graph.num_nodes
    n_hidden = max(_fraction_count(hidden_frac, n), 2)
    hidden, test_pos, kept = _hold_out_nodes(graph, np.arange(n), n_hidden, rng, graph.edges)
    if len(test_pos) == 0:
        raise SplitError(f"no edges among the hidden nodes for seed {seed}; try another seed")
    test_neg = sample_non_edges(graph, len(test_pos), rng, nodes=hidden)

    retained = np.setdiff1d(np.arange(n), hidden)
    n_val = _fraction_count(val_frac, retained.size)
    if n_val >= 2:
        val_nodes, val_pos, train = _hold_out_nodes(graph, retained, n_val, rng, kept)
        if len(val_pos) == 0:
            raise SplitError(f"no edges among the validation nodes for seed {seed}; try another seed")
        val_neg = sample_non_edges(graph, len(val_pos), rng, nodes=val_nodes)
    else:
        val_nodes, val_pos, val_neg, train = np.zeros(0, dtype=np.int64), _empty_pairs(), _empty_pairs(), kept
    if len(train) == 0:
        raise SplitError("no training edges left")
    return SplitSpec(INDUCTIVE, train, val_pos, val_neg, test_pos, test_neg,
                     hidden_nodes=hidden, val_nodes=val_nodes, seed=seed)


SPLIT_SECTIONS = ("mode", "hidden", "val_hidden", "train", "val_pos", "val_neg",
                  "test_pos", "test_neg", "seed")


def write_split(split: SplitSpec, sink: TextIO):
    sink.write(f"#mode\n{split.mode}\n")
    sink.write("#hidden\n")
    for u in split.hidden_nodes:
        sink.write(f"{u}\n")
    if split.mode == INDUCTIVE:
        sink.write("#val_hidden\n")
        for u in split.val_nodes:
            sink.write(f"{u}\n")
    for name, attr in (("train", "train_edges"), ("val_pos", "val_pos"), ("val_neg", "val_neg"),
                       ("test_pos", "test_pos"), ("test_neg", "test_neg")):
        sink.write(f"#{name}\n")
        for u, v in getattr(split, attr):
            sink.write(f"{u}\t{v}\n")
    sink.write(f"#seed\n{split.seed}\n")


def split_to_text(split: SplitSpec) -> str:
    buf = io.StringIO()
    write_split(split, buf)
    return buf.getvalue()


def read_split(source: TextIO) -> SplitSpec:
    sections: dict[str, list] = {}
    current = None
    for lineno, raw in enumerate(source, start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            current = line[1:].strip()
            if current not in SPLIT_SECTIONS:
                raise GraphFormatError(f"unknown split section {line!r}", lineno)
            if current in sections:
                raise GraphFormatError(f"repeated split section {line!r}", lineno)
            sections[current] = []
            continue
        if current is None:
            raise GraphFormatError("data before the first section header", lineno)
        parts = line.split()
        try:
            if current == "mode":
                sections[current].append(line)
            elif current in ("hidden", "val_hidden", "seed"):
                if len(parts) != 1:
                    raise ValueError
                sections[current].append(int(parts[0]))
            else:
                if len(parts) != 2:
                    raise ValueError
                sections[current].append((int(parts[0]), int(parts[1])))
        except ValueError:
            raise GraphFormatError(f"malformed entry {line!r} in section #{current}", lineno) from None
    for required in ("mode", "train", "seed"):
        if not sections.get(required):
            raise GraphFormatError(f"missing section #{required}")

    def pairs(name):
        return np.array(sections.get(name, []), dtype=np.int64).reshape(-1, 2)

    return SplitSpec(
        mode=sections["mode"][0],
        train_edges=pairs("train"),
        val_pos=pairs("val_pos"),
        val_neg=pairs("val_neg"),
        test_pos=pairs("test_pos"),
        test_neg=pairs("test_neg"),
        hidden_nodes=np.array(sections.get("hidden", []), dtype=np.int64),
        val_nodes=np.array(sections.get("val_hidden", []), dtype=np.int64),
        seed=sections["seed"][0],
    )
