"""Attribute MLP encoder, weight-normalized structure table and cosine similarity."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

STRUCTURE = "structure"
ATTRIBUTE = "attribute"

NORM_EPS = 1e-12


class ShapeError(ValueError):
    pass


def glorot_uniform(rng: np.random.Generator, fan_out: int, fan_in: int) -> np.ndarray:
    a = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-a, a, size=(fan_out, fan_in))


def elu(x, alpha: float = 1.0):
    x = np.asarray(x, dtype=np.float64)
    return np.where(x > 0, x, alpha * np.expm1(np.minimum(x, 0.0)))


@dataclass
class AttrEncoderParams:
    """MLP layers as ``(W [out x in], b [out])``; ELU follows every layer."""

    weights: list
    biases: list
    alpha: float = 1.0

    def __post_init__(self):
        self.weights = [np.asarray(w, dtype=np.float64) for w in self.weights]
        self.biases = [np.asarray(b, dtype=np.float64).reshape(-1) for b in self.biases]
        if not self.weights or len(self.weights) != len(self.biases):
            raise ShapeError("need one bias per weight matrix and at least one layer")
        for k, (w, b) in enumerate(zip(self.weights, self.biases)):
            if w.ndim != 2 or b.shape != (w.shape[0],):
                raise ShapeError(f"layer {k}: weight {w.shape} / bias {b.shape} mismatch")
            if k and w.shape[1] != self.weights[k - 1].shape[0]:
                raise ShapeError(f"layer {k} input width {w.shape[1]} != previous output "
                                 f"{self.weights[k - 1].shape[0]}")

    @property
    def in_dim(self) -> int:
        return self.weights[0].shape[1]

    @property
    def out_dim(self) -> int:
        return self.weights[-1].shape[0]

    @classmethod
    def init(cls, rng: np.random.Generator, in_dim: int, hidden_dims=(256,), out_dim: int = 64,
             alpha: float = 1.0) -> "AttrEncoderParams":
        dims = [in_dim, *hidden_dims, out_dim]
        weights = [glorot_uniform(rng, dims[k + 1], dims[k]) for k in range(len(dims) - 1)]
        biases = [np.zeros(d) for d in dims[1:]]
        return cls(weights, biases, alpha)


@dataclass
class StructEncoderParams:
    """Per-node embedding table stored as direction rows and scales."""

    directions: np.ndarray
    scales: np.ndarray = field(default=None)

    def __post_init__(self):
        self.directions = np.asarray(self.directions, dtype=np.float64)
        if self.directions.ndim != 2:
            raise ShapeError("directions must be a matrix")
        if self.scales is None:
            self.scales = np.ones(self.directions.shape[0])
        self.scales = np.asarray(self.scales, dtype=np.float64).reshape(-1)
        if self.scales.shape[0] != self.directions.shape[0]:
            raise ShapeError("one scale per direction row required")
        if not (np.isfinite(self.directions).all() and np.isfinite(self.scales).all()):
            raise ValueError("structure parameters must be finite")
        if np.any(np.einsum("ij,ij->i", self.directions, self.directions) == 0):
            raise ValueError("every direction row needs a positive norm")

    @property
    def num_nodes(self) -> int:
        return self.directions.shape[0]

    @property
    def dim(self) -> int:
        return self.directions.shape[1]

    @classmethod
    def init(cls, rng: np.random.Generator, num_nodes: int, dim: int = 64) -> "StructEncoderParams":
        return cls(glorot_uniform(rng, num_nodes, dim), np.ones(num_nodes))


@dataclass
class EmbeddingMatrix:
    rows: np.ndarray
    kind: str

    def __post_init__(self):
        self.rows = np.asarray(self.rows, dtype=np.float64)
        if self.kind not in (STRUCTURE, ATTRIBUTE):
            raise ValueError(f"unknown embedding kind {self.kind!r}")
        if not np.isfinite(self.rows).all():
            raise ValueError("embedding entries must be finite")

    def __len__(self):
        return self.rows.shape[0]


def _as_feature_matrix(features, in_dim: int):
    if sp.issparse(features):
        x = sp.csr_matrix(features, dtype=np.float64)
    else:
        x = np.atleast_2d(np.asarray(features, dtype=np.float64))
    if x.shape[1] != in_dim:
        raise ShapeError(f"feature width {x.shape[1]} != encoder input width {in_dim}")
    return x


def mlp_forward(params: AttrEncoderParams, features):
    """Run the MLP, returning the pre-activations and activations per layer.

    ``acts[0]`` is the input; ``acts[k + 1] = elu(pre[k])``.
    """
    x = _as_feature_matrix(features, params.in_dim)
    pre, acts = [], [x]
    h = x
    for w, b in zip(params.weights, params.biases):
        a = np.asarray(h @ w.T) + b
        h = elu(a, params.alpha)
        pre.append(a)
        acts.append(h)
    return pre, acts


def encode_attributes(params: AttrEncoderParams, features) -> EmbeddingMatrix:
    _, acts = mlp_forward(params, features)
    return EmbeddingMatrix(acts[-1], ATTRIBUTE)


def normalize_rows(directions: np.ndarray, scales: np.ndarray) -> np.ndarray:
    norms = np.linalg.norm(directions, axis=1)
    return directions * (scales / norms)[:, None]


def encode_structure(params: StructEncoderParams, node_ids) -> EmbeddingMatrix:
    ids = np.asarray(node_ids, dtype=np.int64).reshape(-1)
    if ids.size and (ids.min() < 0 or ids.max() >= params.num_nodes):
        raise IndexError(f"node id outside [0, {params.num_nodes})")
    return EmbeddingMatrix(normalize_rows(params.directions[ids], params.scales[ids]), STRUCTURE)


def cosine_similarity(u, v) -> float:
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    if u.shape != v.shape:
        raise ShapeError(f"length mismatch {u.shape} vs {v.shape}")
    nu, nv = np.linalg.norm(u), np.linalg.norm(v)
    if nu < NORM_EPS or nv < NORM_EPS:
        return 0.0
    return float(np.clip(u @ v / (nu * nv), -1.0, 1.0))


def rowwise_cosine(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Cosine similarity between matching rows of two matrices."""
    if a.shape != b.shape:
        raise ShapeError(f"shape mismatch {a.shape} vs {b.shape}")
    na = np.linalg.norm(a, axis=1)
    nb = np.linalg.norm(b, axis=1)
    ok = (na >= NORM_EPS) & (nb >= NORM_EPS)
    out = np.zeros(a.shape[0])
    out[ok] = np.einsum("ij,ij->i", a[ok], b[ok]) / (na[ok] * nb[ok])
    return out
