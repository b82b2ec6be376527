"""Trained model container and the text checkpoint format."""

from __future__ import annotations

import ast
from dataclasses import dataclass, field
from typing import TextIO

import numpy as np

from .encoders import (AttrEncoderParams, StructEncoderParams, encode_attributes,
                       normalize_rows)
from .loss import HyperParams

CHECKPOINT_HEADER = "deal-checkpoint v1"


class CheckpointError(ValueError):
    pass


@dataclass
class TrainedModel:
    """Both encoders plus what is needed to score pairs.

    ``trained_mask[i]`` is True when node ``i`` had its structure embedding
    trained; other nodes are treated as new and embedded from attributes
    only. ``features`` is attached at run time and never serialized.
    """

    attr: AttrEncoderParams
    struct: StructEncoderParams
    hp: HyperParams
    trained_mask: np.ndarray
    best_val: dict = field(default_factory=dict)
    curve: list = field(default_factory=list)
    config: dict = field(default_factory=dict)
    features: object = None

    def __post_init__(self):
        self.trained_mask = np.asarray(self.trained_mask, dtype=bool).reshape(-1)
        if self.trained_mask.size != self.struct.num_nodes:
            raise CheckpointError("trained mask and structure table disagree on node count")

    @property
    def num_nodes(self) -> int:
        return self.struct.num_nodes

    def structure_embeddings(self, node_ids=None) -> np.ndarray:
        if node_ids is None:
            return normalize_rows(self.struct.directions, self.struct.scales)
        ids = np.asarray(node_ids, dtype=np.int64)
        return normalize_rows(self.struct.directions[ids], self.struct.scales[ids])

    def attribute_embeddings(self, node_ids=None, features=None) -> np.ndarray:
        """Attribute embeddings of graph nodes (via ``self.features``) or of raw vectors."""
        if features is None:
            if self.features is None:
                raise ValueError("model has no node features attached")
            features = self.features if node_ids is None else self.features[np.asarray(node_ids, dtype=np.int64)]
        return encode_attributes(self.attr, features).rows


# --------------------------------------------------------------------------
# checkpoint text format


def _format_value(v) -> str:
    if isinstance(v, np.generic):
        v = v.item()
    return repr(v)


def _write_tensor(sink: TextIO, name: str, array: np.ndarray):
    a = np.asarray(array, dtype=np.float64)
    if a.ndim == 1:
        a = a[:, None]
    rows, cols = a.shape
    sink.write(f"{name} {rows} {cols}\n")
    for row in a:
        sink.write(" ".join(repr(float(x)) for x in row))
        sink.write("\n")


def write_checkpoint(model: TrainedModel, sink: TextIO):
    sink.write(CHECKPOINT_HEADER + "\n")
    meta = {f"hp.{k}": v for k, v in model.hp.to_dict().items()}
    meta["elu_alpha"] = model.attr.alpha
    meta["num_layers"] = len(model.attr.weights)
    for k, v in sorted(model.best_val.items()):
        meta[f"best_val.{k}"] = v
    for k, v in sorted(model.config.items()):
        meta[f"config.{k}"] = v
    sink.write(f"meta {len(meta)}\n")
    for k, v in meta.items():
        sink.write(f"{k} = {_format_value(v)}\n")
    tensors = []
    for k, (w, b) in enumerate(zip(model.attr.weights, model.attr.biases)):
        tensors += [(f"attr.W{k}", w), (f"attr.b{k}", b)]
    tensors += [("struct.directions", model.struct.directions),
                ("struct.scales", model.struct.scales),
                ("trained_mask", model.trained_mask.astype(np.float64))]
    sink.write(f"tensors {len(tensors)}\n")
    for name, t in tensors:
        _write_tensor(sink, name, t)


def save_checkpoint(model: TrainedModel, path):
    with open(path, "w", encoding="utf-8") as f:
        write_checkpoint(model, f)


def read_checkpoint(source: TextIO) -> TrainedModel:
    lines = iter(source)
    lineno = 0

    def next_line():
        nonlocal lineno
        for raw in lines:
            lineno += 1
            return raw.rstrip("\n")
        raise CheckpointError(f"unexpected end of checkpoint after line {lineno}")

    if next_line().strip() != CHECKPOINT_HEADER:
        raise CheckpointError(f"not a checkpoint (expected header {CHECKPOINT_HEADER!r})")
    try:
        tag, count = next_line().split()
        if tag != "meta":
            raise ValueError
        meta = {}
        for _ in range(int(count)):
            key, _, value = next_line().partition(" = ")
            meta[key] = ast.literal_eval(value)
        tag, count = next_line().split()
        if tag != "tensors":
            raise ValueError
        tensors = {}
        for _ in range(int(count)):
            name, rows, cols = next_line().split()
            rows, cols = int(rows), int(cols)
            data = np.empty((rows, cols))
            for r in range(rows):
                vals = next_line().split()
                if len(vals) != cols:
                    raise CheckpointError(f"line {lineno}: expected {cols} values")
                data[r] = [float(v) for v in vals]
            tensors[name] = data
    except (ValueError, SyntaxError) as exc:
        if isinstance(exc, CheckpointError):
            raise
        raise CheckpointError(f"malformed checkpoint near line {lineno}: {exc}") from None

    L = int(meta["num_layers"])
    attr = AttrEncoderParams([tensors[f"attr.W{k}"] for k in range(L)],
                             [tensors[f"attr.b{k}"][:, 0] for k in range(L)], float(meta["elu_alpha"]))
    struct = StructEncoderParams(tensors["struct.directions"], tensors["struct.scales"][:, 0])
    hp_kwargs = {k[3:]: v for k, v in meta.items() if k.startswith("hp.")}
    hp = HyperParams(**hp_kwargs)
    best_val = {k[9:]: v for k, v in meta.items() if k.startswith("best_val.")}
    config = {k[7:]: v for k, v in meta.items() if k.startswith("config.")}
    return TrainedModel(attr, struct, hp, tensors["trained_mask"][:, 0] > 0.5, best_val, [], config)


def load_checkpoint(path) -> TrainedModel:
    with open(path, encoding="utf-8") as f:
        return read_checkpoint(f)
