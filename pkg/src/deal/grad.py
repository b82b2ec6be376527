"""Gradients of the DEAL objective, finite-difference checks and optimizers.

The computation graph is fixed (table lookup + row normalization, sparse
affine + ELU layers, cosine similarities, logistic losses), so each
primitive gets an explicit backward function instead of a general tape.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .encoders import NORM_EPS, AttrEncoderParams, ShapeError, StructEncoderParams
from .loss import TIGHT, HyperParams, MiniBatch, pair_losses


class NonFiniteError(FloatingPointError):
    def __init__(self, tensor: str):
        super().__init__(f"non-finite values in {tensor}")
        self.tensor = tensor


def _finite(name: str, x):
    if not np.all(np.isfinite(x)):
        raise NonFiniteError(name)
    return x


# --------------------------------------------------------------------------
# parameter vector


class ParamVector:
    """All trainable tensors packed into one flat float64 array.

    ``layout`` maps tensor names to ``(offset, shape)``. Views returned by
    :meth:`view` alias ``data``, so optimizers can update the flat array in
    place and the encoder parameter objects see the change.
    """

    def __init__(self, data: np.ndarray, layout: dict):
        self.data = np.asarray(data, dtype=np.float64)
        self.layout = dict(layout)
        size = sum(int(np.prod(shape)) for _, shape in self.layout.values())
        if self.data.shape != (size,):
            raise ShapeError(f"flat vector has {self.data.size} entries, layout needs {size}")

    def __len__(self):
        return self.data.size

    def view(self, name: str, data: np.ndarray | None = None) -> np.ndarray:
        offset, shape = self.layout[name]
        size = int(np.prod(shape))
        src = self.data if data is None else data
        return src[offset:offset + size].reshape(shape)

    def zeros_like(self) -> np.ndarray:
        return np.zeros_like(self.data)

    def copy(self) -> "ParamVector":
        return ParamVector(self.data.copy(), self.layout)

    def with_data(self, data: np.ndarray) -> "ParamVector":
        return ParamVector(data, self.layout)

    @property
    def num_layers(self) -> int:
        return sum(1 for k in self.layout if k.startswith("attr.W"))

    @classmethod
    def pack(cls, attr: AttrEncoderParams, struct: StructEncoderParams) -> "ParamVector":
        tensors = {}
        for k, (w, b) in enumerate(zip(attr.weights, attr.biases)):
            tensors[f"attr.W{k}"] = w
            tensors[f"attr.b{k}"] = b
        tensors["struct.directions"] = struct.directions
        tensors["struct.scales"] = struct.scales
        layout, offset = {}, 0
        for name, t in tensors.items():
            layout[name] = (offset, t.shape)
            offset += t.size
        data = np.empty(offset)
        for name, t in tensors.items():
            o, shape = layout[name]
            data[o:o + t.size] = t.ravel()
        return cls(data, layout)

    def unpack(self, alpha: float = 1.0) -> tuple[AttrEncoderParams, StructEncoderParams]:
        """Encoder parameter objects whose arrays are views into ``data``."""
        L = self.num_layers
        attr = AttrEncoderParams([self.view(f"attr.W{k}") for k in range(L)],
                                 [self.view(f"attr.b{k}") for k in range(L)], alpha)
        struct = StructEncoderParams(self.view("struct.directions"), self.view("struct.scales"))
        return attr, struct


# --------------------------------------------------------------------------
# primitive backward functions


def elu_backward(pre: np.ndarray, dout: np.ndarray, alpha: float = 1.0) -> np.ndarray:
    return dout * np.where(pre > 0, 1.0, alpha * np.exp(np.minimum(pre, 0.0)))


def affine_backward(x, w: np.ndarray, dout: np.ndarray, need_input_grad: bool = True):
    """Backward of ``x @ w.T + b``; ``x`` may be a sparse matrix."""
    if sp.issparse(x):
        dw = np.asarray(x.T @ dout).T
    else:
        dw = dout.T @ x
    db = dout.sum(axis=0)
    dx = dout @ w if need_input_grad else None
    return dx, dw, db


def normalize_rows_backward(directions: np.ndarray, scales: np.ndarray, dz: np.ndarray):
    """Backward of ``z = scale * d / |d|`` (per row)."""
    norms = np.linalg.norm(directions, axis=1)
    unit = directions / norms[:, None]
    dscale = np.einsum("ij,ij->i", dz, unit)
    ddir = (scales / norms)[:, None] * (dz - dscale[:, None] * unit)
    return ddir, dscale


def cosine_backward(u: np.ndarray, v: np.ndarray, dc: np.ndarray):
    """Backward of row-wise cosine similarity; zero-norm rows get zero gradient."""
    nu = np.linalg.norm(u, axis=1)
    nv = np.linalg.norm(v, axis=1)
    ok = (nu >= NORM_EPS) & (nv >= NORM_EPS)
    du = np.zeros_like(u)
    dv = np.zeros_like(v)
    if np.any(ok):
        u, v, nu, nv, dcc = u[ok], v[ok], nu[ok], nv[ok], dc[ok]
        c = np.einsum("ij,ij->i", u, v) / (nu * nv)
        du[ok] = dcc[:, None] * (v / (nu * nv)[:, None] - c[:, None] * u / (nu ** 2)[:, None])
        dv[ok] = dcc[:, None] * (u / (nu * nv)[:, None] - c[:, None] * v / (nv ** 2)[:, None])
    return du, dv


def _cos(u, v):
    nu = np.linalg.norm(u, axis=1)
    nv = np.linalg.norm(v, axis=1)
    ok = (nu >= NORM_EPS) & (nv >= NORM_EPS)
    out = np.zeros(u.shape[0])
    out[ok] = np.einsum("ij,ij->i", u[ok], v[ok]) / (nu[ok] * nv[ok])
    return out


# --------------------------------------------------------------------------
# the DEAL objective


class DealObjective:
    """Weighted total loss of one mini-batch as a function of a ``ParamVector``.

    Only the rows touched by the batch (plus ``align_nodes`` for full-scope
    tight alignment) are encoded; the remaining gradient entries are zero.
    """

    def __init__(self, batch: MiniBatch, features, hp: HyperParams, alpha: float = 1.0,
                 align_nodes=None):
        self.batch = batch
        self.features = sp.csr_matrix(features) if sp.issparse(features) else np.asarray(features, dtype=np.float64)
        self.hp = hp
        self.alpha = alpha
        self.align_nodes = None if align_nodes is None else np.asarray(align_nodes, dtype=np.int64)

    def __call__(self, params: ParamVector) -> float:
        return self.value_and_grad(params, need_grad=False)[0]

    def value_and_grad(self, params: ParamVector, need_grad: bool = True):
        # overflow surfaces as a NonFiniteError naming the tensor, not as a warning
        with np.errstate(over="ignore", invalid="ignore"):
            return self._value_and_grad(params, need_grad)

    def _value_and_grad(self, params: ParamVector, need_grad: bool):
        hp, batch, alpha = self.hp, self.batch, self.alpha
        t1, t2, t3 = hp.theta
        tight = t3 and hp.align_mode == TIGHT
        nodes = batch.nodes()
        if tight and self.align_nodes is not None:
            nodes = np.union1d(nodes, self.align_nodes)
        p = np.searchsorted(nodes, batch.p)
        q = np.searchsorted(nodes, batch.q)
        k = len(batch)

        need_s = bool(t1 or t3)
        need_a = bool(t2 or t3)

        if need_s:
            dirs = params.view("struct.directions")[nodes]
            scl = params.view("struct.scales")[nodes]
            norms = np.linalg.norm(dirs, axis=1)
            # every loss term is a cosine, which ignores positive row scale:
            # only sign(scale) reaches the objective, so d(loss)/d(scale) is exactly 0
            zs = _finite("struct.embeddings", dirs * (np.sign(scl) / norms)[:, None])
        if need_a:
            L = params.num_layers
            x = self.features[nodes]
            acts, pres = [x], []
            for layer in range(L):
                w = params.view(f"attr.W{layer}")
                b = params.view(f"attr.b{layer}")
                a = _finite(f"attr.layer{layer}.pre", np.asarray(acts[-1] @ w.T) + b)
                pres.append(a)
                acts.append(np.where(a > 0, a, alpha * np.expm1(np.minimum(a, 0.0))))
            za = acts[-1]

        value = 0.0
        dzs = np.zeros_like(zs) if need_s else None
        dza = np.zeros_like(za) if need_a else None

        def ranking(z, dz, weight):
            s = _cos(z[p], z[q])
            terms, dterms = pair_losses(s, batch, hp)
            if need_grad:
                du, dv = cosine_backward(z[p], z[q], dterms * (weight / k))
                np.add.at(dz, p, du)
                np.add.at(dz, q, dv)
            return weight * terms.sum() / k

        if t1:
            value += ranking(zs, dzs, t1)
        if t2:
            value += ranking(za, dza, t2)
        if t3:
            if tight:
                rows = np.arange(nodes.size) if self.align_nodes is None else np.searchsorted(nodes, self.align_nodes)
                c = _cos(zs[rows], za[rows])
                value += -t3 * c.sum() / rows.size
                if need_grad:
                    du, dv = cosine_backward(zs[rows], za[rows], np.full(rows.size, -t3 / rows.size))
                    np.add.at(dzs, rows, du)
                    np.add.at(dza, rows, dv)
            else:
                orientations = [(p, q)]
                if hp.symmetrize_loose_align:
                    orientations.append((q, p))
                for a_idx, b_idx in orientations:
                    s = _cos(zs[a_idx], za[b_idx])
                    terms, dterms = pair_losses(s, batch, hp)
                    value += t3 * terms.sum() / k
                    if need_grad:
                        du, dv = cosine_backward(zs[a_idx], za[b_idx], dterms * (t3 / k))
                        np.add.at(dzs, a_idx, du)
                        np.add.at(dza, b_idx, dv)

        value = float(_finite("loss", np.float64(value)))
        if not need_grad:
            return value, None

        grad = params.zeros_like()
        if need_s:
            ddir, _ = normalize_rows_backward(dirs, np.sign(scl), dzs)
            params.view("struct.directions", grad)[nodes] = _finite("grad:struct.directions", ddir)
        if need_a:
            dh = dza
            for layer in reversed(range(L)):
                da = elu_backward(pres[layer], dh, alpha)
                w = params.view(f"attr.W{layer}")
                dh, dw, db = affine_backward(acts[layer], w, da, need_input_grad=layer > 0)
                params.view(f"attr.W{layer}", grad)[...] = _finite(f"grad:attr.W{layer}", dw)
                params.view(f"attr.b{layer}", grad)[...] = _finite(f"grad:attr.b{layer}", db)
        return value, grad


# --------------------------------------------------------------------------
# generic gradient entry points


def _as_array(at) -> np.ndarray:
    return at.data if isinstance(at, ParamVector) else np.atleast_1d(np.asarray(at, dtype=np.float64))


def gradient(objective, at) -> np.ndarray:
    """Analytic gradient of ``objective`` at ``at``.

    ``objective`` must expose ``value_and_grad(at) -> (value, grad)``.
    """
    value, grad = objective.value_and_grad(at)
    if not np.isfinite(value):
        raise NonFiniteError("objective value")
    grad = np.asarray(grad, dtype=np.float64).reshape(-1)
    return _finite("gradient", grad)


def finite_difference_check(objective, at, eps: float = 1e-6, rng: np.random.Generator | None = None,
                            max_full: int = 2000, sample_size: int = 500) -> float:
    """Max relative error between the analytic gradient and central differences.

    Vectors longer than ``max_full`` are checked on ``sample_size`` random
    coordinates. The relative error uses ``max(|analytic|, |numeric|, 1e-8)``
    as denominator.
    """
    if not 1e-7 <= eps <= 1e-3:
        raise ValueError("eps must lie in [1e-7, 1e-3]")
    analytic = gradient(objective, at)
    base = _as_array(at)
    n = base.size
    if n > max_full:
        rng = np.random.default_rng(0) if rng is None else rng
        coords = np.sort(rng.choice(n, size=sample_size, replace=False))
    else:
        coords = np.arange(n)

    def f(data):
        point = at.with_data(data) if isinstance(at, ParamVector) else (data if np.ndim(at) else data[0])
        return float(objective(point))

    worst = 0.0
    for i in coords:
        plus = base.copy()
        minus = base.copy()
        plus[i] += eps
        minus[i] -= eps
        numeric = (f(plus) - f(minus)) / (2 * eps)
        denom = max(abs(analytic[i]), abs(numeric), 1e-8)
        worst = max(worst, abs(analytic[i] - numeric) / denom)
    return worst


# --------------------------------------------------------------------------
# optimizers


@dataclass
class OptimizerState:
    m: np.ndarray
    v: np.ndarray
    step: int = 0
    lr: float = 1e-2
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8

    @classmethod
    def zeros(cls, size: int, **kwargs) -> "OptimizerState":
        return cls(np.zeros(size), np.zeros(size), **kwargs)


def adam_step(params, grads, state: OptimizerState):
    """Bias-corrected Adam update, applied in place; returns ``(params, state)``."""
    data = _as_array(params)
    g = np.asarray(grads, dtype=np.float64).reshape(-1)
    if g.shape != data.shape or state.m.shape != data.shape:
        raise ShapeError(f"gradient {g.shape}, state {state.m.shape} and params {data.shape} disagree")
    state.step += 1
    state.m *= state.beta1
    state.m += (1.0 - state.beta1) * g
    state.v *= state.beta2
    state.v += (1.0 - state.beta2) * (g * g)
    bc1 = 1.0 - state.beta1 ** state.step
    bc2 = 1.0 - state.beta2 ** state.step
    data -= (state.lr / bc1) * state.m / (np.sqrt(state.v / bc2) + state.eps)
    return params, state


def sgd_step(params, grads, state: OptimizerState):
    data = _as_array(params)
    g = np.asarray(grads, dtype=np.float64).reshape(-1)
    if g.shape != data.shape:
        raise ShapeError(f"gradient {g.shape} and params {data.shape} disagree")
    state.step += 1
    data -= state.lr * g
    return params, state
