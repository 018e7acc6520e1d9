"""Dense float64 tensors with reverse-mode differentiation on a tape.

Operations record themselves on the innermost active ``Tape`` when any
input requires gradients. ``Tape.backward`` replays records in reverse
append order, which is a reverse topological order of the forward pass.
Outside any tape context all ops run gradient-free (inference mode).
"""

from __future__ import annotations

import numpy as np

from . import kernels


class ShapeError(ValueError):
    """Raised when operand shapes do not conform."""


_ACTIVE_TAPES: list["Tape"] = []


class Tensor:
    __slots__ = ("data", "grad", "requires_grad")

    def __init__(self, data, requires_grad: bool = False):
        self.data = np.asarray(data, dtype=np.float64)
        self.requires_grad = bool(requires_grad)
        self.grad: np.ndarray | None = None

    @property
    def shape(self):
        return self.data.shape

    @property
    def size(self):
        return self.data.size

    def item(self) -> float:
        return float(self.data)

    def zero_grad(self) -> None:
        self.grad = None

    def __repr__(self):
        return f"Tensor(shape={self.data.shape}, requires_grad={self.requires_grad})"

    def __add__(self, other):
        return add(self, other)

    def __radd__(self, other):
        return add(self, other)

    def __sub__(self, other):
        return sub(self, other)

    def __mul__(self, other):
        return mul(self, other)

    def __rmul__(self, other):
        return mul(self, other)

    def __neg__(self):
        return mul(self, -1.0)

    def __matmul__(self, other):
        return matmul(self, other)


class Tape:
    """Wengert list of (inputs, outputs, backward-rule) records."""

    def __init__(self):
        self._records: list[tuple[tuple[Tensor, ...], tuple[Tensor, ...], object]] = []

    def __enter__(self):
        _ACTIVE_TAPES.append(self)
        return self

    def __exit__(self, *exc):
        _ACTIVE_TAPES.pop()
        return False

    def __len__(self):
        return len(self._records)

    def record(self, inputs, outputs, backward):
        self._records.append((tuple(inputs), tuple(outputs), backward))

    def backward(self, loss: Tensor, params: dict[str, Tensor] | None = None):
        """Propagate d(loss)/d(x) to every tensor reachable from ``loss``.

        Sets ``.grad`` on tensors with requires_grad. When ``params`` is
        given, returns a name -> gradient map with zeros for parameters
        the loss does not reach.
        """
        if loss.data.ndim != 0 and loss.data.size != 1:
            raise ShapeError(f"backward needs a scalar loss, got shape {loss.data.shape}")
        grads: dict[int, np.ndarray] = {id(loss): np.ones_like(loss.data)}
        for inputs, outputs, backward in reversed(self._records):
            if not any(id(o) in grads for o in outputs):
                continue
            out_grads = tuple(
                grads.get(id(o), np.zeros_like(o.data)) for o in outputs
            )
            in_grads = backward(*out_grads)
            for t, g in zip(inputs, in_grads):
                if g is None or not t.requires_grad:
                    continue
                if id(t) in grads:
                    grads[id(t)] = grads[id(t)] + g
                else:
                    grads[id(t)] = g
        by_id = grads
        # surface gradients on leaf tensors
        seen: dict[int, Tensor] = {}
        for inputs, _, _ in self._records:
            for t in inputs:
                seen[id(t)] = t
        for tid, t in seen.items():
            if t.requires_grad and tid in by_id:
                t.grad = by_id[tid] if t.grad is None else t.grad + by_id[tid]
        if params is None:
            return None
        return {
            name: by_id.get(id(t), np.zeros_like(t.data)) for name, t in params.items()
        }


def _tape() -> Tape | None:
    return _ACTIVE_TAPES[-1] if _ACTIVE_TAPES else None


def _wrap(x) -> Tensor:
    return x if isinstance(x, Tensor) else Tensor(x)


def _emit(inputs, out_data, backward) -> Tensor:
    tape = _tape()
    needs = tape is not None and any(t.requires_grad for t in inputs)
    out = Tensor(out_data, requires_grad=needs)
    if needs:
        tape.record(inputs, (out,), backward)
    return out


def _unbroadcast(g: np.ndarray, shape: tuple[int, ...]) -> np.ndarray:
    if g.shape == shape:
        return g
    extra = g.ndim - len(shape)
    if extra > 0:
        g = g.sum(axis=tuple(range(extra)))
    axes = tuple(i for i, n in enumerate(shape) if n == 1 and g.shape[i] != 1)
    if axes:
        g = g.sum(axis=axes, keepdims=True)
    return g.reshape(shape)


def add(a, b) -> Tensor:
    a, b = _wrap(a), _wrap(b)
    try:
        out = a.data + b.data
    except ValueError:
        raise ShapeError(f"add: shapes {a.shape} and {b.shape} do not broadcast")
    return _emit(
        (a, b), out,
        lambda g: (_unbroadcast(g, a.data.shape), _unbroadcast(g, b.data.shape)),
    )


def sub(a, b) -> Tensor:
    a, b = _wrap(a), _wrap(b)
    try:
        out = a.data - b.data
    except ValueError:
        raise ShapeError(f"sub: shapes {a.shape} and {b.shape} do not broadcast")
    return _emit(
        (a, b), out,
        lambda g: (_unbroadcast(g, a.data.shape), _unbroadcast(-g, b.data.shape)),
    )


def mul(a, b) -> Tensor:
    a, b = _wrap(a), _wrap(b)
    try:
        out = a.data * b.data
    except ValueError:
        raise ShapeError(f"mul: shapes {a.shape} and {b.shape} do not broadcast")
    return _emit(
        (a, b), out,
        lambda g: (
            _unbroadcast(g * b.data, a.data.shape),
            _unbroadcast(g * a.data, b.data.shape),
        ),
    )


def matmul(a, b) -> Tensor:
    a, b = _wrap(a), _wrap(b)
    if a.data.ndim != 2 or b.data.ndim != 2 or a.data.shape[1] != b.data.shape[0]:
        raise ShapeError(f"matmul: shapes {a.shape} and {b.shape} do not conform")
    out = a.data @ b.data
    return _emit((a, b), out, lambda g: (g @ b.data.T, a.data.T @ g))


def transpose(a) -> Tensor:
    a = _wrap(a)
    if a.data.ndim != 2:
        raise ShapeError(f"transpose expects a matrix, got shape {a.shape}")
    return _emit((a,), a.data.T.copy(), lambda g: (g.T,))


def tanh(a) -> Tensor:
    a = _wrap(a)
    out = np.tanh(a.data)
    return _emit((a,), out, lambda g: (g * (1.0 - out * out),))


def sigmoid(a) -> Tensor:
    a = _wrap(a)
    out = 1.0 / (1.0 + np.exp(-a.data))
    return _emit((a,), out, lambda g: (g * out * (1.0 - out),))


def exp(a) -> Tensor:
    a = _wrap(a)
    out = np.exp(a.data)
    return _emit((a,), out, lambda g: (g * out,))


def log(a) -> Tensor:
    a = _wrap(a)
    out = np.log(a.data)
    return _emit((a,), out, lambda g: (g / a.data,))


def softmax(a, axis: int = -1) -> Tensor:
    a = _wrap(a)
    shifted = a.data - a.data.max(axis=axis, keepdims=True)
    e = np.exp(shifted)
    out = e / e.sum(axis=axis, keepdims=True)

    def backward(g):
        dot = (g * out).sum(axis=axis, keepdims=True)
        return ((g - dot) * out,)

    return _emit((a,), out, backward)


def log_softmax(a, axis: int = -1) -> Tensor:
    a = _wrap(a)
    shifted = a.data - a.data.max(axis=axis, keepdims=True)
    lse = np.log(np.exp(shifted).sum(axis=axis, keepdims=True))
    out = shifted - lse
    sm = np.exp(out)

    def backward(g):
        return (g - sm * g.sum(axis=axis, keepdims=True),)

    return _emit((a,), out, backward)


def tsum(a, axis=None, keepdims: bool = False) -> Tensor:
    a = _wrap(a)
    out = a.data.sum(axis=axis, keepdims=keepdims)

    def backward(g):
        if axis is None:
            return (np.broadcast_to(g, a.data.shape).copy(),)
        g2 = g if keepdims else np.expand_dims(g, axis)
        return (np.broadcast_to(g2, a.data.shape).copy(),)

    return _emit((a,), out, backward)


def mean(a) -> Tensor:
    a = _wrap(a)
    n = a.data.size
    return mul(tsum(a), 1.0 / n)


def l2_norm_sq(a) -> Tensor:
    """Sum of squared entries (scalar)."""
    a = _wrap(a)
    out = np.float64((a.data * a.data).sum())
    return _emit((a,), out, lambda g: (2.0 * g * a.data,))


def concat(tensors, axis: int = -1) -> Tensor:
    ts = [_wrap(t) for t in tensors]
    out = np.concatenate([t.data for t in ts], axis=axis)
    sizes = [t.data.shape[axis] for t in ts]
    splits = np.cumsum(sizes)[:-1]

    def backward(g):
        return tuple(np.ascontiguousarray(p) for p in np.split(g, splits, axis=axis))

    return _emit(tuple(ts), out, backward)


def stack(tensors, axis: int = 0) -> Tensor:
    ts = [_wrap(t) for t in tensors]
    out = np.stack([t.data for t in ts], axis=axis)

    def backward(g):
        return tuple(np.ascontiguousarray(s) for s in np.moveaxis(g, axis, 0))

    return _emit(tuple(ts), out, backward)


def reshape(a, shape) -> Tensor:
    a = _wrap(a)
    out = a.data.reshape(shape)
    return _emit((a,), out, lambda g: (g.reshape(a.data.shape),))


def gather_rows(table, indices) -> Tensor:
    """Select rows of a matrix by integer index (embedding lookup)."""
    table = _wrap(table)
    idx = np.asarray(indices, dtype=np.int64)
    if table.data.ndim != 2:
        raise ShapeError(f"gather_rows expects a matrix, got shape {table.shape}")
    out = table.data[idx]

    def backward(g):
        dt = np.zeros_like(table.data)
        np.add.at(dt, idx, g)
        return (dt,)

    return _emit((table,), out, backward)


def row_take(a, indices) -> Tensor:
    """out[i] = a[i, indices[i]] for a matrix ``a``."""
    a = _wrap(a)
    idx = np.asarray(indices, dtype=np.int64)
    rows = np.arange(a.data.shape[0])
    out = a.data[rows, idx]

    def backward(g):
        da = np.zeros_like(a.data)
        da[rows, idx] = g
        return (da,)

    return _emit((a,), out, backward)


def bdot(H, s) -> Tensor:
    """Batched dot products: out[b,t] = H[b,t,:] . s[b,:]."""
    H, s = _wrap(H), _wrap(s)
    if H.data.ndim != 3 or s.data.ndim != 2 or H.data.shape[::2] != s.data.shape:
        raise ShapeError(f"bdot: shapes {H.shape} and {s.shape} do not conform")
    out = np.einsum("bth,bh->bt", H.data, s.data)

    def backward(g):
        dH = g[:, :, None] * s.data[:, None, :]
        ds = np.einsum("bt,bth->bh", g, H.data)
        return (dH, ds)

    return _emit((H, s), out, backward)


def bweight(H, w) -> Tensor:
    """Weighted sums over time: out[b,:] = sum_t w[b,t] * H[b,t,:]."""
    H, w = _wrap(H), _wrap(w)
    if H.data.ndim != 3 or w.data.ndim != 2 or H.data.shape[:2] != w.data.shape:
        raise ShapeError(f"bweight: shapes {H.shape} and {w.shape} do not conform")
    out = np.einsum("bth,bt->bh", H.data, w.data)

    def backward(g):
        dH = w.data[:, :, None] * g[:, None, :]
        dw = np.einsum("bth,bh->bt", H.data, g)
        return (dH, dw)

    return _emit((H, w), out, backward)


def lstm_cell(x, h_prev, c_prev, W, b) -> tuple[Tensor, Tensor]:
    """One fused LSTM step: returns (h, c).

    ``W`` maps concat(x, h_prev) of width D+H to 4H gate preactivations;
    elementwise gate math runs in the kernels backend.
    """
    x, h_prev, c_prev, W, b = map(_wrap, (x, h_prev, c_prev, W, b))
    B, H = h_prev.data.shape
    D = x.data.shape[1]
    if W.data.shape != (D + H, 4 * H) or b.data.shape != (4 * H,):
        raise ShapeError(
            f"lstm_cell: W {W.shape} / b {b.shape} do not match input {x.shape}, hidden {h_prev.shape}"
        )
    xh = np.concatenate([x.data, h_prev.data], axis=1)
    z = xh @ W.data + b.data
    i, f, g, o, c, h = kernels.gates_forward(z, c_prev.data)
    tape = _tape()
    needs = tape is not None and any(
        t.requires_grad for t in (x, h_prev, c_prev, W, b)
    )
    h_t = Tensor(h, requires_grad=needs)
    c_t = Tensor(c, requires_grad=needs)
    if needs:
        def backward(dh, dc_out):
            dz, dc_prev = kernels.gates_backward(dh, dc_out, i, f, g, o, c, c_prev.data)
            dW = xh.T @ dz
            db = dz.sum(axis=0)
            dxh = dz @ W.data.T
            return (
                np.ascontiguousarray(dxh[:, :D]),
                np.ascontiguousarray(dxh[:, D:]),
                dc_prev,
                dW,
                db,
            )

        tape.record((x, h_prev, c_prev, W, b), (h_t, c_t), backward)
    return h_t, c_t


def grad_check(fn, point, step: float = 1e-6):
    """Max relative error between analytic and central-difference gradients.

    ``fn`` maps a list of Tensors to a scalar Tensor; ``point`` is a list
    of arrays at which to check.
    """
    arrays = [np.asarray(p, dtype=np.float64) for p in point]
    leaves = [Tensor(a.copy(), requires_grad=True) for a in arrays]
    with Tape() as tape:
        out = fn(leaves)
        if out.data.ndim != 0 and out.data.size != 1:
            raise ShapeError("grad_check target must be scalar-valued")
        if not np.isfinite(out.data):
            raise FloatingPointError("grad_check: non-finite function value at point")
        tape.backward(out)
    analytic = [
        t.grad if t.grad is not None else np.zeros_like(t.data) for t in leaves
    ]

    def eval_at(arrs):
        vals = [Tensor(a) for a in arrs]
        return float(fn(vals).data)

    worst = 0.0
    for k, a in enumerate(arrays):
        flat = a.reshape(-1)
        for j in range(flat.size):
            orig = flat[j]
            flat[j] = orig + step
            hi = eval_at(arrays)
            flat[j] = orig - step
            lo = eval_at(arrays)
            flat[j] = orig
            if not (np.isfinite(hi) and np.isfinite(lo)):
                raise FloatingPointError(
                    f"grad_check: non-finite value at input {k}, coordinate {j}"
                )
            numeric = (hi - lo) / (2.0 * step)
            ana = analytic[k].reshape(-1)[j]
            denom = max(abs(ana), abs(numeric), 1e-12)
            worst = max(worst, abs(ana - numeric) / denom)
    return worst
