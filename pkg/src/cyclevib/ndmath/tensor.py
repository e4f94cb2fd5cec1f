"""Dense float64 tensors with reverse-mode automatic differentiation.

Every operation validates that its output is finite; silent NaN/Inf
propagation is treated as a contract violation (NumericError). The tape is
implicit: each tensor produced by an operation keeps its parents and a
closure computing the parent gradients. `backward()` walks the graph once
and then consumes it.
"""

from __future__ import annotations

import numpy as np

from ..errors import NumericError, ShapeError, TapeError

Array = np.ndarray


def _check_finite(arr: Array, op: str) -> None:
    if not np.all(np.isfinite(arr)):
        raise NumericError(f"non-finite values produced by '{op}'")


class Tensor:
    """A dense float64 array that can participate in gradient taping.

    `data` is row-major float64. When `requires_grad` is set (directly on a
    leaf, or inherited from any parent), operations on this tensor record
    themselves so that `backward()` on a downstream scalar can fill `grad`.
    """

    __slots__ = ("data", "requires_grad", "grad", "name", "_parents", "_backward", "_consumed")

    def __init__(self, data, requires_grad: bool = False, name: str | None = None):
        arr = np.asarray(data, dtype=np.float64)
        _check_finite(arr, "tensor construction" if name is None else f"tensor '{name}'")
        self.data = arr
        self.requires_grad = bool(requires_grad)
        self.grad: Array | None = None
        self.name = name
        self._parents: tuple[Tensor, ...] = ()
        self._backward = None
        self._consumed = False

    @property
    def shape(self) -> tuple[int, ...]:
        return self.data.shape

    @property
    def size(self) -> int:
        return self.data.size

    def item(self) -> float:
        if self.data.size != 1:
            raise ShapeError(f"item() requires a single-element tensor, got shape {self.shape}")
        return float(self.data)

    def detach(self) -> "Tensor":
        """A view of the same values with no tape participation."""
        out = Tensor.__new__(Tensor)
        out.data = self.data
        out.requires_grad = False
        out.grad = None
        out.name = self.name
        out._parents = ()
        out._backward = None
        out._consumed = False
        return out

    def zero_grad(self) -> None:
        self.grad = None

    def __repr__(self) -> str:
        tag = f" name={self.name!r}" if self.name else ""
        return f"Tensor(shape={self.shape}, requires_grad={self.requires_grad}{tag})"

    # -- graph walk ---------------------------------------------------------

    def backward(self) -> None:
        """Fill `grad` on every reachable requires_grad tensor.

        Only scalar losses are differentiable; the tape is consumed by the
        walk, so a second call raises TapeError.
        """
        if self.data.shape != ():
            raise ShapeError(f"backward() requires a scalar loss, got shape {self.shape}")
        if self._consumed:
            raise TapeError("backward() called twice: the tape has been consumed")
        if not self.requires_grad:
            raise TapeError("loss is not connected to any differentiable tensors")

        topo: list[Tensor] = []
        visited: set[int] = set()
        stack: list[tuple[Tensor, bool]] = [(self, False)]
        while stack:
            node, processed = stack.pop()
            if processed:
                topo.append(node)
                continue
            if id(node) in visited:
                continue
            visited.add(id(node))
            stack.append((node, True))
            for p in node._parents:
                if p.requires_grad and id(p) not in visited:
                    stack.append((p, False))

        grads: dict[int, Array] = {id(self): np.ones((), dtype=np.float64)}
        for node in reversed(topo):
            g = grads.pop(id(node), None)
            if g is None:
                continue
            if node._backward is not None:
                for parent, pg in zip(node._parents, node._backward(g)):
                    if pg is None or not parent.requires_grad:
                        continue
                    _check_finite(pg, "backward")
                    acc = grads.get(id(parent))
                    grads[id(parent)] = pg if acc is None else acc + pg
            elif node.requires_grad and node._parents == ():
                node.grad = g if node.grad is None else node.grad + g
            # consume the tape as we go
            node._backward = None
            node._parents = ()
            node._consumed = True

    # -- operator sugar -----------------------------------------------------

    def __add__(self, other):
        return add(self, other)

    __radd__ = __add__

    def __sub__(self, other):
        return sub(self, other)

    def __rsub__(self, other):
        return sub(_as_tensor(other), self)

    def __mul__(self, other):
        return mul(self, other)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, Tensor):
            raise ShapeError("tensor/tensor division is unsupported; divide by a scalar")
        return mul(self, 1.0 / float(other))

    def __neg__(self):
        return mul(self, -1.0)

    def __matmul__(self, other):
        return matmul(self, other)

    def __getitem__(self, key):
        return take(self, key)


def _as_tensor(x) -> Tensor:
    return x if isinstance(x, Tensor) else Tensor(np.asarray(x, dtype=np.float64))


def _make(data: Array, parents: tuple[Tensor, ...], backward, op: str) -> Tensor:
    data = np.asarray(data)
    _check_finite(data, op)
    out = Tensor.__new__(Tensor)
    out.data = data
    out.grad = None
    out.name = None
    out._consumed = False
    if any(p.requires_grad for p in parents):
        out.requires_grad = True
        out._parents = parents
        out._backward = backward
    else:
        out.requires_grad = False
        out._parents = ()
        out._backward = None
    return out


def _unbroadcast(grad: Array, shape: tuple[int, ...]) -> Array:
    """Sum a broadcast gradient back down to `shape`."""
    if grad.shape == shape:
        return grad
    extra = grad.ndim - len(shape)
    if extra > 0:
        grad = grad.sum(axis=tuple(range(extra)))
    axes = tuple(i for i, s in enumerate(shape) if s == 1 and grad.shape[i] != 1)
    if axes:
        grad = grad.sum(axis=axes, keepdims=True)
    return grad.reshape(shape)


# -- binary ops --------------------------------------------------------------

def add(a, b) -> Tensor:
    a, b = _as_tensor(a), _as_tensor(b)
    data = a.data + b.data

    def backward(g):
        return _unbroadcast(g, a.data.shape), _unbroadcast(g, b.data.shape)

    return _make(data, (a, b), backward, "add")


def sub(a, b) -> Tensor:
    a, b = _as_tensor(a), _as_tensor(b)
    data = a.data - b.data

    def backward(g):
        return _unbroadcast(g, a.data.shape), _unbroadcast(-g, b.data.shape)

    return _make(data, (a, b), backward, "sub")


def mul(a, b) -> Tensor:
    a, b = _as_tensor(a), _as_tensor(b)
    data = a.data * b.data

    def backward(g):
        return _unbroadcast(g * b.data, a.data.shape), _unbroadcast(g * a.data, b.data.shape)

    return _make(data, (a, b), backward, "mul")


def matmul(a, b) -> Tensor:
    a, b = _as_tensor(a), _as_tensor(b)
    if a.data.ndim != 2 or b.data.ndim != 2:
        raise ShapeError(f"matmul requires 2-D operands, got {a.shape} @ {b.shape}")
    if a.data.shape[1] != b.data.shape[0]:
        raise ShapeError(f"matmul inner dimensions differ: {a.shape} @ {b.shape}")
    data = a.data @ b.data

    def backward(g):
        return g @ b.data.T, a.data.T @ g

    return _make(data, (a, b), backward, "matmul")


def transpose(a: Tensor) -> Tensor:
    a = _as_tensor(a)
    if a.data.ndim != 2:
        raise ShapeError(f"transpose requires a 2-D tensor, got shape {a.shape}")
    data = a.data.T

    def backward(g):
        return (g.T,)

    return _make(data, (a,), backward, "transpose")


# -- elementwise unary ops ----------------------------------------------------

def tanh(a) -> Tensor:
    a = _as_tensor(a)
    y = np.tanh(a.data)

    def backward(g):
        return (g * (1.0 - y * y),)

    return _make(y, (a,), backward, "tanh")


def relu(a) -> Tensor:
    a = _as_tensor(a)
    y = np.maximum(a.data, 0.0)

    def backward(g):
        return (g * (a.data > 0.0),)

    return _make(y, (a,), backward, "relu")


def softplus(a) -> Tensor:
    a = _as_tensor(a)
    y = np.logaddexp(0.0, a.data)

    def backward(g):
        x = a.data
        sig = np.where(x >= 0, 1.0 / (1.0 + np.exp(-np.maximum(x, 0))),
                       np.exp(np.minimum(x, 0)) / (1.0 + np.exp(np.minimum(x, 0))))
        return (g * sig,)

    return _make(y, (a,), backward, "softplus")


def exp(a) -> Tensor:
    a = _as_tensor(a)
    with np.errstate(over="ignore"):
        y = np.exp(a.data)

    def backward(g):
        return (g * y,)

    return _make(y, (a,), backward, "exp")


def log(a) -> Tensor:
    a = _as_tensor(a)
    if np.any(a.data <= 0.0):
        raise NumericError("log requires strictly positive inputs")
    y = np.log(a.data)

    def backward(g):
        return (g / a.data,)

    return _make(y, (a,), backward, "log")


def square(a) -> Tensor:
    a = _as_tensor(a)
    y = a.data * a.data

    def backward(g):
        return (g * 2.0 * a.data,)

    return _make(y, (a,), backward, "square")


def sqrt(a) -> Tensor:
    a = _as_tensor(a)
    if np.any(a.data < 0.0):
        raise NumericError("sqrt requires non-negative inputs")
    y = np.sqrt(a.data)

    def backward(g):
        denom = np.where(y == 0.0, np.inf, 2.0 * y)
        return (g / denom,)

    return _make(y, (a,), backward, "sqrt")


def absval(a) -> Tensor:
    a = _as_tensor(a)
    y = np.abs(a.data)

    def backward(g):
        return (g * np.sign(a.data),)

    return _make(y, (a,), backward, "abs")


# -- reductions ----------------------------------------------------------------

def tsum(a, axis: int | None = None) -> Tensor:
    a = _as_tensor(a)
    data = a.data.sum(axis=axis)

    def backward(g):
        if axis is None:
            return (np.broadcast_to(g, a.data.shape).copy(),)
        return (np.broadcast_to(np.expand_dims(g, axis), a.data.shape).copy(),)

    return _make(np.asarray(data), (a,), backward, "sum")


def tmean(a, axis: int | None = None) -> Tensor:
    a = _as_tensor(a)
    n = a.data.size if axis is None else a.data.shape[axis]
    if n == 0:
        raise ShapeError("mean over an empty axis")
    return mul(tsum(a, axis=axis), 1.0 / n)


def norm(a, axis: int | None = None) -> Tensor:
    """Euclidean norm, totally or along one axis. Subgradient 0 at the origin."""
    a = _as_tensor(a)
    y = np.sqrt(np.sum(a.data * a.data, axis=axis))

    def backward(g):
        safe = np.where(y == 0.0, 1.0, y)
        scale = g / safe
        if axis is not None:
            scale = np.expand_dims(scale, axis)
        return (scale * a.data,)

    return _make(np.asarray(y), (a,), backward, "norm")


# -- structural ops --------------------------------------------------------------

def concat(tensors, axis: int = 0) -> Tensor:
    ts = tuple(_as_tensor(t) for t in tensors)
    if not ts:
        raise ShapeError("concat of an empty sequence")
    data = np.concatenate([t.data for t in ts], axis=axis)
    sizes = [t.data.shape[axis] for t in ts]
    offsets = np.cumsum(sizes)[:-1]

    def backward(g):
        return tuple(np.split(g, offsets, axis=axis))

    return _make(data, ts, backward, "concat")


def take(a, key) -> Tensor:
    """Indexing with gradient scatter; repeated fancy indices accumulate."""
    a = _as_tensor(a)
    data = a.data[key]
    parts = key if isinstance(key, tuple) else (key,)
    fancy = any(isinstance(k, (list, np.ndarray)) for k in parts)

    def backward(g):
        ga = np.zeros_like(a.data)
        if fancy:
            np.add.at(ga, key, g)
        else:
            ga[key] += g
        return (ga,)

    return _make(np.asarray(data), (a,), backward, "slice")
