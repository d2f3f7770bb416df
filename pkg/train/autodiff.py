"""
Minimal reverse-mode differentiation on numpy arrays.

A Tensor records its parents and a closure that pushes its gradient back to
them; ``backward`` walks the graph in reverse topological order. Only the
operations the training models use are provided.
"""
from typing import Callable, Optional, Sequence, Union

import numpy as np

ArrayLike = Union[np.ndarray, float, int]

# singular values are clamped here inside log-determinants
SINGULAR_FLOOR = 1e-8


def unbroadcast(grad: np.ndarray, shape: tuple[int, ...]) -> np.ndarray:
    """Sum ``grad`` down to ``shape`` after numpy broadcasting"""
    while grad.ndim > len(shape):
        grad = grad.sum(axis=0)
    for axis, size in enumerate(shape):
        if size == 1 and grad.shape[axis] != 1:
            grad = grad.sum(axis=axis, keepdims=True)
    return grad


class Tensor:
    def __init__(self, data: ArrayLike, requires_grad: bool = False,
                 parents: Sequence["Tensor"] = (), backward: Optional[Callable[[np.ndarray], None]] = None,
                 name: str = ""):
        self.data = np.asarray(data, dtype=np.float64)
        self.requires_grad = requires_grad
        self.grad: Optional[np.ndarray] = None
        self.name = name
        self._parents = tuple(parents)
        self._backward = backward

    def __repr__(self) -> str:
        label = f" {self.name}" if self.name else ""
        return f"Tensor{label}(shape={self.data.shape}, requires_grad={self.requires_grad})"

    @property
    def shape(self) -> tuple[int, ...]:
        return self.data.shape

    def item(self) -> float:
        return float(self.data)

    def numpy(self) -> np.ndarray:
        return self.data

    def detach(self) -> "Tensor":
        return Tensor(self.data.copy())

    def zero_grad(self):
        self.grad = None

    def accumulate(self, grad: np.ndarray):
        grad = unbroadcast(np.asarray(grad, dtype=np.float64), self.data.shape)
        self.grad = grad.copy() if self.grad is None else self.grad + grad

    def backward(self, grad: Optional[np.ndarray] = None):
        """Accumulate d(self)/d(leaf) into every leaf's ``grad``"""
        order: list[Tensor] = []
        visited: set[int] = set()
        stack = [(self, False)]
        while stack:
            node, expanded = stack.pop()
            if expanded:
                order.append(node)
                continue
            if id(node) in visited:
                continue
            visited.add(id(node))
            stack.append((node, True))
            for parent in node._parents:
                if parent.requires_grad and id(parent) not in visited:
                    stack.append((parent, False))

        grads = {id(self): np.ones_like(self.data) if grad is None else np.asarray(grad, dtype=np.float64)}
        for node in reversed(order):
            g = grads.pop(id(node), None)
            if g is None:
                continue
            if node._backward is None:
                node.accumulate(g)
                continue
            node._pending = grads
            node._backward(g)
            del node._pending

    def _send(self, parent: "Tensor", grad: np.ndarray):
        """Route a gradient contribution to ``parent`` during backward"""
        if not parent.requires_grad:
            return
        grad = unbroadcast(np.asarray(grad, dtype=np.float64), parent.data.shape)
        pending = self._pending
        key = id(parent)
        pending[key] = grad if key not in pending else pending[key] + grad

    # -- arithmetic -----------------------------------------------------

    def __add__(self, other: ArrayLike) -> "Tensor":
        return add(self, other)

    __radd__ = __add__

    def __sub__(self, other: ArrayLike) -> "Tensor":
        return add(self, neg(as_tensor(other)))

    def __rsub__(self, other: ArrayLike) -> "Tensor":
        return add(as_tensor(other), neg(self))

    def __mul__(self, other: ArrayLike) -> "Tensor":
        return mul(self, other)

    __rmul__ = __mul__

    def __truediv__(self, other: ArrayLike) -> "Tensor":
        if isinstance(other, Tensor):
            return mul(self, power(other, -1.0))
        return mul(self, 1.0 / np.asarray(other, dtype=np.float64))

    def __rtruediv__(self, other: ArrayLike) -> "Tensor":
        return mul(as_tensor(other), power(self, -1.0))

    def __neg__(self) -> "Tensor":
        return neg(self)

    def __pow__(self, exponent: float) -> "Tensor":
        return power(self, exponent)

    def __matmul__(self, other: "Tensor") -> "Tensor":
        return matmul(self, other)

    @property
    def T(self) -> "Tensor":
        return transpose(self)

    def sum(self, axis: Optional[int] = None) -> "Tensor":
        return tsum(self, axis)

    def mean(self, axis: Optional[int] = None) -> "Tensor":
        return mean(self, axis)


def as_tensor(value: Union[Tensor, ArrayLike]) -> Tensor:
    return value if isinstance(value, Tensor) else Tensor(value)


def parameter(data: ArrayLike, name: str = "") -> Tensor:
    return Tensor(np.array(data, dtype=np.float64), requires_grad=True, name=name)


def _node(data: np.ndarray, parents: Sequence[Tensor], backward: Callable) -> Tensor:
    needs = any(p.requires_grad for p in parents)
    return Tensor(data, requires_grad=needs, parents=parents if needs else (), backward=backward if needs else None)


def add(a: Union[Tensor, ArrayLike], b: Union[Tensor, ArrayLike]) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)

    def backward(g):
        out._send(a, g)
        out._send(b, g)
    out = _node(a.data + b.data, (a, b), backward)
    return out


def neg(a: Tensor) -> Tensor:
    def backward(g):
        out._send(a, -g)
    out = _node(-a.data, (a,), backward)
    return out


def mul(a: Union[Tensor, ArrayLike], b: Union[Tensor, ArrayLike]) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)

    def backward(g):
        out._send(a, g * b.data)
        out._send(b, g * a.data)
    out = _node(a.data * b.data, (a, b), backward)
    return out


def power(a: Tensor, exponent: float) -> Tensor:
    def backward(g):
        out._send(a, g * exponent * a.data ** (exponent - 1.0))
    out = _node(a.data ** exponent, (a,), backward)
    return out


def matmul(a: Union[Tensor, ArrayLike], b: Union[Tensor, ArrayLike]) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)

    def backward(g):
        out._send(a, g @ np.swapaxes(b.data, -1, -2) if b.data.ndim > 1 else np.outer(g, b.data))
        out._send(b, np.swapaxes(a.data, -1, -2) @ g if a.data.ndim > 1 else np.outer(a.data, g))
    out = _node(a.data @ b.data, (a, b), backward)
    return out


def transpose(a: Tensor) -> Tensor:
    def backward(g):
        out._send(a, g.T)
    out = _node(a.data.T, (a,), backward)
    return out


def tsum(a: Tensor, axis: Optional[int] = None) -> Tensor:
    def backward(g):
        grad = g if axis is None else np.expand_dims(g, axis)
        out._send(a, np.broadcast_to(grad, a.data.shape))
    out = _node(a.data.sum(axis=axis), (a,), backward)
    return out


def mean(a: Tensor, axis: Optional[int] = None) -> Tensor:
    count = a.data.size if axis is None else a.data.shape[axis]
    return tsum(a, axis) * (1.0 / count)


# -- elementwise --------------------------------------------------------

def exp(a: Tensor) -> Tensor:
    value = np.exp(a.data)

    def backward(g):
        out._send(a, g * value)
    out = _node(value, (a,), backward)
    return out


def log(a: Tensor) -> Tensor:
    def backward(g):
        out._send(a, g / a.data)
    out = _node(np.log(a.data), (a,), backward)
    return out


def tanh(a: Tensor) -> Tensor:
    value = np.tanh(a.data)

    def backward(g):
        out._send(a, g * (1.0 - value ** 2))
    out = _node(value, (a,), backward)
    return out


def sigmoid(a: Tensor) -> Tensor:
    value = 0.5 * (1.0 + np.tanh(0.5 * a.data))

    def backward(g):
        out._send(a, g * value * (1.0 - value))
    out = _node(value, (a,), backward)
    return out


def softplus(a: Tensor) -> Tensor:
    def backward(g):
        out._send(a, g * 0.5 * (1.0 + np.tanh(0.5 * a.data)))
    out = _node(np.logaddexp(0.0, a.data), (a,), backward)
    return out


def logcosh(a: Tensor) -> Tensor:
    """log cosh(x), computed as |x| + log1p(exp(-2|x|)) - log 2"""
    x = np.abs(a.data)

    def backward(g):
        out._send(a, g * np.tanh(a.data))
    out = _node(x + np.log1p(np.exp(-2.0 * x)) - np.log(2.0), (a,), backward)
    return out


def absolute(a: Tensor) -> Tensor:
    """|x| with subgradient sign(x) (0 at 0)"""
    def backward(g):
        out._send(a, g * np.sign(a.data))
    out = _node(np.abs(a.data), (a,), backward)
    return out


def amax(a: Tensor) -> Tensor:
    """Largest entry; the gradient goes to the first maximizer"""
    flat = int(np.argmax(a.data))

    def backward(g):
        grad = np.zeros_like(a.data)
        grad.flat[flat] = g
        out._send(a, grad)
    out = _node(a.data.flat[flat], (a,), backward)
    return out


def inf_norm(a: Tensor) -> Tensor:
    return amax(absolute(a))


# -- matrix functions ---------------------------------------------------

def _undefined(w: Tensor) -> Tensor:
    """NaN result for a diverged matrix, propagating NaN gradients"""
    def backward(g):
        out._send(w, np.full_like(w.data, np.nan))
    out = _node(np.asarray(np.nan), (w,), backward)
    return out


def log_gram_det(w: Tensor) -> Tensor:
    """
    log det(W^T W) = 2 sum log s_i for W with at least as many rows as columns.
    Singular values are clamped below at SINGULAR_FLOOR; the gradient is
    2 U diag(1/s) V^T.
    """
    if not np.all(np.isfinite(w.data)):
        return _undefined(w)
    u, s, vt = np.linalg.svd(w.data, full_matrices=False)
    s = np.maximum(s, SINGULAR_FLOOR)

    def backward(g):
        out._send(w, g * 2.0 * (u / s) @ vt)
    out = _node(np.asarray(2.0 * np.sum(np.log(s))), (w,), backward)
    return out


def spectral_norm(w: Tensor) -> Tensor:
    """||W||_2 with gradient u_1 v_1^T"""
    if not np.all(np.isfinite(w.data)):
        return _undefined(w)
    u, s, vt = np.linalg.svd(w.data, full_matrices=False)

    def backward(g):
        out._send(w, g * np.outer(u[:, 0], vt[0]))
    out = _node(np.asarray(s[0]), (w,), backward)
    return out


def log_softmax(logits: Tensor) -> Tensor:
    shifted = logits.data - logits.data.max(axis=1, keepdims=True)
    log_norm = np.log(np.exp(shifted).sum(axis=1, keepdims=True))
    value = shifted - log_norm
    probabilities = np.exp(value)

    def backward(g):
        out._send(logits, g - probabilities * g.sum(axis=1, keepdims=True))
    out = _node(value, (logits,), backward)
    return out


def cross_entropy(logits: Tensor, labels: np.ndarray) -> Tensor:
    """Mean negative log-likelihood of integer labels"""
    labels = np.asarray(labels, dtype=np.int64)
    one_hot = np.zeros_like(logits.data)
    one_hot[np.arange(labels.size), labels] = 1.0
    return -(log_softmax(logits) * one_hot).sum() * (1.0 / labels.size)
