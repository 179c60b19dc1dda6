from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

logger = logging.getLogger(__name__)

TRAINING_DTYPE = np.float32
VERIFICATION_DTYPE = np.float64

PRIMITIVES = frozenset(
    {
        "matmul",
        "add",
        "mul",
        "relu",
        "tanh",
        "concat",
        "sum",
        "mean",
        "log",
        "exp",
        "softmax",
        "gather_rows",
        "scatter_add_rows",
    }
)


class ShapeError(ValueError):
    """Raised when a primitive receives inputs with incompatible shapes."""

    def __init__(self, kind: str, shapes: Sequence[Tuple[int, ...]], detail: str):
        self.kind = kind
        self.shapes = tuple(tuple(s) for s in shapes)
        rendered = ", ".join(str(s) for s in self.shapes)
        super().__init__(f"{kind}: {detail} (input shapes: {rendered})")


class GradientError(RuntimeError):
    """Raised for invalid backward requests or non-finite gradients."""


class Tensor:
    """Dense array participating in a reverse-mode tape.

    ``data`` is frozen on creation; only ``grad`` changes, and only through
    :meth:`Tape.backward` accumulation or :meth:`zero_grad`.
    """

    def __init__(
        self,
        data: Any,
        *,
        dtype: Optional[Any] = None,
        name: Optional[str] = None,
        requires_grad: bool = False,
    ) -> None:
        if dtype is None:
            dtype = data.dtype if isinstance(data, np.ndarray) else TRAINING_DTYPE
            if not np.issubdtype(dtype, np.floating):
                dtype = TRAINING_DTYPE
        array = np.array(data, dtype=dtype)
        array.setflags(write=False)
        self.data: np.ndarray = array
        self.name = name
        self.requires_grad = requires_grad
        self.grad: Optional[np.ndarray] = None
        self.tape_id: Optional[int] = None
        self._tape: Optional["Tape"] = None

    @property
    def shape(self) -> Tuple[int, ...]:
        return tuple(self.data.shape)

    @property
    def dtype(self) -> np.dtype:
        return self.data.dtype

    @property
    def is_leaf(self) -> bool:
        return self.tape_id is None

    def numpy(self) -> np.ndarray:
        return self.data

    def item(self) -> float:
        return float(self.data.reshape(-1)[0])

    def zero_grad(self) -> None:
        self.grad = None

    def __repr__(self) -> str:
        label = f" name={self.name!r}" if self.name else ""
        return f"Tensor(shape={self.shape}, dtype={self.dtype}{label})"


@dataclass
class _Node:
    kind: str
    inputs: Tuple[Tensor, ...]
    output: Tensor
    attrs: Dict[str, Any] = field(default_factory=dict)
    saved: Dict[str, np.ndarray] = field(default_factory=dict)


Forward = Callable[[List[np.ndarray], Dict[str, Any]], Tuple[np.ndarray, dict]]
Backward = Callable[
    [np.ndarray, List[np.ndarray], np.ndarray, dict, Dict[str, Any]],
    List[Optional[np.ndarray]],
]


def _shapes(arrays: Sequence[np.ndarray]) -> List[Tuple[int, ...]]:
    return [tuple(a.shape) for a in arrays]


def _expect_arity(kind: str, arrays: Sequence[np.ndarray], count: int) -> None:
    if len(arrays) != count:
        raise ShapeError(
            kind, _shapes(arrays), f"expected {count} input(s), got {len(arrays)}"
        )


def _matmul_fwd(xs, attrs):
    _expect_arity("matmul", xs, 2)
    a, b = xs
    if a.ndim != 2 or b.ndim != 2 or a.shape[1] != b.shape[0]:
        raise ShapeError("matmul", _shapes(xs), "inner dimensions must match")
    return a @ b, {}


def _matmul_bwd(g, xs, out, saved, attrs):
    a, b = xs
    return [g @ b.T, a.T @ g]


def _add_fwd(xs, attrs):
    _expect_arity("add", xs, 2)
    a, b = xs
    if a.shape == b.shape:
        return a + b, {"bias": False}
    # Only rank-1 bias over rows is broadcast.
    if a.ndim == 2 and b.ndim == 1 and b.shape[0] == a.shape[1]:
        return a + b, {"bias": True}
    raise ShapeError(
        "add", _shapes(xs), "shapes must match or second input must be a row bias"
    )


def _add_bwd(g, xs, out, saved, attrs):
    if saved["bias"]:
        return [g, g.sum(axis=0)]
    return [g, g]


def _mul_fwd(xs, attrs):
    _expect_arity("mul", xs, 2)
    a, b = xs
    if a.shape != b.shape:
        raise ShapeError("mul", _shapes(xs), "elementwise product needs equal shapes")
    return a * b, {}


def _mul_bwd(g, xs, out, saved, attrs):
    a, b = xs
    return [g * b, g * a]


def _unary(kind: str, xs) -> np.ndarray:
    _expect_arity(kind, xs, 1)
    return xs[0]


def _relu_fwd(xs, attrs):
    x = _unary("relu", xs)
    return np.maximum(x, 0), {}


def _relu_bwd(g, xs, out, saved, attrs):
    return [g * (xs[0] > 0)]


def _tanh_fwd(xs, attrs):
    return np.tanh(_unary("tanh", xs)), {}


def _tanh_bwd(g, xs, out, saved, attrs):
    return [g * (1 - out * out)]


def _log_fwd(xs, attrs):
    x = _unary("log", xs)
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.log(x), {}


def _log_bwd(g, xs, out, saved, attrs):
    return [g / xs[0]]


def _exp_fwd(xs, attrs):
    return np.exp(_unary("exp", xs)), {}


def _exp_bwd(g, xs, out, saved, attrs):
    return [g * out]


def _concat_fwd(xs, attrs):
    axis = attrs.get("axis", -1)
    if not xs:
        raise ShapeError("concat", [], "needs at least one input")
    ndim = xs[0].ndim
    axis = axis % ndim
    for x in xs:
        if x.ndim != ndim or any(
            x.shape[d] != xs[0].shape[d] for d in range(ndim) if d != axis
        ):
            raise ShapeError(
                "concat", _shapes(xs), f"non-concatenated axes must agree (axis={axis})"
            )
    sizes = [x.shape[axis] for x in xs]
    return np.concatenate(xs, axis=axis), {"axis": axis, "sizes": sizes}


def _concat_bwd(g, xs, out, saved, attrs):
    splits = np.cumsum(saved["sizes"])[:-1]
    return list(np.split(g, splits, axis=saved["axis"]))


def _reduce_axis(kind: str, x: np.ndarray, attrs) -> Optional[int]:
    axis = attrs.get("axis")
    if axis is not None and not -x.ndim <= axis < x.ndim:
        raise ShapeError(kind, [x.shape], f"axis {axis} out of range")
    return None if axis is None else axis % x.ndim


def _sum_fwd(xs, attrs):
    x = _unary("sum", xs)
    axis = _reduce_axis("sum", x, attrs)
    return np.sum(x, axis=axis), {"axis": axis}


def _sum_bwd(g, xs, out, saved, attrs):
    x = xs[0]
    axis = saved["axis"]
    if axis is None:
        return [np.full_like(x, g)]
    return [np.broadcast_to(np.expand_dims(g, axis), x.shape).copy()]


def _mean_fwd(xs, attrs):
    x = _unary("mean", xs)
    axis = _reduce_axis("mean", x, attrs)
    count = x.size if axis is None else x.shape[axis]
    return np.mean(x, axis=axis), {"axis": axis, "count": count}


def _mean_bwd(g, xs, out, saved, attrs):
    (grad,) = _sum_bwd(g, xs, out, saved, attrs)
    return [grad / saved["count"]]


def _softmax_fwd(xs, attrs):
    x = _unary("softmax", xs)
    if x.ndim < 1 or x.shape[-1] == 0:
        raise ShapeError("softmax", [x.shape], "needs a non-empty last axis")
    shifted = x - np.max(x, axis=-1, keepdims=True)
    e = np.exp(shifted)
    return e / np.sum(e, axis=-1, keepdims=True), {}


def _softmax_bwd(g, xs, out, saved, attrs):
    dot = np.sum(g * out, axis=-1, keepdims=True)
    return [out * (g - dot)]


def _row_indices(kind: str, x: np.ndarray, attrs, limit: int) -> np.ndarray:
    indices = np.asarray(attrs.get("indices"), dtype=np.int64)
    if indices.ndim != 1:
        raise ShapeError(kind, [x.shape, indices.shape], "indices must be 1-D")
    if indices.size and (indices.min() < 0 or indices.max() >= limit):
        raise ShapeError(
            kind, [x.shape, indices.shape], f"indices must lie in [0, {limit})"
        )
    return indices


def _gather_rows_fwd(xs, attrs):
    x = _unary("gather_rows", xs)
    if x.ndim < 1:
        raise ShapeError("gather_rows", [x.shape], "needs at least one axis")
    indices = _row_indices("gather_rows", x, attrs, x.shape[0])
    return x[indices], {"indices": indices}


def _gather_rows_bwd(g, xs, out, saved, attrs):
    grad = np.zeros_like(xs[0])
    np.add.at(grad, saved["indices"], g)
    return [grad]


def _scatter_add_rows_fwd(xs, attrs):
    x = _unary("scatter_add_rows", xs)
    num_rows = int(attrs.get("num_rows", 0))
    indices = _row_indices("scatter_add_rows", x, attrs, num_rows)
    if x.ndim < 1 or indices.shape[0] != x.shape[0]:
        raise ShapeError(
            "scatter_add_rows", [x.shape, indices.shape], "one index per input row"
        )
    out = np.zeros((num_rows,) + x.shape[1:], dtype=x.dtype)
    np.add.at(out, indices, x)
    return out, {"indices": indices}


def _scatter_add_rows_bwd(g, xs, out, saved, attrs):
    return [g[saved["indices"]]]


_REGISTRY: Dict[str, Tuple[Forward, Backward]] = {
    "matmul": (_matmul_fwd, _matmul_bwd),
    "add": (_add_fwd, _add_bwd),
    "mul": (_mul_fwd, _mul_bwd),
    "relu": (_relu_fwd, _relu_bwd),
    "tanh": (_tanh_fwd, _tanh_bwd),
    "concat": (_concat_fwd, _concat_bwd),
    "sum": (_sum_fwd, _sum_bwd),
    "mean": (_mean_fwd, _mean_bwd),
    "log": (_log_fwd, _log_bwd),
    "exp": (_exp_fwd, _exp_bwd),
    "softmax": (_softmax_fwd, _softmax_bwd),
    "gather_rows": (_gather_rows_fwd, _gather_rows_bwd),
    "scatter_add_rows": (_scatter_add_rows_fwd, _scatter_add_rows_bwd),
}


class Tape:
    """Records primitive applications in topological order.

    A tape belongs to one thread of control. Parameters (leaves) may be read by
    several tapes at once; only :meth:`backward` writes to their ``grad``.
    """

    def __init__(self, dtype: Any = TRAINING_DTYPE) -> None:
        self.dtype = np.dtype(dtype)
        self.nodes: List[_Node] = []

    def __len__(self) -> int:
        return len(self.nodes)

    def constant(self, data: Any, name: Optional[str] = None) -> Tensor:
        return Tensor(data, dtype=self.dtype, name=name)

    def apply(self, kind: str, *inputs: Tensor, **attrs: Any) -> Tensor:
        if kind not in _REGISTRY:
            raise ValueError(
                f"Unknown primitive {kind!r}; expected one of {sorted(PRIMITIVES)}"
            )
        for tensor in inputs:
            if tensor._tape is not None and tensor._tape is not self:
                raise GradientError(
                    f"{kind}: input {tensor!r} was produced by a different tape"
                )
        forward, _ = _REGISTRY[kind]
        value, saved = forward([t.data for t in inputs], attrs)
        output = Tensor(np.asarray(value), dtype=np.asarray(value).dtype)
        output.tape_id = len(self.nodes)
        output._tape = self
        self.nodes.append(_Node(kind, tuple(inputs), output, dict(attrs), saved))
        return output

    def backward(self, output: Tensor) -> Dict[Tensor, np.ndarray]:
        """Accumulate d(output)/d(leaf) into every reachable leaf that requires grad.

        Returns the accumulated gradient of each such leaf.
        """
        if output.data.size != 1 or output.data.ndim > 1:
            raise GradientError(
                f"backward needs a scalar output, got shape {output.shape}"
            )
        if output._tape is not self:
            raise GradientError("backward output was not produced by this tape")

        adjoints: Dict[int, np.ndarray] = {
            id(output): np.ones_like(output.data).reshape(output.shape)
        }
        touched: Dict[int, Tensor] = {}
        for node in reversed(self.nodes):
            g = adjoints.pop(id(node.output), None)
            if g is None:
                continue
            _, backward = _REGISTRY[node.kind]
            grads = backward(
                g,
                [t.data for t in node.inputs],
                node.output.data,
                node.saved,
                node.attrs,
            )
            for tensor, grad in zip(node.inputs, grads):
                if grad is None:
                    continue
                if tensor.is_leaf and not tensor.requires_grad:
                    continue
                key = id(tensor)
                if key in adjoints:
                    adjoints[key] = adjoints[key] + grad
                else:
                    adjoints[key] = np.asarray(grad, dtype=tensor.dtype)
                if tensor.is_leaf:
                    touched[key] = tensor

        result: Dict[Tensor, np.ndarray] = {}
        for key, leaf in touched.items():
            grad = adjoints[key].reshape(leaf.shape).astype(leaf.dtype)
            leaf.grad = grad if leaf.grad is None else leaf.grad + grad
            result[leaf] = leaf.grad
        logger.debug("backward visited %d nodes, %d leaves", len(self), len(result))
        return result

    # Named wrappers keep network code readable.
    def matmul(self, a: Tensor, b: Tensor) -> Tensor:
        return self.apply("matmul", a, b)

    def add(self, a: Tensor, b: Tensor) -> Tensor:
        return self.apply("add", a, b)

    def mul(self, a: Tensor, b: Tensor) -> Tensor:
        return self.apply("mul", a, b)

    def relu(self, x: Tensor) -> Tensor:
        return self.apply("relu", x)

    def tanh(self, x: Tensor) -> Tensor:
        return self.apply("tanh", x)

    def log(self, x: Tensor) -> Tensor:
        return self.apply("log", x)

    def exp(self, x: Tensor) -> Tensor:
        return self.apply("exp", x)

    def softmax(self, x: Tensor) -> Tensor:
        return self.apply("softmax", x)

    def concat(self, tensors: Sequence[Tensor], axis: int = -1) -> Tensor:
        return self.apply("concat", *tensors, axis=axis)

    def sum(self, x: Tensor, axis: Optional[int] = None) -> Tensor:
        return self.apply("sum", x, axis=axis)

    def mean(self, x: Tensor, axis: Optional[int] = None) -> Tensor:
        return self.apply("mean", x, axis=axis)

    def gather_rows(self, x: Tensor, indices: Sequence[int]) -> Tensor:
        return self.apply("gather_rows", x, indices=indices)

    def scatter_add_rows(
        self, x: Tensor, indices: Sequence[int], num_rows: int
    ) -> Tensor:
        return self.apply("scatter_add_rows", x, indices=indices, num_rows=num_rows)

    def scale(self, x: Tensor, factor: float) -> Tensor:
        return self.mul(x, self.constant(np.full(x.shape, factor)))

    def shift(self, x: Tensor, offset: Any) -> Tensor:
        return self.add(x, self.constant(np.broadcast_to(offset, x.shape)))


def apply_primitive(tape: Tape, kind: str, *inputs: Tensor, **attrs: Any) -> Tensor:
    return tape.apply(kind, *inputs, **attrs)
