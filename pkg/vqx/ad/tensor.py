"""反向模式自动微分: 张量, 计算带, 基本原语

每个原语返回新的 `Tensor`, 记录父节点和回传函数(pullback)。
所有正向值必须是有限数, 否则抛出 `NumericError`。
"""

from typing import Callable, Iterable, Optional, Sequence, Union

import numpy as np

from vqx.util.err import NumericError, ShapeError

Pullback = Callable[[np.ndarray], Sequence[Optional[np.ndarray]]]
"""回传函数: 输出梯度 => 各父节点梯度"""

ArrayLike = Union["Tensor", np.ndarray, float, int]


class Tensor:
    """自动微分张量(float64)"""

    __slots__ = ("data", "requires_grad", "parents", "pullback", "op")

    def __init__(
        self,
        data: np.ndarray | float | int,
        requires_grad: bool = False,
        parents: tuple["Tensor", ...] = (),
        pullback: Optional[Pullback] = None,
        op: str = "leaf",
    ):
        self.data = np.asarray(data, dtype=np.float64)
        self.requires_grad = requires_grad
        self.parents = parents
        self.pullback = pullback
        self.op = op

    def __repr__(self) -> str:
        return f"Tensor(op={self.op}, shape={self.shape}, grad={self.requires_grad})"

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(self.data.shape)

    @property
    def ndim(self) -> int:
        return int(self.data.ndim)

    @property
    def size(self) -> int:
        return int(self.data.size)

    @property
    def T(self) -> "Tensor":
        return transpose(self)

    def item(self) -> float:
        return float(self.data)

    def numpy(self) -> np.ndarray:
        return self.data

    def __add__(self, other: ArrayLike) -> "Tensor":
        return add(self, other)

    def __radd__(self, other: ArrayLike) -> "Tensor":
        return add(other, self)

    def __sub__(self, other: ArrayLike) -> "Tensor":
        return sub(self, other)

    def __rsub__(self, other: ArrayLike) -> "Tensor":
        return sub(other, self)

    def __mul__(self, other: ArrayLike) -> "Tensor":
        return mul(self, other)

    def __rmul__(self, other: ArrayLike) -> "Tensor":
        return mul(other, self)

    def __truediv__(self, other: ArrayLike) -> "Tensor":
        return div(self, other)

    def __rtruediv__(self, other: ArrayLike) -> "Tensor":
        return div(other, self)

    def __neg__(self) -> "Tensor":
        return neg(self)

    def __matmul__(self, other: ArrayLike) -> "Tensor":
        return matmul(self, other)

    def __getitem__(self, idx: object) -> "Tensor":
        return index(self, idx)

    def sum(self, axis: Optional[int] = None, keepdims: bool = False) -> "Tensor":
        return sum_(self, axis, keepdims)

    def mean(self, axis: Optional[int] = None, keepdims: bool = False) -> "Tensor":
        return mean(self, axis, keepdims)

    def reshape(self, *shape: int) -> "Tensor":
        return reshape(self, shape)


def param(data: np.ndarray | float) -> Tensor:
    """可训练叶子节点"""
    return Tensor(data, requires_grad=True)


def as_tensor(x: ArrayLike) -> Tensor:
    """转为张量, 常量不求导"""
    return x if isinstance(x, Tensor) else Tensor(x)


def check_finite(data: np.ndarray, op: str) -> None:
    """检查数值有限"""
    if not np.all(np.isfinite(data)):
        raise NumericError(f"{op}: 出现非有限值")


def make_node(data: np.ndarray, parents: Sequence[Tensor], pullback: Pullback, op: str) -> Tensor:
    """创建中间节点, 无需求导的输入不记录"""
    check_finite(data, op)
    if not any(p.requires_grad for p in parents):
        return Tensor(data, op=op)
    return Tensor(data, True, tuple(parents), pullback, op)


def stop_gradient(x: Tensor) -> Tensor:
    """正向恒等, 反向阻断"""
    return Tensor(x.data, op="stop_gradient")


def unbroadcast(g: np.ndarray, shape: tuple[int, ...]) -> np.ndarray:
    """把广播后的梯度归约回原形状"""
    while g.ndim > len(shape):
        g = g.sum(axis=0)
    for i, n in enumerate(shape):
        if n == 1 and g.shape[i] != 1:
            g = g.sum(axis=i, keepdims=True)
    return g


def _broadcast_shape(a: Tensor, b: Tensor, op: str) -> None:
    try:
        np.broadcast_shapes(a.shape, b.shape)
    except ValueError:
        raise ShapeError(f"{op}: 形状不兼容 {a.shape} vs {b.shape}")


def add(a: ArrayLike, b: ArrayLike) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    _broadcast_shape(a, b, "add")
    return make_node(
        a.data + b.data,
        (a, b),
        lambda g: (unbroadcast(g, a.shape), unbroadcast(g, b.shape)),
        "add",
    )


def sub(a: ArrayLike, b: ArrayLike) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    _broadcast_shape(a, b, "sub")
    return make_node(
        a.data - b.data,
        (a, b),
        lambda g: (unbroadcast(g, a.shape), unbroadcast(-g, b.shape)),
        "sub",
    )


def mul(a: ArrayLike, b: ArrayLike) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    _broadcast_shape(a, b, "mul")
    return make_node(
        a.data * b.data,
        (a, b),
        lambda g: (unbroadcast(g * b.data, a.shape), unbroadcast(g * a.data, b.shape)),
        "mul",
    )


def div(a: ArrayLike, b: ArrayLike) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    _broadcast_shape(a, b, "div")
    with np.errstate(divide="ignore", invalid="ignore"):
        y = a.data / b.data
    return make_node(
        y,
        (a, b),
        lambda g: (
            unbroadcast(g / b.data, a.shape),
            unbroadcast(-g * a.data / (b.data * b.data), b.shape),
        ),
        "div",
    )


def neg(a: ArrayLike) -> Tensor:
    a = as_tensor(a)
    return make_node(-a.data, (a,), lambda g: (-g,), "neg")


def matmul(a: ArrayLike, b: ArrayLike) -> Tensor:
    """矩阵乘法, 两侧均为2维"""
    a, b = as_tensor(a), as_tensor(b)
    if a.ndim != 2 or b.ndim != 2 or a.shape[1] != b.shape[0]:
        raise ShapeError(f"matmul: 形状不兼容 {a.shape} @ {b.shape}")
    return make_node(
        a.data @ b.data,
        (a, b),
        lambda g: (g @ b.data.T, a.data.T @ g),
        "matmul",
    )


def transpose(a: ArrayLike, axes: Optional[Sequence[int]] = None) -> Tensor:
    a = as_tensor(a)
    axes1 = tuple(axes) if axes is not None else tuple(reversed(range(a.ndim)))
    inv = tuple(np.argsort(axes1))
    return make_node(
        np.transpose(a.data, axes1), (a,), lambda g: (np.transpose(g, inv),), "transpose"
    )


def reshape(a: ArrayLike, shape: Sequence[int]) -> Tensor:
    a = as_tensor(a)
    try:
        y = a.data.reshape(tuple(shape))
    except ValueError:
        raise ShapeError(f"reshape: {a.shape} -> {tuple(shape)}")
    return make_node(y, (a,), lambda g: (g.reshape(a.shape),), "reshape")


def _expand(g: np.ndarray, shape: tuple[int, ...], axis: Optional[int], keepdims: bool) -> np.ndarray:
    if axis is not None and not keepdims:
        g = np.expand_dims(g, axis)
    return np.broadcast_to(g, shape)


def sum_(a: ArrayLike, axis: Optional[int] = None, keepdims: bool = False) -> Tensor:
    a = as_tensor(a)
    return make_node(
        np.sum(a.data, axis=axis, keepdims=keepdims),
        (a,),
        lambda g: (_expand(g, a.shape, axis, keepdims).copy(),),
        "sum",
    )


def mean(a: ArrayLike, axis: Optional[int] = None, keepdims: bool = False) -> Tensor:
    a = as_tensor(a)
    n = a.size if axis is None else a.shape[axis]
    return make_node(
        np.mean(a.data, axis=axis, keepdims=keepdims),
        (a,),
        lambda g: (_expand(g, a.shape, axis, keepdims) / n,),
        "mean",
    )


def broadcast_to(a: ArrayLike, shape: Sequence[int]) -> Tensor:
    a = as_tensor(a)
    shape1 = tuple(shape)
    try:
        y = np.broadcast_to(a.data, shape1).copy()
    except ValueError:
        raise ShapeError(f"broadcast_to: {a.shape} -> {shape1}")
    return make_node(y, (a,), lambda g: (unbroadcast(g, a.shape),), "broadcast_to")


def exp(a: ArrayLike) -> Tensor:
    a = as_tensor(a)
    with np.errstate(over="ignore"):
        y = np.exp(a.data)
    return make_node(y, (a,), lambda g: (g * y,), "exp")


def log(a: ArrayLike) -> Tensor:
    a = as_tensor(a)
    with np.errstate(divide="ignore", invalid="ignore"):
        y = np.log(a.data)
    return make_node(y, (a,), lambda g: (g / a.data,), "log")


def sqrt(a: ArrayLike) -> Tensor:
    a = as_tensor(a)
    with np.errstate(invalid="ignore"):
        y = np.sqrt(a.data)
    return make_node(y, (a,), lambda g: (g / (2.0 * y),), "sqrt")


def square(a: ArrayLike) -> Tensor:
    a = as_tensor(a)
    return make_node(a.data * a.data, (a,), lambda g: (2.0 * a.data * g,), "square")


def maximum(a: ArrayLike, b: ArrayLike) -> Tensor:
    """逐元素最大值, 相等时梯度归第一个参数"""
    a, b = as_tensor(a), as_tensor(b)
    _broadcast_shape(a, b, "maximum")
    y = np.maximum(a.data, b.data)
    take_a = a.data >= b.data
    return make_node(
        y,
        (a, b),
        lambda g: (
            unbroadcast(np.where(take_a, g, 0.0), a.shape),
            unbroadcast(np.where(take_a, 0.0, g), b.shape),
        ),
        "maximum",
    )


def concat(xs: Sequence[Tensor], axis: int = 0) -> Tensor:
    """沿轴拼接"""
    if not xs:
        raise ShapeError("concat: 空输入")
    try:
        y = np.concatenate([x.data for x in xs], axis=axis)
    except ValueError as e:
        raise ShapeError(f"concat: {e}")
    cuts = np.cumsum([x.shape[axis] for x in xs])[:-1]
    return make_node(y, tuple(xs), lambda g: tuple(np.split(g, cuts, axis=axis)), "concat")


def stack(xs: Sequence[Tensor], axis: int = 0) -> Tensor:
    """沿新轴堆叠"""
    expanded = [reshape(x, x.shape[:axis] + (1,) + x.shape[axis:]) for x in xs]
    return concat(expanded, axis)


def index(a: ArrayLike, idx: object) -> Tensor:
    """切片/索引"""
    a = as_tensor(a)
    try:
        y = a.data[idx]  # type: ignore[index]
    except IndexError as e:
        raise ShapeError(f"index: {e}")

    def pullback(g: np.ndarray) -> tuple[np.ndarray]:
        ga = np.zeros_like(a.data)
        np.add.at(ga, idx, g)  # type: ignore[arg-type]
        return (ga,)

    return make_node(np.array(y), (a,), pullback, "index")


def _topo(root: Tensor) -> list[Tensor]:
    """后序遍历得到拓扑序, 只含需要求导的节点"""
    order: list[Tensor] = []
    visited: set[int] = set()
    stack1: list[tuple[Tensor, bool]] = [(root, False)]
    while stack1:
        node, expanded = stack1.pop()
        if expanded:
            order.append(node)
            continue
        if id(node) in visited:
            continue
        visited.add(id(node))
        stack1.append((node, True))
        for p in node.parents:
            if p.requires_grad and id(p) not in visited:
                stack1.append((p, False))
    return order


class Tape:
    """计算带: 由根节点回溯得到的原语记录(拓扑序)"""

    def __init__(self, root: Tensor):
        self.root = root
        self.nodes = _topo(root) if root.requires_grad else []

    def __len__(self) -> int:
        return len(self.nodes)

    def leaves(self) -> list[Tensor]:
        """参数登记表: 所有可训练叶子"""
        return [n for n in self.nodes if not n.parents]

    def backward(self, seed: Optional[np.ndarray] = None) -> dict[int, np.ndarray]:
        """反向传播, 每个节点只访问一次; 返回 id(节点) => 梯度"""
        g0 = np.ones_like(self.root.data) if seed is None else np.asarray(seed, np.float64)
        grads: dict[int, np.ndarray] = {id(self.root): g0}
        for node in reversed(self.nodes):
            g = grads.get(id(node))
            if g is None or node.pullback is None:
                continue
            for p, gp in zip(node.parents, node.pullback(g)):
                if not p.requires_grad or gp is None:
                    continue
                k = id(p)
                grads[k] = grads[k] + gp if k in grads else np.array(gp, dtype=np.float64)
        return grads


def grad(loss: Tensor, wrt: Iterable[Tensor]) -> list[np.ndarray]:
    """标量损失对指定叶子的梯度, 无路径的叶子梯度为0"""
    if loss.size != 1:
        raise ShapeError(f"grad: 损失必须是标量, shape={loss.shape}")
    grads = Tape(loss).backward()
    return [grads.get(id(w), np.zeros_like(w.data)) for w in wrt]
