"""
(C) Copyright 2026 emergelib contributors.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.

Created on Oct 03, 2026

Differentiable operations recorded on a `Tape`.

Each operation is a `Function` subclass with an analytic backward pass, plus a thin
functional wrapper taking `Tensor`s (or arrays / numbers, lifted to constants).
All arithmetic broadcasts like numpy.
"""
import numpy as np
from scipy.special import expit

from .tape import Function, Tensor
from ..utils.exceptions import ContractError, DomainError, ParameterError, ShapeMismatchError


def _tape_of(*xs):
    for x in xs:
        if isinstance(x, Tensor):
            return x.tape
    raise ContractError("at least one operand must be a Tensor")


def _value(x):
    return x.value if isinstance(x, Tensor) else np.asarray(x)


def _ordered_sum(x, axis, keepdims=False):
    """Sum whose result does not depend on the order of entries along `axis`."""
    return np.sort(x, axis=axis).sum(axis=axis, keepdims=keepdims)


def _expand_like(grad, shape, axis, keepdims):
    """Broadcast the gradient of a reduction back to the reduced input's shape."""
    if axis is not None and not keepdims:
        axes = (axis,) if np.isscalar(axis) else tuple(axis)
        axes = tuple(a % len(shape) for a in axes)
        for a in sorted(axes):
            grad = np.expand_dims(grad, a)
    return np.broadcast_to(grad, shape)


# ---------------------------------------------------------------------------
# Elementwise arithmetic
# ---------------------------------------------------------------------------
class Add(Function):
    kind = "add"

    @staticmethod
    def forward(ctx, a, b):
        return a + b

    @staticmethod
    def backward(ctx, grad):
        return grad, grad


class Sub(Function):
    kind = "sub"

    @staticmethod
    def forward(ctx, a, b):
        return a - b

    @staticmethod
    def backward(ctx, grad):
        return grad, -grad


class Mul(Function):
    kind = "mul"

    @staticmethod
    def forward(ctx, a, b):
        ctx.save_for_backward(a, b)
        return a * b

    @staticmethod
    def backward(ctx, grad):
        a, b = ctx.saved
        return grad * b, grad * a


class Div(Function):
    kind = "div"

    @staticmethod
    def forward(ctx, a, b):
        ctx.save_for_backward(a, b)
        return a / b

    @staticmethod
    def backward(ctx, grad):
        a, b = ctx.saved
        return grad / b, -grad * a / (b * b)


class Neg(Function):
    kind = "neg"

    @staticmethod
    def forward(ctx, a):
        return -a

    @staticmethod
    def backward(ctx, grad):
        return (-grad,)


def _binary(function, a, b):
    try:
        np.broadcast(_value(a), _value(b))
    except ValueError:
        raise ShapeMismatchError(f"{function.kind}: shapes {np.shape(_value(a))} and "
                                 f"{np.shape(_value(b))} do not broadcast") from None
    return _tape_of(a, b).apply(function, a, b)


def add(a, b):
    return _binary(Add, a, b)


def sub(a, b):
    return _binary(Sub, a, b)


def mul(a, b):
    return _binary(Mul, a, b)


def div(a, b):
    return _binary(Div, a, b)


def neg(a):
    return _tape_of(a).apply(Neg, a)


# ---------------------------------------------------------------------------
# Matrix product
# ---------------------------------------------------------------------------
class MatMul(Function):
    kind = "matmul"

    @staticmethod
    def forward(ctx, a, b):
        ctx.save_for_backward(a, b)
        return np.matmul(a, b)

    @staticmethod
    def backward(ctx, grad):
        a, b = ctx.saved
        grad_a = np.matmul(grad, np.swapaxes(b, -1, -2))
        if b.ndim == 2:
            # Weight matrix shared by every leading index: contract all of them at once.
            k, n = b.shape
            grad_b = a.reshape(-1, k).T @ grad.reshape(-1, n)
        else:
            grad_b = np.matmul(np.swapaxes(a, -1, -2), grad)
        return grad_a, grad_b


def matmul(a, b):
    """Matrix product over the last two axes; leading axes broadcast.

    Args:
        a (Tensor | np.ndarray): Array of shape (..., m, k).
        b (Tensor | np.ndarray): Array of shape (..., k, n).

    Returns:
        Tensor: Array of shape (..., m, n).

    Raises:
        ShapeMismatchError: if the inner dimensions disagree or an operand is not at least 2-D.
    """
    tape = _tape_of(a, b)
    a_shape, b_shape = np.shape(_value(a)), np.shape(_value(b))
    if len(a_shape) < 2 or len(b_shape) < 2:
        raise ShapeMismatchError(f"matmul needs at least 2-D operands, got {a_shape} and {b_shape}")
    if a_shape[-1] != b_shape[-2]:
        raise ShapeMismatchError(f"matmul inner dimensions disagree: {a_shape} @ {b_shape}")
    return tape.apply(MatMul, a, b)


# ---------------------------------------------------------------------------
# Elementwise nonlinearities
# ---------------------------------------------------------------------------
class Unary(Function):
    kind = "unary"

    @staticmethod
    def forward(ctx, x, fn):
        if fn == "tanh":
            y = np.tanh(x)
        elif fn == "elu":
            y = np.where(x >= 0, x, np.expm1(np.minimum(x, 0.0)))
        elif fn == "exp":
            y = np.exp(x)
        elif fn == "log":
            y = np.log(x)
        elif fn == "sqrt":
            y = np.sqrt(x)
        elif fn == "sigmoid":
            y = expit(x)
        elif fn == "square":
            y = x * x
        else:
            raise ValueError(f"Unsupported unary kind {fn}")
        ctx.save_for_backward(x, y)
        return y

    @staticmethod
    def backward(ctx, grad):
        x, y = ctx.saved
        fn = ctx.attrs["fn"]
        if fn == "tanh":
            return (grad * (1.0 - y * y),)
        if fn == "elu":
            return (grad * np.where(x >= 0, 1.0, y + 1.0),)
        if fn == "exp":
            return (grad * y,)
        if fn == "log":
            return (grad / x,)
        if fn == "sqrt":
            return (grad * 0.5 / y,)
        if fn == "sigmoid":
            return (grad * y * (1.0 - y),)
        return (grad * 2.0 * x,)  # square


UNARY_KINDS = frozenset({"tanh", "elu", "exp", "log", "sqrt", "sigmoid", "square"})


def unary(kind, x):
    """Elementwise `kind` of `x`.

    Args:
        kind (str): One of "tanh", "elu", "exp", "log", "sqrt", "sigmoid", "square".
        x (Tensor): Input.

    Returns:
        Tensor: Same shape as `x`.

    Raises:
        DomainError: log of a non-positive value, sqrt of a negative one.
    """
    if kind not in UNARY_KINDS:
        raise ValueError(f"Unsupported unary kind {kind}")
    values = _value(x)
    if kind == "log" and np.any(values <= 0):
        raise DomainError("log requires strictly positive inputs")
    if kind == "sqrt" and np.any(values < 0):
        raise DomainError("sqrt requires non-negative inputs")
    return _tape_of(x).apply(Unary, x, fn=kind)


def tanh(x):
    return unary("tanh", x)


def elu(x):
    return unary("elu", x)


def exp(x):
    return unary("exp", x)


def log(x):
    return unary("log", x)


def sqrt(x):
    return unary("sqrt", x)


def sigmoid(x):
    return unary("sigmoid", x)


def square(x):
    return unary("square", x)


# ---------------------------------------------------------------------------
# Softmax and reductions
# ---------------------------------------------------------------------------
class Softmax(Function):
    kind = "softmax"

    @staticmethod
    def forward(ctx, x, axis, ordered):
        shifted = np.exp(x - np.max(x, axis=axis, keepdims=True))
        if ordered:
            total = _ordered_sum(shifted, axis, keepdims=True)
        else:
            total = shifted.sum(axis=axis, keepdims=True)
        y = shifted / total
        ctx.save_for_backward(y)
        return y

    @staticmethod
    def backward(ctx, grad):
        (y,) = ctx.saved
        axis = ctx.attrs["axis"]
        return (y * (grad - np.sum(grad * y, axis=axis, keepdims=True)),)


def softmax(x, axis=-1, ordered=False):
    """Numerically stable softmax along `axis`.

    Args:
        x (Tensor): Input logits.
        axis (int): Normalisation axis.
        ordered (bool): Sum the normaliser in sorted order, making the output exactly
                        invariant to permutations along `axis`.

    Returns:
        Tensor: Non-negative slices summing to 1 along `axis`.
    """
    ndim = x.ndim if isinstance(x, Tensor) else np.ndim(x)
    if not -ndim <= axis < ndim:
        raise ShapeMismatchError(f"axis {axis} out of range for {ndim}-d input")
    return _tape_of(x).apply(Softmax, x, axis=axis, ordered=ordered)


class Reduce(Function):
    kind = "reduce"

    @staticmethod
    def forward(ctx, x, fn, axis, keepdims, ordered):
        ctx.save_for_backward(x)
        if fn == "sqnorm":
            x = x * x
        if ordered and axis is not None:
            total = _ordered_sum(x, axis, keepdims=keepdims)
        else:
            total = np.sum(x, axis=axis, keepdims=keepdims)
        if fn == "mean":
            total = total / _count(x.shape, axis)
        return total

    @staticmethod
    def backward(ctx, grad):
        (x,) = ctx.saved
        fn, axis, keepdims = ctx.attrs["fn"], ctx.attrs["axis"], ctx.attrs["keepdims"]
        grad = _expand_like(grad, x.shape, axis, keepdims)
        if fn == "mean":
            return (grad / _count(x.shape, axis),)
        if fn == "sqnorm":
            return (2.0 * x * grad,)
        return (np.array(grad),)


def _count(shape, axis):
    if axis is None:
        return int(np.prod(shape))
    axes = (axis,) if np.isscalar(axis) else tuple(axis)
    return int(np.prod([shape[a] for a in axes]))


def reduce(kind, x, axis=None, keepdims=False, ordered=False):
    """Sum, mean or squared norm over `axis` (all axes if None).

    Args:
        kind (str): "sum", "mean" or "sqnorm" (sum of squares).
        x (Tensor): Input.
        axis (int | tuple[int] | None): Reduced axes.
        keepdims (bool): Keep reduced axes with size 1.
        ordered (bool): Sum in sorted order along a single axis (permutation-exact).

    Returns:
        Tensor
    """
    if kind not in {"sum", "mean", "sqnorm"}:
        raise ValueError(f"Unsupported reduction {kind}")
    ndim = x.ndim if isinstance(x, Tensor) else np.ndim(x)
    if axis is not None:
        for a in ((axis,) if np.isscalar(axis) else axis):
            if not -ndim <= a < ndim:
                raise ShapeMismatchError(f"axis {a} out of range for {ndim}-d input")
    return _tape_of(x).apply(Reduce, x, fn=kind, axis=axis, keepdims=keepdims, ordered=ordered)


# ---------------------------------------------------------------------------
# Stochastic ops: the noise is drawn once and recorded as a constant of the node.
# ---------------------------------------------------------------------------
class Stochastic(Function):
    kind = "stochastic"

    @staticmethod
    def forward(ctx, x, fn, param, draws):
        if fn == "gaussian_noise":
            return x + param * draws
        keep = (draws >= param).astype(x.dtype) / (1.0 - param)
        ctx.save_for_backward(keep)
        return x * keep

    @staticmethod
    def backward(ctx, grad):
        if ctx.attrs["fn"] == "gaussian_noise":
            return (grad,)
        (keep,) = ctx.saved
        return (grad * keep,)


def stochastic(kind, x, param, draws=None, rng=None, training=True):
    """Additive Gaussian noise or an inverted dropout mask.

    Args:
        kind (str): "gaussian_noise" (`param` is the std) or "dropout_mask"
                    (`param` is the drop rate).
        x (Tensor): Input.
        param (float): Noise std (>= 0) or dropout rate in [0, 1).
        draws (np.ndarray | None): Pre-drawn standard normals (noise) or uniforms (dropout),
                                   broadcastable to `x`.
        rng (np.random.Generator | None): Used to draw when `draws` is not given.
        training (bool): In evaluation mode both ops are the identity.

    Returns:
        Tensor: Noisy input; gradients flow only through `x`.
    """
    if kind == "gaussian_noise":
        if not param >= 0:
            raise ParameterError(f"noise std must be non-negative, got {param}")
    elif kind == "dropout_mask":
        if not 0 <= param < 1:
            raise ParameterError(f"dropout rate must be in [0, 1), got {param}")
    else:
        raise ValueError(f"Unsupported stochastic kind {kind}")
    if not training or param == 0:
        return x
    if draws is None:
        if rng is None:
            raise ContractError("stochastic op needs either `draws` or `rng`")
        shape = x.shape
        draws = rng.standard_normal(shape) if kind == "gaussian_noise" else rng.random(shape)
    return _tape_of(x).apply(Stochastic, x, fn=kind, param=float(param), draws=np.asarray(draws))


# ---------------------------------------------------------------------------
# Shape and indexing
# ---------------------------------------------------------------------------
class Reshape(Function):
    kind = "reshape"

    @staticmethod
    def forward(ctx, x, shape):
        ctx.save_for_backward(x.shape)
        return x.reshape(shape)

    @staticmethod
    def backward(ctx, grad):
        (shape,) = ctx.saved
        return (grad.reshape(shape),)


class Transpose(Function):
    kind = "transpose"

    @staticmethod
    def forward(ctx, x, axes):
        return np.transpose(x, axes)

    @staticmethod
    def backward(ctx, grad):
        return (np.transpose(grad, np.argsort(ctx.attrs["axes"])),)


class GetItem(Function):
    kind = "getitem"

    @staticmethod
    def forward(ctx, x, key):
        ctx.save_for_backward(x.shape)
        return x[key]

    @staticmethod
    def backward(ctx, grad):
        (shape,) = ctx.saved
        out = np.zeros(shape)
        out[ctx.attrs["key"]] = grad
        return (out,)


class Take(Function):
    kind = "take"

    @staticmethod
    def forward(ctx, x, indices, axis):
        ctx.save_for_backward(x.shape)
        return np.take(x, indices, axis=axis)

    @staticmethod
    def backward(ctx, grad):
        (shape,) = ctx.saved
        indices, axis = ctx.attrs["indices"], ctx.attrs["axis"]
        out = np.zeros(shape)
        idx_axes = list(range(axis, axis + indices.ndim))
        moved_grad = np.moveaxis(grad, idx_axes, list(range(indices.ndim)))
        np.add.at(np.moveaxis(out, axis, 0), indices, moved_grad)
        return (out,)


class Concat(Function):
    kind = "concat"

    @staticmethod
    def forward(ctx, *xs, axis):
        ctx.save_for_backward(np.cumsum([x.shape[axis] for x in xs])[:-1])
        return np.concatenate(xs, axis=axis)

    @staticmethod
    def backward(ctx, grad):
        (splits,) = ctx.saved
        return tuple(np.split(grad, splits, axis=ctx.attrs["axis"]))


def reshape(x, shape):
    return _tape_of(x).apply(Reshape, x, shape=tuple(shape))


def transpose(x, axes):
    return _tape_of(x).apply(Transpose, x, axes=tuple(axes))


def swapaxes(x, axis1, axis2):
    axes = list(range(x.ndim))
    axes[axis1], axes[axis2] = axes[axis2], axes[axis1]
    return transpose(x, axes)


def getitem(x, key):
    """Basic (slice / integer / Ellipsis / None) indexing."""
    return _tape_of(x).apply(GetItem, x, key=key)


def take(x, indices, axis):
    """Gather `indices` (an integer array of any shape) along `axis`."""
    axis = axis % x.ndim
    return _tape_of(x).apply(Take, x, indices=np.asarray(indices, dtype=int), axis=axis)


def concat(xs, axis=-1):
    """Concatenate along an existing axis (negative axes allowed)."""
    tape = _tape_of(*xs)
    ndim = next(x.ndim for x in xs if isinstance(x, Tensor))
    return tape.apply(Concat, *xs, axis=axis % ndim)


def stack(xs, axis=0):
    """Stack equally shaped tensors along a new axis."""
    ndim = next(x.ndim for x in xs if isinstance(x, Tensor)) + 1
    axis = axis % ndim
    expanded = []
    for x in xs:
        x = _tape_of(*xs).lift(x)
        shape = list(x.shape)
        shape.insert(axis, 1)
        expanded.append(reshape(x, shape))
    return concat(expanded, axis=axis)
