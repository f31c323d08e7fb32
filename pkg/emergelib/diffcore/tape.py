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

A minimal reverse-mode differentiation tape over dense float64 numpy arrays.

The tape is an append-only list of nodes. A node stores the operation (a `Function`
subclass), the ids of its inputs, whatever the operation saved for its backward pass,
and its forward value. Inputs always refer to earlier nodes, so the tape is acyclic by
construction and a single reverse sweep computes all gradients.

A tape is meant for one rollout: it is discarded after a single `backward`.
"""
import numpy as np

from ..utils.exceptions import ContractError, NonFiniteError

DTYPE = np.float64


class Context:
    """Per-node storage handed to `Function.forward` and `Function.backward`."""

    __slots__ = ("attrs", "saved")

    def __init__(self, attrs=None):
        self.attrs = attrs or {}
        self.saved = ()

    def save_for_backward(self, *arrays):
        self.saved = arrays


class Function:
    """Base class for taped operations.

    Subclasses implement `forward(ctx, *values, **attrs)` returning an array and
    `backward(ctx, grad)` returning one gradient (or None) per input, expressed in the
    broadcast output shape; the tape reduces them back to each input's shape.
    """
    kind = None

    @staticmethod
    def forward(ctx, *values, **attrs):
        raise NotImplementedError

    @staticmethod
    def backward(ctx, grad):
        raise NotImplementedError


class _Node:
    __slots__ = ("function", "inputs", "ctx", "value", "requires_grad", "name")

    def __init__(self, function, inputs, ctx, value, requires_grad, name=None):
        self.function = function
        self.inputs = inputs
        self.ctx = ctx
        self.value = value
        self.requires_grad = requires_grad
        self.name = name

    @property
    def kind(self):
        if self.function is None:
            return "parameter" if self.requires_grad else "constant"
        return self.function.kind


def unbroadcast(grad, shape):
    """Sum `grad` down to `shape`, undoing numpy broadcasting."""
    if grad.shape == shape:
        return grad
    n_extra = grad.ndim - len(shape)
    if n_extra > 0:
        grad = grad.sum(axis=tuple(range(n_extra)))
    squeeze_axes = tuple(i for i, dim in enumerate(shape) if dim == 1 and grad.shape[i] != 1)
    if squeeze_axes:
        grad = grad.sum(axis=squeeze_axes, keepdims=True)
    return grad.reshape(shape)


class Tensor:
    """A value recorded on a `Tape`.

    Tensors are thin handles: the array lives on the tape node. Arithmetic operators
    record new nodes on the same tape; plain numbers and numpy arrays are lifted to
    constants.
    """

    __slots__ = ("tape", "node_id")
    # Make numpy defer to our reflected operators (ndarray + Tensor -> Tensor.__radd__).
    __array_ufunc__ = None

    def __init__(self, tape, node_id):
        self.tape = tape
        self.node_id = node_id

    @property
    def value(self):
        return self.tape.nodes[self.node_id].value

    @property
    def shape(self):
        return self.value.shape

    @property
    def ndim(self):
        return self.value.ndim

    @property
    def size(self):
        return self.value.size

    @property
    def requires_grad(self):
        return self.tape.nodes[self.node_id].requires_grad

    @property
    def grad(self):
        """Gradient of the backward root with respect to this tensor (after `Tape.backward`)."""
        return self.tape.gradient(self)

    def numpy(self):
        return self.value

    def item(self):
        return float(self.value.reshape(-1)[0]) if self.value.size == 1 else self.value.item()

    # Arithmetic is delegated to the op library to keep a single definition per op.
    def __add__(self, other):
        from . import ops
        return ops.add(self, other)

    def __radd__(self, other):
        from . import ops
        return ops.add(other, self)

    def __sub__(self, other):
        from . import ops
        return ops.sub(self, other)

    def __rsub__(self, other):
        from . import ops
        return ops.sub(other, self)

    def __mul__(self, other):
        from . import ops
        return ops.mul(self, other)

    def __rmul__(self, other):
        from . import ops
        return ops.mul(other, self)

    def __truediv__(self, other):
        from . import ops
        return ops.div(self, other)

    def __rtruediv__(self, other):
        from . import ops
        return ops.div(other, self)

    def __neg__(self):
        from . import ops
        return ops.neg(self)

    def __matmul__(self, other):
        from . import ops
        return ops.matmul(self, other)

    def __rmatmul__(self, other):
        from . import ops
        return ops.matmul(other, self)

    def __getitem__(self, key):
        from . import ops
        return ops.getitem(self, key)

    def sum(self, axis=None, keepdims=False):
        from . import ops
        return ops.reduce("sum", self, axis=axis, keepdims=keepdims)

    def mean(self, axis=None, keepdims=False):
        from . import ops
        return ops.reduce("mean", self, axis=axis, keepdims=keepdims)

    def reshape(self, *shape):
        from . import ops
        shape = shape[0] if len(shape) == 1 and isinstance(shape[0], (tuple, list)) else shape
        return ops.reshape(self, shape)

    def __repr__(self):
        node = self.tape.nodes[self.node_id]
        return f"Tensor(id={self.node_id}, kind={node.kind}, shape={self.shape})"


class Tape:
    """Append-only record of a differentiable computation.

    Args:
        check_finite (bool): Whether every recorded value must be finite.
                             A NaN/Inf raises `NonFiniteError` at the op that produced it.
        batch_axis (int | None): If the tape carries a batch of episodes along this axis,
                                 non-finite diagnostics report the first failing batch index.
    """

    def __init__(self, check_finite=True, batch_axis=None):
        self.nodes = []
        self.check_finite = check_finite
        self.batch_axis = batch_axis
        self.location = {}
        self.gradients = None
        self._parameters = {}

    def __len__(self):
        return len(self.nodes)

    # ----- leaves -----
    def _append(self, node):
        self.nodes.append(node)
        return Tensor(self, len(self.nodes) - 1)

    def parameter(self, value, name=None):
        """Record a leaf that gradients are computed for."""
        value = np.array(value, dtype=DTYPE)
        self._check(value, "parameter")
        tensor = self._append(_Node(None, (), None, value, True, name))
        if name is not None:
            self._parameters[name] = tensor
        return tensor

    def constant(self, value):
        """Record a leaf that is treated as a constant of the graph."""
        value = np.array(value, dtype=DTYPE)
        self._check(value, "constant")
        return self._append(_Node(None, (), None, value, False))

    def lift(self, x):
        if isinstance(x, Tensor):
            if x.tape is not self:
                raise ContractError("tensor belongs to another tape")
            return x
        return self.constant(x)

    @property
    def parameters(self):
        """Named parameter tensors, in creation order."""
        return dict(self._parameters)

    # ----- ops -----
    def apply(self, function, *inputs, **attrs):
        """Run `function` forward on `inputs` and record the result."""
        inputs = [self.lift(x) for x in inputs]
        ctx = Context(attrs)
        value = function.forward(ctx, *[x.value for x in inputs], **attrs)
        value = np.asarray(value, dtype=DTYPE)
        self._check(value, function.kind)
        requires_grad = any(x.requires_grad for x in inputs)
        node = _Node(function, tuple(x.node_id for x in inputs), ctx, value, requires_grad)
        return self._append(node)

    def _check(self, value, kind):
        if not self.check_finite:
            return
        finite = np.isfinite(value)
        if finite.all():
            return
        location = {"op": kind, **self.location}
        if self.batch_axis is not None and value.ndim > self.batch_axis:
            first_bad = np.argwhere(~finite)[0]
            location["batch_index"] = int(first_bad[self.batch_axis])
        raise NonFiniteError("non-finite value recorded on tape", location)

    # ----- reverse sweep -----
    def backward(self, root):
        """Propagate d(root)/d(node) to every node that requires gradients.

        Args:
            root (Tensor): A scalar (size-1) tensor on this tape.

        Returns:
            dict[str, np.ndarray]: Gradients of the named parameters.
                                   Unnamed leaves are available through `Tensor.grad`.
        """
        if self.gradients is not None:
            raise ContractError("backward was already called on this tape")
        if not isinstance(root, Tensor) or root.tape is not self:
            raise ContractError("backward root must be a tensor of this tape")
        if root.size != 1:
            raise ContractError(f"backward root must be scalar, got shape {root.shape}")

        grads = [None] * len(self.nodes)
        grads[root.node_id] = np.ones_like(root.value)
        leaf_grads = {}
        for node_id in range(root.node_id, -1, -1):
            grad = grads[node_id]
            if grad is None:
                continue
            node = self.nodes[node_id]
            if node.function is None:
                leaf_grads[node_id] = grad
                continue
            grads[node_id] = None  # intermediate adjoints are released as soon as they are used
            input_grads = node.function.backward(node.ctx, grad)
            for input_id, input_grad in zip(node.inputs, input_grads):
                input_node = self.nodes[input_id]
                if input_grad is None or not input_node.requires_grad:
                    continue
                input_grad = unbroadcast(np.asarray(input_grad, dtype=DTYPE), input_node.value.shape)
                if grads[input_id] is None:
                    grads[input_id] = input_grad
                else:
                    grads[input_id] = grads[input_id] + input_grad

        self.gradients = leaf_grads
        return {name: self.gradient(tensor) for name, tensor in self._parameters.items()}

    def gradient(self, tensor):
        if self.gradients is None:
            raise ContractError("gradients are only available after backward")
        node = self.nodes[tensor.node_id]
        grad = self.gradients.get(tensor.node_id)
        if grad is None:
            return np.zeros_like(node.value)
        return grad

    # ----- replay -----
    def replay(self):
        """Recompute every node's value from the recorded leaves and op attributes.

        Returns:
            list[np.ndarray]: The recomputed values, in node order.
        """
        values = []
        for node in self.nodes:
            if node.function is None:
                values.append(node.value)
                continue
            ctx = Context(node.ctx.attrs)
            value = node.function.forward(ctx, *[values[i] for i in node.inputs], **node.ctx.attrs)
            values.append(np.asarray(value, dtype=DTYPE))
        return values

    def verify_replay(self):
        """Whether replaying the tape reproduces the recorded values bit-exactly."""
        return all(np.array_equal(node.value, value)
                   for node, value in zip(self.nodes, self.replay()))
