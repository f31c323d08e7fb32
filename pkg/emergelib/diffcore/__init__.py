from .tape import Tape, Tensor, Function, Context, unbroadcast
from .ops import (
    add, sub, mul, div, neg, matmul, unary, tanh, elu, exp, log, sqrt, sigmoid, square,
    softmax, reduce, stochastic, reshape, transpose, swapaxes, getitem, take, concat, stack,
)
from .gradcheck import check_gradients, analytic_gradient, numerical_gradient, relative_error


def backward(tape, root):
    """Populate gradients of `root` (a scalar tensor of `tape`) for every parameter.

    Raises:
        ContractError: if `root` is not scalar or `tape` was already swept.
    """
    return tape.backward(root)
