"""Dense n-dimensional arrays with reverse-mode automatic differentiation.

A :class:`Tensor` wraps a numpy array. Every differentiable operation in
:mod:`vitvs.tensor.ops` returns a new tensor whose ``node`` records the
operation's inputs and a closure computing the input gradients from the
output gradient. :func:`backward` orders those nodes into a
:class:`GradientTape` and runs them in reverse.

Tensors that don't take part in a tape are treated as immutable values.
A tape and the tensors connected to it belong to one thread.
"""

import contextlib
import logging
import threading

import numpy as np

import vitvs
from vitvs.common.exceptions import InvalidInputError, NumericalError, ShapeError

logger = logging.getLogger(__name__)

DTYPES = {
    'float32': np.float32,
    'float64': np.float64,
}

_local = threading.local()


def _dtype_name(name):
    if name not in DTYPES:
        raise InvalidInputError('Unknown precision `{}`, expected one of {}'.format(
            name, sorted(DTYPES)))
    return name


def get_dtype():
    """The element type new tensors are created with."""
    override = getattr(_local, 'precision', None)
    return DTYPES[override or vitvs.config['tensor']['precision']]


def set_precision(name):
    """Switch the process-wide default precision (``float32``/``float64``)."""
    vitvs.config['tensor']['precision'] = _dtype_name(name)


@contextlib.contextmanager
def precision(name):
    """Temporarily create tensors at ``name`` precision in this thread."""
    previous = getattr(_local, 'precision', None)
    _local.precision = _dtype_name(name)
    try:
        yield
    finally:
        _local.precision = previous


def is_grad_enabled():
    return getattr(_local, 'grad_enabled', True)


@contextlib.contextmanager
def no_grad():
    """Run operations without recording them."""
    previous = is_grad_enabled()
    _local.grad_enabled = False
    try:
        yield
    finally:
        _local.grad_enabled = previous


class Node(object):
    """The tape record of one operation.

    Attributes:
        op (str): operation name, used in diagnostics.
        inputs (tuple): the input tensors, in argument order.
        backward_fn (callable): maps the output gradient to a tuple with one
            gradient (or ``None``) per input.
    """

    __slots__ = ('op', 'inputs', 'backward_fn')

    def __init__(self, op, inputs, backward_fn):
        self.op = op
        self.inputs = tuple(inputs)
        self.backward_fn = backward_fn

    def __repr__(self):
        return '<Node {} inputs={}>'.format(self.op, [t.shape for t in self.inputs])


class Tensor(object):
    """A real array, optionally participating in a gradient tape.

    Args:
        data: anything ``numpy.asarray`` accepts.
        requires_grad (bool): whether gradients should be accumulated
            into ``grad`` by :func:`backward`.
        dtype: element type; defaults to the current precision.
        name (str): optional label used in diagnostics.
    """

    __array_priority__ = 100

    def __init__(self, data, requires_grad=False, dtype=None, name=None):
        self.data = np.asarray(data, dtype=dtype or get_dtype())
        self.requires_grad = bool(requires_grad)
        self.grad = None
        self.node = None
        self.name = name

    def __repr__(self):
        label = ' {}'.format(self.name) if self.name else ''
        return '<Tensor{} shape={} dtype={} requires_grad={}>'.format(
            label, self.shape, self.dtype, self.requires_grad)

    @property
    def shape(self):
        return tuple(self.data.shape)

    @property
    def ndim(self):
        return self.data.ndim

    @property
    def size(self):
        return self.data.size

    @property
    def dtype(self):
        return self.data.dtype

    @property
    def tape_node(self):
        return self.node

    def numpy(self):
        return self.data

    def item(self):
        if self.size != 1:
            raise InvalidInputError('item() needs a single element, shape is {}'.format(self.shape))
        return self.data.reshape(()).item()

    def zero_grad(self):
        self.grad = None
        return self

    def detach(self):
        return Tensor(self.data, dtype=self.dtype)

    def backward(self):
        return backward(self)

    def __add__(self, other):
        from vitvs.tensor import ops
        return ops.add(self, other)

    def __radd__(self, other):
        from vitvs.tensor import ops
        return ops.add(other, self)

    def __sub__(self, other):
        from vitvs.tensor import ops
        return ops.sub(self, other)

    def __rsub__(self, other):
        from vitvs.tensor import ops
        return ops.sub(other, self)

    def __mul__(self, other):
        from vitvs.tensor import ops
        if np.isscalar(other):
            return ops.scale(self, other)
        return ops.mul(self, other)

    def __rmul__(self, other):
        return self.__mul__(other)

    def __neg__(self):
        from vitvs.tensor import ops
        return ops.scale(self, -1.0)

    def __matmul__(self, other):
        from vitvs.tensor import ops
        return ops.matmul(self, other)

    def reshape(self, *shape):
        from vitvs.tensor import ops
        if len(shape) == 1 and isinstance(shape[0], (tuple, list)):
            shape = shape[0]
        return ops.reshape(self, shape)

    def transpose(self, *axes):
        from vitvs.tensor import ops
        if len(axes) == 1 and isinstance(axes[0], (tuple, list)):
            axes = axes[0]
        return ops.transpose(self, axes or None)

    def sum(self, axis=None, keepdims=False):
        from vitvs.tensor import ops
        return ops.sum(self, axis=axis, keepdims=keepdims)

    def mean(self, axis=None, keepdims=False):
        from vitvs.tensor import ops
        return ops.mean(self, axis=axis, keepdims=keepdims)

    def __getitem__(self, key):
        from vitvs.tensor import ops
        return ops.slice(self, key)


def as_tensor(value):
    if isinstance(value, Tensor):
        return value
    return Tensor(value)


def make_result(op, data, inputs, backward_fn):
    """Wrap the output of an operation, recording it on the tape when any
    input requires a gradient."""
    if vitvs.config['tensor']['debug'] and not np.all(np.isfinite(data)):
        raise NumericalError('`{}` produced non-finite values (input shapes {})'.format(
            op, [t.shape for t in inputs]))
    requires_grad = is_grad_enabled() and any(t.requires_grad for t in inputs)
    out = Tensor(data, requires_grad=requires_grad, dtype=data.dtype)
    if requires_grad:
        out.node = Node(op, inputs, backward_fn)
    return out


def broadcast_shape(op, a_shape, b_shape):
    """Result shape of a binary elementwise op.

    Only leading-dimension broadcast is allowed: one shape must be a suffix
    of the other.
    """
    a_shape, b_shape = tuple(a_shape), tuple(b_shape)
    if len(a_shape) >= len(b_shape):
        longer, shorter = a_shape, b_shape
    else:
        longer, shorter = b_shape, a_shape
    if longer[len(longer) - len(shorter):] != shorter:
        raise ShapeError('{}: shapes {} and {} differ beyond leading dimensions'.format(
            op, a_shape, b_shape))
    return longer


def unbroadcast(grad, shape):
    """Sum ``grad`` over the leading dimensions that ``shape`` lacks."""
    extra = grad.ndim - len(shape)
    if extra > 0:
        grad = grad.sum(axis=tuple(range(extra)))
    return grad


class GradientTape(object):
    """The ordered record of operations leading to one output.

    ``entries`` lists every tensor taking part in the computation in
    topological order: each tensor comes after all of its inputs.
    """

    def __init__(self, output, entries):
        self.output = output
        self.entries = entries

    def __len__(self):
        return len(self.entries)

    @classmethod
    def from_output(cls, output):
        entries = []
        visited = set()
        # iterative post-order DFS; recursion depth would follow model depth
        stack = [(output, False)]
        while stack:
            tensor, expanded = stack.pop()
            if expanded:
                entries.append(tensor)
                continue
            if id(tensor) in visited:
                continue
            visited.add(id(tensor))
            stack.append((tensor, True))
            if tensor.node is not None:
                for inp in reversed(tensor.node.inputs):
                    if inp.requires_grad and id(inp) not in visited:
                        stack.append((inp, False))
        return cls(output, entries)

    def backward(self):
        pending = {id(self.output): np.ones_like(self.output.data)}
        for tensor in reversed(self.entries):
            grad = pending.pop(id(tensor), None)
            if grad is None:
                continue
            if tensor.grad is None:
                tensor.grad = grad.copy()
            else:
                tensor.grad = tensor.grad + grad
            if tensor.node is None:
                continue
            input_grads = tensor.node.backward_fn(grad)
            for inp, inp_grad in zip(tensor.node.inputs, input_grads):
                if inp_grad is None or not inp.requires_grad:
                    continue
                if inp_grad.shape != inp.shape:
                    raise ShapeError('{}: gradient shape {} does not match input shape {}'.format(
                        tensor.node.op, inp_grad.shape, inp.shape))
                key = id(inp)
                if key in pending:
                    pending[key] = pending[key] + inp_grad
                else:
                    pending[key] = inp_grad
        return self


def backward(loss):
    """Populate ``grad`` of every tensor on ``loss``'s tape with
    d loss / d tensor. Gradients add up across repeated calls.

    Raises:
        InvalidInputError: if ``loss`` is not a single element or is not
            connected to any tensor that requires a gradient.
    """
    if loss.size != 1:
        raise InvalidInputError('backward needs a scalar loss, got shape {}'.format(loss.shape))
    if not loss.requires_grad:
        raise InvalidInputError('loss is not connected to a gradient tape')
    tape = GradientTape.from_output(loss)
    logger.debug('backward over %d tape entries', len(tape))
    return tape.backward()
