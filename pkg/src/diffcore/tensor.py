"""
Module with a minimal reverse-mode automatic differentiation engine over dense 2-D arrays.

Every tensor is stored as a (rows, cols) float64 array; vectors are (1, n) rows.
Operations executed while a Tape is active, and touching at least one tensor
that requires gradients, are recorded on that tape. Outside of a tape the same
operations only compute values, which is how inference and finite differences run.
"""

# local imports
from src.errors import errors as err
# external imports
from contextlib import contextmanager
import threading
import numpy as np

# clamp applied before taking logarithms
LOG_FLOOR = 1e-12

# tapes are recorded per thread
_local = threading.local()

def _tape_stack() -> list:
    stack = getattr(_local, 'stack', None)
    if stack is None:
        stack = _local.stack = []
    return stack

def active_tape():
    stack = _tape_stack()
    return stack[-1] if stack else None

@contextmanager
def no_tape():
    """
    Suspends recording inside an active tape, e.g. for bootstrap values.
    """
    stack = _tape_stack()
    stack.append(None)
    try:
        yield
    finally:
        stack.pop()

def _as_matrix(data) -> np.ndarray:
    array = np.asarray(data, dtype=np.float64)
    if array.ndim == 0:
        return array.reshape(1, 1)
    if array.ndim == 1:
        return array.reshape(1, -1)
    if array.ndim > 2:
        raise err.DimensionError(f"Only 1-D and 2-D tensors are supported, got shape {array.shape}.", (array.shape,))
    return array

class Tensor():
    """
    Dense real matrix with an optional gradient buffer of the same shape.
    """
    def __init__(self, data, requires_grad:bool=False, name:str=None):
        self.data = np.array(_as_matrix(data), dtype=np.float64)
        self.requires_grad = requires_grad
        self.grad = np.zeros_like(self.data) if requires_grad else None
        self.name = name

    @classmethod
    def _wrap(cls, array:np.ndarray, requires_grad:bool):
        # no copy for arrays freshly produced by an op
        tensor = cls.__new__(cls)
        tensor.data = _as_matrix(array)
        tensor.requires_grad = requires_grad
        tensor.grad = np.zeros_like(tensor.data) if requires_grad else None
        tensor.name = None
        return tensor

    @property
    def shape(self):
        return self.data.shape

    @property
    def rows(self):
        return self.data.shape[0]

    @property
    def cols(self):
        return self.data.shape[1]

    @property
    def size(self):
        return self.data.size

    def item(self) -> float:
        if self.data.size != 1:
            raise err.DimensionError(f"Only single-element tensors convert to scalars, got shape {self.shape}.", (self.shape,))
        return float(self.data[0, 0])

    def numpy(self) -> np.ndarray:
        return self.data.copy()

    def zero_grad(self):
        if self.requires_grad:
            self.grad = np.zeros_like(self.data)

    def __repr__(self):
        label = f" '{self.name}'" if self.name else ''
        return f"Tensor{label}(shape={self.shape}, requires_grad={self.requires_grad})"

    # operator sugar
    def __matmul__(self, other):
        return matmul(self, other)

    def __add__(self, other):
        return add(self, as_tensor(other, like=self))

    def __radd__(self, other):
        return add(as_tensor(other, like=self), self)

    def __sub__(self, other):
        return sub(self, as_tensor(other, like=self))

    def __rsub__(self, other):
        return sub(as_tensor(other, like=self), self)

    def __mul__(self, other):
        if isinstance(other, Tensor):
            return mul(self, other)
        return scale(self, float(other))

    def __rmul__(self, other):
        return self.__mul__(other)

    def __neg__(self):
        return scale(self, -1.0)

def as_tensor(value, like:Tensor=None) -> Tensor:
    if isinstance(value, Tensor):
        return value
    array = np.asarray(value, dtype=np.float64)
    if like is not None and array.ndim == 0:
        array = np.full(like.shape, float(array))
    return Tensor(array)

def constant(value) -> Tensor:
    return Tensor(value, requires_grad=False)

class Operation():
    """
    One recorded primitive: its inputs, output and the map from output gradient to input gradients.
    """
    def __init__(self, name:str, inputs:tuple, output:Tensor, backward_fn):
        self.name = name
        self.inputs = inputs
        self.output = output
        self.backward_fn = backward_fn

    def __repr__(self):
        return f"Operation('{self.name}', inputs={[t.shape for t in self.inputs]}, output={self.output.shape})"

class Tape():
    """
    Ordered record of primitive operations. Used as a context manager around a forward pass;
    backward() walks the record in reverse once and accumulates into every tensor's grad.
    A consumed tape rejects a second backward.
    """
    def __init__(self):
        self._operations = []
        self._consumed = False

    def __enter__(self):
        _tape_stack().append(self)
        return self

    def __exit__(self, exc_type, exc, tb):
        stack = _tape_stack()
        if stack and stack[-1] is self:
            stack.pop()
        return False

    @property
    def operations(self):
        return tuple(self._operations)

    @property
    def consumed(self):
        return self._consumed

    def __len__(self):
        return len(self._operations)

    def record(self, operation:Operation):
        if self._consumed:
            raise err.BackwardError("Cannot record on a tape that was already differentiated.")
        self._operations.append(operation)

    def backward(self, output:Tensor):
        if self._consumed:
            raise err.BackwardError("Backward was already run on this tape; run the forward pass again.")
        if output.size != 1:
            raise err.DimensionError(f"Backward needs a scalar output, got shape {output.shape}.", (output.shape,))
        if not output.requires_grad:
            raise err.BackwardError("The output does not depend on any tensor that requires gradients.")
        self._consumed = True
        output.grad = output.grad + 1.0
        for operation in reversed(self._operations):
            out_grad = operation.output.grad
            if out_grad is None or not out_grad.any():
                continue
            input_grads = operation.backward_fn(out_grad)
            for tensor, grad in zip(operation.inputs, input_grads):
                if grad is not None and tensor.requires_grad:
                    tensor.grad += grad

def _result(name:str, data:np.ndarray, inputs:tuple, backward_fn) -> Tensor:
    tape = active_tape()
    track = tape is not None and any(t.requires_grad for t in inputs)
    output = Tensor._wrap(data, requires_grad=track)
    if track:
        tape.record(Operation(name, inputs, output, backward_fn))
    return output

def _same_shape(op:str, a:Tensor, b:Tensor):
    if a.shape != b.shape:
        raise err.DimensionError(f"Cannot {op} tensors of shapes {a.shape} and {b.shape}.", (a.shape, b.shape))

# PRIMITIVES
def matmul(a:Tensor, b:Tensor) -> Tensor:
    if a.cols != b.rows:
        raise err.DimensionError(f"Cannot multiply shapes {a.shape} and {b.shape}.", (a.shape, b.shape))
    def backward(g):
        return g @ b.data.T, a.data.T @ g
    return _result('matmul', a.data @ b.data, (a, b), backward)

def add(a:Tensor, b:Tensor) -> Tensor:
    _same_shape('add', a, b)
    return _result('add', a.data + b.data, (a, b), lambda g: (g, g))

def sub(a:Tensor, b:Tensor) -> Tensor:
    _same_shape('subtract', a, b)
    return _result('sub', a.data - b.data, (a, b), lambda g: (g, -g))

def mul(a:Tensor, b:Tensor) -> Tensor:
    _same_shape('multiply', a, b)
    def backward(g):
        return g * b.data, g * a.data
    return _result('mul', a.data * b.data, (a, b), backward)

def scale(a:Tensor, factor:float) -> Tensor:
    return _result('scale', a.data * factor, (a,), lambda g: (g * factor,))

def relu(a:Tensor) -> Tensor:
    # subgradient at exactly 0 is 0
    mask = a.data > 0
    return _result('relu', np.where(mask, a.data, 0.0), (a,), lambda g: (g * mask,))

def tanh(a:Tensor) -> Tensor:
    y = np.tanh(a.data)
    return _result('tanh', y, (a,), lambda g: (g * (1.0 - y * y),))

def log(a:Tensor, floor:float=LOG_FLOOR) -> Tensor:
    clamped = np.maximum(a.data, floor)
    live = a.data > floor
    return _result('log', np.log(clamped), (a,), lambda g: (np.where(live, g / clamped, 0.0),))

def softmax(a:Tensor, axis:int=1) -> Tensor:
    if a.shape[axis] == 0:
        raise err.DimensionError(f"Cannot take a softmax over an empty axis of shape {a.shape}.", (a.shape,))
    shifted = a.data - a.data.max(axis=axis, keepdims=True)
    e = np.exp(shifted)
    y = e / e.sum(axis=axis, keepdims=True)
    def backward(g):
        return (y * (g - (g * y).sum(axis=axis, keepdims=True)),)
    return _result('softmax', y, (a,), backward)

def reduce_sum(a:Tensor, axis:int=None) -> Tensor:
    if axis is None:
        return _result('sum', np.array([[a.data.sum()]]), (a,), lambda g: (np.full(a.shape, g[0, 0]),))
    data = a.data.sum(axis=axis, keepdims=True)
    return _result('sum', data, (a,), lambda g: (np.broadcast_to(g, a.shape).copy(),))

def mean(a:Tensor) -> Tensor:
    return scale(reduce_sum(a), 1.0 / a.size)

def concat(tensors:list, axis:int=1) -> Tensor:
    tensors = list(tensors)
    if not tensors:
        raise err.DimensionError("Cannot concatenate an empty list of tensors.", ())
    other = 1 - axis
    for t in tensors[1:]:
        if t.shape[other] != tensors[0].shape[other]:
            raise err.DimensionError(f"Cannot concatenate shapes {tensors[0].shape} and {t.shape} along axis {axis}.",
                                     (tensors[0].shape, t.shape))
    bounds = np.cumsum([0] + [t.shape[axis] for t in tensors])
    def backward(g):
        if axis == 1:
            return tuple(g[:, bounds[i]:bounds[i + 1]] for i in range(len(tensors)))
        return tuple(g[bounds[i]:bounds[i + 1], :] for i in range(len(tensors)))
    return _result('concat', np.concatenate([t.data for t in tensors], axis=axis), tuple(tensors), backward)

def take(a:Tensor, rows:slice=slice(None), cols:slice=slice(None)) -> Tensor:
    """
    2-D slice of a tensor; rows and cols are python slices so the result stays 2-D.
    """
    data = a.data[rows, cols]
    def backward(g):
        full = np.zeros_like(a.data)
        full[rows, cols] = g
        return (full,)
    return _result('slice', data.copy(), (a,), backward)

def reshape(a:Tensor, rows:int, cols:int) -> Tensor:
    if rows * cols != a.size:
        raise err.DimensionError(f"Cannot reshape {a.shape} into {(rows, cols)}.", (a.shape, (rows, cols)))
    return _result('reshape', a.data.reshape(rows, cols), (a,), lambda g: (g.reshape(a.shape),))

def transpose(a:Tensor) -> Tensor:
    return _result('transpose', a.data.T.copy(), (a,), lambda g: (g.T,))

def cross_entropy(predicted_dist:Tensor, target_index:int) -> Tensor:
    """
    -log p[target] of a (1, n) probability row, with p clamped to LOG_FLOOR before the log.
    """
    if predicted_dist.rows != 1:
        raise err.DimensionError(f"Cross entropy expects a single distribution row, got {predicted_dist.shape}.",
                                 (predicted_dist.shape,))
    if not 0 <= int(target_index) < predicted_dist.cols:
        raise err.OutOfRangeError(f"Target index {target_index} is outside [0, {predicted_dist.cols}).", target_index)
    target_index = int(target_index)
    p = predicted_dist.data[0, target_index]
    clamped = max(p, LOG_FLOOR)
    def backward(g):
        grad = np.zeros_like(predicted_dist.data)
        if p > LOG_FLOOR:
            grad[0, target_index] = -g[0, 0] / clamped
        return (grad,)
    return _result('cross_entropy', np.array([[-np.log(clamped)]]), (predicted_dist,), backward)
