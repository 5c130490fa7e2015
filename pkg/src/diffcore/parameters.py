"""
Module with helpers for named parameter sets (dicts of name -> Tensor)
"""

# local imports
from src.diffcore.tensor import Tensor
# external imports
import numpy as np

def uniform(rng:np.random.Generator, rows:int, cols:int, bound:float, name:str) -> Tensor:
    return Tensor(rng.uniform(-bound, bound, size=(rows, cols)), requires_grad=True, name=name)

def zeros(rows:int, cols:int, name:str) -> Tensor:
    return Tensor(np.zeros((rows, cols)), requires_grad=True, name=name)

def dense(rng:np.random.Generator, params:dict, prefix:str, fan_in:int, fan_out:int):
    """
    Adds '<prefix>.weight' (fan_in x fan_out) and '<prefix>.bias' (1 x fan_out) to params.
    """
    bound = 1.0 / np.sqrt(fan_in)
    params[f'{prefix}.weight'] = uniform(rng, fan_in, fan_out, bound, f'{prefix}.weight')
    params[f'{prefix}.bias'] = zeros(1, fan_out, f'{prefix}.bias')

def snapshot(params:dict) -> dict:
    return {name: param.data.copy() for name, param in params.items()}

def restore(params:dict, saved:dict):
    for name, param in params.items():
        param.data[...] = saved[name]
        param.zero_grad()

def from_arrays(arrays:dict) -> dict:
    return {name: Tensor(array, requires_grad=True, name=name) for name, array in arrays.items()}

def clone(params:dict) -> dict:
    return from_arrays(snapshot(params))

def zero_grad(params:dict):
    for param in params.values():
        param.zero_grad()

def gradients(params:dict) -> dict:
    return {name: param.grad.copy() for name, param in params.items()}

def parameter_count(params:dict) -> int:
    return int(sum(param.size for param in params.values()))

def bit_equal(first:dict, second:dict) -> bool:
    """
    True when both sets hold the same names with byte-identical values.
    Accepts either tensors or raw arrays on each side.
    """
    if first.keys() != second.keys():
        return False
    for name in first:
        a = first[name].data if isinstance(first[name], Tensor) else first[name]
        b = second[name].data if isinstance(second[name], Tensor) else second[name]
        if a.shape != b.shape or a.tobytes() != b.tobytes():
            return False
    return True
