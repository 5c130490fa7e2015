"""
Module with the Adam optimizer over named parameter tensors
"""

# local imports
from src.errors import errors as err
# external imports
from dataclasses import dataclass, field
import numpy as np

@dataclass
class AdamState():
    """
    Per-parameter moment estimates plus the shared step counter.
    """
    learning_rate: float = 1e-4
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8
    step: int = 0
    first_moment: dict = field(default_factory=dict)
    second_moment: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {'learning_rate': self.learning_rate, 'beta1': self.beta1, 'beta2': self.beta2,
                'epsilon': self.epsilon, 'step': self.step}

def adam_step(params:dict, grads:dict, state:AdamState) -> dict:
    """
    Applies one bias-corrected Adam update in place and returns params.
    Non-finite gradients abort the update before any parameter changes.
    """
    for name, grad in grads.items():
        if name not in params:
            raise err.DimensionError(f"Gradient '{name}' has no matching parameter.", (np.shape(grad),))
        if np.shape(grad) != params[name].shape:
            raise err.DimensionError(f"Gradient '{name}' of shape {np.shape(grad)} does not match parameter shape "
                                     f"{params[name].shape}.", (np.shape(grad), params[name].shape))
        if not np.all(np.isfinite(grad)):
            raise err.NumericError(f"Non-finite gradient for parameter '{name}'.", name)
    state.step += 1
    correction1 = 1.0 - state.beta1 ** state.step
    correction2 = 1.0 - state.beta2 ** state.step
    for name, grad in grads.items():
        param = params[name]
        m = state.first_moment.get(name)
        v = state.second_moment.get(name)
        if m is None:
            m = np.zeros_like(param.data)
            v = np.zeros_like(param.data)
        m = state.beta1 * m + (1.0 - state.beta1) * grad
        v = state.beta2 * v + (1.0 - state.beta2) * grad * grad
        state.first_moment[name] = m
        state.second_moment[name] = v
        param.data -= state.learning_rate * (m / correction1) / (np.sqrt(v / correction2) + state.epsilon)
    return params
