"""
Module that verifies tape gradients against central finite differences
"""

# local imports
from src.diffcore.tensor import Tape
# external imports
from dataclasses import dataclass
import numpy as np

# denominators below this are treated as this, so two near-zero gradients compare as equal
ABSOLUTE_FLOOR = 1e-6

@dataclass
class GradCheckReport():
    max_relative_error: float
    max_absolute_error: float
    worst_parameter: str
    checked: int
    tolerance: float

    @property
    def passed(self) -> bool:
        return self.max_relative_error <= self.tolerance

def relative_error(analytic:float, numeric:float) -> float:
    return abs(analytic - numeric) / max(abs(analytic), abs(numeric), ABSOLUTE_FLOOR)

def finite_difference_check(function, params:dict, tolerance:float=1e-4, step:float=1e-5,
                            samples_per_parameter:int=None, seed:int=0) -> GradCheckReport:
    """
    Compares the tape gradient of the scalar-valued, deterministic function() with central differences
    over the tensors in params. With samples_per_parameter set, only that many randomly chosen entries
    of each tensor are perturbed.
    """
    for param in params.values():
        param.zero_grad()
    with Tape() as tape:
        output = function()
    tape.backward(output)
    analytic = {name: param.grad.copy() for name, param in params.items()}

    rng = np.random.default_rng(seed)
    worst = (0.0, 0.0, '')
    checked = 0
    for name, param in params.items():
        indices = list(np.ndindex(param.shape))
        if samples_per_parameter is not None and samples_per_parameter < len(indices):
            picks = rng.choice(len(indices), size=samples_per_parameter, replace=False)
            indices = [indices[i] for i in sorted(picks)]
        for index in indices:
            original = param.data[index]
            param.data[index] = original + step
            plus = function().item()
            param.data[index] = original - step
            minus = function().item()
            param.data[index] = original
            numeric = (plus - minus) / (2.0 * step)
            rel = relative_error(analytic[name][index], numeric)
            if rel > worst[0]:
                worst = (rel, abs(analytic[name][index] - numeric), name)
            checked += 1
    for param in params.values():
        param.zero_grad()
    return GradCheckReport(max_relative_error=worst[0], max_absolute_error=worst[1], worst_parameter=worst[2],
                           checked=checked, tolerance=tolerance)
