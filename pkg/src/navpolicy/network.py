"""
Module with the navigation network: joint representation, recurrent actor-critic heads and action selection.

joint = [global | local | previous action one-hot | hidden state]
The joint vector passes two ReLU dense layers, a tanh recurrent cell that yields the next
hidden state, and two heads over that state: a softmax policy over the six actions and a
linear value.
"""

# local imports
from src.constants import constants as const
from src.diffcore import parameters as prm
from src.diffcore import tensor as td
from src.errors import errors as err
from src.orggraph import orggraph as org
from src.utils.logger import get_logger
# external imports
from dataclasses import dataclass
import numpy as np

logger = get_logger(__name__)

@dataclass
class PolicyOutput():
    distribution: td.Tensor
    value: td.Tensor
    next_hidden: td.Tensor

    @property
    def probabilities(self) -> np.ndarray:
        return self.distribution.data[0].copy()

def init_policy_parameters(rng:np.random.Generator) -> dict:
    params = {}
    prm.dense(rng, params, 'fc1', const.JOINT_DIM, const.NAV_HIDDEN)
    prm.dense(rng, params, 'fc2', const.NAV_HIDDEN, const.NAV_HIDDEN)
    prm.dense(rng, params, 'cell.input', const.NAV_HIDDEN, const.STATE_DIM)
    params['cell.hidden.weight'] = prm.uniform(rng, const.STATE_DIM, const.STATE_DIM,
                                               1.0 / np.sqrt(const.STATE_DIM), 'cell.hidden.weight')
    prm.dense(rng, params, 'policy', const.STATE_DIM, const.NUM_ACTIONS)
    prm.dense(rng, params, 'value', const.STATE_DIM, 1)
    return params

def init_navigation_parameters(seed:int, use_org:bool=True) -> dict:
    rng = np.random.default_rng(seed)
    params = org.init_org_parameters(rng) if use_org else {}
    params.update(init_policy_parameters(rng))
    return params

def initial_hidden() -> td.Tensor:
    return td.constant(np.zeros((1, const.STATE_DIM)))

def action_one_hot(action) -> np.ndarray:
    encoded = np.zeros((1, const.NUM_ACTIONS))
    if action is not None:
        encoded[0, int(action)] = 1.0
    return encoded

def encode_visual(observation, target:int, params:dict, use_org:bool=True) -> td.Tensor:
    """
    Visual prefix [global | local] of the joint representation.
    """
    global_feature = td.constant(observation.global_feature)
    return td.concat([global_feature, org.local_feature(observation, target, params, use_org)], axis=1)

def build_joint(visual:td.Tensor, prev_action, hidden:td.Tensor) -> td.Tensor:
    joint = td.concat([visual, td.constant(action_one_hot(prev_action)), hidden], axis=1)
    if joint.cols != const.JOINT_DIM:
        raise err.DimensionError(f"Joint representation has length {joint.cols}, expected {const.JOINT_DIM}.",
                                 (joint.shape,))
    return joint

def _dense(x:td.Tensor, params:dict, prefix:str) -> td.Tensor:
    return td.matmul(x, params[f'{prefix}.weight']) + params[f'{prefix}.bias']

def policy_forward(joint:td.Tensor, params:dict) -> PolicyOutput:
    if joint.cols != const.JOINT_DIM:
        raise err.DimensionError(f"Joint representation has length {joint.cols}, expected {const.JOINT_DIM}.",
                                 (joint.shape,))
    hidden = td.take(joint, cols=slice(const.JOINT_DIM - const.STATE_DIM, const.JOINT_DIM))
    z = td.relu(_dense(joint, params, 'fc1'))
    z = td.relu(_dense(z, params, 'fc2'))
    next_hidden = td.tanh(_dense(z, params, 'cell.input') + td.matmul(hidden, params['cell.hidden.weight']))
    distribution = td.softmax(_dense(next_hidden, params, 'policy'))
    value = _dense(next_hidden, params, 'value')
    for name, tensor in (('distribution', distribution), ('value', value), ('hidden', next_hidden)):
        if not np.all(np.isfinite(tensor.data)):
            logger.info(f"Non-finite {name} in the policy forward pass.")
            raise err.NumericError(f"The policy produced a non-finite {name}.", name)
    return PolicyOutput(distribution=distribution, value=value, next_hidden=next_hidden)

def select_action(distribution, mode:str='eval', rng=None) -> int:
    """
    mode 'eval' takes the most probable action, the lowest index on ties.
    mode 'train' samples from the distribution; rng is a Generator or an integer seed.
    """
    probabilities = distribution.data[0] if isinstance(distribution, td.Tensor) else np.asarray(distribution).ravel()
    if mode == 'eval':
        return int(np.argmax(probabilities))
    if mode == 'train':
        rng = np.random.default_rng(rng)
        # renormalize against rounding drift
        probabilities = probabilities / probabilities.sum()
        return int(rng.choice(len(probabilities), p=probabilities))
    raise err.InvalidAttribute(f"Unknown selection mode '{mode}'.", 'mode')

class NavigationModel():
    """
    Navigation network parameters together with the switch that enables the relation graph.
    """
    def __init__(self, params:dict, use_org:bool=True):
        self.params = params
        self.use_org = use_org

    @classmethod
    def create(cls, seed:int, use_org:bool=True):
        model = cls(init_navigation_parameters(seed, use_org), use_org)
        logger.info(f"Initialized a navigation model (seed {seed}, relation graph {'on' if use_org else 'off'}, "
                    f"{model.parameter_count} parameters).")
        return model

    @property
    def parameter_count(self) -> int:
        return prm.parameter_count(self.params)

    def visual(self, observation, target:int) -> td.Tensor:
        return encode_visual(observation, target, self.params, self.use_org)

    def forward(self, observation, target:int, prev_action, hidden:td.Tensor) -> tuple:
        """
        Returns (PolicyOutput, visual prefix) for one step.
        """
        visual = self.visual(observation, target)
        output = policy_forward(build_joint(visual, prev_action, hidden), self.params)
        return output, visual

    def snapshot(self) -> dict:
        return prm.snapshot(self.params)

    def restore(self, saved:dict):
        prm.restore(self.params, saved)
