"""
Module with the tentative policy network and its episode memories.

The external vision memory logs one feature per step and flags a deadlock when the
current feature repeats an earlier one. The internal state memory holds slots
(key f_t, value [a_t | f_t+1]) that the network reads by softmax attention over inner
products with the current feature. At deadlocks the network proposes an action, which
is either learned from the expert (training) or used to adapt the frozen navigation
policy for the rest of the episode (evaluation).
"""

# local imports
from src.constants import constants as const
from src.diffcore import optim
from src.diffcore import parameters as prm
from src.diffcore import tensor as td
from src.errors import errors as err
from src.gridworld.environment import Episode, EpisodeConfig, reset
from src.gridworld.expert import expert_action
from src.gridworld.sensor import SensorConfig, render_observation
from src.navpolicy import network as net
from src.utils import validate as val
from src.utils.logger import get_logger
# external imports
from dataclasses import dataclass, field
import numpy as np

logger = get_logger(__name__)

@dataclass(frozen=True)
class DeadlockConfig():
    # max-norm tolerance; 0 means exact repeats only
    threshold: float = 0.0
    min_revisits: int = 1

    def __post_init__(self):
        if not val.non_negative(self.threshold):
            raise err.InvalidAttribute(f"Deadlock threshold {self.threshold} must be non-negative.", 'threshold')
        if self.min_revisits < 1:
            raise err.InvalidAttribute(f"min_revisits {self.min_revisits} must be at least 1.", 'min_revisits')

class ExternalMemory():
    def __init__(self):
        self.features = []

    def append(self, feature):
        self.features.append(np.asarray(feature, dtype=np.float64).ravel().copy())

    def clear(self):
        self.features = []

    def __len__(self):
        return len(self.features)

    def __getitem__(self, index):
        return self.features[index]

@dataclass(frozen=True, eq=False)
class MemorySlot():
    key: np.ndarray
    action: np.ndarray
    next_feature: np.ndarray

    @property
    def value(self) -> np.ndarray:
        return np.concatenate([self.action, self.next_feature])

class InternalMemory():
    def __init__(self):
        self.slots = []

    def append(self, slot:MemorySlot):
        if self.slots and (slot.key.shape != self.slots[0].key.shape or slot.value.shape != self.slots[0].value.shape):
            raise err.DimensionError(f"Slot shapes {slot.key.shape}/{slot.value.shape} differ from the memory's "
                                     f"{self.slots[0].key.shape}/{self.slots[0].value.shape}.",
                                     (slot.key.shape, self.slots[0].key.shape))
        self.slots.append(slot)

    def clear(self):
        self.slots = []

    def keys(self) -> np.ndarray:
        return np.stack([slot.key for slot in self.slots])

    def values(self) -> np.ndarray:
        return np.stack([slot.value for slot in self.slots])

    def __len__(self):
        return len(self.slots)

    def __getitem__(self, index):
        return self.slots[index]

def _row(feature) -> np.ndarray:
    if isinstance(feature, td.Tensor):
        feature = feature.data
    return np.asarray(feature, dtype=np.float64).ravel()

def detect_deadlock(memory:ExternalMemory, feature, threshold:float=0.0, min_revisits:int=1) -> bool:
    """
    True iff at least min_revisits recorded features lie within threshold of feature in max-norm.
    """
    feature = _row(feature)
    matches = 0
    for recorded in memory.features:
        if recorded.shape == feature.shape and np.max(np.abs(recorded - feature)) <= threshold:
            matches += 1
            if matches >= min_revisits:
                return True
    return False

def record_step(external:ExternalMemory, internal:InternalMemory, feature, action, next_feature, vision=None):
    """
    Appends the step's vision feature (feature itself unless vision is given) to the external memory
    and the slot (feature, (action, next_feature)) to the internal memory.
    """
    external.append(_row(feature) if vision is None else _row(vision))
    internal.append(MemorySlot(key=_row(feature).copy(), action=_row(action).copy(), next_feature=_row(next_feature).copy()))

def memory_attention(feature, internal:InternalMemory) -> tuple:
    """
    Returns (embedded feature as a 1 x v constant tensor, attention weights p) with
    p = softmax_i <feature, key_i> and embedded = sum_i p_i value_i.
    """
    if len(internal) == 0:
        raise err.EmptyInputError("Memory attention needs at least one internal memory slot.")
    feature = _row(feature)
    scores = internal.keys() @ feature
    weights = np.exp(scores - scores.max())
    weights /= weights.sum()
    embedded = weights @ internal.values()
    return td.constant(embedded.reshape(1, -1)), weights

def init_tpn_parameters(seed:int, feature_dim:int=const.VISUAL_DIM) -> dict:
    rng = np.random.default_rng(seed)
    params = {}
    value_dim = const.NUM_ACTIONS + feature_dim
    prm.dense(rng, params, 'tpn.joint', feature_dim + value_dim, const.TPN_HIDDEN)
    prm.dense(rng, params, 'tpn.action', const.TPN_HIDDEN, const.NUM_ACTIONS)
    return params

def tpn_forward(feature, embedded, params:dict) -> td.Tensor:
    """
    softmax(relu([feature | embedded] W1 + b1) W2 + b2) over the six actions.
    """
    joint = td.concat([td.as_tensor(_row(feature).reshape(1, -1)), td.as_tensor(embedded)], axis=1)
    if joint.cols != params['tpn.joint.weight'].rows:
        raise err.DimensionError(f"TPN input has length {joint.cols}, expected {params['tpn.joint.weight'].rows}.",
                                 (joint.shape, params['tpn.joint.weight'].shape))
    hidden = td.relu(td.matmul(joint, params['tpn.joint.weight']) + params['tpn.joint.bias'])
    return td.softmax(td.matmul(hidden, params['tpn.action.weight']) + params['tpn.action.bias'])

@dataclass
class TpnEpisodeReport():
    """
    Outcome of one TPN training episode. updates == 0 is the no-deadlock marker and carries loss 0.
    """
    loss: float = 0.0
    updates: int = 0
    steps: int = 0
    deadlocks: int = 0
    losses: list = field(default_factory=list)

    @property
    def trained(self) -> bool:
        return self.updates > 0

def supervised_tpn_update(feature, embedded, expert:int, tpn_params:dict, state:optim.AdamState) -> float:
    """
    One Adam step on CE(tpn_forward(feature, embedded), expert) over the TPN parameters only.
    """
    prm.zero_grad(tpn_params)
    with td.Tape() as tape:
        loss = td.cross_entropy(tpn_forward(feature, embedded, tpn_params), expert)
    tape.backward(loss)
    optim.adam_step(tpn_params, prm.gradients(tpn_params), state)
    return loss.item()

def frozen_rollout(model:net.NavigationModel, episode:Episode, deadlock:DeadlockConfig=DeadlockConfig(),
                   mode:str='train', rng=None, noise_seed:int=0, scripted_actions:list=None):
    """
    Steps episode with the navigation model (never written) and yields (state, feature, embedded)
    at every detected deadlock, before the step's action is taken.
    scripted_actions, when given, replaces the model's first choices.
    """
    scene, target, sensor = episode.scene, episode.target, episode.sensor
    rng = np.random.default_rng(rng)
    external, internal = ExternalMemory(), InternalMemory()
    observation = render_observation(scene, episode.state, target, noise_seed, sensor)
    output, visual = model.forward(observation, target, None, net.initial_hidden())
    while not episode.done:
        vision = observation.fingerprint()
        if len(internal) > 0 and detect_deadlock(external, vision, deadlock.threshold, deadlock.min_revisits):
            embedded, _ = memory_attention(visual, internal)
            yield episode.state, visual, embedded
        if scripted_actions is not None and episode.steps < len(scripted_actions):
            action = int(scripted_actions[episode.steps])
        else:
            action = net.select_action(output.distribution, mode, rng)
        episode.step(action)
        if episode.done:
            break
        observation = render_observation(scene, episode.state, target, noise_seed, sensor)
        next_output, next_visual = model.forward(observation, target, action, output.next_hidden)
        record_step(external, internal, visual, output.probabilities, next_visual, vision=vision)
        output, visual = next_output, next_visual

def train_tpn_step(model:net.NavigationModel, scene, episode_seed:int, tpn_params:dict, state:optim.AdamState,
                   config:EpisodeConfig=EpisodeConfig(), sensor:SensorConfig=SensorConfig(),
                   deadlock:DeadlockConfig=DeadlockConfig(), mode:str='train', noise_seed:int=0,
                   start=None, target:int=None, scripted_actions:list=None) -> TpnEpisodeReport:
    """
    Rolls the frozen navigation model for one episode and takes an Adam step on the TPN at every
    detected deadlock with the expert action as label.
    """
    if start is None or target is None:
        start, target = reset(scene, episode_seed, config, sensor)
    episode = Episode(scene=scene, target=target, state=start, config=config, sensor=sensor)
    report = TpnEpisodeReport()
    for pose, feature, embedded in frozen_rollout(model, episode, deadlock, mode, episode_seed, noise_seed,
                                                  scripted_actions):
        label = int(expert_action(scene, pose, target, config, sensor))
        report.losses.append(supervised_tpn_update(feature, embedded, label, tpn_params, state))
        report.deadlocks += 1
        report.updates += 1
    report.steps = episode.steps
    report.loss = float(np.mean(report.losses)) if report.losses else 0.0
    if not report.trained:
        logger.debug(f"No deadlock in TPN episode on '{scene.scene_id}' (seed {episode_seed}).")
    return report

def adaptation_names(params:dict, scope:str='all') -> list:
    if scope == 'all':
        return list(params)
    if scope == 'policy':
        return [name for name in params if name.startswith('policy.')]
    raise err.InvalidAttribute(f"Unknown adaptation scope '{scope}'.", 'scope')

def test_time_adapt(model:net.NavigationModel, observation, target:int, prev_action, hidden:td.Tensor,
                    guidance:int, state:optim.AdamState, scope:str='all') -> float:
    """
    One Adam step on CE(nav distribution, guidance) over the navigation parameters named by scope,
    recomputed from the same step inputs. The TPN is not touched.
    """
    prm.zero_grad(model.params)
    with td.Tape() as tape:
        output, _ = model.forward(observation, target, prev_action, td.constant(hidden.data))
        loss = td.cross_entropy(output.distribution, guidance)
    if loss.requires_grad:
        tape.backward(loss)
    names = adaptation_names(model.params, scope)
    optim.adam_step(model.params, {name: model.params[name].grad for name in names}, state)
    return loss.item()

def deadlock_dataset(model:net.NavigationModel, scenes:list, seeds:list, config:EpisodeConfig=EpisodeConfig(),
                     sensor:SensorConfig=SensorConfig(), deadlock:DeadlockConfig=DeadlockConfig(),
                     noise_seed:int=0) -> list:
    """
    (feature, embedded, expert action) triples collected at the deadlocks of frozen-model episodes,
    a fixed set on which TPN cross-entropy is measured.
    """
    samples = []
    for scene, seed in zip(scenes, seeds):
        start, target = reset(scene, seed, config, sensor)
        episode = Episode(scene=scene, target=target, state=start, config=config, sensor=sensor)
        for pose, feature, embedded in frozen_rollout(model, episode, deadlock, 'train', seed, noise_seed):
            samples.append((feature.numpy(), embedded.numpy(),
                            int(expert_action(scene, pose, target, config, sensor))))
    return samples

def dataset_loss(samples:list, tpn_params:dict) -> float:
    if not samples:
        raise err.EmptyInputError("Cannot measure the TPN loss on an empty deadlock set.")
    return float(np.mean([td.cross_entropy(tpn_forward(feature, embedded, tpn_params), label).item()
                          for feature, embedded, label in samples]))
