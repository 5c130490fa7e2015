"""
Module with the agents the evaluation harness can run: the learned navigator (optionally adapted
by the TPN at deadlocks), a uniform random baseline and the shortest-path expert
"""

# local imports
from src.constants import constants as const
from src.diffcore import optim
from src.diffcore import parameters as prm
from src.diffcore import tensor as td
from src.errors import errors as err
from src.gridworld.expert import expert_action
from src.navpolicy import network as net
from src.tpn import tpn
from src.utils import validate as val
from src.utils.logger import get_logger
# external imports
from abc import ABC, abstractmethod
import numpy as np

logger = get_logger(__name__)

class Agent(ABC):
    name = 'agent'

    def begin_episode(self, episode, episode_seed:int):
        pass

    def end_episode(self, episode):
        pass

    @abstractmethod
    def act(self, episode, observation) -> int:
        """
        Returns the action for the episode's current state given its observation.
        """

class RandomAgent(Agent):
    """
    Uniform over all six actions, Done included.
    """
    name = 'random'

    def __init__(self, seed:int=0):
        self.seed = seed
        self.rng = np.random.default_rng(seed)

    def begin_episode(self, episode, episode_seed:int):
        self.rng = np.random.default_rng([self.seed, episode_seed])

    def act(self, episode, observation) -> int:
        return int(self.rng.integers(const.NUM_ACTIONS))

class ExpertAgent(Agent):
    name = 'expert'

    def act(self, episode, observation) -> int:
        return int(expert_action(episode.scene, episode.state, episode.target, episode.config, episode.sensor))

class NavigationAgent(Agent):
    """
    Greedy navigator. With adapt set, the TPN proposes an action at triggering steps and the navigation
    parameters take one adaptation step towards it; they are restored when every episode starts and ends.
    tpn_mode: 'deadlock' triggers at detected deadlocks, 'all' at every step with a non-empty memory,
    'random' at deadlocks but towards a uniformly random action.
    """
    name = 'navigation'

    def __init__(self, model:net.NavigationModel, tpn_params:dict=None, adapt:bool=False,
                 tpn_mode:str='deadlock', deadlock:tpn.DeadlockConfig=tpn.DeadlockConfig(),
                 learning_rate:float=1e-4, scope:str='all', seed:int=0):
        if adapt and not tpn_params:
            raise err.TpnMissingError("Adaptation needs TPN parameters.", '')
        if not val.tpn_mode(tpn_mode):
            raise err.InvalidAttribute(f"Unknown TPN mode '{tpn_mode}'.", 'tpn_mode')
        self.model = model
        self.tpn_params = tpn_params
        self.adapt = adapt
        self.tpn_mode = tpn_mode
        self.deadlock = deadlock
        self.learning_rate = learning_rate
        self.scope = scope
        self.seed = seed
        self._initial = model.snapshot()
        self.adaptations = 0
        self.attention = []
        self._reset_memory(0)

    def _reset_memory(self, episode_seed:int):
        self.external = tpn.ExternalMemory()
        self.internal = tpn.InternalMemory()
        self.hidden = net.initial_hidden()
        self.prev_action = None
        self._pending = None
        self.optimizer = optim.AdamState(learning_rate=self.learning_rate)
        self.rng = np.random.default_rng([self.seed, episode_seed])

    def begin_episode(self, episode, episode_seed:int):
        if self.adapt:
            self.model.restore(self._initial)
        self._reset_memory(episode_seed)
        self.attention = []

    def end_episode(self, episode):
        if self.adapt:
            self.model.restore(self._initial)

    def _guidance(self, visual, embedded) -> int:
        if self.tpn_mode == 'random':
            return int(self.rng.integers(const.NUM_ACTIONS))
        return net.select_action(tpn.tpn_forward(visual, embedded, self.tpn_params), 'eval')

    def act(self, episode, observation) -> int:
        target = episode.target
        output, visual = self.model.forward(observation, target, self.prev_action, self.hidden)
        vision = observation.fingerprint()
        if self._pending is not None:
            key, probabilities, seen = self._pending
            tpn.record_step(self.external, self.internal, key, probabilities, visual, vision=seen)
        triggered = self.adapt and len(self.internal) > 0 and (
            self.tpn_mode == 'all'
            or tpn.detect_deadlock(self.external, vision, self.deadlock.threshold, self.deadlock.min_revisits))
        if triggered:
            embedded, weights = tpn.memory_attention(visual, self.internal)
            guidance = self._guidance(visual, embedded)
            tpn.test_time_adapt(self.model, observation, target, self.prev_action, self.hidden, guidance,
                                self.optimizer, self.scope)
            self.adaptations += 1
            self.attention.append((episode.steps, weights.tolist()))
            output, visual = self.model.forward(observation, target, self.prev_action, self.hidden)
            logger.debug(f"Adapted at step {episode.steps} towards action {guidance}.")
        action = net.select_action(output.distribution, 'eval')
        self._pending = (visual.numpy(), output.probabilities, vision)
        self.hidden = td.constant(output.next_hidden.data)
        self.prev_action = action
        return action

    @property
    def parameters_restored(self) -> bool:
        return prm.bit_equal(self.model.params, self._initial)
