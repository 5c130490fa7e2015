"""
Module with the episode mechanics: success rule, rewards, step protocol and seeded resets
"""

# local imports
from src.constants import constants as const
from src.errors import errors as err
from src.gridworld.sensor import SensorConfig, sight
from src.gridworld.state import Action, AgentState, transition
from src.utils import validate as val
from src.utils.logger import get_logger
# external imports
from dataclasses import dataclass, field
from enum import Enum
import numpy as np

logger = get_logger(__name__)

# reset re-draws this many times before declaring the scene unusable
RESET_ATTEMPTS = 100

@dataclass(frozen=True)
class EpisodeConfig():
    max_steps: int = 99
    success_distance_m: float = 1.5
    step_penalty: float = -0.001
    success_reward: float = 5.0

    def __post_init__(self):
        if self.max_steps < 1:
            raise err.InvalidAttribute(f"max_steps {self.max_steps} must be at least 1.", 'max_steps')
        if not val.positive(self.success_distance_m):
            raise err.InvalidAttribute(f"success_distance_m {self.success_distance_m} must be positive.", 'success_distance_m')

class StepEvent(Enum):
    MOVED = 'moved'
    COLLISION = 'collision'
    SUCCESS = 'success'
    FAILURE = 'failure'
    TIMEOUT = 'timeout'

@dataclass(frozen=True)
class StepResult():
    next_state: AgentState
    reward: float
    done: bool
    event: StepEvent

def success_check(scene, state:AgentState, target:int, config:EpisodeConfig=EpisodeConfig(),
                  sensor:SensorConfig=SensorConfig()) -> bool:
    """
    True iff some instance of target is in view, unoccluded and within the success distance.
    """
    for obj in scene.instances(target):
        seen = sight(scene, state, obj, sensor)
        if seen is not None and seen.distance_cells * scene.cell_size <= config.success_distance_m + 1e-9:
            return True
    return False

def step(scene, state:AgentState, action:Action, config:EpisodeConfig, target:int,
         sensor:SensorConfig=SensorConfig()) -> StepResult:
    """
    Pure transition plus reward. A successful Done earns success_reward alone; every other step,
    failed Done and collisions included, earns step_penalty.
    """
    action = Action(action)
    if action == Action.DONE:
        if success_check(scene, state, target, config, sensor):
            return StepResult(state, config.success_reward, True, StepEvent.SUCCESS)
        return StepResult(state, config.step_penalty, True, StepEvent.FAILURE)
    next_state, collided = transition(scene, state, action)
    return StepResult(next_state, config.step_penalty, False, StepEvent.COLLISION if collided else StepEvent.MOVED)

def reset(scene, episode_seed:int, config:EpisodeConfig=EpisodeConfig(), sensor:SensorConfig=SensorConfig()) -> tuple:
    """
    Seeded (start state, target) with the target present in the scene and reachable from the start.
    """
    # local import: the expert plans with this module's success rule
    from src.gridworld.expert import distance_field
    if not scene.categories:
        raise err.PlanningError(f"Scene '{scene.scene_id}' holds no objects to navigate to.", scene.scene_id, -1)
    rng = np.random.default_rng(episode_seed)
    cells = scene.free_cells
    for _ in range(RESET_ATTEMPTS):
        target = int(scene.categories[int(rng.integers(len(scene.categories)))])
        x, y = cells[int(rng.integers(len(cells)))]
        state = AgentState(x, y, const.ROTATIONS[int(rng.integers(len(const.ROTATIONS)))],
                           const.HORIZONS[int(rng.integers(len(const.HORIZONS)))])
        if state in distance_field(scene, target, config, sensor):
            return state, target
        logger.debug(f"Rejected unreachable start {state} for target {target} in '{scene.scene_id}'.")
    raise err.PlanningError(f"No reachable start found in scene '{scene.scene_id}' after {RESET_ATTEMPTS} draws.",
                            scene.scene_id, -1)

@dataclass
class Episode():
    """
    Mutable episode bound to one scene and target. Enforces the step protocol and the step cap.
    """
    scene: object
    target: int
    state: AgentState
    config: EpisodeConfig = EpisodeConfig()
    sensor: SensorConfig = SensorConfig()
    steps: int = 0
    done: bool = False
    success: bool = False
    total_reward: float = 0.0
    states: list = field(default_factory=list)
    actions: list = field(default_factory=list)
    events: list = field(default_factory=list)

    def __post_init__(self):
        self.states = [self.state]

    def step(self, action:Action) -> StepResult:
        if self.done:
            raise err.ProtocolError(f"The episode in '{self.scene.scene_id}' already ended after {self.steps} steps.")
        result = step(self.scene, self.state, action, self.config, self.target, self.sensor)
        self.steps += 1
        if not result.done and self.steps >= self.config.max_steps:
            result = StepResult(result.next_state, result.reward, True, StepEvent.TIMEOUT)
        self.state = result.next_state
        self.done = result.done
        self.success = result.event == StepEvent.SUCCESS
        self.total_reward += result.reward
        self.states.append(self.state)
        self.actions.append(Action(action))
        self.events.append(result.event)
        return result
