"""
Module with the shortest-path expert: Dijkstra over the discrete pose graph.

Nodes are AgentState values on free cells, edges the five motion actions with unit cost.
Distances are computed once per (scene, target) backwards from every pose where the
success rule holds, so the expert action for any pose is a table lookup.
"""

# local imports
from src.errors import errors as err
from src.gridworld.environment import EpisodeConfig, success_check
from src.gridworld.sensor import SensorConfig
from src.gridworld.state import Action, MOTIONS, all_states, transition
from src.utils.logger import get_logger
# external imports
from collections import defaultdict
from functools import lru_cache
import heapq

logger = get_logger(__name__)

@lru_cache(maxsize=512)
def distance_field(scene, target:int, config:EpisodeConfig=EpisodeConfig(), sensor:SensorConfig=SensorConfig()) -> dict:
    """
    Maps every pose that can reach a success pose to its number of motion actions from one.
    Poses absent from the map cannot reach the target.
    """
    states = all_states(scene)
    predecessors = defaultdict(list)
    for state in states:
        for action in MOTIONS:
            following, _ = transition(scene, state, action)
            if following != state:
                predecessors[following].append(state)
    distances = {}
    queue = []
    for state in states:
        if success_check(scene, state, target, config, sensor):
            distances[state] = 0
            queue.append((0, state))
    heapq.heapify(queue)
    while queue:
        dist, state = heapq.heappop(queue)
        if dist > distances[state]:
            continue
        for previous in predecessors[state]:
            if dist + 1 < distances.get(previous, float('inf')):
                distances[previous] = dist + 1
                heapq.heappush(queue, (dist + 1, previous))
    logger.debug(f"Planned target {target} in '{scene.scene_id}': {len(distances)}/{len(states)} poses reachable.")
    return distances

def _distance(scene, state, target, config, sensor) -> int:
    distances = distance_field(scene, target, config, sensor)
    if state not in distances:
        raise err.PlanningError(f"Target {target} is unreachable from {state} in scene '{scene.scene_id}'.",
                                scene.scene_id, target)
    return distances[state]

def expert_action(scene, state, target:int, config:EpisodeConfig=EpisodeConfig(),
                  sensor:SensorConfig=SensorConfig()) -> Action:
    """
    First action of a shortest successful action sequence; ties go to the earliest action in Action order.
    """
    distances = distance_field(scene, target, config, sensor)
    remaining = _distance(scene, state, target, config, sensor)
    if remaining == 0:
        return Action.DONE
    for action in MOTIONS:
        following, _ = transition(scene, state, action)
        if distances.get(following) == remaining - 1:
            return action
    # unreachable for a consistent distance field
    raise err.PlanningError(f"No improving action from {state} in scene '{scene.scene_id}'.", scene.scene_id, target)

def optimal_length(scene, start, target:int, config:EpisodeConfig=EpisodeConfig(),
                   sensor:SensorConfig=SensorConfig()) -> int:
    """
    Minimal number of actions from start to a successful termination, the final Done included.
    """
    return _distance(scene, start, target, config, sensor) + 1

def expert_rollout(scene, start, target:int, config:EpisodeConfig=EpisodeConfig(),
                   sensor:SensorConfig=SensorConfig()) -> list:
    actions = []
    state = start
    while True:
        action = expert_action(scene, state, target, config, sensor)
        actions.append(action)
        if action == Action.DONE:
            return actions
        state, _ = transition(scene, state, action)
