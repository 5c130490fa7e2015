"""
Module with the agent pose, the six navigation actions and the deterministic motion model
"""

# local imports
from src.constants import constants as const
from src.errors import errors as err
from src.utils import validate as val
# external imports
from dataclasses import dataclass
from enum import IntEnum

class Action(IntEnum):
    # values double as the tie-break priority and the policy output index
    MOVE_AHEAD = 0
    ROTATE_LEFT = 1
    ROTATE_RIGHT = 2
    LOOK_UP = 3
    LOOK_DOWN = 4
    DONE = 5

    @property
    def label(self) -> str:
        return const.ACTION_NAMES[self.value]

MOTIONS = (Action.MOVE_AHEAD, Action.ROTATE_LEFT, Action.ROTATE_RIGHT, Action.LOOK_UP, Action.LOOK_DOWN)

# heading -> unit step in grid coordinates; y grows downwards, 0 faces north
HEADING_VECTORS = {0: (0, -1), 90: (1, 0), 180: (0, 1), 270: (-1, 0)}

@dataclass(frozen=True, order=True)
class AgentState():
    x: int
    y: int
    rotation: int
    horizon: int

    def __post_init__(self):
        if not val.rotation(self.rotation):
            raise err.InvalidAttribute(f"Rotation {self.rotation} is not one of {const.ROTATIONS}.", 'rotation')
        if not val.horizon(self.horizon):
            raise err.InvalidAttribute(f"Horizon {self.horizon} is not one of {const.HORIZONS}.", 'horizon')

    @property
    def heading(self) -> tuple:
        return HEADING_VECTORS[self.rotation]

    @property
    def right(self) -> tuple:
        hx, hy = self.heading
        return (-hy, hx)

def transition(scene, state:AgentState, action:Action) -> tuple:
    """
    Returns (next_state, collided) for one of the five motion actions. Done is not a motion.
    """
    action = Action(action)
    if action == Action.MOVE_AHEAD:
        hx, hy = state.heading
        nx, ny = state.x + hx, state.y + hy
        if not scene.is_free(nx, ny):
            return state, True
        return AgentState(nx, ny, state.rotation, state.horizon), False
    if action == Action.ROTATE_LEFT:
        return AgentState(state.x, state.y, (state.rotation - 90) % 360, state.horizon), False
    if action == Action.ROTATE_RIGHT:
        return AgentState(state.x, state.y, (state.rotation + 90) % 360, state.horizon), False
    if action == Action.LOOK_UP:
        return AgentState(state.x, state.y, state.rotation, min(state.horizon + 30, max(const.HORIZONS))), False
    if action == Action.LOOK_DOWN:
        return AgentState(state.x, state.y, state.rotation, max(state.horizon - 30, min(const.HORIZONS))), False
    raise err.ProtocolError(f"'{action.label}' is not a motion action.")

def all_states(scene) -> list:
    return [AgentState(x, y, r, h) for (x, y) in scene.free_cells for r in const.ROTATIONS for h in const.HORIZONS]
