from src.gridworld.scene import *
from src.gridworld.state import *
from src.gridworld.sensor import *
from src.gridworld.environment import *
from src.gridworld.expert import *
