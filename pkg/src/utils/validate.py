"""
Module that contains helper functions to validade user variables
"""

# local imports
from src.constants import constants as const
# external imports
from os import path
import math

# GRIDWORLD methods
def category(index:int):
    return isinstance(index, int) and 0 <= index < const.NUM_CATEGORIES

def scene_type(name:str):
    return name in const.SCENE_TYPES

def rotation(degrees:int):
    return degrees in const.ROTATIONS

def horizon(degrees:int):
    return degrees in const.HORIZONS

def room_size(size:int):
    return 3 <= size <= 64

def probability(value:float):
    return 0.0 <= value <= 1.0

# NUMERIC methods
def finite(value:float):
    return math.isfinite(value)

def positive(value:float):
    return value > 0

def non_negative(value:float):
    return value >= 0

def learning_rate(value:float):
    return 0.0 < value < 1.0

def discount(value:float):
    return 0.0 <= value <= 1.0

# HARNESS methods
def ablation(name:str):
    return name in ['none', 'no-org', 'no-il', 'il-all']

def il_persist(name:str):
    return name in ['until-escape', 'onset']

def tpn_mode(name:str):
    return name in ['deadlock', 'all', 'random']

def split(name:str):
    return name in ['train', 'val', 'test']

def adapt_scope(name:str):
    return name in ['all', 'policy']

# CONFIGURATION methods
def count(value:int):
    return isinstance(value, int) and value >= 1

def seed(value:int):
    return isinstance(value, int) and value >= 0

def file_exists(path_file:str):
    return path.isfile(path=path_file)
