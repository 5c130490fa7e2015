from src.constants.constants import *