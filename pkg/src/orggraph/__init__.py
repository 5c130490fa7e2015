from src.orggraph.orggraph import *
