from src.errors.errors import *