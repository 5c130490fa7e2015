from src.utils.config import *
from src.utils.validate import *
