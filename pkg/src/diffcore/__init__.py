from src.diffcore.tensor import *
from src.diffcore.optim import *
from src.diffcore.gradcheck import *
