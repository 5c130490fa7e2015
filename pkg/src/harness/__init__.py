from src.harness.metrics import *
from src.harness.suite import *
from src.harness.checkpoint import *
from src.harness.agents import *
from src.harness.evaluation import *
from src.harness.training import *
from src.harness.trajectory import *
