from src.navpolicy.network import *
from src.navpolicy.losses import *
