from src.tpn.tpn import *
