"""
Module that hands out module loggers configured from the logging constants
"""

# local imports
from src.constants import constants as const
# external imports
import logging
import os

def get_logger(name:str) -> logging.Logger:
    # the log dir must exist before basicConfig opens the file handler
    os.makedirs(const.LOG_DIR, exist_ok=True)
    logging.basicConfig(filename=const.LOG_FILENAME, format=const.LOG_FORMAT, datefmt=const.LOG_DATEFMT)
    logger = logging.getLogger(name)
    logger.setLevel(const.LOG_LEVEL)
    logger.debug("Initilized a logger object.")
    return logger
