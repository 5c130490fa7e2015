"""
Module that stores constant variables to be used by multiple packages/modules in the application
or that should be edited for development or advanced usage. For module specific constants, it's
preferable set them in module itself and refer to it instead.
"""

from os import path

# LOGGING
# directory in which the log files will be stored (relative to the repo root)
LOG_DIR = path.join(path.dirname(path.dirname(path.dirname(path.abspath(__file__)))), 'logs')
# name of the file where the log msgs are stored
LOG_FILE = 'org_navigation.log'
LOG_FILENAME = path.join(LOG_DIR, LOG_FILE)
# see 'https://docs.python.org/3/howto/logging.html' for details
LOG_FORMAT = '%(asctime)s.%(msecs)03d [%(levelname)s] [%(name)s] %(message)s'
LOG_DATEFMT = '%Y-%m-%dT%H:%M:%S'
LOG_LEVEL = 'INFO'

# OBJECT CATEGORIES
# (name, height in meters of the object's visual center)
CATEGORIES = [
    ('Sink', 0.9),
    ('Microwave', 1.2),
    ('Toaster', 0.9),
    ('CoffeeMachine', 0.9),
    ('Fridge', 1.0),
    ('Bowl', 0.9),
    ('Television', 1.2),
    ('RemoteControl', 0.5),
    ('Sofa', 0.4),
    ('Pillow', 0.5),
    ('Laptop', 0.8),
    ('Book', 0.8),
    ('Bed', 0.5),
    ('AlarmClock', 0.6),
    ('CellPhone', 0.6),
    ('DeskLamp', 1.0),
    ('Toilet', 0.4),
    ('ToiletPaper', 0.6),
    ('SoapBottle', 0.9),
    ('Towel', 1.0),
    ('GarbageCan', 0.3),
    ('Painting', 1.5),
]
CATEGORY_NAMES = [name for name, _ in CATEGORIES]
CATEGORY_HEIGHTS = [height for _, height in CATEGORIES]
NUM_CATEGORIES = len(CATEGORIES)
SCENE_TYPES = ['kitchen', 'living_room', 'bedroom', 'bathroom']

# ACTIONS
# order doubles as the deterministic tie-break priority
ACTION_NAMES = ['MoveAhead', 'RotateLeft', 'RotateRight', 'LookUp', 'LookDown', 'Done']
NUM_ACTIONS = len(ACTION_NAMES)

# GEOMETRY
CELL_SIZE = 0.5
ROTATIONS = [0, 90, 180, 270]
HORIZONS = [-30, 0, 30]
CAMERA_HEIGHT = 1.5
HORIZONTAL_FOV = 90.0
VERTICAL_FOV = 90.0
VISIBILITY_RANGE = 10

# FEATURES
LAF_DIM = 6
APPEARANCE_DIM = 16
GLOBAL_DIM = 64
# egocentric occupancy patch: cells ahead x lateral cells
OCCUPANCY_DEPTH = 6
OCCUPANCY_WIDTH = 7
# fixed seed of the per-category appearance signatures
APPEARANCE_SEED = 2020

# SCENE FILES
SCENE_FILE_VERSION = 1

# CHECKPOINTS
CHECKPOINT_MAGIC = b'ORGNAVCK'
CHECKPOINT_VERSION = 1

# NETWORKS
# dense hidden width of the navigation network
NAV_HIDDEN = 128
# recurrent state embedding
STATE_DIM = 64
TPN_HIDDEN = 64
LOCAL_DIM = NUM_CATEGORIES * (APPEARANCE_DIM + LAF_DIM)
VISUAL_DIM = GLOBAL_DIM + LOCAL_DIM
JOINT_DIM = VISUAL_DIM + NUM_ACTIONS + STATE_DIM
