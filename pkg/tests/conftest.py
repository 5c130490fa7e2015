"""
Shared fixtures: small hand-built rooms, synthetic observations and freshly initialized networks
"""

# local imports
from src.constants import constants as const
from src.gridworld.environment import EpisodeConfig
from src.gridworld.scene import SceneObject, SceneSpec
from src.gridworld.sensor import Observation, SensorConfig
from src.navpolicy import network as net
# external imports
import numpy as np
import pytest

PAINTING = const.CATEGORY_NAMES.index('Painting')
TELEVISION = const.CATEGORY_NAMES.index('Television')
SOFA = const.CATEGORY_NAMES.index('Sofa')

def make_scene(width:int, height:int, objects:list, walls:tuple=(), scene_id:str='hand', scene_type:str='living_room'):
    """
    objects are (category name, x, y) triples.
    """
    return SceneSpec(scene_id=scene_id, scene_type=scene_type, width=width, height=height,
                     walls=frozenset(walls),
                     objects=tuple(SceneObject(const.CATEGORY_NAMES.index(n), x, y) for n, x, y in objects),
                     rng_seed=0)

def random_observation(seed:int, target:int=0, detected:int=6) -> Observation:
    rng = np.random.default_rng(seed)
    categories = rng.choice(const.NUM_CATEGORIES, size=detected, replace=False)
    boxes = np.zeros((const.NUM_CATEGORIES, 4))
    confidence = np.zeros(const.NUM_CATEGORIES)
    appearance = np.zeros((const.NUM_CATEGORIES, const.APPEARANCE_DIM))
    corners = rng.uniform(0.0, 0.5, size=(detected, 2))
    boxes[categories] = np.hstack([corners, corners + rng.uniform(0.1, 0.5, size=(detected, 2))])
    confidence[categories] = rng.uniform(0.2, 1.0, size=detected)
    appearance[categories] = rng.standard_normal((detected, const.APPEARANCE_DIM))
    return Observation(boxes=boxes, confidence=confidence, appearance=appearance,
                       global_feature=rng.uniform(0.0, 1.0, size=const.GLOBAL_DIM), target=target)

@pytest.fixture
def corridor():
    # 10 x 1 corridor with a painting at the east end
    return make_scene(10, 1, [('Painting', 9, 0)], scene_id='corridor')

@pytest.fixture
def room():
    # 7 x 7 room, a short interior wall and three objects
    return make_scene(7, 7, [('Painting', 6, 0), ('Television', 0, 6), ('Sofa', 3, 3)],
                      walls=((2, 1), (2, 2)), scene_id='room')

@pytest.fixture
def quiet_sensor():
    return SensorConfig(confidence_noise=0.0, appearance_jitter=0.0)

@pytest.fixture
def short_episodes():
    return EpisodeConfig(max_steps=12)

@pytest.fixture
def model():
    return net.NavigationModel.create(seed=7)
