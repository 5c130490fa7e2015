"""
Module that builds, checks and stores the train / val / test scene split
"""

# local imports
from src.errors import errors as err
from src.gridworld import scene as scn
from src.utils.logger import get_logger
# external imports
from dataclasses import dataclass, field, replace
import os

logger = get_logger(__name__)

SPLITS = ['train', 'val', 'test']
# rooms per scene type in each split
SPLIT_SIZES = {'train': 20, 'val': 5, 'test': 5}
# per-type seed blocks; the base seed selects the suite
SEED_STRIDE = 10_000

@dataclass
class SceneSuite():
    train: list = field(default_factory=list)
    val: list = field(default_factory=list)
    test: list = field(default_factory=list)

    def split(self, name:str) -> list:
        if name not in SPLITS:
            raise err.InvalidAttribute(f"Unknown split '{name}'.", 'split')
        return getattr(self, name)

    def all_scenes(self) -> list:
        return self.train + self.val + self.test

def _layout_key(scene) -> tuple:
    return (scene.width, scene.height, tuple(sorted(scene.walls)), tuple(sorted((o.category, o.x, o.y) for o in scene.objects)))

def assert_disjoint(suite:SceneSuite):
    """
    Raises ScenesOverlapError when two splits share a scene id or an identical room layout.
    """
    seen_ids, seen_layouts = {}, {}
    overlaps = []
    for name in SPLITS:
        for scene in suite.split(name):
            for seen, key in ((seen_ids, scene.scene_id), (seen_layouts, _layout_key(scene))):
                owner = seen.get(key)
                if owner is not None and owner[0] != name:
                    overlaps.append((owner[1], scene.scene_id))
                seen.setdefault(key, (name, scene.scene_id))
    if overlaps:
        logger.info(f"The scene splits overlap: {overlaps}")
        raise err.ScenesOverlapError(f"{len(overlaps)} scene(s) appear in more than one split.", overlaps)

def single_room_template(scene_type:str, size:int) -> scn.SceneTemplate:
    """
    The scene type's template on a fixed size x size room without interior walls.
    """
    return replace(scn.DEFAULT_TEMPLATES[scene_type], width=(size, size), height=(size, size), obstacle_density=0.0)

def build_suite(seed:int, templates:dict=None, sizes:dict=None) -> SceneSuite:
    templates = templates or scn.DEFAULT_TEMPLATES
    sizes = sizes or SPLIT_SIZES
    suite = SceneSuite()
    for type_index, scene_type in enumerate(sorted(templates)):
        offset = seed * SEED_STRIDE * len(templates) + type_index * SEED_STRIDE
        for name in SPLITS:
            for _ in range(sizes[name]):
                suite.split(name).append(scn.generate_scene(offset, templates[scene_type]))
                offset += 1
    assert_disjoint(suite)
    logger.info(f"Built a scene suite (seed {seed}): " + ', '.join(f"{n} {len(suite.split(n))}" for n in SPLITS) + '.')
    return suite

def save_suite(directory:str, suite:SceneSuite):
    for name in SPLITS:
        split_dir = os.path.join(directory, name)
        os.makedirs(split_dir, exist_ok=True)
        for scene in suite.split(name):
            scn.save_scene(os.path.join(split_dir, f"{scene.scene_id}.json"), scene)
    logger.info(f"Saved {len(suite.all_scenes())} scenes to '{directory}'.")

def load_split(directory:str, name:str) -> list:
    split_dir = os.path.join(directory, name)
    if not os.path.isdir(split_dir):
        raise err.SceneFileError(f"The split directory '{split_dir}' does not exist.", split_dir)
    return [scn.load_scene(os.path.join(split_dir, f)) for f in sorted(os.listdir(split_dir)) if f.endswith('.json')]

def load_suite(directory:str) -> SceneSuite:
    suite = SceneSuite(**{name: load_split(directory, name) for name in SPLITS})
    assert_disjoint(suite)
    return suite
