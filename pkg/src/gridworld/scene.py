"""
Module that generates procedural indoor rooms and reads/writes them as versioned JSON scene files.

A room is a width x height grid of cells. Interior wall segments block movement and sight;
objects block movement only. Templates declare concurrence pairs (e.g. Television <-> RemoteControl)
that are placed close together with a configured probability, which is the signal the
object relation graph learns from.
"""

# local imports
from src.constants import constants as const
from src.errors import errors as err
from src.utils import validate as val
from src.utils.logger import get_logger
# external imports
from collections import deque
from dataclasses import dataclass
from functools import cached_property
import json
import math
import numpy as np

logger = get_logger(__name__)

# minimum number of distinct categories a room must hold
MIN_TARGET_CATEGORIES = 4
# tries to extend a wall segment before giving up on the current one
WALL_ATTEMPTS = 200
# fresh wall layouts tried before a template is declared unsatisfiable
LAYOUT_ATTEMPTS = 20

@dataclass(frozen=True)
class SceneObject():
    category: int
    x: int
    y: int

@dataclass(frozen=True)
class ConcurrencePair():
    anchor: int
    partner: int
    probability: float
    radius: float

    def __post_init__(self):
        if not (val.category(self.anchor) and val.category(self.partner)):
            raise err.InvalidAttribute(f"Pair ({self.anchor}, {self.partner}) uses an unknown category.", 'pairs')
        if not val.probability(self.probability):
            raise err.InvalidAttribute(f"Pair probability {self.probability} is outside [0, 1].", 'probability')
        if not val.positive(self.radius):
            raise err.InvalidAttribute(f"Pair radius {self.radius} must be positive.", 'radius')

@dataclass(frozen=True)
class SceneTemplate():
    """
    Recipe for one scene type. Sizes are inclusive (min, max) ranges in cells;
    obstacle_density is the fraction of cells turned into interior wall.
    """
    scene_type: str
    width: tuple = (8, 12)
    height: tuple = (8, 12)
    obstacle_density: float = 0.08
    pairs: tuple = ()
    singles: tuple = ()
    cell_size: float = const.CELL_SIZE

    def __post_init__(self):
        if not val.scene_type(self.scene_type):
            raise err.InvalidAttribute(f"Unknown scene type '{self.scene_type}'.", 'scene_type')
        for size in (*self.width, *self.height):
            if not val.room_size(size):
                raise err.InvalidAttribute(f"Room size {size} is out of range.", 'size')
        if not 0.0 <= self.obstacle_density < 0.5:
            raise err.InvalidAttribute(f"Obstacle density {self.obstacle_density} is outside [0, 0.5).", 'obstacle_density')
        for category in self.singles:
            if not val.category(category):
                raise err.InvalidAttribute(f"Unknown category {category}.", 'singles')

    @property
    def object_count(self) -> int:
        return 2 * len(self.pairs) + len(self.singles)

    def to_dict(self) -> dict:
        return {
            'scene_type': self.scene_type,
            'width': list(self.width),
            'height': list(self.height),
            'obstacle_density': self.obstacle_density,
            'cell_size': self.cell_size,
            'pairs': [{'anchor': const.CATEGORY_NAMES[p.anchor], 'partner': const.CATEGORY_NAMES[p.partner],
                       'probability': p.probability, 'radius': p.radius} for p in self.pairs],
            'singles': [const.CATEGORY_NAMES[c] for c in self.singles],
        }

    @classmethod
    def from_dict(cls, data:dict):
        def category_id(value):
            if isinstance(value, str):
                if value not in const.CATEGORY_NAMES:
                    raise err.InvalidAttribute(f"Unknown category '{value}'.", 'category')
                return const.CATEGORY_NAMES.index(value)
            return int(value)
        pairs = tuple(ConcurrencePair(category_id(p['anchor']), category_id(p['partner']),
                                      float(p.get('probability', 1.0)), float(p.get('radius', 2.0)))
                      for p in data.get('pairs', []))
        return cls(scene_type=data['scene_type'],
                   width=tuple(data.get('width', (8, 12))),
                   height=tuple(data.get('height', (8, 12))),
                   obstacle_density=float(data.get('obstacle_density', 0.08)),
                   pairs=pairs,
                   singles=tuple(category_id(c) for c in data.get('singles', [])),
                   cell_size=float(data.get('cell_size', const.CELL_SIZE)))

def _ids(*names) -> tuple:
    return tuple(const.CATEGORY_NAMES.index(n) for n in names)

def _pair(anchor:str, partner:str, probability:float=0.9, radius:float=2.0) -> ConcurrencePair:
    return ConcurrencePair(const.CATEGORY_NAMES.index(anchor), const.CATEGORY_NAMES.index(partner), probability, radius)

DEFAULT_TEMPLATES = {
    'kitchen': SceneTemplate('kitchen',
                             pairs=(_pair('CoffeeMachine', 'Toaster'), _pair('Sink', 'Bowl')),
                             singles=_ids('Microwave', 'Fridge', 'GarbageCan')),
    'living_room': SceneTemplate('living_room',
                                 pairs=(_pair('Television', 'RemoteControl'), _pair('Sofa', 'Pillow')),
                                 singles=_ids('Laptop', 'GarbageCan', 'Painting')),
    'bedroom': SceneTemplate('bedroom',
                             pairs=(_pair('Bed', 'Pillow'), _pair('DeskLamp', 'Book')),
                             singles=_ids('AlarmClock', 'Laptop', 'CellPhone')),
    'bathroom': SceneTemplate('bathroom',
                              pairs=(_pair('Toilet', 'ToiletPaper'), _pair('Sink', 'SoapBottle')),
                              singles=_ids('Towel', 'GarbageCan', 'Painting')),
}

@dataclass(frozen=True)
class SceneSpec():
    """
    Immutable room. walls is a frozenset of (x, y) blocked cells; cells outside the grid count as walls.
    """
    scene_id: str
    scene_type: str
    width: int
    height: int
    walls: frozenset
    objects: tuple
    rng_seed: int
    cell_size: float = const.CELL_SIZE

    def __post_init__(self):
        for o in self.objects:
            if not val.category(o.category):
                raise err.InvalidAttribute(f"Scene '{self.scene_id}' holds unknown category {o.category}.", 'category')
            if self.is_wall(o.x, o.y):
                raise err.InvalidAttribute(f"Scene '{self.scene_id}' places an object on blocked cell ({o.x}, {o.y}).", 'objects')

    def in_bounds(self, x:int, y:int) -> bool:
        return 0 <= x < self.width and 0 <= y < self.height

    def is_wall(self, x:int, y:int) -> bool:
        return not self.in_bounds(x, y) or (x, y) in self.walls

    @cached_property
    def object_cells(self) -> frozenset:
        return frozenset((o.x, o.y) for o in self.objects)

    def is_free(self, x:int, y:int) -> bool:
        return not self.is_wall(x, y) and (x, y) not in self.object_cells

    @cached_property
    def free_cells(self) -> tuple:
        return tuple((x, y) for y in range(self.height) for x in range(self.width) if self.is_free(x, y))

    @cached_property
    def categories(self) -> tuple:
        return tuple(sorted({o.category for o in self.objects}))

    def instances(self, category:int) -> tuple:
        return tuple(o for o in self.objects if o.category == category)

    def to_dict(self) -> dict:
        return {
            'version': const.SCENE_FILE_VERSION,
            'scene_id': self.scene_id,
            'scene_type': self.scene_type,
            'width': self.width,
            'height': self.height,
            'cell_size': self.cell_size,
            'walls': [list(cell) for cell in sorted(self.walls)],
            'objects': [{'category': o.category, 'x': o.x, 'y': o.y} for o in self.objects],
            'seed': self.rng_seed,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_dict(cls, data:dict):
        if data.get('version') != const.SCENE_FILE_VERSION:
            raise err.SceneFileError(f"Unsupported scene file version '{data.get('version')}'.", data.get('scene_id', ''))
        return cls(scene_id=data['scene_id'],
                   scene_type=data['scene_type'],
                   width=int(data['width']),
                   height=int(data['height']),
                   walls=frozenset((int(x), int(y)) for x, y in data['walls']),
                   objects=tuple(SceneObject(int(o['category']), int(o['x']), int(o['y'])) for o in data['objects']),
                   rng_seed=int(data['seed']),
                   cell_size=float(data['cell_size']))

    @classmethod
    def from_json(cls, text:str):
        return cls.from_dict(json.loads(text))

def save_scene(path_file:str, scene:SceneSpec):
    with open(path_file, 'w', encoding='utf-8') as f:
        f.write(scene.to_json())
    logger.debug(f"Saved scene '{scene.scene_id}' to '{path_file}'.")

def load_scene(path_file:str) -> SceneSpec:
    if not val.file_exists(path_file):
        raise err.SceneFileError(f"The scene file '{path_file}' does not exist.", path_file)
    try:
        with open(path_file, 'r', encoding='utf-8') as f:
            return SceneSpec.from_json(f.read())
    except (json.JSONDecodeError, KeyError, TypeError, ValueError) as perr:
        logger.info(f"Unable to parse the scene file '{path_file}': {perr}")
        raise err.SceneFileError(f"Unable to parse the scene file '{path_file}'.", path_file)

def load_template(path_file:str) -> SceneTemplate:
    if not val.file_exists(path_file):
        raise err.SceneFileError(f"The template file '{path_file}' does not exist.", path_file)
    with open(path_file, 'r', encoding='utf-8') as f:
        return SceneTemplate.from_dict(json.load(f))

def _connected(width:int, height:int, blocked:set) -> bool:
    """
    True when every unblocked cell is reachable from every other through 4-neighbour moves.
    """
    free = [(x, y) for y in range(height) for x in range(width) if (x, y) not in blocked]
    if not free:
        return False
    seen = {free[0]}
    queue = deque([free[0]])
    while queue:
        x, y = queue.popleft()
        for nx, ny in ((x + 1, y), (x - 1, y), (x, y + 1), (x, y - 1)):
            if 0 <= nx < width and 0 <= ny < height and (nx, ny) not in blocked and (nx, ny) not in seen:
                seen.add((nx, ny))
                queue.append((nx, ny))
    return len(seen) == len(free)

def _place_walls(rng:np.random.Generator, width:int, height:int, density:float) -> set:
    walls = set()
    target = int(round(density * width * height))
    attempts = 0
    while len(walls) < target and attempts < WALL_ATTEMPTS:
        attempts += 1
        x, y = int(rng.integers(width)), int(rng.integers(height))
        dx, dy = [(1, 0), (0, 1)][int(rng.integers(2))]
        length = int(rng.integers(1, 4))
        for k in range(length):
            cell = (x + k * dx, y + k * dy)
            if len(walls) >= target or not (0 <= cell[0] < width and 0 <= cell[1] < height) or cell in walls:
                break
            if not _connected(width, height, walls | {cell}):
                break
            walls.add(cell)
    return walls

def _place_object(rng:np.random.Generator, width:int, height:int, blocked:set, candidates:list):
    """
    Picks a random candidate cell whose blocking keeps the free space connected, or None.
    """
    for index in rng.permutation(len(candidates)):
        cell = candidates[int(index)]
        if cell in blocked:
            continue
        if _connected(width, height, blocked | {cell}):
            return cell
    return None

def _layout(rng:np.random.Generator, width:int, height:int, template:SceneTemplate):
    """
    One wall and object layout, or None when an object finds no cell on the side it was drawn for.
    """
    cells = [(x, y) for y in range(height) for x in range(width)]
    walls = _place_walls(rng, width, height, template.obstacle_density)
    blocked = set(walls)
    objects = []

    def put(category:int, candidates:list):
        cell = _place_object(rng, width, height, blocked, candidates)
        if cell is not None:
            blocked.add(cell)
            objects.append(SceneObject(category, cell[0], cell[1]))
        return cell

    for pair in template.pairs:
        anchor = put(pair.anchor, cells)
        if anchor is None:
            return None
        ax, ay = anchor
        near = [c for c in cells if c != anchor and math.hypot(c[0] - ax, c[1] - ay) <= pair.radius]
        far = [c for c in cells if math.hypot(c[0] - ax, c[1] - ay) > pair.radius]
        coplace = rng.random() < pair.probability
        if put(pair.partner, near if coplace else far) is None:
            return None
    for category in template.singles:
        if put(category, cells) is None:
            return None
    return walls, objects

def generate_scene(seed:int, template:SceneTemplate, scene_id:str=None) -> SceneSpec:
    """
    Seeded-deterministic room from a template. Pair partners are placed within the pair radius
    of their anchor with the pair probability and strictly outside it otherwise. A layout that
    cannot honour a draw is discarded and the walls are laid out again.
    """
    rng = np.random.default_rng(seed)
    width = int(rng.integers(template.width[0], template.width[1] + 1))
    height = int(rng.integers(template.height[0], template.height[1] + 1))
    # keep room for the agent next to every object
    if 2 * template.object_count + 1 > width * height:
        raise err.SceneGenerationError(f"Template '{template.scene_type}' holds {template.object_count} objects "
                                       f"but the room has only {width * height} cells.")
    for attempt in range(LAYOUT_ATTEMPTS):
        layout = _layout(rng, width, height, template)
        if layout is not None:
            break
        logger.debug(f"Layout {attempt} of a {width}x{height} '{template.scene_type}' room failed (seed {seed}).")
    else:
        raise err.SceneGenerationError(f"No layout of a {width}x{height} '{template.scene_type}' room places every "
                                       f"object after {LAYOUT_ATTEMPTS} attempts (seed {seed}).")
    walls, objects = layout

    if len({o.category for o in objects}) < MIN_TARGET_CATEGORIES:
        raise err.SceneGenerationError(f"Template '{template.scene_type}' yields fewer than "
                                       f"{MIN_TARGET_CATEGORIES} distinct categories.")
    scene = SceneSpec(scene_id=scene_id or f"{template.scene_type}-{seed}",
                      scene_type=template.scene_type,
                      width=width,
                      height=height,
                      walls=frozenset(walls),
                      objects=tuple(objects),
                      rng_seed=int(seed),
                      cell_size=template.cell_size)
    logger.debug(f"Generated scene '{scene.scene_id}' ({width}x{height}, {len(walls)} walls, {len(objects)} objects).")
    return scene
