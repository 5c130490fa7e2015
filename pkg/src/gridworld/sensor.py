"""
Module with the synthetic egocentric sensor: visibility geometry and oracle object detections.

An object is visible when it lies inside the horizontal and vertical frustum, within
the visibility range, and the straight grid line towards it crosses no wall cell.
Detections stand in for a trained detector: one box and confidence per category
(the most confident instance), plus a per-category appearance vector.
"""

# local imports
from src.constants import constants as const
from src.errors import errors as err
from src.utils import validate as val
# external imports
from dataclasses import dataclass
import math
import numpy as np

@dataclass(frozen=True)
class SensorConfig():
    horizontal_fov: float = const.HORIZONTAL_FOV
    vertical_fov: float = const.VERTICAL_FOV
    visibility_range: int = const.VISIBILITY_RANGE
    camera_height: float = const.CAMERA_HEIGHT
    # uniform confidence noise amplitude; 0 disables
    confidence_noise: float = 0.0
    appearance_jitter: float = 0.05

    def __post_init__(self):
        if not (val.positive(self.horizontal_fov) and val.positive(self.vertical_fov)):
            raise err.InvalidAttribute("Field of view angles must be positive.", 'fov')
        if not val.positive(self.visibility_range):
            raise err.InvalidAttribute(f"Visibility range {self.visibility_range} must be positive.", 'visibility_range')
        if not (val.non_negative(self.confidence_noise) and val.non_negative(self.appearance_jitter)):
            raise err.InvalidAttribute("Noise amplitudes must be non-negative.", 'confidence_noise')

@dataclass(frozen=True)
class Sighting():
    distance_cells: float
    bearing: float
    elevation: float

@dataclass(frozen=True, eq=False)
class Observation():
    """
    boxes (N x 4, normalized x1 y1 x2 y2), confidence (N), appearance (N x d), global_feature (g).
    Undetected categories have all-zero rows.
    """
    boxes: np.ndarray
    confidence: np.ndarray
    appearance: np.ndarray
    global_feature: np.ndarray
    target: int

    @property
    def detected(self) -> np.ndarray:
        return self.confidence > 0

    def fingerprint(self) -> np.ndarray:
        """
        Parameter-free vision feature of this view.
        """
        return np.concatenate([self.global_feature, self.boxes.ravel(), self.confidence, self.appearance.ravel()])

def _signatures() -> np.ndarray:
    return np.random.default_rng(const.APPEARANCE_SEED).standard_normal((const.NUM_CATEGORIES, const.APPEARANCE_DIM))

CATEGORY_SIGNATURES = _signatures()

def line_cells(x0:int, y0:int, x1:int, y1:int) -> list:
    """
    Bresenham cells from (x0, y0) to (x1, y1), both ends included.
    """
    cells = []
    dx, dy = abs(x1 - x0), -abs(y1 - y0)
    sx = 1 if x0 < x1 else -1
    sy = 1 if y0 < y1 else -1
    error = dx + dy
    x, y = x0, y0
    while True:
        cells.append((x, y))
        if x == x1 and y == y1:
            return cells
        doubled = 2 * error
        if doubled >= dy:
            error += dy
            x += sx
        if doubled <= dx:
            error += dx
            y += sy

def occluded(scene, x0:int, y0:int, x1:int, y1:int) -> bool:
    return any((x, y) in scene.walls for x, y in line_cells(x0, y0, x1, y1)[1:-1])

def sight(scene, state, obj, sensor:SensorConfig) -> Sighting:
    """
    Geometry of obj as seen from state, or None when it is not visible.
    """
    dx, dy = obj.x - state.x, obj.y - state.y
    distance = math.hypot(dx, dy)
    if distance == 0 or distance > sensor.visibility_range:
        return None
    hx, hy = state.heading
    rx, ry = state.right
    forward = dx * hx + dy * hy
    lateral = dx * rx + dy * ry
    bearing = math.degrees(math.atan2(lateral, forward))
    if abs(bearing) > sensor.horizontal_fov / 2 + 1e-9:
        return None
    height = const.CATEGORY_HEIGHTS[obj.category]
    elevation = math.degrees(math.atan2(height - sensor.camera_height, distance * scene.cell_size))
    relative = elevation - state.horizon
    if abs(relative) > sensor.vertical_fov / 2 + 1e-9:
        return None
    if occluded(scene, state.x, state.y, obj.x, obj.y):
        return None
    return Sighting(distance_cells=distance, bearing=bearing, elevation=relative)

def project_box(sighting:Sighting, sensor:SensorConfig) -> np.ndarray:
    """
    Perspective heuristic: center from bearing and relative elevation, half-size inversely proportional to distance.
    """
    cx = 0.5 + sighting.bearing / sensor.horizontal_fov
    cy = 0.5 - sighting.elevation / sensor.vertical_fov
    half = min(0.5, 0.25 / sighting.distance_cells)
    return np.clip([cx - half, cy - half, cx + half, cy + half], 0.0, 1.0)

def _pose_rng(state, noise_seed:int) -> np.random.Generator:
    return np.random.default_rng([int(noise_seed), state.x, state.y, state.rotation // 90,
                                  const.HORIZONS.index(state.horizon)])

def global_feature(scene, state, counts:np.ndarray) -> np.ndarray:
    """
    Egocentric occupancy patch ahead of the agent followed by the visible-category histogram.
    """
    hx, hy = state.heading
    rx, ry = state.right
    half = const.OCCUPANCY_WIDTH // 2
    occupancy = [0.0 if scene.is_free(state.x + hx * d + rx * l, state.y + hy * d + ry * l) else 1.0
                 for d in range(1, const.OCCUPANCY_DEPTH + 1) for l in range(-half, half + 1)]
    histogram = np.minimum(counts, 2) / 2.0
    return np.concatenate([np.asarray(occupancy), histogram])

def render_observation(scene, state, target:int, noise_seed:int=0, sensor:SensorConfig=SensorConfig()) -> Observation:
    """
    Deterministic function of (scene, state, noise_seed, sensor).
    """
    if not val.category(target):
        raise err.OutOfRangeError(f"Target category {target} is outside [0, {const.NUM_CATEGORIES}).", target)
    boxes = np.zeros((const.NUM_CATEGORIES, 4))
    confidence = np.zeros(const.NUM_CATEGORIES)
    appearance = np.zeros((const.NUM_CATEGORIES, const.APPEARANCE_DIM))
    counts = np.zeros(const.NUM_CATEGORIES)
    rng = _pose_rng(state, noise_seed)
    for obj in scene.objects:
        seen = sight(scene, state, obj, sensor)
        if seen is None:
            continue
        counts[obj.category] += 1
        noise = rng.uniform(-sensor.confidence_noise, sensor.confidence_noise) if sensor.confidence_noise > 0 else 0.0
        score = float(np.clip(1.0 - seen.distance_cells / sensor.visibility_range + noise, 0.0, 1.0))
        if score > confidence[obj.category]:
            confidence[obj.category] = score
            boxes[obj.category] = project_box(seen, sensor)
    for category in np.flatnonzero(confidence > 0):
        jitter = rng.standard_normal(const.APPEARANCE_DIM) * sensor.appearance_jitter if sensor.appearance_jitter > 0 else 0.0
        appearance[category] = CATEGORY_SIGNATURES[category] + jitter
    return Observation(boxes=boxes, confidence=confidence, appearance=appearance,
                       global_feature=global_feature(scene, state, counts), target=int(target))
