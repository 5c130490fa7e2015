"""
Module with the object representation graph.

Detections are packed into a location-aware feature matrix X (one row per category:
box, confidence and a target flag). A learned adjacency A and node embedding W map X
to a relation graph Z = relu(A X W), which then re-weights the per-category appearance
features with the parameter-free attention F_hat = relu(Z F). The local feature handed
to the policy is [F_hat | X] flattened.
"""

# local imports
from src.constants import constants as const
from src.diffcore import parameters as prm
from src.diffcore import tensor as td
from src.errors import errors as err
from src.utils import validate as val
# external imports
import numpy as np

ADJACENCY = 'org.adjacency'
EMBEDDING = 'org.embedding'
# half-width of the uniform noise added to the identity adjacency at init
ADJACENCY_NOISE = 0.01

def build_laf(observation, target:int) -> np.ndarray:
    """
    Returns the |N| x 6 matrix of rows (x1, y1, x2, y2, confidence, is_target).
    """
    if not val.category(int(target)):
        raise err.OutOfRangeError(f"Target category {target} is outside [0, {const.NUM_CATEGORIES}).", target)
    laf = np.zeros((const.NUM_CATEGORIES, const.LAF_DIM))
    detected = observation.confidence > 0
    laf[detected, :4] = observation.boxes[detected]
    laf[detected, 4] = observation.confidence[detected]
    laf[int(target), 5] = 1.0
    return laf

def appearance_matrix(observation) -> np.ndarray:
    # undetected categories already hold zero rows
    return observation.appearance.copy()

def init_org_parameters(rng:np.random.Generator) -> dict:
    n, d = const.NUM_CATEGORIES, const.LAF_DIM
    adjacency = np.eye(n) + rng.uniform(-ADJACENCY_NOISE, ADJACENCY_NOISE, size=(n, n))
    params = {
        ADJACENCY: td.Tensor(adjacency, requires_grad=True, name=ADJACENCY),
        EMBEDDING: prm.uniform(rng, d, n, 1.0 / np.sqrt(d), EMBEDDING),
    }
    return params

def org_forward(laf, params:dict) -> td.Tensor:
    """
    Z = relu(A X W), a |N| x |N| relation graph.
    """
    x = td.as_tensor(laf)
    return td.relu(td.matmul(td.matmul(params[ADJACENCY], x), params[EMBEDDING]))

def graph_attention(relation, appearance) -> td.Tensor:
    """
    F_hat = relu(Z F). Holds no parameters of its own.
    """
    return td.relu(td.matmul(td.as_tensor(relation), td.as_tensor(appearance)))

def fuse_local(attended, laf) -> td.Tensor:
    attended, laf = td.as_tensor(attended), td.as_tensor(laf)
    if attended.rows != laf.rows:
        raise err.DimensionError(f"Cannot fuse attended features {attended.shape} with LAF {laf.shape}.",
                                 (attended.shape, laf.shape))
    fused = td.concat([attended, laf], axis=1)
    return td.reshape(fused, 1, fused.size)

def local_feature(observation, target:int, params:dict, use_org:bool=True) -> td.Tensor:
    """
    Local feature of one observation. Without the graph the attention falls back to relu(F).
    """
    laf = td.constant(build_laf(observation, target))
    appearance = td.constant(appearance_matrix(observation))
    if use_org:
        attended = graph_attention(org_forward(laf, params), appearance)
    else:
        attended = td.relu(appearance)
    return fuse_local(attended, laf)

def pair_weight_contrast(adjacency:np.ndarray, pairs:list) -> tuple:
    """
    Mean |A| between declared co-occurring category pairs (both directions) and between all other
    off-diagonal pairs.
    """
    n = adjacency.shape[0]
    paired = np.zeros((n, n), dtype=bool)
    for a, b in pairs:
        paired[a, b] = paired[b, a] = True
    off_diagonal = ~np.eye(n, dtype=bool)
    magnitude = np.abs(adjacency)
    return float(magnitude[paired].mean()), float(magnitude[off_diagonal & ~paired].mean())
