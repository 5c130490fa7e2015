"""
Module with the episode result record and the success / SPL metrics
"""

# local imports
from src.errors import errors as err
# external imports
from dataclasses import dataclass, asdict

# episodes whose optimal length is at least this form the long split
LONG_EPISODE_LENGTH = 5

@dataclass(frozen=True)
class EpisodeResult():
    success: bool
    length: int
    optimal_length: int
    scene_id: str
    target: int
    deadlock_events: int = 0
    scene_type: str = ''

    def __post_init__(self):
        if self.optimal_length < 1:
            raise err.InvalidAttribute(f"Optimal length {self.optimal_length} must be at least 1.", 'optimal_length')
        if self.length < 0:
            raise err.InvalidAttribute(f"Episode length {self.length} must be non-negative.", 'length')

    def to_dict(self) -> dict:
        return asdict(self)

def _require(results:list, metric:str):
    if not results:
        raise err.EmptyInputError(f"Cannot compute {metric} over an empty result set.")

def compute_success_rate(results:list) -> float:
    _require(results, 'the success rate')
    return sum(1 for r in results if r.success) / len(results)

def compute_spl(results:list) -> float:
    """
    (1/N) sum_n S_n * Len_opt / max(Len_n, Len_opt)
    """
    _require(results, 'SPL')
    total = 0.0
    for r in results:
        if r.success:
            total += r.optimal_length / max(r.length, r.optimal_length)
    return total / len(results)

def filter_long(results:list, min_length:int=LONG_EPISODE_LENGTH) -> list:
    return [r for r in results if r.optimal_length >= min_length]
