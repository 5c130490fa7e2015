"""
Module with the training objectives: n-step advantage actor-critic loss, the gated imitation loss and their sum
"""

# local imports
from src.diffcore import tensor as td
from src.errors import errors as err
from src.utils import validate as val
# external imports
from dataclasses import dataclass, field
import numpy as np

# A3C hyperparameters
GAMMA = 0.99
ENTROPY_BETA = 0.01
VALUE_COEF = 0.5
UNROLL_LENGTH = 20

@dataclass
class StepRecord():
    """
    One step of an unroll. distribution and value are tape tensors; il_flag marks expert supervision.
    """
    distribution: td.Tensor
    value: td.Tensor
    action: int
    reward: float
    il_flag: bool = False
    expert_action: int = None

    def __post_init__(self):
        if self.il_flag and self.expert_action is None:
            raise err.InvalidAttribute("A supervised step needs an expert action.", 'expert_action')

    @property
    def log_prob(self) -> float:
        return float(np.log(max(self.distribution.data[0, self.action], td.LOG_FLOOR)))

    @property
    def entropy(self) -> float:
        return entropy(self.distribution).item()

@dataclass
class TrajectoryBuffer():
    """
    Contiguous steps of one episode segment, at most max_length of them.
    """
    max_length: int = UNROLL_LENGTH
    records: list = field(default_factory=list)

    def append(self, record:StepRecord):
        if len(self.records) >= self.max_length:
            raise err.ProtocolError(f"The buffer already holds {self.max_length} steps.")
        self.records.append(record)

    def clear(self):
        self.records = []

    @property
    def full(self) -> bool:
        return len(self.records) >= self.max_length

    @property
    def supervised_steps(self) -> int:
        return sum(1 for record in self.records if record.il_flag)

    def __len__(self):
        return len(self.records)

    def __iter__(self):
        return iter(self.records)

@dataclass
class LossBreakdown():
    nav: td.Tensor
    il: td.Tensor
    total: td.Tensor

    def to_dict(self) -> dict:
        return {'L_nav': self.nav.item(), 'L_il': self.il.item(), 'L_total': self.total.item()}

def compute_returns(rewards:list, bootstrap:float, gamma:float=GAMMA) -> list:
    """
    R_t = r_t + gamma * R_{t+1}, seeded with the bootstrap value after the last step.
    """
    returns = []
    running = float(bootstrap)
    for reward in reversed(rewards):
        running = float(reward) + gamma * running
        returns.append(running)
    returns.reverse()
    return returns

def entropy(distribution:td.Tensor) -> td.Tensor:
    return -td.reduce_sum(td.mul(distribution, td.log(distribution)))

def a3c_loss(buffer:TrajectoryBuffer, gamma:float=GAMMA, entropy_beta:float=ENTROPY_BETA,
             value_coef:float=VALUE_COEF, bootstrap:float=0.0) -> td.Tensor:
    """
    sum_t [ -log pi(a_t) * A_t + value_coef * (R_t - V_t)^2 - entropy_beta * H(pi_t) ], with the
    advantage A_t = R_t - V_t held constant in the policy term. bootstrap is 0 for terminal segments.
    """
    if len(buffer) == 0:
        raise err.EmptyInputError("Cannot compute the actor-critic loss of an empty buffer.")
    if not val.discount(gamma):
        raise err.InvalidAttribute(f"Discount {gamma} is outside [0, 1].", 'gamma')
    returns = compute_returns([record.reward for record in buffer], bootstrap, gamma)
    terms = []
    for record, ret in zip(buffer, returns):
        advantage = ret - record.value.item()
        policy_term = td.cross_entropy(record.distribution, record.action) * advantage
        error = td.constant([[ret]]) - record.value
        value_term = td.mul(error, error) * value_coef
        terms.append(policy_term + value_term - entropy(record.distribution) * entropy_beta)
    total = terms[0]
    for term in terms[1:]:
        total = total + term
    return total

def il_loss(predicted_distribution:td.Tensor, expert_action:int) -> td.Tensor:
    """
    Cross-entropy of the predicted distribution against the expert action.
    """
    return td.cross_entropy(predicted_distribution, expert_action)

def buffer_il_loss(buffer:TrajectoryBuffer) -> td.Tensor:
    """
    Sum of il_loss over the supervised steps; steps without supervision add exactly 0.
    """
    total = td.constant([[0.0]])
    for record in buffer:
        if record.il_flag:
            total = total + il_loss(record.distribution, record.expert_action)
    return total

def total_loss(nav, il) -> LossBreakdown:
    nav, il = td.as_tensor(nav), td.as_tensor(il)
    for name, term in (('L_nav', nav), ('L_il', il)):
        if not np.all(np.isfinite(term.data)):
            raise err.NumericError(f"{name} is not finite.", name)
    return LossBreakdown(nav=nav, il=il, total=nav + il)
