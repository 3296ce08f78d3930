__version__ = "0.1.0"


# Make a couple frequently used things available right here.
from .clifford import PauliString, StabilizerTableau, clifford_table
from .problems import Hamiltonian, Problem, exact_ground_energy
from .ansatz import build_maqaoa_skeleton, build_hea_skeleton
from .episode import CircuitEvaluator, RewardNormalizer
from .mcts import SearchConfig
from .network import NetConfig, PolicyValueNet
from .trainer import TrainRunConfig, Trainer
from .baseline import GAConfig, ga_search
from .env import Environment
