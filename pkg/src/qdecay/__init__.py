"""Exact twirl channels, relative-entropy decay and architecture bounds for
random circuits converging to unitary designs."""
from . import arch, bounds, channels, circuits, config, entropy, moments, tensors, verify, walks
from .arch import ArchitectureSpec, brickwork, chunk_partitions, cluster_graph, hamiltonian_path, lattice
from .bounds import BoundReport
from .channels import CondExpectation, cb_return_time, choi, relative_error, validate_cond_expectation
from .config import CapacityError
from .entropy import beta, decay_ratio, estimate_sdpi, relative_entropy
from .moments import global_twirl, haar_twirl_projector, local_twirl
from .tensors import QState, SiteLayout

__version__ = "0.1.0"
