"""Numerical toolkit for finite-dimensional quantum information.

Density operators, entropies, channels, recovery maps, stabilizer codes and
a toy holographic code, with certificates for the inequalities they satisfy.
"""

from .operators import DEFAULT_TOL, Operator, Tolerance
from .states import DensityOperator, PureState, make_density, partial_trace, tensor
from .entropy import BITS, NATS, EntropyConfig, relative_entropy, von_neumann_entropy
from .channels import KrausChannel, KrausMap, apply, choi_of, kraus_from_choi, verify_cptp
from .recovery import petz_map, recovery_report, universal_recovery
from .qec import PauliString, shor_code, three_qubit_code
from .holo import bound_chain_audit, build_embedding, reconstruct

__version__ = "0.1.0"

__all__ = [
    "DEFAULT_TOL", "Operator", "Tolerance",
    "DensityOperator", "PureState", "make_density", "partial_trace", "tensor",
    "BITS", "NATS", "EntropyConfig", "relative_entropy", "von_neumann_entropy",
    "KrausChannel", "KrausMap", "apply", "choi_of", "kraus_from_choi", "verify_cptp",
    "petz_map", "recovery_report", "universal_recovery",
    "PauliString", "shor_code", "three_qubit_code",
    "bound_chain_audit", "build_embedding", "reconstruct",
]
