"""Exact dissipative dynamics of two cavity qubits leaking into independent
reservoirs, and genuine-multipartite-entanglement quantification of the
resulting four-qubit state via positive-partial-transpose witness
optimization."""

__version__ = "0.1.0"

from .channel import Amplitudes, XState, amplitudes, cavity_reduced, \
    evolve_joint, reservoir_reduced
from .families import (EventTimes, FamilySpec, MixedA, MixedC, NoisySC,
                       PureSuperposition, Werner, is_entangled_xstate,
                       parse_family)
from .negativity import negativity, negativity_curve, xstate_negativity
from .qstate import Bipartition, DensityMatrix, hermitian_eigenvalues, \
    partial_trace, partial_transpose, tensor
from .sdp import SdpProblem, SdpSettings, SdpSolution, SdpStatus, solve_sdp
from .witness import (GmeValue, WitnessProblem, certify_witness,
                      enumerate_bipartitions, gme_curve, gme_negativity,
                      solve_witness, witness_problem)

__all__ = [
    "Amplitudes", "Bipartition", "DensityMatrix", "EventTimes", "FamilySpec",
    "GmeValue", "MixedA", "MixedC", "NoisySC", "PureSuperposition",
    "SdpProblem", "SdpSettings", "SdpSolution", "SdpStatus", "Werner",
    "WitnessProblem", "XState", "amplitudes", "cavity_reduced",
    "certify_witness", "enumerate_bipartitions", "evolve_joint", "gme_curve",
    "gme_negativity", "hermitian_eigenvalues", "is_entangled_xstate",
    "negativity", "negativity_curve", "parse_family", "partial_trace",
    "partial_transpose", "solve_sdp", "solve_witness", "tensor",
    "witness_problem", "xstate_negativity",
]
