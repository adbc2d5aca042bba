"""Bipartite negativity from partial-transpose spectra.

``negativity`` is the general definition (sum of |negative eigenvalues| of
the partial transpose across a cut); ``xstate_negativity`` is the exact
closed form for two-qubit X-states, obtained from the 2x2 blocks of the
partial transpose.  The two agree to solver precision and serve as mutual
oracles.  For two qubits the value is bounded by 1/2, reached by Bell
states.
"""

from __future__ import annotations

import math

import numpy as np

from .channel import XState, cavity_reduced, reservoir_reduced
from .families import FamilySpec
from .qstate import Bipartition, DensityMatrix, partial_transpose

# Eigenvalues in [-NEG_EIG_TOL, 0) are treated as zero: they are solver noise
# around entanglement-death points, not genuine NPT signal.
NEG_EIG_TOL = 1e-9


def negativity(rho: DensityMatrix, cut: Bipartition) -> float:
    """Sum of absolute values of the negative partial-transpose eigenvalues."""
    eigs = np.linalg.eigvalsh(partial_transpose(rho, cut))
    neg = eigs[eigs < -NEG_EIG_TOL]
    return float(-neg.sum()) if neg.size else 0.0


def xstate_negativity(x: XState) -> float:
    """Closed-form negativity of a two-qubit X-state across the 1|1 cut.

    The partial transpose splits into 2x2 blocks pairing rho14 with the
    middle populations and rho23 with the outer ones; each block contributes
    at most one negative eigenvalue.
    """
    inner = math.sqrt(0.25 * (x.rho22 - x.rho33) ** 2 + abs(x.rho14) ** 2) \
        - 0.5 * (x.rho22 + x.rho33)
    outer = math.sqrt(0.25 * (x.rho11 - x.rho44) ** 2 + abs(x.rho23) ** 2) \
        - 0.5 * (x.rho11 + x.rho44)
    return max(0.0, inner) + max(0.0, outer)


def negativity_curve(spec: FamilySpec, grid) -> list[tuple[float, float, float]]:
    """(kt, cavity-cavity negativity, reservoir-reservoir negativity) per point."""
    x = spec.build()
    rows = []
    for kt in grid:
        rows.append((float(kt),
                     xstate_negativity(cavity_reduced(x, kt)),
                     xstate_negativity(reservoir_reduced(x, kt))))
    return rows
