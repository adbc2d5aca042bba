"""Genuine-multipartite-entanglement monotone via witness optimization.

A state that can be mixed from components each PPT across some bipartition
admits no witness W decomposable as W = P_M + Q_M^{T_M} (0 <= P_M, Q_M <= 1
for every cut M) with Tr(W rho) < 0.  Minimizing Tr(W rho) over such W is a
semidefinite program; the monotone is E = max(0, -optimum).  E > 0 certifies
genuine multipartite entanglement, E <= 1/2 for qubit systems, and for two
parties E equals the negativity.

The SDP eliminates P_M by substitution (P_M = W - Q_M^{T_M}), so the
decomposition identity holds exactly and the bound constraints become four
PSD blocks per cut.  ``certify_witness`` re-checks a returned solution from
scratch, without any solver state.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .channel import evolve_joint
from .families import FamilySpec
from .hermbasis import basis_for
from .qstate import Bipartition, DensityMatrix, partial_transpose_matrix
from .sdp import (BlockTerm, LmiBlock, SdpFailure, SdpProblem, SdpSettings,
                  SdpSolution, SdpStatus, SdpVariable, solve_sdp)

GME_ZERO_TOL = 1e-6  # monotone values below this are reported as exactly 0


def enumerate_bipartitions(parties: int) -> list[Bipartition]:
    """All 2^(parties-1) - 1 canonical splits, smallest member sets first."""
    if parties < 2:
        raise ValueError("need at least two parties")
    cuts = []
    for size in range(1, parties):
        for members in combinations(range(1, parties), size - 1):
            cuts.append(Bipartition(parties, frozenset((0,) + members)))
    return cuts


@dataclass(frozen=True)
class WitnessProblem:
    rho: DensityMatrix
    cuts: tuple[Bipartition, ...]
    sdp: SdpProblem

    @property
    def dim(self) -> int:
        return self.rho.dim


@dataclass
class WitnessSolution:
    """Optimal witness with its per-cut decomposition and solver report."""

    problem: WitnessProblem
    sdp: SdpSolution
    witness: np.ndarray                     # W
    decompositions: dict[Bipartition, tuple[np.ndarray, np.ndarray]]  # (P, Q)

    @property
    def optimum(self) -> float:
        return self.sdp.optimum

    @property
    def status(self) -> SdpStatus:
        return self.sdp.status


@dataclass(frozen=True)
class GmeValue:
    value: float
    witness: np.ndarray | None  # certifying W when value > 0


def witness_problem(rho: DensityMatrix,
                    cuts: list[Bipartition] | None = None) -> WitnessProblem:
    """Assemble the witness SDP for a state over the given (default all) cuts."""
    if rho.n_parties < 2:
        raise ValueError("witness optimization needs at least two parties")
    if cuts is None:
        cuts = enumerate_bipartitions(rho.n_parties)
    else:
        cuts = list(cuts)
        if len(set(cuts)) != len(cuts) or not cuts:
            raise ValueError("cuts must be nonempty and pairwise distinct")
        for cut in cuts:
            if cut.parties != rho.n_parties:
                raise ValueError("cut party count does not match the state")
    dim = rho.dim
    basis = basis_for(dim)
    variables = [SdpVariable("w", dim)]
    variables += [SdpVariable(f"q{i}", dim) for i in range(len(cuts))]
    eye = np.eye(dim, dtype=complex)
    zero = np.zeros((dim, dim), dtype=complex)
    blocks = []
    for i, cut in enumerate(cuts):
        perm, signs = basis.pt_signed_permutation(rho.party_dims, cut.members)
        qi = i + 1
        pt_term = BlockTerm(qi, -1.0, perm, signs)
        pt_term_pos = BlockTerm(qi, 1.0, perm, signs)
        blocks.extend([
            LmiBlock(dim, zero, (BlockTerm(qi, 1.0),)),                 # Q >= 0
            LmiBlock(dim, eye, (BlockTerm(qi, -1.0),)),                 # Q <= 1
            LmiBlock(dim, zero, (BlockTerm(0, 1.0), pt_term)),          # P >= 0
            LmiBlock(dim, eye, (BlockTerm(0, -1.0), pt_term_pos)),      # P <= 1
        ])
    objective = np.concatenate(
        [basis.to_coords(rho.matrix)] + [np.zeros(dim * dim)] * len(cuts))
    # Scaled identities: W = I/2, Q = I/4 puts every block at I/4 or 3I/4.
    initial = np.concatenate(
        [basis.to_coords(0.5 * eye)] + [basis.to_coords(0.25 * eye)] * len(cuts))
    sdp = SdpProblem(variables=tuple(variables), objective=objective,
                     blocks=tuple(blocks), initial_x=initial)
    return WitnessProblem(rho=rho, cuts=tuple(cuts), sdp=sdp)


def solve_witness(rho: DensityMatrix, cuts: list[Bipartition] | None = None,
                  settings: SdpSettings | None = None) -> WitnessSolution:
    problem = witness_problem(rho, cuts)
    sol = solve_sdp(problem.sdp, settings)
    w = sol.variable_matrices["w"]
    decompositions = {}
    for i, cut in enumerate(problem.cuts):
        q = sol.variable_matrices[f"q{i}"]
        p = w - partial_transpose_matrix(q, rho.party_dims, cut.members)
        decompositions[cut] = (p, q)
    return WitnessSolution(problem=problem, sdp=sol, witness=w,
                           decompositions=decompositions)


def gme_negativity(rho: DensityMatrix,
                   cuts: list[Bipartition] | None = None,
                   settings: SdpSettings | None = None) -> GmeValue:
    """The monotone max(0, -min Tr(W rho)); raises on any non-optimal solve."""
    sol = solve_witness(rho, cuts, settings)
    if sol.status is not SdpStatus.OPTIMAL:
        raise SdpFailure(
            f"witness SDP ended with status {sol.status.value}",
            sol.sdp.residuals)
    value = max(0.0, -sol.optimum)
    return GmeValue(value=value, witness=sol.witness if value > 0 else None)


@dataclass(frozen=True)
class CertificationCheck:
    name: str
    residual: float
    threshold: float

    @property
    def ok(self) -> bool:
        return self.residual <= self.threshold


@dataclass
class CertificationReport:
    checks: list[CertificationCheck]

    @property
    def passed(self) -> bool:
        return all(c.ok for c in self.checks)

    def summary(self) -> str:
        lines = [f"{'PASS' if c.ok else 'FAIL'} {c.name}: "
                 f"{c.residual:.3e} (<= {c.threshold:.1e})" for c in self.checks]
        return "\n".join(lines)


def certify_witness(rho: DensityMatrix, solution: WitnessSolution,
                    tol: float = 1e-6) -> CertificationReport:
    """Re-verify a witness solution independently of the solver.

    Checks, per cut: the decomposition identity W = P + Q^{T_M}, and the
    eigenvalue bounds 0 <= P, Q <= 1; globally: Tr(W rho) against the
    reported optimum.  Negative eigenvalues enter the residual as their
    magnitude, overshoots above one likewise.
    """
    checks = []
    w = solution.witness
    for cut, (p, q) in solution.decompositions.items():
        recon = p + partial_transpose_matrix(q, rho.party_dims, cut.members)
        checks.append(CertificationCheck(
            f"decomposition[{cut}]", float(np.linalg.norm(w - recon)), tol))
        for label, mat in (("P", p), ("Q", q)):
            eigs = np.linalg.eigvalsh(0.5 * (mat + mat.conj().T))
            herm = float(np.max(np.abs(mat - mat.conj().T)))
            checks.append(CertificationCheck(
                f"{label}[{cut}] hermitian", herm, tol))
            checks.append(CertificationCheck(
                f"{label}[{cut}] >= 0", max(0.0, -float(eigs[0])), tol))
            checks.append(CertificationCheck(
                f"{label}[{cut}] <= 1", max(0.0, float(eigs[-1]) - 1.0), tol))
    tr = float(np.trace(w @ rho.matrix).real)
    checks.append(CertificationCheck(
        "objective", abs(tr - solution.optimum), tol))
    return CertificationReport(checks=checks)


def gme_point(spec: FamilySpec, kt: float,
              cuts: list[Bipartition] | None = None,
              settings: SdpSettings | None = None):
    """One curve sample: (kt, clamped value, raw optimum, status string).

    Non-optimal or failed solves are reported in the status field rather
    than raised, so sweeps can mark bad points instead of dying.
    """
    rho = evolve_joint(spec.build(), kt)
    try:
        sol = solve_witness(rho, cuts, settings)
    except SdpFailure:
        return float(kt), float("nan"), float("nan"), SdpStatus.NUMERICAL_FAILURE.value
    raw = -sol.optimum
    value = max(0.0, raw)
    if value < GME_ZERO_TOL:
        value = 0.0
    return float(kt), value, raw, sol.status.value


def gme_curve(spec: FamilySpec, grid,
              cuts: list[Bipartition] | None = None,
              settings: SdpSettings | None = None) -> list[tuple[float, float, float, str]]:
    """Monotone along a kt grid; failed points are marked, never interpolated."""
    return [gme_point(spec, kt, cuts, settings) for kt in grid]
