"""Primal-dual interior-point solver for block-LMI semidefinite programs.

Problem form
------------
Variables are complex Hermitian matrices, each handled through its real
coordinate vector (see :mod:`gmedyn.hermbasis`).  With ``x`` the stacked
coordinates, the program is

    minimize    c . x
    subject to  S_b(x) = C_b + sum_t  sign_t * mat(P_t x[var_t])  is PSD

for every constraint block ``b``, where each term applies an optional signed
permutation ``P_t`` to one variable's coordinates (enough to express bound
constraints and partial transposes).  The dual consists of one PSD matrix
per block with a linear-equality constraint tying their projections to
``c``; the duality gap certifies optimality.

Method
------
Every block is realified: the complex Hermitian slack becomes a real
symmetric matrix of twice the size, and the complex structure is enforced
explicitly by parameterizing all iterates over the realified Hermitian
basis (plus a projection of the dual step back onto that subspace each
iteration).  The solver is a feasible-start Mehrotra predictor-corrector
with Nesterov-Todd scaling: a strictly feasible primal point is required up
front (callers construct one; scaled identities work for all problems built
here), primal feasibility is then maintained exactly, and dual-equality
infeasibility contracts with the dual step length.  The Schur complement is
assembled per variable pair from the basis kernel and factored by a
block-sparse Cholesky that eliminates low-degree variables first.

Determinism: no randomness anywhere; identical inputs produce identical
iterates.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from .hermbasis import basis_for, complexify, realify

try:
    from threadpoolctl import threadpool_limits
except ImportError:  # pragma: no cover
    threadpool_limits = None


class SdpStatus(enum.Enum):
    OPTIMAL = "optimal"
    MAX_ITERATIONS = "max_iterations"
    NUMERICAL_FAILURE = "numerical_failure"


class SdpFailure(RuntimeError):
    """Numerical failure inside the solver; carries the residuals reached."""

    def __init__(self, message: str, residuals: "SdpResiduals | None" = None,
                 history: list | None = None):
        super().__init__(message)
        self.residuals = residuals
        self.history = history or []


@dataclass(frozen=True)
class SdpVariable:
    name: str
    dim: int  # complex Hermitian dimension; dim^2 real coordinates


@dataclass(frozen=True)
class BlockTerm:
    """One summand sign * mat(perm-applied coords of one variable)."""

    var: int
    sign: float = 1.0
    perm: np.ndarray | None = None   # coordinate permutation, or None = identity
    psigns: np.ndarray | None = None  # per-coordinate signs accompanying perm


@dataclass(frozen=True)
class LmiBlock:
    """Constraint: const + sum of terms must be PSD (complex dim x dim)."""

    dim: int
    const: np.ndarray
    terms: tuple[BlockTerm, ...]


@dataclass(frozen=True)
class SdpProblem:
    variables: tuple[SdpVariable, ...]
    objective: np.ndarray          # stacked coordinate costs
    blocks: tuple[LmiBlock, ...]
    initial_x: np.ndarray          # strictly feasible stacked coordinates

    def var_slices(self) -> list[slice]:
        slices, start = [], 0
        for v in self.variables:
            n = v.dim * v.dim
            slices.append(slice(start, start + n))
            start += n
        return slices

    @property
    def n_coords(self) -> int:
        return sum(v.dim * v.dim for v in self.variables)


@dataclass(frozen=True)
class SdpSettings:
    gap_tol: float = 1e-8          # relative duality-gap target
    feas_tol: float = 1e-8         # dual equality-residual target (inf norm)
    max_iterations: int = 100
    step_scale: float = 0.98       # fraction of the max step to the boundary
    corrector: bool = True         # Mehrotra second-order correction
    extended_mu: float = 1e-5      # switch congruences to float80 below this mu
    collect_history: bool = False
    verbose: bool = False


@dataclass
class SdpResiduals:
    duality_gap: float
    rel_gap: float
    dual_residual: float
    primal_residual: float  # zero by construction; reported for completeness
    min_slack_eig: float
    min_dual_eig: float


@dataclass
class SdpSolution:
    status: SdpStatus
    optimum: float
    dual_objective: float
    x: np.ndarray
    variable_matrices: dict[str, np.ndarray]
    residuals: SdpResiduals
    iterations: int
    history: list[dict] = field(default_factory=list)


def _apply_perm(term: BlockTerm, xv: np.ndarray) -> np.ndarray:
    """Coordinates of the term's contribution, given its variable's coords."""
    if term.perm is None:
        return term.sign * xv
    out = np.empty_like(xv)
    out[term.perm] = term.psigns * xv
    if term.sign != 1.0:
        out *= term.sign
    return out


def _apply_perm_t(term: BlockTerm, y: np.ndarray) -> np.ndarray:
    """Transpose action of the term's coordinate map."""
    if term.perm is None:
        return term.sign * y
    out = term.psigns * y[term.perm]
    if term.sign != 1.0:
        out *= term.sign
    return out


def _conjugate_kernel(k: np.ndarray, t_row: BlockTerm, t_col: BlockTerm) -> np.ndarray:
    """(P_row)^T K (P_col) including both terms' scalar signs."""
    out = k
    if t_row.perm is not None and t_col.perm is not None:
        out = out[np.ix_(t_row.perm, t_col.perm)]
        out = (t_row.psigns[:, None] * t_col.psigns[None, :]) * out
    elif t_row.perm is not None:
        out = t_row.psigns[:, None] * out[t_row.perm, :]
    elif t_col.perm is not None:
        out = t_col.psigns[None, :] * out[:, t_col.perm]
    s = t_row.sign * t_col.sign
    return s * out if s != 1.0 else out


class _Pivot:
    """Dense SPD pivot solve; falls back to an eigenvalue clamp when the
    Cholesky fails (near-singular pivots appear once the iterate approaches
    a degenerate optimal face)."""

    def __init__(self, mat: np.ndarray):
        sym = 0.5 * (mat + mat.T)
        try:
            self._chol = cho_factor(sym, lower=True, check_finite=False)
            self._eig = None
        except np.linalg.LinAlgError:
            d, u = np.linalg.eigh(sym)
            floor = max(1e-14, 1e-14 * float(d[-1]))
            self._chol = None
            self._eig = (u, np.maximum(d, floor))

    def solve(self, rhs: np.ndarray) -> np.ndarray:
        if self._chol is not None:
            return cho_solve(self._chol, rhs, check_finite=False)
        u, d = self._eig
        return (u / d) @ (u.T @ rhs)


class _BlockCholesky:
    """Factorization of a symmetric positive definite block-sparse matrix
    given as {(i, j): dense block} for i <= j, eliminating variables in
    min-degree order (exact for the star-shaped graphs produced here)."""

    def __init__(self, h: dict[tuple[int, int], np.ndarray], n_vars: int):
        work: dict[tuple[int, int], np.ndarray] = {}
        for (i, j), blk in h.items():
            work[(i, j)] = blk.copy()
        degree = {i: 0 for i in range(n_vars)}
        for (i, j) in h:
            if i != j:
                degree[i] += 1
                degree[j] += 1
        self.order = sorted(range(n_vars), key=lambda i: (degree[i], i))
        pos = {k: t for t, k in enumerate(self.order)}
        self.steps = []
        for k in self.order:
            if (k, k) not in work:
                raise SdpFailure("missing diagonal block in Schur system")
            pivot = _Pivot(work.pop((k, k)))
            neighbors = []
            for j in range(n_vars):
                if j == k or pos[j] < pos[k]:
                    continue
                key = (min(k, j), max(k, j))
                if key in work:
                    # orient as the (k, j) block
                    blk = work.pop(key)
                    neighbors.append((j, blk if key[0] == k else blk.T))
            solved = [(j, pivot.solve(blk)) for j, blk in neighbors]
            for a, (j1, blk1) in enumerate(neighbors):
                for j2, x2 in solved[a:]:
                    upd = blk1.T @ x2
                    key = (min(j1, j2), max(j1, j2))
                    if key[0] != j1:
                        upd = upd.T
                    if key in work:
                        work[key] -= upd
                    else:
                        work[key] = -upd
                    if j1 == j2:
                        sym = work[key]
                        work[key] = 0.5 * (sym + sym.T)
            self.steps.append((k, pivot, neighbors))

    def solve(self, rhs_parts: list[np.ndarray]) -> list[np.ndarray]:
        r = [p.copy() for p in rhs_parts]
        for k, pivot, neighbors in self.steps:
            s = pivot.solve(r[k])
            for j, blk in neighbors:
                r[j] -= blk.T @ s
        x = [None] * len(r)
        for k, pivot, neighbors in reversed(self.steps):
            acc = r[k].copy()
            for j, blk in neighbors:
                acc -= blk @ x[j]
            x[k] = pivot.solve(acc)
        return x


class _SchurSolver:
    """Jacobi-equilibrated block factorization with iterative refinement.

    The raw Schur system spans many orders of magnitude near a degenerate
    optimum; symmetric diagonal scaling keeps the elimination numerically
    sane and two refinement sweeps against the unscaled blocks recover the
    digits lost to cancellation.
    """

    REFINE_STEPS = 2

    def __init__(self, h: dict[tuple[int, int], np.ndarray], n_vars: int,
                 sizes: list[int], reg: float = 1e-12):
        self.h = h
        self.n_vars = n_vars
        self.scales = []
        for i in range(n_vars):
            d = np.abs(np.diag(h[(i, i)]))
            self.scales.append(1.0 / np.sqrt(np.maximum(d, 1e-300)))
        scaled = {}
        for (i, j), blk in h.items():
            scaled[(i, j)] = self.scales[i][:, None] * blk * self.scales[j][None, :]
        for i in range(n_vars):
            scaled[(i, i)][np.diag_indices(sizes[i])] += reg
        self.chol = _BlockCholesky(scaled, n_vars)

    def _multiply(self, xs: list[np.ndarray]) -> list[np.ndarray]:
        out = [np.zeros_like(x) for x in xs]
        for (i, j), blk in self.h.items():
            out[i] += blk @ xs[j]
            if i != j:
                out[j] += blk.T @ xs[i]
        return out

    def _solve_scaled(self, parts: list[np.ndarray]) -> list[np.ndarray]:
        scaled_rhs = [s * p for s, p in zip(self.scales, parts)]
        ys = self.chol.solve(scaled_rhs)
        return [s * y for s, y in zip(self.scales, ys)]

    def solve(self, rhs_parts: list[np.ndarray]) -> list[np.ndarray]:
        xs = self._solve_scaled(rhs_parts)
        rhs_norm = max(float(np.max(np.abs(r))) for r in rhs_parts)
        prev = np.inf
        for _ in range(self.REFINE_STEPS):
            hx = self._multiply(xs)
            res = [r - v for r, v in zip(rhs_parts, hx)]
            res_norm = max(float(np.max(np.abs(r))) for r in res)
            if res_norm <= 1e-13 * (1.0 + rhs_norm) or res_norm >= prev:
                break
            prev = res_norm
            corr = self._solve_scaled(res)
            xs = [x + c for x, c in zip(xs, corr)]
        return xs


class _BlockWork:
    """Static per-block data: realified constant and basis handles."""

    def __init__(self, block: LmiBlock):
        self.block = block
        self.basis = basis_for(block.dim)
        self.const_r = realify(np.asarray(block.const, dtype=complex))
        self.m2 = 2 * block.dim  # realified size


def _slack_real(work: _BlockWork, x: np.ndarray, slices) -> np.ndarray:
    coords = None
    for term in work.block.terms:
        contrib = _apply_perm(term, x[slices[term.var]])
        coords = contrib if coords is None else coords + contrib
    s = work.const_r.copy()
    if coords is not None:
        s += realify(work.basis.from_coords(coords))
    return s


def _a_star(work: _BlockWork, y_real: np.ndarray, out: np.ndarray, slices):
    """Accumulate the adjoint of the block's coordinate map applied to a
    realified matrix.  Realified traces double complex ones, hence the 2."""
    y = 2.0 * work.basis.to_coords(complexify(y_real))
    for term in work.block.terms:
        out[slices[term.var]] += _apply_perm_t(term, y)


def _sym(a: np.ndarray) -> np.ndarray:
    return 0.5 * (a + a.T)


def _project_structure(a: np.ndarray) -> np.ndarray:
    """Orthogonal projection onto realified-Hermitian matrices."""
    return realify(complexify(a))


def solve_sdp(problem: SdpProblem, settings: SdpSettings | None = None) -> SdpSolution:
    """Run the interior-point iteration; never raises for MAX_ITERATIONS.

    Raises :class:`SdpFailure` only when the linear algebra breaks down
    (non-PD Schur blocks, NaNs); callers that must not throw should catch it
    and inspect ``.residuals``.
    """
    if threadpool_limits is not None:
        # The matrices here are far below BLAS multithreading break-even;
        # extra threads only add contention (and badly so on small shared
        # boxes), so scope everything to one thread.
        with threadpool_limits(limits=1):
            return _solve_sdp_impl(problem, settings)
    return _solve_sdp_impl(problem, settings)


def _solve_sdp_impl(problem: SdpProblem, settings: SdpSettings | None) -> SdpSolution:
    st = settings or SdpSettings()
    slices = problem.var_slices()
    sizes = [v.dim * v.dim for v in problem.variables]
    c = np.asarray(problem.objective, dtype=float)
    if c.shape != (problem.n_coords,):
        raise ValueError("objective length does not match total coordinates")
    works = [_BlockWork(b) for b in problem.blocks]
    for b in problem.blocks:
        for t in b.terms:
            if not 0 <= t.var < len(problem.variables):
                raise ValueError("block term references unknown variable")

    x = np.array(problem.initial_x, dtype=float)
    if x.shape != (problem.n_coords,):
        raise ValueError("initial point length does not match total coordinates")
    s_mats = [_slack_real(w, x, slices) for w in works]
    for s in s_mats:
        if np.linalg.eigvalsh(s)[0] <= 0:
            raise ValueError("initial point is not strictly feasible")
    z_mats = [np.eye(w.m2) for w in works]
    m_total = sum(w.m2 for w in works)

    def a_star_all(mats):
        out = np.zeros_like(x)
        for w, m in zip(works, mats):
            _a_star(w, m, out, slices)
        return out

    def a_apply(w: _BlockWork, dx: np.ndarray) -> np.ndarray:
        coords = None
        for term in w.block.terms:
            contrib = _apply_perm(term, dx[slices[term.var]])
            coords = contrib if coords is None else coords + contrib
        if coords is None:
            return np.zeros((w.m2, w.m2))
        return realify(w.basis.from_coords(coords))

    # Gram operator of the constraint maps.  Solving with it projects any
    # dual candidate onto the affine manifold A*(Z) = c, which pins the dual
    # equality residual at machine zero instead of letting ill-conditioned
    # scaling products regenerate it every iteration.  The Gram matrix only
    # involves signed permutations, so it is benignly conditioned.
    gram: dict[tuple[int, int], np.ndarray] = {}
    for w in works:
        eye_k = 2.0 * np.eye(w.basis.size)
        terms = w.block.terms
        for a in range(len(terms)):
            for b in range(a, len(terms)):
                ta, tb = terms[a], terms[b]
                cont = _conjugate_kernel(eye_k, ta, tb)
                va, vb = ta.var, tb.var
                if a == b:
                    key, upd = (va, va), _sym(cont)
                elif va == vb:
                    key, upd = (va, va), cont + cont.T
                elif va < vb:
                    key, upd = (va, vb), cont
                else:
                    key, upd = (vb, va), cont.T
                if key in gram:
                    gram[key] += upd
                else:
                    gram[key] = upd.copy()
    try:
        gram_solver = _SchurSolver(gram, len(problem.variables), sizes)
    except SdpFailure:
        gram_solver = None  # degenerate map; fall back to unprojected duals

    def project_dual(mats):
        """Shift matrices along the range of A so that A*(mats) = c exactly."""
        if gram_solver is None:
            return mats
        defect = c - a_star_all(mats)
        parts = gram_solver.solve([defect[sl] for sl in slices])
        y = np.concatenate(parts)
        return [m + a_apply(w, y) for w, m in zip(works, mats)]

    z_proj = project_dual(z_mats)
    if all(np.linalg.eigvalsh(z)[0] > 0 for z in z_proj):
        z_mats = z_proj

    history: list[dict] = []
    residuals = None
    status = SdpStatus.MAX_ITERATIONS
    iterations = 0
    best = None  # (score, x, z_mats, residuals) of the best iterate seen
    stall_count = 0

    for it in range(st.max_iterations):
        iterations = it
        try:
            s_eigs = [np.linalg.eigh(s) for s in s_mats]
            z_min = min(float(np.linalg.eigvalsh(z)[0]) for z in z_mats)
        except np.linalg.LinAlgError as exc:
            raise SdpFailure(f"eigendecomposition failed: {exc}", residuals, history)

        atz = a_star_all(z_mats)
        r_d = c - atz
        pobj = float(c @ x)
        dobj = -sum(float(np.sum(w.const_r * z)) for w, z in zip(works, z_mats))
        gap = pobj - dobj
        mu = sum(float(np.sum(s * z)) for s, z in zip(s_mats, z_mats)) / m_total
        rel_gap = abs(gap) / (1.0 + abs(pobj) + abs(dobj))
        dual_res = float(np.max(np.abs(r_d)))
        residuals = SdpResiduals(
            duality_gap=gap, rel_gap=rel_gap, dual_residual=dual_res,
            primal_residual=0.0,
            min_slack_eig=min(float(d[0]) for d, _ in s_eigs),
            min_dual_eig=z_min)
        if st.collect_history:
            history.append({"iter": it, "pobj": pobj, "dobj": dobj, "mu": mu,
                            "gap": gap, "dual_residual": dual_res})
        score = max(abs(gap) / (1.0 + abs(pobj)), dual_res)
        if best is None or score < best[0]:
            best = (score, x.copy(), [z.copy() for z in z_mats], residuals)
            stall_count = 0
        else:
            stall_count += 1
        if abs(gap) <= st.gap_tol * (1.0 + abs(pobj)) and dual_res <= st.feas_tol:
            status = SdpStatus.OPTIMAL
            break
        if stall_count >= 6:
            break  # no measurable progress; keep the best iterate
        if not np.isfinite(mu) or not np.isfinite(dual_res):
            raise SdpFailure("non-finite iterate", residuals, history)

        # Nesterov-Todd scaling per block: with W Z W = S and W = R R^T, the
        # scaled point lam = R^-1 S R^-T = R^T Z R is a positive diagonal.
        # All complementarity algebra runs on lam-scaled quantities, which
        # keeps the endgame subtractions at the sqrt(mu) scale instead of
        # amplifying them through W^-1 twice.
        winvs, rinvs, lams = [], [], []
        scaling_broken = False
        try:
            for (ds, us), z in zip(s_eigs, z_mats):
                if ds[0] <= 0:
                    scaling_broken = True
                    break
                s_half = (us * np.sqrt(ds)) @ us.T
                s_mhalf = (us / np.sqrt(ds)) @ us.T
                t = _sym(s_half @ z @ s_half)
                dt, ut = np.linalg.eigh(t)
                if dt[0] <= 0:
                    scaling_broken = True
                    break
                lam = np.sqrt(dt)
                rinv = np.sqrt(lam)[:, None] * (ut.T @ s_mhalf)
                winvs.append(_project_structure(_sym(rinv.T @ rinv)))
                rinvs.append(rinv)
                lams.append(lam)
        except np.linalg.LinAlgError:
            scaling_broken = True
        if scaling_broken:
            # Degenerate endgame: the cone margins are below roundoff.  The
            # best iterate so far is the answer this arithmetic can support.
            if best is None:
                raise SdpFailure("scaling failed before any progress",
                                 residuals, history)
            if st.verbose:
                print(f"  [{it}] stop: NT scaling broke down")
            break

        # Schur complement over variable pairs: factor once, solve twice.
        h: dict[tuple[int, int], np.ndarray] = {}
        kernels = []
        for w, winv in zip(works, winvs):
            k = 2.0 * w.basis.kernel(complexify(winv))
            kernels.append(k)
            terms = w.block.terms
            for a in range(len(terms)):
                for b in range(a, len(terms)):
                    ta, tb = terms[a], terms[b]
                    cont = _conjugate_kernel(k, ta, tb)
                    va, vb = ta.var, tb.var
                    if a == b:
                        key, upd = (va, va), _sym(cont)
                    elif va == vb:
                        key, upd = (va, va), cont + cont.T
                    elif va < vb:
                        key, upd = (va, vb), cont
                    else:
                        key, upd = (vb, va), cont.T
                    if key in h:
                        h[key] += upd
                    else:
                        # copy: upd may alias the shared kernel matrix
                        h[key] = upd.copy()
        # Tiny diagonal regularization guards the late-stage factorization.
        for i in range(len(problem.variables)):
            if (i, i) not in h:
                raise SdpFailure("variable absent from every block", residuals, history)
        try:
            chol = _SchurSolver(h, len(problem.variables), sizes)
        except SdpFailure as exc:
            raise SdpFailure(f"iteration {it}: {exc}", residuals, history)

        # Once mu is small the scaling matrices are badly conditioned and
        # plain double congruences re-inject ~eps*cond(W) of dual-equality
        # noise per iteration; extended precision removes that floor.  The
        # matrices are tiny, so the software-float cost is negligible.
        congr_dtype = np.longdouble if mu < st.extended_mu else np.float64
        rinvs_c = [r.astype(congr_dtype) for r in rinvs]

        def congr(i, mat, inverse_side):
            """R^-1 mat R^-T (inverse_side) or R^-T mat R^-1."""
            r = rinvs_c[i]
            m = mat.astype(congr_dtype, copy=False)
            out = r @ m @ r.T if inverse_side else r.T @ m @ r
            return out.astype(np.float64)

        def solve_newton(rhs_vec):
            parts = chol.solve([rhs_vec[sl] for sl in slices])
            dx = np.concatenate(parts)
            ds_raw = [a_apply(w, dx) for w in works]
            ds_scaled = [congr(i, d, True) for i, d in enumerate(ds_raw)]
            return dx, ds_raw, ds_scaled

        def scaled_step(lam, delta_scaled):
            """Largest alpha <= 1 keeping diag(lam) + alpha * delta PSD."""
            g = delta_scaled / np.sqrt(np.outer(lam, lam))
            lam_min = float(np.linalg.eigvalsh(_sym(g))[0])
            if lam_min >= -1e-14:
                return 1.0
            return min(1.0, -1.0 / lam_min)

        def primal_step(ds_raw):
            """Step limit measured against the true slack: the slack rebuild
            is exactly linear in x, so this bound is reliable even when the
            scaled one is corrupted by the conditioning of R."""
            out = 1.0
            for (d, u), delta in zip(s_eigs, ds_raw):
                isq = u / np.sqrt(d)
                m = isq.T @ delta @ isq
                lam_min = float(np.linalg.eigvalsh(_sym(m))[0])
                if lam_min < -1e-14:
                    out = min(out, -1.0 / lam_min)
            return out

        # Predictor: affine direction (sigma = 0); in scaled space the
        # complementarity equation reads dZ~ + dS~ = -lam.
        dx_a, dsr_a, ds_a = solve_newton(-c)
        dz_a = [-np.diag(lam) - ds for lam, ds in zip(lams, ds_a)]
        ap_a = min(primal_step(dsr_a),
                   min(scaled_step(lam, ds) for lam, ds in zip(lams, ds_a)))
        ad_a = min(scaled_step(lam, dz) for lam, dz in zip(lams, dz_a))
        mu_aff = sum(
            float(np.sum(lam * lam) + ap_a * (lam * np.diag(ds)).sum()
                  + ad_a * (lam * np.diag(dz)).sum()
                  + ap_a * ad_a * np.sum(ds * dz))
            for lam, ds, dz in zip(lams, ds_a, dz_a)) / m_total
        sigma = min(0.99, max(0.0, mu_aff / mu) ** 3)
        # Do not drive complementarity far below what the gap target needs;
        # overshooting only wrecks the conditioning of every later system.
        mu_floor = 0.02 * st.gap_tol * (1.0 + abs(pobj)) / m_total
        if mu > mu_floor:
            sigma = min(0.99, max(sigma, mu_floor / mu))

        def direction(sigma, with_corrector):
            """Direction toward sigma * mu; the Mehrotra corrector enters as
            the symmetrized product of the scaled affine directions."""
            dprime = []
            rhs = -c.copy()
            for i, (w, lam, ds, dz) in enumerate(zip(works, lams, ds_a, dz_a)):
                num = sigma * mu * np.eye(lam.size)
                if with_corrector:
                    num = num - 0.5 * (ds @ dz + dz @ ds)
                dp = num * (2.0 / np.add.outer(lam, lam))
                dprime.append(dp)
                _a_star(w, congr(i, dp, False), rhs, slices)
            dx, ds_raw, ds_scaled = solve_newton(rhs)
            dz_scaled = [dp - np.diag(lam) - ds
                         for dp, lam, ds in zip(dprime, lams, ds_scaled)]
            a_p = min(primal_step(ds_raw),
                      min(scaled_step(lam, d) for lam, d in zip(lams, ds_scaled)))
            a_d = min(scaled_step(lam, d) for lam, d in zip(lams, dz_scaled))
            return dx, ds_scaled, dz_scaled, dprime, a_p, a_d

        dx, ds_sc, dz_sc, dprime, a_p, a_d = direction(sigma, st.corrector)
        if st.corrector and min(a_p, a_d) < 0.3 * min(ap_a, ad_a):
            # Second-order term misfired; retry without it.
            dx, ds_sc, dz_sc, dprime, a_p, a_d = direction(sigma, False)
        rescue = False
        if min(a_p, a_d) < 1e-4:
            # A collapsed step means the solve exploded along a (nearly)
            # value-neutral null direction of a degenerate optimal face.
            # Re-solve with progressively stronger Tikhonov damping: the
            # bias lies inside the face, so the objective is unaffected.
            rescue = True
            for reg in (1e-9, 1e-6, 1e-4):
                chol = _SchurSolver(h, len(problem.variables), sizes, reg)
                dx, ds_sc, dz_sc, dprime, a_p, a_d = direction(
                    max(sigma, 0.3), False)
                if min(a_p, a_d) >= 1e-4:
                    break
            if min(a_p, a_d) < 1e-4:
                dx, ds_sc, dz_sc, dprime, a_p, a_d = direction(1.0, False)
            if min(a_p, a_d) < 1e-6:
                if st.verbose:
                    print(f"  [{it}] stop: combined and centering steps "
                          f"collapsed (a_p={a_p:.1e}, a_d={a_d:.1e})")
                break

        def centrality(alpha_p, alpha_d):
            """min eig / mean eig of the stepped complementarity products,
            evaluated in the scaled space.  Guards the iterate against
            drifting so far off center that the next Newton system is
            unsolvable (the degenerate-face death spiral)."""
            worst = np.inf
            total, count = 0.0, 0
            for lam, ds, dz in zip(lams, ds_sc, dz_sc):
                a = np.diag(lam) + alpha_p * ds
                b = np.diag(lam) + alpha_d * dz
                da, ua = np.linalg.eigh(_sym(a))
                if da[0] <= 0:
                    return -1.0, 1.0
                root = (ua * np.sqrt(da)) @ ua.T
                prod = np.linalg.eigvalsh(_sym(root @ b @ root))
                worst = min(worst, float(prod[0]))
                total += float(prod.sum())
                count += lam.size
            return worst, total / count

        # Long steps; back off adaptively from the cone boundary, then
        # backtrack if roundoff still pushed an iterate out of the cone.
        scale = max(st.step_scale, 0.9 + 0.09 * min(a_p, a_d, 1.0))
        alpha_p = min(1.0, scale * a_p)
        alpha_d = min(1.0, scale * a_d)
        e_mats = [congr(i, dp - ds, False)
                  for i, (dp, ds) in enumerate(zip(dprime, ds_sc))]
        # Re-impose A*(E) = c, least-norm in the scaled metric (solve with
        # the current Schur operator): the correction then avoids the
        # directions where Z is about to touch the cone boundary, unlike a
        # plain Gram projection.  Iterated while it contracts; near a
        # degenerate face the pass can stop helping or even diverge, so keep
        # the best candidate seen.
        best_defect = float(np.max(np.abs(c - a_star_all(e_mats))))
        for _ in range(3):
            if best_defect <= 0.05 * st.feas_tol:
                break
            defect = c - a_star_all(e_mats)
            u = np.concatenate(chol.solve([defect[sl] for sl in slices]))
            candidate = [e + congr(i, congr(i, a_apply(w, u), True), False)
                         for i, (w, e) in enumerate(zip(works, e_mats))]
            cand_defect = float(np.max(np.abs(c - a_star_all(candidate))))
            if cand_defect >= best_defect:
                break
            e_mats, best_defect = candidate, cand_defect
        # Neighborhood guard first: shrink until the stepped complementarity
        # spectrum stays within a weak centrality band.
        backtracks = 0
        for _ in range(12):
            worst, mean = centrality(alpha_p, alpha_d)
            if worst >= 1e-5 * mean:
                break
            alpha_p *= 0.7
            alpha_d *= 0.7
            backtracks += 1
        accepted = False
        for _ in range(20):
            x_new = x + alpha_p * dx
            s_new = [_slack_real(w, x_new, slices) for w in works]
            # Z + alpha * dZ with dZ = -Z + R^-T (D' - dS~) R^-1; the convex
            # combination keeps the update benign even for tiny eigenvalues.
            z_new = [_project_structure((1.0 - alpha_d) * z + alpha_d * e)
                     for z, e in zip(z_mats, e_mats)]
            ok = all(np.linalg.eigvalsh(s)[0] > 0 for s in s_new) and \
                all(np.linalg.eigvalsh(z)[0] > 1e-18 for z in z_new)
            if ok:
                accepted = True
                break
            alpha_p *= 0.5
            alpha_d *= 0.5
            backtracks += 1
            if max(alpha_p, alpha_d) < 1e-10:
                break
        if st.verbose:
            print(f"  [{it}] mu={mu:.2e} gap={gap:.2e} rd={dual_res:.2e} "
                  f"sigma={sigma:.2e} a_p={a_p:.2e} a_d={a_d:.2e} "
                  f"rescue={rescue} backtracks={backtracks} ok={accepted}")
        if not accepted:
            if st.verbose:
                print(f"  [{it}] stop: no PSD point along the step")
            break
        x, s_mats, z_mats = x_new, s_new, z_new

    if status is not SdpStatus.OPTIMAL and best is not None:
        # Return the cleanest iterate seen, not wherever the stall happened.
        _, x, z_mats, residuals = best
    var_mats = {}
    for v, sl in zip(problem.variables, slices):
        b = basis_for(v.dim)
        var_mats[v.name] = b.from_coords(x[sl])
    return SdpSolution(
        status=status,
        optimum=float(c @ x),
        dual_objective=float(-sum(np.sum(w.const_r * z)
                                  for w, z in zip(works, z_mats))),
        x=x,
        variable_matrices=var_mats,
        residuals=residuals,
        iterations=iterations,
        history=history,
    )
