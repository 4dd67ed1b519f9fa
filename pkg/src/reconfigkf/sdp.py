"""Small dense semidefinite-programming engine.

Solves problems of the form

    minimize    sum_j  tr(C_j X_j)
    subject to  sum_j  tr(A_ij X_j)  (<= | ==)  b_i       i = 1..m
                X_j >= 0 (PSD)                            j = 1..k

where each block variable ``X_j`` is either complex Hermitian or real
symmetric.  Complex Hermitian cones are handled exclusively through the
real symmetric embedding ``[[Re, -Im], [Im, Re]]`` so a single
real-arithmetic Newton core covers both fields.

Algorithm: log-det barrier path-following.  Inequalities get nonnegative
scalar slacks (1x1 diagonal PSD blocks), the resulting equality system
``A x = b`` is eliminated through its null space, and Newton's method
minimizes ``t * c.u - sum_j log det F_j(u)`` along an increasing sequence
of ``t``.  A phase-I pass (minimize s with every cone relaxed to
``X_j + s I >= 0`` and slacks ``>= -s``) supplies strictly feasible
starting points and doubles as the feasibility test.

Everything is deterministic: fixed initialization, no randomized pivoting,
so solving the same problem twice yields bit-identical results.
"""

import hashlib
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError
from .linalg import complex_to_real_embed, hermitianize

__all__ = [
    "SdpBlock",
    "SdpConstraint",
    "SdpProblem",
    "SdpSolution",
    "SolverOptions",
    "CompiledSdp",
    "compile_problem",
    "solve",
    "check_feasibility",
    "dump_problem",
]

HERMITIAN = "hermitian"
SYMMETRIC = "symmetric"


@dataclass(frozen=True)
class SdpBlock:
    """One PSD matrix variable."""

    name: str
    size: int
    field: str = HERMITIAN

    def __post_init__(self):
        if self.size < 1:
            raise ConfigurationError(f"block {self.name!r}: size must be >= 1")
        if self.field not in (HERMITIAN, SYMMETRIC):
            raise ConfigurationError(
                f"block {self.name!r}: unknown field {self.field!r}"
            )

    @property
    def n_params(self) -> int:
        n = self.size
        return n * n if self.field == HERMITIAN else n * (n + 1) // 2

    @property
    def embedded_size(self) -> int:
        return 2 * self.size if self.field == HERMITIAN else self.size


@dataclass
class SdpConstraint:
    """Linear trace constraint: sum_j tr(coeffs[j] X_j)  sense  rhs."""

    coeffs: dict
    sense: str  # "==" or "<="
    rhs: float

    def __post_init__(self):
        if self.sense not in ("==", "<="):
            raise ConfigurationError(f"unknown constraint sense {self.sense!r}")


@dataclass
class SdpProblem:
    """Blocks, linear objective and trace constraints.

    ``objective`` maps block names to Hermitian/symmetric coefficient
    matrices; it may be empty for pure feasibility problems.  Coupled
    affine LMIs are expected to be encoded by the caller as one PSD block
    plus equality constraints pinning its sub-blocks.
    """

    blocks: list
    objective: dict = field(default_factory=dict)
    constraints: list = field(default_factory=list)

    def __post_init__(self):
        if not self.blocks:
            raise ConfigurationError("problem needs at least one block")
        names = [b.name for b in self.blocks]
        if len(set(names)) != len(names):
            raise ConfigurationError("duplicate block names")
        by_name = {b.name: b for b in self.blocks}
        for where, coeffs in [("objective", self.objective)] + [
            (f"constraint {i}", c.coeffs) for i, c in enumerate(self.constraints)
        ]:
            for name, mat in coeffs.items():
                if name not in by_name:
                    raise ConfigurationError(f"{where}: unknown block {name!r}")
                blk = by_name[name]
                mat = np.asarray(mat)
                if mat.shape != (blk.size, blk.size):
                    raise ConfigurationError(
                        f"{where}: coefficient for {name!r} has shape "
                        f"{mat.shape}, expected {(blk.size, blk.size)}"
                    )

    def block(self, name: str) -> SdpBlock:
        for b in self.blocks:
            if b.name == name:
                return b
        raise KeyError(name)


@dataclass
class SdpSolution:
    status: str  # "optimal" | "infeasible" | "max-iterations"
    blocks: dict
    objective_value: float
    duality_gap: float
    max_violation: float
    newton_iterations: int


@dataclass(frozen=True)
class SolverOptions:
    """Barrier parameters.

    ``mu_factor`` is the reduction factor of the barrier parameter
    ``1/t`` per outer stage (t grows by 1/mu_factor).
    """

    mu_factor: float = 0.2
    newton_tol: float = 1e-9
    gap_tol: float = 1e-7
    max_newton: int = 200
    feas_tol: float = 1e-7


# ----------------------------------------------------------------------
# block parametrization
# ----------------------------------------------------------------------

def _param_entries(block: SdpBlock):
    """Yield (kind, p, q) for each scalar parameter of the block.

    kind is 'd' (diagonal), 're' or 'im' (off-diagonal, p < q).
    """
    n = block.size
    for p in range(n):
        yield ("d", p, p)
    for p in range(n):
        for q in range(p + 1, n):
            yield ("re", p, q)
            if block.field == HERMITIAN:
                yield ("im", p, q)


def _basis_matrix(block: SdpBlock, kind: str, p: int, q: int) -> np.ndarray:
    n = block.size
    if block.field == HERMITIAN:
        e = np.zeros((n, n), dtype=complex)
    else:
        e = np.zeros((n, n))
    if kind == "d":
        e[p, p] = 1.0
    elif kind == "re":
        e[p, q] = 1.0
        e[q, p] = 1.0
    else:  # "im", hermitian only: X[p, q] = i, X[q, p] = -i
        e[p, q] = 1.0j
        e[q, p] = -1.0j
    return e


def _coeff_vector(block: SdpBlock, a: np.ndarray) -> np.ndarray:
    """Real coefficients of tr(a X) as a linear form in the block params."""
    a = np.asarray(a)
    out = np.empty(block.n_params)
    for k, (kind, p, q) in enumerate(_param_entries(block)):
        if kind == "d":
            out[k] = float(np.real(a[p, p]))
        elif kind == "re":
            out[k] = 2.0 * float(np.real(a[p, q]))
        else:
            out[k] = 2.0 * float(np.imag(a[p, q]))
    return out


def _params_to_matrix(block: SdpBlock, params: np.ndarray) -> np.ndarray:
    n = block.size
    if block.field == HERMITIAN:
        x = np.zeros((n, n), dtype=complex)
    else:
        x = np.zeros((n, n))
    for k, (kind, p, q) in enumerate(_param_entries(block)):
        v = params[k]
        if kind == "d":
            x[p, p] += v
        elif kind == "re":
            x[p, q] += v
            x[q, p] += v
        else:
            x[p, q] += 1.0j * v
            x[q, p] += -1.0j * v
    return x


def _matrix_to_params(block: SdpBlock, x: np.ndarray) -> np.ndarray:
    out = np.empty(block.n_params)
    for k, (kind, p, q) in enumerate(_param_entries(block)):
        if kind == "d":
            out[k] = float(np.real(x[p, p]))
        elif kind == "re":
            out[k] = float(np.real(x[p, q]))
        else:
            out[k] = float(np.imag(x[p, q]))
    return out


def _embedded_basis(block: SdpBlock) -> np.ndarray:
    """(n_params, s, s) stack of embedded basis matrices."""
    mats = []
    for kind, p, q in _param_entries(block):
        e = _basis_matrix(block, kind, p, q)
        if block.field == HERMITIAN:
            mats.append(complex_to_real_embed(e))
        else:
            mats.append(e)
    return np.array(mats)


# ----------------------------------------------------------------------
# compilation
# ----------------------------------------------------------------------

class CompiledSdp:
    """Problem structure with slacks added, equalities factored and the
    per-block embedded basis tensors precomputed.

    The expensive pieces (basis tensors, SVD of the equality matrix)
    depend only on the constraint *coefficients*, so a compiled problem
    can be re-solved cheaply for new right-hand sides, as happens at
    every Kalman step of a sweep.
    """

    def __init__(self, problem: SdpProblem):
        self.problem = problem
        self.blocks = list(problem.blocks)
        self.n_ineq = sum(1 for c in problem.constraints if c.sense == "<=")
        # slack variables for inequalities, appended after block params
        self.slack_names = []
        for i, c in enumerate(problem.constraints):
            if c.sense == "<=":
                self.slack_names.append(f"_slack_{i}")

        self.offsets = {}
        off = 0
        for b in self.blocks:
            self.offsets[b.name] = off
            off += b.n_params
        self.n_block_params = off
        self.n_params = off + len(self.slack_names)

        self.basis = {b.name: _embedded_basis(b) for b in self.blocks}
        self.nu = sum(b.embedded_size for b in self.blocks) + len(self.slack_names)

        # equality system A x = b (slack columns turn <= into ==)
        rows = []
        slack_idx = 0
        for c in problem.constraints:
            row = np.zeros(self.n_params)
            for name, mat in c.coeffs.items():
                b = problem.block(name)
                o = self.offsets[name]
                row[o:o + b.n_params] = _coeff_vector(b, mat)
            if c.sense == "<=":
                row[self.n_block_params + slack_idx] = 1.0
                slack_idx += 1
            rows.append(row)
        self.a_mat = np.array(rows) if rows else np.zeros((0, self.n_params))
        self.rhs = np.array([c.rhs for c in problem.constraints])

        # objective vector over params
        self.c_vec = np.zeros(self.n_params)
        for name, mat in problem.objective.items():
            b = problem.block(name)
            o = self.offsets[name]
            self.c_vec[o:o + b.n_params] = _coeff_vector(b, mat)

        # null space / pseudo-inverse of A
        if self.a_mat.shape[0] > 0:
            u, s, vt = np.linalg.svd(self.a_mat, full_matrices=True)
            tol = max(self.a_mat.shape) * np.finfo(float).eps * (s[0] if s.size else 1.0)
            rank = int(np.sum(s > tol))
            self.a_rank = rank
            self._pinv = (vt[:rank].T / s[:rank]) @ u[:, :rank].T
            self.null = vt[rank:].T  # (n_params, n_free)
        else:
            self.a_rank = 0
            self._pinv = np.zeros((self.n_params, 0))
            self.null = np.eye(self.n_params)

        # per-block embedded direction tensors for the null-space coords
        self._f_dirs = []  # list of (block-ish, tensor (n_free, s, s))
        for b in self.blocks:
            o = self.offsets[b.name]
            nb = self.null[o:o + b.n_params, :]  # (n_params_b, n_free)
            t = self.basis[b.name]  # (n_params_b, s, s)
            self._f_dirs.append(np.einsum("pk,pab->kab", nb, t, optimize=True))
        for i in range(len(self.slack_names)):
            row = self.null[self.n_block_params + i, :]
            self._f_dirs.append(row[:, None, None] * np.ones((1, 1)))

    # -- helpers -------------------------------------------------------

    def particular_solution(self, rhs: np.ndarray) -> np.ndarray:
        return self._pinv @ rhs

    def embed_at(self, x: np.ndarray):
        """Embedded block matrices (incl. slacks) at a parameter vector."""
        out = []
        for b in self.blocks:
            o = self.offsets[b.name]
            f = np.einsum("p,pab->ab", x[o:o + b.n_params], self.basis[b.name],
                          optimize=True)
            out.append(f)
        for i in range(len(self.slack_names)):
            out.append(np.array([[x[self.n_block_params + i]]]))
        return out

    def extract_blocks(self, x: np.ndarray) -> dict:
        vals = {}
        for b in self.blocks:
            o = self.offsets[b.name]
            vals[b.name] = _params_to_matrix(b, x[o:o + b.n_params])
        return vals

    def params_from_blocks(self, values: dict) -> np.ndarray:
        x = np.zeros(self.n_params)
        for b in self.blocks:
            if b.name not in values:
                raise ConfigurationError(f"start point misses block {b.name!r}")
            o = self.offsets[b.name]
            x[o:o + b.n_params] = _matrix_to_params(b, np.asarray(values[b.name]))
        return x

    def violation(self, x: np.ndarray, rhs: np.ndarray) -> float:
        """Max constraint violation (equalities, inequalities, cones)."""
        worst = 0.0
        slack_idx = 0
        vals = self.a_mat @ x if self.a_mat.size else np.zeros(0)
        for i, c in enumerate(self.problem.constraints):
            if c.sense == "==":
                worst = max(worst, abs(vals[i] - rhs[i]))
            else:
                # original inequality: row value without the slack
                lhs = vals[i] - x[self.n_block_params + slack_idx]
                worst = max(worst, lhs - rhs[i])
                slack_idx += 1
        for f in self.embed_at(x):
            w = np.linalg.eigvalsh(0.5 * (f + f.T))[0]
            worst = max(worst, -float(w))
        return float(worst)

    # -- barrier core --------------------------------------------------

    def _phase2(self, u0, x0, c_free, options, t0=1.0, budget=None):
        """Path-following from a strictly feasible u0.  Returns
        (u, t_final, newton_count, converged)."""
        f0 = self.embed_at(x0)
        return _barrier_path(
            f0, self._f_dirs, c_free, u0,
            nu=self.nu, options=options, t0=t0, budget=budget,
        )

    def solve(self, rhs=None, start=None, options: SolverOptions = None):
        """Solve the compiled problem.

        ``rhs`` overrides the constraint right-hand sides (same order as
        ``problem.constraints``).  ``start`` optionally maps block names
        to strictly feasible values satisfying the equalities; when it is
        missing or unusable a phase-I pass finds a starting point.
        """
        options = options or SolverOptions()
        rhs = self.rhs if rhs is None else np.asarray(rhs, dtype=float)
        scale = 1.0 + float(np.max(np.abs(rhs))) if rhs.size else 1.0

        x0 = self.particular_solution(rhs)
        if self.a_mat.size:
            res = float(np.max(np.abs(self.a_mat @ x0 - rhs)))
            if res > 1e-7 * scale:
                return SdpSolution("infeasible", {}, np.nan, np.nan,
                                   np.nan, 0)

        c_free = self.null.T @ self.c_vec
        newton_total = 0

        if self.null.shape[1] == 0:
            # the equalities determine the point completely
            viol = self.violation(x0, rhs)
            status = "optimal" if viol <= 1e-7 * scale else "infeasible"
            return SdpSolution(status, self.extract_blocks(x0),
                               float(self.c_vec @ x0), 0.0, viol, 0)

        u0 = None
        if start is not None:
            xs = self.params_from_blocks(start)
            # fill slack values from the inequality residuals
            slack_idx = 0
            ok = True
            for i, c in enumerate(self.problem.constraints):
                if c.sense == "<=":
                    row = self.a_mat[i, :self.n_block_params]
                    lhs = row @ xs[:self.n_block_params]
                    s_val = rhs[i] - lhs
                    if s_val <= 0:
                        ok = False
                        break
                    xs[self.n_block_params + slack_idx] = s_val
                    slack_idx += 1
            if ok and (not self.a_mat.size
                       or np.max(np.abs(self.a_mat @ xs - rhs)) <= 1e-6 * scale):
                cand = self.null.T @ (xs - x0)
                if _strictly_feasible(self.embed_at(x0 + self.null @ cand)):
                    u0 = cand

        if u0 is None:
            u0, s_star, n_it, _gap = self._phase1(x0, options)
            newton_total += n_it
            if u0 is None or s_star > 0:
                status = "infeasible" if s_star > options.feas_tol else \
                    "max-iterations"
                x = x0 if u0 is None else x0 + self.null @ u0
                return SdpSolution(status, self.extract_blocks(x),
                                   np.nan, np.nan,
                                   self.violation(x, rhs), newton_total)

        budget = options.max_newton - newton_total
        u, t_fin, n_it, converged = self._phase2(u0, x0, c_free, options,
                                                 budget=budget)
        newton_total += n_it
        x = x0 + self.null @ u
        gap = self.nu / t_fin
        obj = float(self.c_vec @ x)
        status = "optimal" if (converged and gap <= options.gap_tol * 1.000001) \
            else "max-iterations"
        return SdpSolution(status, self.extract_blocks(x), obj, gap,
                           self.violation(x, rhs), newton_total)

    # -- phase I -------------------------------------------------------

    def _phase1(self, x0, options, rhs_scale=1.0, verdict_tol=None,
                early_margin=None):
        """Minimize s with all cones relaxed by +s*I.

        Returns (u or None, s_estimate, newton_count, gap).  When
        ``verdict_tol`` is set, stops as soon as the feasibility verdict
        at that tolerance is certain; when ``early_margin`` is set, stops
        as soon as ``s <= -early_margin``.
        """
        f0 = self.embed_at(x0)
        s0 = 1.0
        for f in f0:
            w = np.linalg.eigvalsh(0.5 * (f + f.T))[0]
            s0 = max(s0, -float(w) + 1.0)
        s_lo = -10.0 * s0

        # extended coordinates: [u, s]
        n_free = self.null.shape[1]
        dirs = []
        for d in self._f_dirs:
            s = d.shape[1]
            ext = np.zeros((n_free + 1, s, s))
            ext[:n_free] = d
            ext[n_free] = np.eye(s)
            dirs.append(ext)
        # bound block: s - s_lo >= 0
        bound = np.zeros((n_free + 1, 1, 1))
        bound[n_free, 0, 0] = 1.0
        dirs.append(bound)
        f0_ext = [f.copy() for f in f0] + [np.array([[-s_lo]])]

        c_ext = np.zeros(n_free + 1)
        c_ext[n_free] = 1.0
        nu_ext = self.nu + 1
        v0 = np.zeros(n_free + 1)
        v0[n_free] = s0

        tol = verdict_tol if verdict_tol is not None else options.feas_tol
        margin = early_margin if early_margin is not None else \
            max(10.0 * tol, 1e-6)

        def stop(v, t):
            s_cur = v[n_free]
            gap = nu_ext / t
            if s_cur <= -margin:
                return True
            if verdict_tol is not None:
                if s_cur <= tol:
                    return True
                if s_cur - gap > tol:
                    return True
            return gap <= 1e-12 * (1.0 + abs(s_cur))

        v, t_fin, n_it, _conv = _barrier_path(
            f0_ext, dirs, c_ext, v0, nu=nu_ext, options=options,
            t0=1.0, budget=options.max_newton, stop_predicate=stop,
        )
        s_cur = float(v[n_free])
        gap = nu_ext / t_fin
        u = v[:n_free]
        if s_cur > 0 and s_cur - gap <= 0:
            # undecided right at the boundary; call it by the midpoint
            s_est = s_cur - 0.5 * gap
        else:
            s_est = s_cur
        return (u if s_cur < 0 else None), s_est, n_it, gap

    def check_feasibility(self, rhs=None, tol=None,
                          options: SolverOptions = None):
        """Phase-I feasibility test.

        Feasible iff the optimal relaxation level s* is <= tol.  Returns
        ``(feasible, witness_blocks_or_margin)``: block values when
        feasible, the estimated s* margin otherwise.
        """
        options = options or SolverOptions()
        tol = options.feas_tol if tol is None else tol
        rhs = self.rhs if rhs is None else np.asarray(rhs, dtype=float)
        scale = 1.0 + float(np.max(np.abs(rhs))) if rhs.size else 1.0

        x0 = self.particular_solution(rhs)
        if self.a_mat.size:
            res = float(np.max(np.abs(self.a_mat @ x0 - rhs)))
            if res > 1e-7 * scale:
                return False, float(res)

        u, s_est, _n, gap = self._phase1(x0, options, verdict_tol=tol)
        feasible = s_est <= tol
        if feasible:
            x = x0 + self.null @ (u if u is not None else np.zeros(self.null.shape[1]))
            return True, self.extract_blocks(x)
        return False, float(s_est)


# ----------------------------------------------------------------------
# Newton / path-following core
# ----------------------------------------------------------------------

def _strictly_feasible(f_list) -> bool:
    for f in f_list:
        try:
            np.linalg.cholesky(0.5 * (f + f.T))
        except np.linalg.LinAlgError:
            return False
    return True


def _barrier_value(f_list):
    """-sum log det over the blocks; None if any block is not PD."""
    total = 0.0
    for f in f_list:
        try:
            ch = np.linalg.cholesky(0.5 * (f + f.T))
        except np.linalg.LinAlgError:
            return None
        total -= 2.0 * float(np.sum(np.log(np.diag(ch))))
    return total


def _barrier_path(f0, dirs, c, u0, nu, options, t0=1.0, budget=None,
                  stop_predicate=None):
    """Minimize t*c.u - sum log det(F0_j + sum_k u_k D_jk) over u, following
    the central path t -> t / mu_factor until nu/t <= gap_tol.

    Returns (u, t_final, newton_count, converged).
    """
    u = np.asarray(u0, dtype=float).copy()
    t = float(t0)
    grow = 1.0 / options.mu_factor
    count = 0
    budget = options.max_newton if budget is None else budget
    converged = True

    # 1x1 blocks (slacks, bounds) are batched: their barrier terms are
    # plain -log terms, which avoids per-block numpy dispatch overhead
    big = [j for j in range(len(f0)) if f0[j].shape[0] > 1]
    small = [j for j in range(len(f0)) if f0[j].shape[0] == 1]
    f0_big = [f0[j] for j in big]
    dirs_big = [dirs[j] for j in big]
    flat_big = [d.reshape(d.shape[0], -1) for d in dirs_big]
    f0_small = np.array([f0[j][0, 0] for j in small])
    dirs_small = np.stack([dirs[j][:, 0, 0] for j in small]) if small \
        else np.zeros((0, u.size))

    def eval_at(uu):
        fs = [f0_big[j] + (uu @ flat_big[j]).reshape(f0_big[j].shape)
              for j in range(len(big))]
        return fs, f0_small + dirs_small @ uu

    def barrier(fs, fv):
        total = 0.0
        if fv.size:
            if np.min(fv) <= 0.0:
                return None
            total -= float(np.sum(np.log(fv)))
        for f in fs:
            try:
                ch = np.linalg.cholesky(0.5 * (f + f.T))
            except np.linalg.LinAlgError:
                return None
            total -= 2.0 * float(np.sum(np.log(np.diag(ch))))
        return total

    while True:
        # center at this t
        for _inner in range(60):
            if count >= budget:
                converged = False
                break
            fs, fv = eval_at(u)
            grad = t * c.copy()
            hess = np.zeros((u.size, u.size))
            if fv.size:
                if np.min(fv) <= 0.0:
                    raise RuntimeError("barrier iterate left the cone")  # not reachable
                inv_v = 1.0 / fv
                grad -= dirs_small.T @ inv_v
                hess += (dirs_small * inv_v[:, None]).T @ (dirs_small * inv_v[:, None])
            for j, f in enumerate(fs):
                fsym = 0.5 * (f + f.T)
                try:
                    np.linalg.cholesky(fsym)
                except np.linalg.LinAlgError:
                    raise RuntimeError("barrier iterate left the cone")  # not reachable
                finv = np.linalg.inv(fsym)
                finv = 0.5 * (finv + finv.T)
                w = np.matmul(finv, dirs_big[j])  # (K, s, s): F^{-1} D_k
                grad -= np.trace(w, axis1=1, axis2=2)
                wf = w.reshape(w.shape[0], -1)
                wt = w.transpose(0, 2, 1).reshape(w.shape[0], -1)
                hess += wf @ wt.T  # H_kl = tr(F^{-1} D_k F^{-1} D_l)
            hess = 0.5 * (hess + hess.T)
            step = _solve_newton(hess, -grad)
            lam2 = float(-grad @ step) if step is not None else 0.0
            if step is None or lam2 / 2.0 <= options.newton_tol:
                break
            # backtracking line search on the barrier objective
            phi0 = t * float(c @ u) + barrier(fs, fv)
            slope = float(grad @ step)
            alpha = 1.0
            accepted = False
            for _ls in range(60):
                u_new = u + alpha * step
                val = barrier(*eval_at(u_new))
                if val is not None and \
                        t * float(c @ u_new) + val <= phi0 + 0.25 * alpha * slope:
                    accepted = True
                    break
                alpha *= 0.5
            count += 1
            if not accepted:
                break
            u = u_new
        if stop_predicate is not None and stop_predicate(u, t):
            break
        if nu / t <= options.gap_tol:
            break
        if count >= budget:
            converged = False
            break
        t *= grow
    return u, t, count, converged


def _solve_newton(hess, rhs):
    """Solve the Newton system with escalating diagonal regularization."""
    n = hess.shape[0]
    base = max(float(np.max(np.abs(hess))), 1.0)
    for reg in (0.0, 1e-13, 1e-10, 1e-7, 1e-4):
        try:
            ch = np.linalg.cholesky(hess + reg * base * np.eye(n))
            y = np.linalg.solve(ch, rhs)
            return np.linalg.solve(ch.T, y)
        except np.linalg.LinAlgError:
            continue
    return None


# ----------------------------------------------------------------------
# module-level API with a compilation cache
# ----------------------------------------------------------------------

_COMPILE_CACHE = {}
_COMPILE_CACHE_MAX = 64


def _structure_key(problem: SdpProblem) -> str:
    h = hashlib.sha1()
    for b in problem.blocks:
        h.update(f"{b.name}|{b.size}|{b.field};".encode())
    for name in sorted(problem.objective):
        h.update(name.encode())
        h.update(np.ascontiguousarray(problem.objective[name]).tobytes())
    for c in problem.constraints:
        h.update(c.sense.encode())
        h.update(np.float64(c.rhs).tobytes())
        for name in sorted(c.coeffs):
            h.update(name.encode())
            h.update(np.ascontiguousarray(c.coeffs[name]).tobytes())
    return h.hexdigest()


def compile_problem(problem: SdpProblem) -> CompiledSdp:
    key = _structure_key(problem)
    hit = _COMPILE_CACHE.get(key)
    if hit is not None:
        return hit
    compiled = CompiledSdp(problem)
    if len(_COMPILE_CACHE) >= _COMPILE_CACHE_MAX:
        _COMPILE_CACHE.pop(next(iter(_COMPILE_CACHE)))
    _COMPILE_CACHE[key] = compiled
    return compiled


def solve(problem: SdpProblem, start=None,
          options: SolverOptions = None) -> SdpSolution:
    """Solve an SDP; see :class:`CompiledSdp.solve`."""
    return compile_problem(problem).solve(start=start, options=options)


def check_feasibility(problem: SdpProblem, tol: float = 1e-7,
                      options: SolverOptions = None):
    """Phase-I feasibility test; see :class:`CompiledSdp.check_feasibility`."""
    return compile_problem(problem).check_feasibility(tol=tol, options=options)


# ----------------------------------------------------------------------
# debug dump
# ----------------------------------------------------------------------

def dump_problem(problem: SdpProblem) -> str:
    """Plain-text sectioned dump for offline cross-checking.

    Format::

        sdp-dump v1
        blocks
        <name> <size> <hermitian|symmetric>
        ...
        objective
        <block> <row> <col> <re> <im>
        ...
        constraints
        constraint <index> <sense> <rhs>
        <block> <row> <col> <re> <im>
        ...

    Only nonzero upper-triangular coefficient entries are listed; indices
    are zero-based.
    """
    lines = ["sdp-dump v1", "blocks"]
    for b in problem.blocks:
        lines.append(f"{b.name} {b.size} {b.field}")
    lines.append("objective")
    lines.extend(_dump_coeffs(problem.objective))
    lines.append("constraints")
    for i, c in enumerate(problem.constraints):
        lines.append(f"constraint {i} {c.sense} {c.rhs!r}")
        lines.extend(_dump_coeffs(c.coeffs))
    return "\n".join(lines) + "\n"


def _dump_coeffs(coeffs: dict):
    out = []
    for name in sorted(coeffs):
        mat = np.asarray(coeffs[name])
        for p in range(mat.shape[0]):
            for q in range(p, mat.shape[1]):
                v = complex(mat[p, q])
                if v != 0:
                    out.append(f"{name} {p} {q} {v.real!r} {v.imag!r}")
    return out
