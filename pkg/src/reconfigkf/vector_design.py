"""Observation design for the vector observation model.

Two pipelines sharing the same two-stage split:

* Min-Sum-MSE: an SDP over (Ctilde, D) with the Schur-complement LMI
  ``[[M^{-1} + Ctilde/sigma^2, I], [I, D]] >= 0`` minimizing tr(D);
* Min-Max-MSE: an SDP over (t, Ctilde) with one LMI per diagonal entry
  ``[[t, e_i^T], [e_i, M^{-1} + Ctilde/sigma^2]] >= 0`` minimizing t.

Both produce the Gram matrix Ctilde* = C^H C of the best *unstructured*
observation matrix; ``factor_ctilde`` extracts C* and
``project_to_parameters`` maps C* to the closest structured parameters a
under the power-equality constraint a^H G^H G a = P.  The MSE reached by
C* is a lower bound on what any structured a can achieve.
"""

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import sdp
from .errors import ConfigurationError, DegenerateProjectionError, SolverError
from .kalman import SystemModel, update_mse
from .linalg import hermitian_eig, hermitianize, unvec, vec

__all__ = [
    "ReconfigResult",
    "minsum_sdp",
    "minmax_sdp",
    "factor_ctilde",
    "align_factor",
    "project_to_parameters",
    "reconfigure",
    "build_minsum_problem",
    "build_minmax_problem",
]


@dataclass
class ReconfigResult:
    """Everything the two-stage pipeline produced for one step."""

    a_star: np.ndarray
    c_realized: np.ndarray
    m_lower_bound: np.ndarray
    m_achieved: np.ndarray
    objective_lower: float
    objective_achieved: float
    gamma: float
    pseudo_inverse_used: bool = False


# ----------------------------------------------------------------------
# constraint-building helpers
# ----------------------------------------------------------------------

def _entry_selectors(n: int, p: int, q: int):
    """Hermitian matrices (A_re, A_im) with tr(A_re X) = Re X[p, q] and
    tr(A_im X) = Im X[p, q] for Hermitian X."""
    a_re = np.zeros((n, n), dtype=complex)
    a_re[p, q] += 0.5
    a_re[q, p] += 0.5
    a_im = np.zeros((n, n), dtype=complex)
    if p != q:
        a_im[p, q] += 0.5j
        a_im[q, p] += -0.5j
    return a_re, a_im


@lru_cache(maxsize=32)
def _minsum_structure(m: int, sigma_v_sq: float):
    """Constraint skeleton of the Min-Sum SDP for dimension m.

    The right-hand sides (M^{-1} entries and the power budget) vary per
    call; everything else is fixed, so the compiled problem is cached.
    Returns (compiled, rhs_layout) where rhs_layout lists the semantic
    tags needed to rebuild the rhs vector.
    """
    blocks = [
        sdp.SdpBlock("schur", 2 * m, sdp.HERMITIAN),
        sdp.SdpBlock("ctilde", m, sdp.HERMITIAN),
    ]
    constraints = []
    layout = []
    # pin the upper-left block: schur[p, q] - ctilde[p, q]/sigma^2 = Minv[p, q]
    for p in range(m):
        for q in range(p, m):
            s_re, s_im = _entry_selectors(2 * m, p, q)
            c_re, c_im = _entry_selectors(m, p, q)
            constraints.append(sdp.SdpConstraint(
                {"schur": s_re, "ctilde": -c_re / sigma_v_sq}, "==", 0.0))
            layout.append(("minv-re", p, q))
            if p != q:
                constraints.append(sdp.SdpConstraint(
                    {"schur": s_im, "ctilde": -c_im / sigma_v_sq}, "==", 0.0))
                layout.append(("minv-im", p, q))
    # pin the off-diagonal block to the identity
    for p in range(m):
        for q in range(m):
            s_re, s_im = _entry_selectors(2 * m, p, m + q)
            constraints.append(sdp.SdpConstraint({"schur": s_re}, "==",
                                                 1.0 if p == q else 0.0))
            layout.append(("const", 1.0 if p == q else 0.0))
            constraints.append(sdp.SdpConstraint({"schur": s_im}, "==", 0.0))
            layout.append(("const", 0.0))
    # power budget
    constraints.append(sdp.SdpConstraint(
        {"ctilde": np.eye(m, dtype=complex)}, "<=", 0.0))
    layout.append(("power",))

    objective_mat = np.zeros((2 * m, 2 * m), dtype=complex)
    for q in range(m):
        objective_mat[m + q, m + q] = 1.0
    problem = sdp.SdpProblem(blocks, {"schur": objective_mat}, constraints)
    return sdp.compile_problem(problem), tuple(layout)


def _rhs_from_layout(layout, minv, p_budget):
    rhs = np.empty(len(layout))
    for i, tag in enumerate(layout):
        if tag[0] == "minv-re":
            rhs[i] = float(np.real(minv[tag[1], tag[2]]))
        elif tag[0] == "minv-im":
            rhs[i] = float(np.imag(minv[tag[1], tag[2]]))
        elif tag[0] == "const":
            rhs[i] = tag[1]
        elif tag[0] == "power":
            rhs[i] = p_budget
        else:  # pragma: no cover
            raise AssertionError(tag)
    return rhs


def build_minsum_problem(m_pred: np.ndarray, sigma_v_sq: float, p: float):
    """The Min-Sum SDP as an explicit :class:`sdp.SdpProblem` (used by the
    debug dump; ``minsum_sdp`` itself goes through the compiled cache)."""
    m = m_pred.shape[0]
    compiled, layout = _minsum_structure(m, float(sigma_v_sq))
    minv = np.linalg.inv(m_pred)
    rhs = _rhs_from_layout(layout, minv, p)
    constraints = [
        sdp.SdpConstraint(c.coeffs, c.sense, float(r))
        for c, r in zip(compiled.problem.constraints, rhs)
    ]
    return sdp.SdpProblem(compiled.problem.blocks,
                          dict(compiled.problem.objective), constraints)


def minsum_sdp(m_pred: np.ndarray, sigma_v_sq: float, p: float,
               options: sdp.SolverOptions = None):
    """Stage 1 of Min-Sum-MSE: optimal unstructured Gram matrix.

    Returns (c_tilde_star, d_star, trace_lower).  Asserts the
    equality-at-optimum property ||D* - (M^{-1} + Ctilde*/s^2)^{-1}|| <= 1e-6.
    """
    if p < 0:
        raise ConfigurationError("power budget P must be >= 0")
    m = m_pred.shape[0]
    m_pred = hermitianize(np.asarray(m_pred, dtype=complex))
    if p == 0.0:
        d = m_pred.copy()
        return np.zeros((m, m), dtype=complex), d, float(np.real(np.trace(d)))

    compiled, layout = _minsum_structure(m, float(sigma_v_sq))
    minv = hermitianize(np.linalg.inv(m_pred))
    rhs = _rhs_from_layout(layout, minv, float(p))

    # strictly feasible start: spread half the budget uniformly, then give
    # D a 0.1 margin above the exact inverse so the Schur LMI is interior
    ct0 = (p / (2.0 * m)) * np.eye(m, dtype=complex)
    w0 = minv + ct0 / sigma_v_sq
    d0 = hermitianize(np.linalg.inv(w0)) + 0.1 * np.eye(m)
    s0 = np.block([[w0, np.eye(m, dtype=complex)],
                   [np.eye(m, dtype=complex), d0]])
    start = {"schur": s0, "ctilde": ct0}

    sol = compiled.solve(rhs=rhs, start=start, options=options)
    if sol.status != "optimal":
        raise SolverError(f"min-sum SDP did not converge: {sol.status}")
    s = sol.blocks["schur"]
    c_tilde = hermitianize(sol.blocks["ctilde"])
    d = hermitianize(s[m:, m:])
    w_star = minv + c_tilde / sigma_v_sq
    dev = float(np.linalg.norm(d - np.linalg.inv(w_star)))
    if dev > 1e-6:
        raise SolverError(
            f"min-sum optimum violates the tight-constraint property: "
            f"||D - W^-1|| = {dev:.2e}"
        )
    return c_tilde, d, float(np.real(np.trace(d)))


@lru_cache(maxsize=32)
def _minmax_structure(m: int, sigma_v_sq: float):
    """Constraint skeleton of the Min-Max SDP for dimension m."""
    blocks = [sdp.SdpBlock(f"lmi{i}", m + 1, sdp.HERMITIAN) for i in range(m)]
    blocks.append(sdp.SdpBlock("ctilde", m, sdp.HERMITIAN))
    constraints = []
    layout = []
    for i in range(m):
        name = f"lmi{i}"
        # first row/column: [t, e_i^T]
        for q in range(m):
            a_re, a_im = _entry_selectors(m + 1, 0, 1 + q)
            constraints.append(sdp.SdpConstraint(
                {name: a_re}, "==", 1.0 if q == i else 0.0))
            layout.append(("const", 1.0 if q == i else 0.0))
            constraints.append(sdp.SdpConstraint({name: a_im}, "==", 0.0))
            layout.append(("const", 0.0))
        # shared auxiliary variable t across the LMIs
        if i > 0:
            t_i, _ = _entry_selectors(m + 1, 0, 0)
            t_0, _ = _entry_selectors(m + 1, 0, 0)
            constraints.append(sdp.SdpConstraint(
                {"lmi0": t_0, name: -t_i}, "==", 0.0))
            layout.append(("const", 0.0))
        # inner block pinned to M^{-1} + Ctilde/sigma^2
        for p in range(m):
            for q in range(p, m):
                a_re, a_im = _entry_selectors(m + 1, 1 + p, 1 + q)
                c_re, c_im = _entry_selectors(m, p, q)
                constraints.append(sdp.SdpConstraint(
                    {name: a_re, "ctilde": -c_re / sigma_v_sq}, "==", 0.0))
                layout.append(("minv-re", p, q))
                if p != q:
                    constraints.append(sdp.SdpConstraint(
                        {name: a_im, "ctilde": -c_im / sigma_v_sq}, "==", 0.0))
                    layout.append(("minv-im", p, q))
    constraints.append(sdp.SdpConstraint(
        {"ctilde": np.eye(m, dtype=complex)}, "<=", 0.0))
    layout.append(("power",))

    t_sel, _ = _entry_selectors(m + 1, 0, 0)
    problem = sdp.SdpProblem(blocks, {"lmi0": t_sel}, constraints)
    return sdp.compile_problem(problem), tuple(layout)


def build_minmax_problem(m_pred: np.ndarray, sigma_v_sq: float, p: float):
    """The Min-Max SDP as an explicit problem (debug dump)."""
    m = m_pred.shape[0]
    compiled, layout = _minmax_structure(m, float(sigma_v_sq))
    minv = np.linalg.inv(m_pred)
    rhs = _rhs_from_layout(layout, minv, p)
    constraints = [
        sdp.SdpConstraint(c.coeffs, c.sense, float(r))
        for c, r in zip(compiled.problem.constraints, rhs)
    ]
    return sdp.SdpProblem(compiled.problem.blocks,
                          dict(compiled.problem.objective), constraints)


def minmax_sdp(m_pred: np.ndarray, sigma_v_sq: float, p: float,
               options: sdp.SolverOptions = None):
    """Stage 1 of Min-Max-MSE.  Returns (c_tilde_star, t_star)."""
    if p < 0:
        raise ConfigurationError("power budget P must be >= 0")
    m = m_pred.shape[0]
    m_pred = hermitianize(np.asarray(m_pred, dtype=complex))
    if p == 0.0:
        return (np.zeros((m, m), dtype=complex),
                float(np.max(np.real(np.diag(m_pred)))))

    compiled, layout = _minmax_structure(m, float(sigma_v_sq))
    minv = hermitianize(np.linalg.inv(m_pred))
    rhs = _rhs_from_layout(layout, minv, float(p))

    ct0 = (p / (2.0 * m)) * np.eye(m, dtype=complex)
    w0 = minv + ct0 / sigma_v_sq
    w0_inv = hermitianize(np.linalg.inv(w0))
    t0 = 1.5 * float(np.max(np.real(np.diag(w0_inv)))) + 0.1
    start = {"ctilde": ct0}
    for i in range(m):
        e = np.zeros((m, 1), dtype=complex)
        e[i, 0] = 1.0
        start[f"lmi{i}"] = np.block([[np.array([[t0 + 0j]]), e.conj().T],
                                     [e, w0]])
    sol = compiled.solve(rhs=rhs, start=start, options=options)
    if sol.status != "optimal":
        raise SolverError(f"min-max SDP did not converge: {sol.status}")
    c_tilde = hermitianize(sol.blocks["ctilde"])
    t_star = float(np.real(sol.blocks["lmi0"][0, 0]))
    w_star = minv + c_tilde / sigma_v_sq
    t_check = float(np.max(np.real(np.diag(np.linalg.inv(w_star)))))
    if abs(t_star - t_check) > 1e-6 * (1.0 + abs(t_check)):
        raise SolverError(
            f"min-max optimum inconsistent: t* = {t_star:.8f} but the "
            f"realized max diagonal MSE is {t_check:.8f}"
        )
    return c_tilde, t_star


def factor_ctilde(c_tilde_star: np.ndarray, l: int) -> np.ndarray:
    """Extract C* (L x M) with C*^H C* = Ctilde* from the eigendecomposition
    Ctilde* = U S U^H, taking C* = S^{1/2} U^H and zero-padding extra rows."""
    c_tilde_star = np.asarray(c_tilde_star, dtype=complex)
    m = c_tilde_star.shape[0]
    if l < m:
        raise ConfigurationError(
            f"factorization needs L >= M rows (got L={l}, M={m})"
        )
    w, v = hermitian_eig(c_tilde_star)
    root = np.sqrt(np.clip(w, 0.0, None))
    c_star = np.zeros((l, m), dtype=complex)
    c_star[:m, :] = root[:, None] * v.conj().T
    return c_star


def align_factor(c_star: np.ndarray, g: np.ndarray,
                 max_iters: int = 50, tol: float = 1e-10) -> np.ndarray:
    """Rotate C* by a left unitary W to bring vec(W C*) closer to range(G).

    Any W C* with W unitary shares the Gram matrix C*^H C* (and hence the
    lower-bound MSE), but the least-squares projection residual depends on
    W.  Alternates the unconstrained projection onto range(G) with the
    orthogonal-Procrustes update W = polar(A_hat C*^H); each half-step is
    the exact minimizer of ||vec(W C*) - G a||, so the residual is
    monotonically non-increasing.
    """
    c_star = np.asarray(c_star, dtype=complex)
    g = np.asarray(g, dtype=complex)
    l, m = c_star.shape
    g_pinv = np.linalg.pinv(g)
    c = c_star
    prev = np.inf
    for _ in range(max_iters):
        a_hat = unvec(g @ (g_pinv @ vec(c)), l, m)
        resid = float(np.linalg.norm(c - a_hat))
        if prev - resid <= tol * (1.0 + resid):
            break
        prev = resid
        u, _s, vh = np.linalg.svd(a_hat @ c_star.conj().T)
        c = (u @ vh) @ c_star
    return c


def project_to_parameters(c_star: np.ndarray, g: np.ndarray, p: float):
    """Constrained least-squares projection of C* onto the structured family.

    a* = gamma (G^H G)^{-1} G^H vec(C*) with gamma chosen so that the
    power constraint a^H G^H G a = P holds with equality.  Rank-deficient
    G falls back to the minimum-norm pseudo-inverse solution (flagged).
    Returns (a_star, gamma, pseudo_inverse_used).
    """
    g = np.asarray(g, dtype=complex)
    v = vec(np.asarray(c_star, dtype=complex))
    gram = g.conj().T @ g
    gv = g.conj().T @ v
    sv = np.linalg.svd(g, compute_uv=False)
    pseudo = sv.size < g.shape[1] or sv[-1] <= 1e-10 * sv[0]
    if pseudo:
        direction = np.linalg.pinv(g) @ v
    else:
        direction = np.linalg.solve(gram, gv)
    denom = float(np.real(gv.conj() @ direction))
    if denom <= 1e-14:
        raise DegenerateProjectionError(
            "vec(C*) is numerically orthogonal to range(G): "
            f"projection energy {denom:.3e}"
        )
    gamma = float(np.sqrt(p / denom))
    return gamma * direction, gamma, pseudo


def reconfigure(m_pred: np.ndarray, model: SystemModel, p: float,
                objective: str = "sum",
                options: sdp.SolverOptions = None) -> ReconfigResult:
    """Full two-stage vector-mode pipeline: SDP -> factorization -> projection.

    ``objective`` is "sum" (minimize tr M_post) or "max" (minimize the
    largest diagonal entry of M_post).
    """
    if model.mode != "vector":
        raise ConfigurationError("reconfigure requires a vector-mode model")
    if objective not in ("sum", "max"):
        raise ConfigurationError(f"unknown objective {objective!r}")
    m_pred = hermitianize(np.asarray(m_pred, dtype=complex))
    m = model.m

    if p == 0.0:
        a = np.zeros(model.n, dtype=complex)
        c0 = np.zeros((model.l, m), dtype=complex)
        obj0 = float(np.real(np.trace(m_pred))) if objective == "sum" else \
            float(np.max(np.real(np.diag(m_pred))))
        return ReconfigResult(a_star=a, c_realized=c0,
                              m_lower_bound=m_pred.copy(),
                              m_achieved=m_pred.copy(),
                              objective_lower=obj0, objective_achieved=obj0,
                              gamma=0.0)

    if objective == "sum":
        c_tilde, d_star, trace_lower = minsum_sdp(m_pred, model.sigma_v_sq, p,
                                                  options=options)
        objective_lower = trace_lower
    else:
        c_tilde, t_star = minmax_sdp(m_pred, model.sigma_v_sq, p,
                                     options=options)
        objective_lower = t_star

    c_star = align_factor(factor_ctilde(c_tilde, model.l), model.g)
    a_star, gamma, pseudo = project_to_parameters(c_star, model.g, p)
    c_realized = unvec(model.g @ a_star, model.l, m)

    m_lower = update_mse(m_pred, c_star, model.sigma_v_sq)
    m_achieved = update_mse(m_pred, c_realized, model.sigma_v_sq)
    if objective == "sum":
        objective_achieved = float(np.real(np.trace(m_achieved)))
    else:
        objective_achieved = float(np.max(np.real(np.diag(m_achieved))))
    return ReconfigResult(a_star=a_star, c_realized=c_realized,
                          m_lower_bound=m_lower, m_achieved=m_achieved,
                          objective_lower=objective_lower,
                          objective_achieved=objective_achieved,
                          gamma=gamma, pseudo_inverse_used=pseudo)
