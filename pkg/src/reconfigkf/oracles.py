"""Independent brute-force oracles used to validate the optimizers.

Each oracle solves (a special case of) the same problem as one of the
design pipelines by a different route — KKT water-filling, grid search,
projected gradient ascent, closed forms — and never shares code with the
implementation it checks.
"""

import math

import numpy as np

__all__ = [
    "waterfill_diagonal",
    "scalar_minsum_grid_2d",
    "scalar_minsum_projected_gradient",
    "scalar_minmax_closed_form_1d",
    "lyapunov_fixed_point",
]


def waterfill_diagonal(m_diag, sigma_v_sq: float, p: float,
                       tol: float = 1e-12):
    """Min-Sum oracle for diagonal prediction MSE.

    Minimizes sum_i 1 / (1/m_i + p_i / sigma^2) over p_i >= 0 with
    sum_i p_i = P.  The KKT conditions give p_i = sigma^2 (nu - 1/m_i)_+
    for a water level nu fixed by the budget; nu is found by bisection.
    Returns (optimal sum MSE, power allocation).
    """
    m_diag = np.asarray(m_diag, dtype=float)
    if np.any(m_diag <= 0):
        raise ValueError("diagonal entries must be positive")
    inv = 1.0 / m_diag
    if p == 0.0:
        return float(np.sum(m_diag)), np.zeros_like(m_diag)

    def budget(nu):
        return float(np.sum(sigma_v_sq * np.clip(nu - inv, 0.0, None)))

    lo = float(np.min(inv))
    hi = float(np.max(inv)) + p / sigma_v_sq
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if budget(mid) < p:
            lo = mid
        else:
            hi = mid
        if hi - lo <= tol * max(1.0, hi):
            break
    nu = 0.5 * (lo + hi)
    alloc = sigma_v_sq * np.clip(nu - inv, 0.0, None)
    mse = float(np.sum(1.0 / (inv + alloc / sigma_v_sq)))
    return mse, alloc


def scalar_minsum_grid_2d(m_pred, g, sigma_v_sq: float, p: float,
                          n_grid: int = 20001):
    """Scalar Min-Sum oracle for a 2-dimensional real-representable case.

    Scans unit directions (cos th, sin th) rescaled to the power
    constraint and returns the best achieved sum MSE.  Only adequate when
    the optimum is real up to a global phase (e.g. real diagonal inputs).
    """
    m_pred = np.asarray(m_pred, dtype=complex)
    g = np.asarray(g, dtype=complex)
    gram = g.conj().T @ g
    best = math.inf
    for th in np.linspace(0.0, math.pi, n_grid):
        a = np.array([math.cos(th), math.sin(th)], dtype=complex)
        energy = float(np.real(a.conj() @ gram @ a))
        a = a * math.sqrt(p / energy)
        c = g @ a
        mc = m_pred @ c
        red = float(np.real(mc.conj() @ mc)) / \
            (sigma_v_sq + float(np.real(c.conj() @ mc)))
        val = float(np.real(np.trace(m_pred))) - red
        best = min(best, val)
    return best


def scalar_minsum_projected_gradient(m_pred, g, sigma_v_sq: float, p: float,
                                     n_starts: int = 20, n_iters: int = 500,
                                     seed: int = 1234):
    """Multi-start projected-gradient oracle for the scalar Min-Sum problem.

    Maximizes the MSE-reduction ratio
    f(a) = (a^H R a) / (sigma^2 + a^H S a) with R = G^H M^2 G,
    S = G^H M G over the power ellipsoid a^H G^H G a = P, by gradient
    ascent with renormalization onto the constraint after every step.
    Returns the best achieved sum MSE over the starts.
    """
    m_pred = np.asarray(m_pred, dtype=complex)
    g = np.asarray(g, dtype=complex)
    gram = g.conj().T @ g
    r = g.conj().T @ (m_pred @ m_pred) @ g
    s = g.conj().T @ m_pred @ g
    rng = np.random.default_rng(seed)
    n = g.shape[1]
    trace_m = float(np.real(np.trace(m_pred)))

    def normalize(a):
        energy = float(np.real(a.conj() @ gram @ a))
        return a * math.sqrt(p / energy)

    def ratio(a):
        num = float(np.real(a.conj() @ r @ a))
        den = sigma_v_sq + float(np.real(a.conj() @ s @ a))
        return num / den

    best = -math.inf
    for _ in range(n_starts):
        a = normalize(rng.standard_normal(n) + 1j * rng.standard_normal(n))
        step = 1.0
        val = ratio(a)
        for _ in range(n_iters):
            num = float(np.real(a.conj() @ r @ a))
            den = sigma_v_sq + float(np.real(a.conj() @ s @ a))
            grad = 2.0 * (r @ a) / den - 2.0 * (num / den ** 2) * (s @ a)
            cand = normalize(a + step * grad)
            cand_val = ratio(cand)
            if cand_val > val:
                a, val = cand, cand_val
                step *= 1.2
            else:
                step *= 0.5
                if step < 1e-14:
                    break
        best = max(best, val)
    return trace_m - best


def scalar_minmax_closed_form_1d(m: float, g_abs_sq: float,
                                 sigma_v_sq: float, p: float) -> float:
    """Optimal max (= only) MSE for a scalar state: full power along g."""
    return m - (m * m * p * g_abs_sq) / (sigma_v_sq + m * p * g_abs_sq)


def lyapunov_fixed_point(f, q, tol: float = 1e-12, max_iters: int = 100000):
    """Fixed point of M = F M F^H + Q by plain iteration (needs rho(F) < 1)."""
    f = np.asarray(f, dtype=complex)
    q = np.asarray(q, dtype=complex)
    m = q.copy()
    for _ in range(max_iters):
        nxt = f @ m @ f.conj().T + q
        if np.linalg.norm(nxt - m) <= tol * (1.0 + np.linalg.norm(nxt)):
            return 0.5 * (nxt + nxt.conj().T)
        m = nxt
    raise RuntimeError("Lyapunov iteration did not converge")
