"""MSE recursions for the tracked linear dynamic system.

State model: theta_{n+1} = F theta_n + u_n with u_n ~ CN(0, Q).
Observations are y_n = C theta_n + v_n (vector mode, C is L x M) or
y_n = c^H theta_n + v_n (scalar mode), with white complex Gaussian noise
of variance sigma_v_sq per component.

Only the error-covariance (MSE) recursion matters for observation design;
``simulate_trace`` additionally runs the state estimator end to end.
"""

from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError, ConsistencyError
from .linalg import hermitianize, is_hermitian, min_eigenvalue

__all__ = [
    "SystemModel",
    "BeliefState",
    "SimTrace",
    "SteadyStateRun",
    "predict_mse",
    "kalman_gain",
    "update_mse",
    "update_mse_scalar",
    "run_to_steady_state",
    "simulate_trace",
]

VECTOR = "vector"
SCALAR = "scalar"


@dataclass
class SystemModel:
    """The tuple (F, Q, sigma_v_sq, G) plus dimensions defining the system.

    In vector mode G is (L*M) x N and parameters a map to the observation
    matrix via vec[C] = G a (column-major vec).  In scalar mode G is
    M x N and c = G a with observation y = c^H theta + v.
    """

    f: np.ndarray
    q: np.ndarray
    sigma_v_sq: float
    g: np.ndarray
    m: int
    l: int
    n: int
    mode: str = VECTOR
    g_rank_deficient: bool = field(default=False, init=False)

    def __post_init__(self):
        self.f = np.asarray(self.f, dtype=complex)
        self.q = np.asarray(self.q, dtype=complex)
        self.g = np.asarray(self.g, dtype=complex)
        if self.f.shape != (self.m, self.m):
            raise ConfigurationError(f"F must be {self.m}x{self.m}")
        if self.q.shape != (self.m, self.m) or not is_hermitian(self.q):
            raise ConfigurationError("Q must be Hermitian MxM")
        if min_eigenvalue(self.q) < -1e-8 * (1 + np.linalg.norm(self.q)):
            raise ConfigurationError("Q must be PSD")
        if self.sigma_v_sq <= 0:
            raise ConfigurationError("sigma_v_sq must be positive")
        if self.mode not in (VECTOR, SCALAR):
            raise ConfigurationError(f"unknown mode {self.mode!r}")
        rows = self.l * self.m if self.mode == VECTOR else self.m
        if self.g.shape != (rows, self.n):
            raise ConfigurationError(
                f"G must be {rows}x{self.n} in {self.mode} mode"
            )
        sv = np.linalg.svd(self.g, compute_uv=False)
        if sv.size < self.n or sv[-1] <= 1e-10 * sv[0]:
            # tolerated: projection falls back to the pseudo-inverse path
            self.g_rank_deficient = True


@dataclass
class BeliefState:
    """Prediction and filtered MSE matrices at one step."""

    m_pred: np.ndarray
    m_post: np.ndarray
    step: int


@dataclass
class SimTrace:
    """A simulated trajectory with everything needed to replay it."""

    states: list
    observations: list
    process_noise: list
    observation_noise: list
    estimates: list
    seed: int


@dataclass
class SteadyStateRun:
    """Result of iterating the filter recursion to its fixed point."""

    belief: BeliefState
    result: object
    converged: bool
    steps: int


def predict_mse(m_post_prev: np.ndarray, model: SystemModel) -> np.ndarray:
    """One prediction step: F M F^H + Q, re-Hermitianized."""
    return hermitianize(model.f @ m_post_prev @ model.f.conj().T + model.q)


def kalman_gain(m_pred: np.ndarray, c: np.ndarray, sigma_v_sq: float) -> np.ndarray:
    """Gain K = M C^H (sigma^2 I + C M C^H)^{-1}."""
    c = np.atleast_2d(np.asarray(c, dtype=complex))
    mch = m_pred @ c.conj().T
    inner = sigma_v_sq * np.eye(c.shape[0]) + c @ mch
    return np.linalg.solve(inner.conj().T, mch.conj().T).conj().T


def update_mse(m_pred: np.ndarray, c: np.ndarray, sigma_v_sq: float) -> np.ndarray:
    """Measurement update of the MSE matrix.

    Evaluates both algebraically equivalent forms, (I - K C) M and the
    information form (M^{-1} + C^H C / sigma^2)^{-1}, and raises
    :class:`ConsistencyError` if they disagree beyond tolerance (a
    conditioning problem, not a modelling one).  Returns the
    information-form result, re-Hermitianized.
    """
    c = np.atleast_2d(np.asarray(c, dtype=complex))
    m = c.shape[1]
    gain_form = (np.eye(m) - kalman_gain(m_pred, c, sigma_v_sq) @ c) @ m_pred
    info = np.linalg.inv(m_pred) + (c.conj().T @ c) / sigma_v_sq
    info_form = np.linalg.inv(info)
    scale = float(np.linalg.norm(m_pred))
    dev = float(np.linalg.norm(gain_form - info_form))
    if dev > 1e-9 * scale:
        raise ConsistencyError(
            f"update_mse forms disagree: ||diff||_F = {dev:.3e} "
            f"(tolerance {1e-9 * scale:.3e})"
        )
    return hermitianize(info_form)


def update_mse_scalar(m_pred: np.ndarray, c: np.ndarray, sigma_v_sq: float) -> np.ndarray:
    """Rank-one update M - M c c^H M / (sigma^2 + c^H M c)."""
    c = np.asarray(c, dtype=complex).reshape(-1)
    mc = m_pred @ c
    denom = sigma_v_sq + float(np.real(c.conj() @ mc))
    return hermitianize(m_pred - np.outer(mc, mc.conj()) / denom)


def _apply_observation(m_pred, c_obs, sigma_v_sq):
    if c_obs is None or c_obs.size == 0 or np.all(c_obs == 0):
        return hermitianize(m_pred)
    c_obs = np.atleast_2d(c_obs)
    if c_obs.shape[0] == 1:
        return update_mse_scalar(m_pred, c_obs[0].conj(), sigma_v_sq)
    w = np.linalg.eigvalsh(hermitianize(m_pred))
    if w[0] <= 1e-12 * max(float(w[-1]), 1.0):
        # information form needs M^{-1}; fall back to the gain form when
        # the prediction MSE is numerically singular (e.g. Q = 0 runs)
        m = c_obs.shape[1]
        k = kalman_gain(m_pred, c_obs, sigma_v_sq)
        return hermitianize((np.eye(m) - k @ c_obs) @ m_pred)
    return update_mse(m_pred, c_obs, sigma_v_sq)


def _limit_cycle(history, abs_tol, max_period=64):
    """Period k when the tail of ``history`` revisits itself, else 0.

    The revisit tolerance is relative to the cycle amplitude, so slowly
    drifting (quasi-periodic) cycles are caught too; a damped oscillation
    that still shrinks by more than ~2% per period is left alone.
    """
    for k in range(2, max_period + 1):
        if len(history) < 3 * k:
            break
        window = history[-3 * k:]
        amp = max(window) - min(window)
        tol_k = max(abs_tol, 0.02 * amp)
        if all(abs(history[-1 - j] - history[-1 - j - k]) <= tol_k
               for j in range(2 * k)):
            return k
    return 0


def run_to_steady_state(model: SystemModel, policy, p: float,
                        tol: float = 1e-8, max_iters: int = 1000) -> SteadyStateRun:
    """Iterate predict -> reconfigure -> update until tr(M_post) settles.

    ``policy`` is a policy name (see :mod:`reconfigkf.policies`) or a
    callable ``policy(m_pred, model, p) -> (c_obs, result)`` where
    ``c_obs`` is the realized observation matrix (rows are observations;
    a 1 x M row means the scalar update y = row @ theta) and ``result``
    is an arbitrary per-step report returned with the fixed point.

    The parameters are re-chosen from M_{n|n-1} at every step, before the
    observation is incorporated.  Convergence is relative change of
    tr(M_post) below ``tol``; hitting ``max_iters`` returns the last
    state flagged unconverged.

    The bisection-based scalar min-max policy quantizes t* on an eps
    ladder, which can trap the recursion in a small limit cycle with
    trace amplitude of a few eps, so for that policy the effective
    tolerance is floored at ten times its bisection eps.

    Greedy per-step re-optimization can settle into a genuine limit
    cycle (the trace ping-pongs between a few designs and never meets
    the tolerance). A sustained period-k revisit (k up to 64) is
    detected early; the run is flagged ``converged = False`` and the
    returned MSE matrices are the average over one cycle period, which
    is the value the time-averaged squared tracking error realizes.
    """
    if callable(policy):
        policy_fn = policy
    else:
        from .policies import resolve_policy
        policy_fn = resolve_policy(policy, model)
        if policy == "scalar-minmax":
            tol = max(tol, 1e-5)

    m_post = hermitianize(np.asarray(model.q, dtype=complex))
    prev_trace = float(np.real(np.trace(m_post)))
    m_pred = m_post
    result = None
    converged = False
    step = 0
    history = []
    recent = deque(maxlen=64)
    for step in range(1, max_iters + 1):
        m_pred = predict_mse(m_post, model)
        c_obs, result = policy_fn(m_pred, model, p)
        m_post = _apply_observation(m_pred, c_obs, model.sigma_v_sq)
        trace = float(np.real(np.trace(m_post)))
        if abs(trace - prev_trace) <= tol * trace:
            converged = True
            break
        history.append(trace)
        recent.append((m_pred, m_post))
        if _limit_cycle(history, tol * trace):
            break
        prev_trace = trace
    if not converged and recent:
        # report the average over one cycle period (or, when the step
        # budget ran out on an undetected oscillation, over the recent
        # window) rather than an arbitrary cycle phase
        span = _limit_cycle(history, tol * history[-1]) or len(recent)
        tail = list(recent)[-span:]
        m_pred = hermitianize(sum(mp for mp, _ in tail) / span)
        m_post = hermitianize(sum(mo for _, mo in tail) / span)
    belief = BeliefState(m_pred=m_pred, m_post=m_post, step=step)
    return SteadyStateRun(belief=belief, result=result,
                          converged=converged, steps=step)


def _complex_gaussian(rng, shape, cov_sqrt=None, var=1.0):
    z = (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) \
        * np.sqrt(var / 2.0)
    if cov_sqrt is not None:
        z = cov_sqrt @ z
    return z


def simulate_trace(model: SystemModel, policy, p: float, horizon: int,
                   seed: int) -> SimTrace:
    """Draw a trajectory and track it with the reconfigured filter.

    The initial state is theta_0 = 0 with initial MSE matrix Q.  The
    RNG is numpy's default PCG64 generator seeded with ``seed``; the same
    seed reproduces the trace bit for bit.
    """
    if horizon < 1:
        raise ConfigurationError("horizon must be >= 1")
    if callable(policy):
        policy_fn = policy
    else:
        from .policies import resolve_policy
        policy_fn = resolve_policy(policy, model)

    rng = np.random.default_rng(seed)
    from .linalg import psd_sqrt
    q_sqrt = psd_sqrt(model.q)

    theta = np.zeros(model.m, dtype=complex)
    theta_hat = np.zeros(model.m, dtype=complex)
    m_post = hermitianize(np.asarray(model.q, dtype=complex))

    states, observations, unoise, vnoise, estimates = [], [], [], [], []
    for _step in range(horizon):
        u = _complex_gaussian(rng, model.m, cov_sqrt=q_sqrt)
        theta = model.f @ theta + u
        m_pred = predict_mse(m_post, model)
        c_obs, _result = policy_fn(m_pred, model, p)
        c_obs = np.atleast_2d(np.asarray(c_obs, dtype=complex)) \
            if c_obs is not None else np.zeros((0, model.m), dtype=complex)

        theta_pred = model.f @ theta_hat
        if c_obs.size and np.any(c_obs != 0):
            v = _complex_gaussian(rng, c_obs.shape[0], var=model.sigma_v_sq)
            y = c_obs @ theta + v
            k = kalman_gain(m_pred, c_obs, model.sigma_v_sq)
            theta_hat = theta_pred + k @ (y - c_obs @ theta_pred)
            m_post = _apply_observation(m_pred, c_obs, model.sigma_v_sq)
        else:
            v = np.zeros(0, dtype=complex)
            y = np.zeros(0, dtype=complex)
            theta_hat = theta_pred
            m_post = m_pred

        states.append(theta.copy())
        observations.append(y)
        unoise.append(u)
        vnoise.append(v)
        estimates.append(theta_hat.copy())

    return SimTrace(states=states, observations=observations,
                    process_noise=unoise, observation_noise=vnoise,
                    estimates=estimates, seed=seed)
