"""Per-step reconfiguration policies used by the steady-state recursion.

A policy is a callable ``policy(m_pred, model, p) -> (c_obs, result)``
where ``c_obs`` is the realized observation matrix for this step (rows
are observations) and ``result`` is the per-step design report.

Names:

* ``vec-minsum`` / ``vec-minmax`` — the two-stage vector pipelines,
  observing with C(a*) = unvec(G a*);
* ``lower-bound`` / ``lower-bound-max`` — the SDP-stage solution C*
  used directly, ignoring the linear structure (the unconstrained lower
  bound of the corresponding vector pipeline);
* ``scalar-minsum`` — Rayleigh-quotient closed form, observing c = G a*;
* ``scalar-minmax`` — bisection + rank-one reconstruction.  This policy
  is stateful: it warm-starts the bisection bracket from the previous
  step's t*, which does not change results but skips most probes.
* ``no-observation`` — C = 0 (pure prediction; handy for oracles).
"""

import numpy as np

from .errors import ConfigurationError
from . import scalar_design, vector_design

__all__ = ["resolve_policy", "POLICY_NAMES"]

POLICY_NAMES = (
    "vec-minsum",
    "vec-minmax",
    "lower-bound",
    "lower-bound-max",
    "scalar-minsum",
    "scalar-minmax",
    "no-observation",
)


def _vec_policy(objective):
    def policy(m_pred, model, p):
        result = vector_design.reconfigure(m_pred, model, p, objective)
        return result.c_realized, result
    return policy


def _lower_bound_policy(objective):
    def policy(m_pred, model, p):
        if p == 0.0:
            result = vector_design.reconfigure(m_pred, model, 0.0, objective)
            return result.c_realized, result
        if objective == "sum":
            c_tilde, _d, _tr = vector_design.minsum_sdp(
                m_pred, model.sigma_v_sq, p)
        else:
            c_tilde, _t = vector_design.minmax_sdp(
                m_pred, model.sigma_v_sq, p)
        c_star = vector_design.factor_ctilde(c_tilde, model.l)
        return c_star, None
    return policy


def _scalar_minsum_policy():
    def policy(m_pred, model, p):
        if p == 0.0:
            return np.zeros((1, model.m), dtype=complex), None
        result = scalar_design.minsum_scalar(m_pred, model.g,
                                             model.sigma_v_sq, p)
        c = model.g @ result.a_star
        return c.conj()[None, :], result
    return policy


def _scalar_minmax_policy(eps=1e-6):
    state = {"t_star": None, "delta": None}

    def policy(m_pred, model, p):
        if p == 0.0:
            return np.zeros((1, model.m), dtype=complex), None
        bracket = None
        if state["t_star"] is not None:
            # once t* settles between steps, shrink the warm bracket with
            # the observed step-to-step drift (a bad guess just falls back
            # to the full bracket inside the bisection)
            width = 0.05 * state["t_star"]
            if state["delta"] is not None:
                width = min(width, 4.0 * state["delta"])
            width = max(width, 50.0 * eps)
            bracket = (state["t_star"] - width, state["t_star"] + width)
        report = scalar_design.minmax_scalar_bisection(
            m_pred, model.g, model.sigma_v_sq, p, eps=eps, bracket=bracket)
        if state["t_star"] is not None:
            state["delta"] = abs(report.t_star - state["t_star"])
        state["t_star"] = report.t_star
        c = model.g @ report.a_star
        return c.conj()[None, :], report
    return policy


def _no_observation_policy():
    def policy(m_pred, model, p):
        return np.zeros((0, model.m), dtype=complex), None
    return policy


def resolve_policy(name: str, model, bisection_eps: float = 1e-6):
    """Build the policy callable for ``name``, checking mode compatibility."""
    vector_names = {"vec-minsum", "vec-minmax", "lower-bound", "lower-bound-max"}
    scalar_names = {"scalar-minsum", "scalar-minmax"}
    if name in vector_names and model.mode != "vector":
        raise ConfigurationError(f"policy {name!r} needs a vector-mode model")
    if name in scalar_names and model.mode != "scalar":
        raise ConfigurationError(f"policy {name!r} needs a scalar-mode model")
    if name == "vec-minsum":
        return _vec_policy("sum")
    if name == "vec-minmax":
        return _vec_policy("max")
    if name == "lower-bound":
        return _lower_bound_policy("sum")
    if name == "lower-bound-max":
        return _lower_bound_policy("max")
    if name == "scalar-minsum":
        return _scalar_minsum_policy()
    if name == "scalar-minmax":
        return _scalar_minmax_policy(eps=bisection_eps)
    if name == "no-observation":
        return _no_observation_policy()
    raise ConfigurationError(f"unknown policy {name!r}")
