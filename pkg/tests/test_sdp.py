import numpy as np
import pytest

from reconfigkf import sdp
from reconfigkf.errors import ConfigurationError

from conftest import random_hermitian_pd


def test_block_validation():
    with pytest.raises(ConfigurationError):
        sdp.SdpBlock("X", 0)
    with pytest.raises(ConfigurationError):
        sdp.SdpBlock("X", 2, "quaternionic")
    assert sdp.SdpBlock("X", 3).n_params == 9
    assert sdp.SdpBlock("X", 3, sdp.SYMMETRIC).n_params == 6


def test_problem_validation():
    x = sdp.SdpBlock("X", 2)
    with pytest.raises(ConfigurationError):
        sdp.SdpProblem([x, x])
    with pytest.raises(ConfigurationError):
        sdp.SdpProblem([x], {"Y": np.eye(2)})
    with pytest.raises(ConfigurationError):
        sdp.SdpProblem([x], {"X": np.eye(3)})
    with pytest.raises(ConfigurationError):
        sdp.SdpConstraint({"X": np.eye(2)}, ">=", 1.0)


def _min_eigenvalue_problem(c, field):
    """min tr(C X) s.t. tr(X) = 1, X >= 0 -- optimum is lambda_min(C)."""
    n = c.shape[0]
    blocks = [sdp.SdpBlock("X", n, field)]
    cons = [sdp.SdpConstraint({"X": np.eye(n)}, "==", 1.0)]
    return sdp.SdpProblem(blocks, {"X": c}, cons)


def test_min_eigenvalue_symmetric():
    c = np.array([[2.0, 1.0], [1.0, 3.0]])
    sol = sdp.solve(_min_eigenvalue_problem(c, sdp.SYMMETRIC))
    assert sol.status == "optimal"
    assert sol.objective_value == pytest.approx(np.linalg.eigvalsh(c)[0],
                                                abs=1e-6)
    x = sol.blocks["X"]
    assert np.trace(x).real == pytest.approx(1.0, abs=1e-8)
    assert np.linalg.eigvalsh(x)[0] >= -1e-8


def test_min_eigenvalue_hermitian(rng):
    c = random_hermitian_pd(rng, 3)
    sol = sdp.solve(_min_eigenvalue_problem(c, sdp.HERMITIAN))
    assert sol.status == "optimal"
    assert sol.objective_value == pytest.approx(np.linalg.eigvalsh(c)[0],
                                                abs=1e-6)
    x = sol.blocks["X"]
    assert np.allclose(x, x.conj().T)


def test_inequality_slack():
    # min -x s.t. x <= 3, x >= 0 (1x1 block): optimum -3 at x = 3
    blocks = [sdp.SdpBlock("x", 1, sdp.SYMMETRIC)]
    cons = [sdp.SdpConstraint({"x": np.eye(1)}, "<=", 3.0)]
    sol = sdp.solve(sdp.SdpProblem(blocks, {"x": -np.eye(1)}, cons))
    assert sol.status == "optimal"
    assert sol.blocks["x"][0, 0] == pytest.approx(3.0, abs=1e-6)


def test_solution_diagnostics():
    c = np.diag([1.0, 2.0])
    sol = sdp.solve(_min_eigenvalue_problem(c, sdp.SYMMETRIC))
    assert sol.duality_gap <= 1e-6
    assert sol.max_violation <= 1e-8
    assert sol.newton_iterations > 0


def test_determinism(rng):
    c = random_hermitian_pd(rng, 3)
    prob = _min_eigenvalue_problem(c, sdp.HERMITIAN)
    s1 = sdp.solve(prob)
    s2 = sdp.solve(prob)
    assert np.array_equal(s1.blocks["X"], s2.blocks["X"])
    assert s1.objective_value == s2.objective_value


def test_feasibility_verdicts():
    blocks = [sdp.SdpBlock("X", 2, sdp.SYMMETRIC)]
    feasible = sdp.SdpProblem(
        blocks, {}, [sdp.SdpConstraint({"X": np.eye(2)}, "<=", 1.0)])
    ok, witness = sdp.check_feasibility(feasible)
    assert ok
    assert np.linalg.eigvalsh(witness["X"])[0] >= -1e-7

    # tr(X) <= -1 with X PSD cannot hold
    infeasible = sdp.SdpProblem(
        blocks, {}, [sdp.SdpConstraint({"X": np.eye(2)}, "<=", -1.0)])
    ok, margin = sdp.check_feasibility(infeasible)
    assert not ok
    assert margin > 0


def test_equality_only_short_circuit():
    # the equalities fully determine X; no barrier iterations needed
    blocks = [sdp.SdpBlock("X", 1, sdp.SYMMETRIC)]
    prob = sdp.SdpProblem(
        blocks, {"X": np.eye(1)},
        [sdp.SdpConstraint({"X": np.eye(1)}, "==", 2.0)])
    sol = sdp.solve(prob)
    assert sol.status == "optimal"
    assert sol.blocks["X"][0, 0] == pytest.approx(2.0)


def test_rhs_override(rng):
    c = np.diag([1.0, 5.0])
    compiled = sdp.compile_problem(_min_eigenvalue_problem(c, sdp.SYMMETRIC))
    s1 = compiled.solve()
    s2 = compiled.solve(rhs=np.array([2.0]))  # tr(X) = 2 doubles the optimum
    assert s2.objective_value == pytest.approx(2 * s1.objective_value,
                                               abs=1e-5)


def test_dump_problem_format(rng):
    c = random_hermitian_pd(rng, 2)
    prob = _min_eigenvalue_problem(c, sdp.HERMITIAN)
    text = sdp.dump_problem(prob)
    lines = text.splitlines()
    assert lines[0] == "sdp-dump v1"
    assert "blocks" in lines
    assert "objective" in lines
    assert "constraints" in lines
    assert any(line.startswith("X 2 hermitian") for line in lines)
    # dumping is deterministic
    assert text == sdp.dump_problem(prob)
