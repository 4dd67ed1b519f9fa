"""A look inside the bundled interior-point SDP engine.

The design SDPs are solved by a small dense barrier path-following
solver written for this package: Hermitian blocks are embedded into real
symmetric ones, equality constraints are eliminated through a null-space
parameterization, and inequalities become 1x1 slack blocks.

The demo solves min tr(C X) s.t. tr(X) = 1, X >= 0 — whose optimum is
the smallest eigenvalue of C — for a random Hermitian C, then dumps a
design problem in the plain-text debug format the CLI's `dump-sdp`
subcommand uses.
"""

import numpy as np

from reconfigkf import sdp, vector_design

rng = np.random.default_rng(0)
z = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
c = z @ z.conj().T / 4

problem = sdp.SdpProblem(
    blocks=[sdp.SdpBlock("X", 4, sdp.HERMITIAN)],
    objective={"X": c},
    constraints=[sdp.SdpConstraint({"X": np.eye(4)}, "==", 1.0)],
)
sol = sdp.solve(problem)

print("min tr(C X) s.t. tr(X) = 1, X >= 0  (4x4 Hermitian)")
print(f"  status:          {sol.status}")
print(f"  objective:       {sol.objective_value:.10f}")
print(f"  lambda_min(C):   {np.linalg.eigvalsh(c)[0]:.10f}")
print(f"  duality gap:     {sol.duality_gap:.2e}")
print(f"  max violation:   {sol.max_violation:.2e}")
print(f"  newton steps:    {sol.newton_iterations}")

# X* should be (numerically) the rank-one projector onto the smallest
# eigenvector of C
w = np.linalg.eigvalsh(sol.blocks["X"])
print(f"  eigenvalues of X*: {np.round(w, 6)}")

print("\ndebug dump of the min-sum design SDP (first 12 lines):")
design = vector_design.build_minsum_problem(np.eye(4, dtype=complex),
                                            0.5, 2.0)
for line in sdp.dump_problem(design).splitlines()[:12]:
    print(" ", line)
