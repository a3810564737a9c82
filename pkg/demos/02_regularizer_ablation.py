"""Effect of the graph-Laplacian regularizer.

Without the regularizer (alpha = 0) each point chases its own nearest
neighbor and the recovered flow is chaotic; with it, neighboring points
are forced to move near-rigidly. Also sweeps the neighbor count k: very
large k over-rigidifies across cluster boundaries.
"""

from arapflow import SolverConfig, evaluate, solve
from arapflow.synth import generate, two_cluster_spec

source, target, gt_flow = generate(two_cluster_spec(seed=0))

print("alpha sweep (k=20):")
for alpha in (0.0, 1.0, 10.0, 100.0):
    report = solve(source, target, SolverConfig(alpha=alpha, k=20))
    m = evaluate(report.flow, gt_flow)
    print(f"  alpha {alpha:6.1f}: EPE {m.epe:.4f} m, acc5 {m.acc5:5.1f}%")

print("\nk sweep (alpha=10):")
for k in (5, 20, 50, 200):
    report = solve(source, target, SolverConfig(k=k))
    m = evaluate(report.flow, gt_flow)
    print(f"  k {k:4d}: EPE {m.epe:.4f} m, acc5 {m.acc5:5.1f}%")
