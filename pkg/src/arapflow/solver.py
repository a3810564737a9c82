"""Runtime minimization of the flow objective with Adam.

The graph Laplacian is built once on the source cloud and held constant
for the whole run. The flow starts at zero ("no motion") and the
nearest-neighbor correspondences of the Chamfer term are recomputed at
every iteration.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import cKDTree

from .core import DivergenceError, FlowField, PointCloud
from .graph import laplacian_for_cloud
from .objective import EnergyBreakdown, energy, energy_gradient

DIVERGENCE_FACTOR = 1e6


@dataclass(frozen=True)
class SolverConfig:
    """Hyperparameters; defaults reproduce the published runtime setting."""

    alpha: float = 10.0            # regularizer weight
    lr: float = 0.1                # Adam step size
    iters: int = 1500
    k: int = 50                    # graph neighbors
    normalized_laplacian: bool = True
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    seed: int = 0
    chamfer_mode: str = "both"     # "both" | "forward"
    lr_decay: float = 1.0          # per-iteration multiplicative decay

    def validate(self, n1=None):
        if self.alpha < 0:
            raise ValueError("alpha must be >= 0")
        if self.lr <= 0:
            raise ValueError("lr must be > 0")
        if self.iters < 1:
            raise ValueError("iters must be >= 1")
        if self.chamfer_mode not in ("both", "forward"):
            raise ValueError(f"unknown chamfer mode {self.chamfer_mode!r}")
        if not 0 < self.lr_decay <= 1:
            raise ValueError("lr_decay must be in (0, 1]")
        if self.k < 1 or (n1 is not None and self.k >= n1):
            raise ValueError(f"k must satisfy 1 <= k < n1, got {self.k}")


@dataclass(frozen=True)
class SolveReport:
    flow: FlowField
    loss_trace: list[EnergyBreakdown]
    wall_time: float
    iterations_run: int


@dataclass
class AdamState:
    """First/second moment estimates for one optimization variable."""

    lr: float
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    t: int = 0
    m: np.ndarray = field(default=None)
    v: np.ndarray = field(default=None)


def adam_step(state: AdamState, grad: np.ndarray) -> np.ndarray:
    """One Adam update with bias correction; returns the parameter delta."""
    if state.m is None:
        state.m = np.zeros_like(grad)
        state.v = np.zeros_like(grad)
    state.t += 1
    state.m = state.beta1 * state.m + (1 - state.beta1) * grad
    state.v = state.beta2 * state.v + (1 - state.beta2) * grad**2
    m_hat = state.m / (1 - state.beta1**state.t)
    v_hat = state.v / (1 - state.beta2**state.t)
    return -state.lr * m_hat / (np.sqrt(v_hat) + state.eps)


def solve(source: PointCloud, target: PointCloud,
          config: SolverConfig = SolverConfig()) -> SolveReport:
    """Recover the flow field moving source towards target.

    Deterministic given (source, target, config): the optimization itself
    draws no random numbers.
    """
    config.validate(n1=len(source))
    t0 = time.perf_counter()

    L = laplacian_for_cloud(source, config.k,
                            normalized=config.normalized_laplacian)
    target_tree = cKDTree(target.points)

    F = np.zeros((len(source), 3))
    adam = AdamState(lr=config.lr, beta1=config.beta1, beta2=config.beta2,
                     eps=config.eps)
    trace = []
    initial_total = None
    for it in range(config.iters):
        flow = FlowField(F)
        e = energy(source, flow, target, L, config.alpha,
                   mode=config.chamfer_mode)
        trace.append(e)
        if initial_total is None:
            initial_total = e.total
        if not np.isfinite(e.total):
            raise DivergenceError(
                f"non-finite energy at iteration {it}", iteration=it)
        if initial_total > 0 and e.total > DIVERGENCE_FACTOR * initial_total:
            raise DivergenceError(
                f"energy exceeded {DIVERGENCE_FACTOR:g} x initial at iteration {it}",
                iteration=it)

        grad = energy_gradient(source, flow, target, L, config.alpha,
                               mode=config.chamfer_mode,
                               _target_tree=target_tree)
        adam.lr = config.lr * config.lr_decay**it
        F = F + adam_step(adam, grad.vectors)
        if not np.all(np.isfinite(F)):
            raise DivergenceError(
                f"NaN in flow at iteration {it}", iteration=it)

    return SolveReport(flow=FlowField(F), loss_trace=trace,
                       wall_time=time.perf_counter() - t0,
                       iterations_run=len(trace))
