"""Time loop, trajectory bookkeeping and model construction from a config."""

from __future__ import annotations

import time as _time
from dataclasses import dataclass, field

import numpy as np

from ..diagnostics.records import DiagnosticsRecord, default_margin, make_record, region_norms_sq
from .model import State
from .stepping import Forcing, StepOptions, cfl_dt, step


@dataclass
class RunConfig:
    """Time-stepping controls.

    ``output_every`` is the diagnostics cadence in steps; ``snapshot_times``
    are hit exactly and stored, and ``snapshot_every > 0`` additionally keeps
    every k-th state (needed by the weak-form certifier).  ``dt_fixed``
    overrides the CFL rule.
    """

    T: float = 0.5
    cfl: float = 0.4
    dt_min: float = 1e-8
    dt_max: float = 1e-2
    cg_tol: float = 1e-10
    cg_maxit: int = 2000
    output_every: int = 10
    snapshot_times: tuple = ()
    snapshot_every: int = 0
    limiter: str = "none"
    dt_fixed: float | None = None
    max_steps: int = 1_000_000

    def __post_init__(self):
        if not self.T > 0:
            raise ValueError(f"T must be > 0, got {self.T}")
        if not 0 < self.cfl < 1:
            raise ValueError(f"cfl must lie in (0, 1), got {self.cfl}")
        if not 0 < self.dt_min <= self.dt_max:
            raise ValueError("need 0 < dt_min <= dt_max")
        if not self.output_every >= 1:
            raise ValueError("output_every must be >= 1")
        if self.snapshot_every < 0:
            raise ValueError("snapshot_every must be >= 0")
        if self.dt_fixed is not None and not self.dt_fixed > 0:
            raise ValueError("dt_fixed must be > 0")
        if any(not 0 <= s <= self.T for s in self.snapshot_times):
            raise ValueError("snapshot times must lie in [0, T]")
        StepOptions(self.limiter, self.cg_tol, self.cg_maxit)

    def step_options(self) -> StepOptions:
        return StepOptions(self.limiter, self.cg_tol, self.cg_maxit)


@dataclass
class Trajectory:
    records: list[DiagnosticsRecord] = field(default_factory=list)
    snapshots: list[State] = field(default_factory=list)
    dissipation: dict = field(default_factory=lambda: {"viscous": 0.0, "resistive": 0.0, "friction": 0.0})
    # time integrals of squared region norms, trapezoid over steps
    integrals: dict = field(default_factory=dict)
    steps: int = 0
    cg_iterations: dict = field(default_factory=lambda: {"viscous": 0, "resistive": 0})
    max_div_muH: float = 0.0
    mass_drift: float = 0.0
    wall_time: float = 0.0
    initial: State | None = None
    final: State | None = None

    @property
    def times(self) -> list[float]:
        return [r.t for r in self.records]

    def integrated_norm(self, key: str) -> float:
        """``sqrt(int_0^T |.|^2 dt)`` for a region-norm key."""
        return float(np.sqrt(self.integrals.get(key, 0.0)))


def integrate(state: State, cfg: RunConfig, forcing: Forcing | None = None,
              margin: float | None = None) -> Trajectory:
    """Advance ``state`` to ``cfg.T`` and collect diagnostics."""
    wall = _time.perf_counter()
    opts = cfg.step_options()
    model = state.model
    if margin is None:
        margin = default_margin(model.coeffs.width)
    traj = Trajectory(initial=state.copy())
    rho0 = state.rho.copy()
    mass0 = state.mass()
    traj.records.append(make_record(state, traj.dissipation, rho0, margin))
    prev_sq = region_norms_sq(state.u, state.H, model.region, margin)
    traj.integrals = {k: 0.0 for k in prev_sq}
    pending = sorted(set(float(s) for s in cfg.snapshot_times))
    if cfg.snapshot_every or (pending and pending[0] == 0.0):
        traj.snapshots.append(state.copy())
    pending = [s for s in pending if s > 0.0]

    T = cfg.T
    eps_t = 1e-12 * T
    while state.t < T - eps_t:
        if traj.steps >= cfg.max_steps:
            raise RuntimeError(f"step limit {cfg.max_steps} reached at t={state.t}")
        dt = cfg.dt_fixed if cfg.dt_fixed is not None else cfl_dt(state, cfg.cfl, cfg.dt_min, cfg.dt_max)
        target = min([T] + pending)
        if state.t + dt > target - eps_t:
            dt = target - state.t
        state, report = step(state, dt, opts, forcing)
        if abs(state.t - target) <= eps_t:
            state.t = target
        traj.steps += 1
        traj.dissipation["viscous"] += report.viscous
        traj.dissipation["resistive"] += report.resistive
        traj.dissipation["friction"] += report.friction
        for k, v in report.cg.items():
            traj.cg_iterations[k] += v

        sq = region_norms_sq(state.u, state.H, model.region, margin)
        for k in sq:
            traj.integrals[k] += 0.5 * dt * (sq[k] + prev_sq[k])
        prev_sq = sq
        traj.max_div_muH = max(traj.max_div_muH, state.div_muH_relative())
        traj.mass_drift = max(traj.mass_drift, abs(state.mass() - mass0) / mass0)

        at_snapshot = bool(pending) and state.t >= pending[0] - eps_t
        if at_snapshot:
            pending.pop(0)
        if at_snapshot or (cfg.snapshot_every and traj.steps % cfg.snapshot_every == 0):
            traj.snapshots.append(state.copy())
        done = state.t >= T - eps_t
        if done or traj.steps % cfg.output_every == 0:
            traj.records.append(make_record(state, traj.dissipation, rho0, margin))
    if cfg.snapshot_every and traj.snapshots[-1].t != state.t:
        traj.snapshots.append(state.copy())
    traj.final = state
    traj.wall_time = _time.perf_counter() - wall
    return traj
