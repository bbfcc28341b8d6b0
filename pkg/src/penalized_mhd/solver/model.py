"""Discretized problem (grid, regions, coefficients, EOS) and the evolving state."""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from ..coefficients import CoefficientField
from ..eos import EosParams
from ..geometry import Grid, RegionMap
from ..linalg import FactorCache
from ..operators import SparseOps, cell_to_edge, cell_to_face, div


@dataclass(eq=False)
class Model:
    """Everything about a run that does not change in time."""

    grid: Grid
    region: RegionMap
    coeffs: CoefficientField
    eos: EosParams

    @cached_property
    def mu_face(self) -> np.ndarray:
        return cell_to_face(self.coeffs.mu)

    @cached_property
    def beta_face(self) -> np.ndarray:
        return cell_to_face(self.coeffs.beta)

    @cached_property
    def eta_edge(self) -> np.ndarray:
        return cell_to_edge(self.coeffs.eta)

    @cached_property
    def ops(self) -> SparseOps:
        return SparseOps(self.grid)

    @cached_property
    def factors(self) -> dict:
        return {"viscous": FactorCache(), "resistive": FactorCache()}

    @cached_property
    def viscous_matrix(self):
        return self.ops.viscous_stiffness(self.coeffs.nu, self.coeffs.lam)

    @cached_property
    def resistive_matrix(self):
        return self.ops.resistive_stiffness(self.coeffs.eta)


@dataclass(eq=False)
class State:
    """Density (cells), momentum and ``B = mu H`` (faces) at time ``t``."""

    model: Model
    rho: np.ndarray
    m: np.ndarray
    B: np.ndarray
    t: float = 0.0
    step_count: int = field(default=0)

    @property
    def grid(self) -> Grid:
        return self.model.grid

    @property
    def rho_face(self) -> np.ndarray:
        return cell_to_face(self.rho)

    @property
    def u(self) -> np.ndarray:
        return self.m / self.rho_face

    @property
    def H(self) -> np.ndarray:
        return self.B / self.model.mu_face

    def copy(self) -> "State":
        return State(self.model, self.rho.copy(), self.m.copy(), self.B.copy(), self.t, self.step_count)

    def mass(self) -> float:
        return float(np.sum(self.rho) * self.grid.cell_volume)

    def div_muH(self) -> np.ndarray:
        return div(self.B, self.grid.h)

    def div_muH_relative(self) -> float:
        """``max|div(mu H)|`` relative to ``max|mu H| / h``."""
        scale = float(np.max(np.abs(self.B))) / self.grid.h
        if scale == 0.0:
            return 0.0
        return float(np.max(np.abs(self.div_muH()))) / scale
