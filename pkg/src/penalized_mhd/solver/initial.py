"""Initial data and the ``div(mu H) = 0`` projection."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..geometry import Grid, Region
from ..linalg import pcg
from ..operators import SparseOps, cell_to_face, curl_adjoint, div, grad, remove_divergence
from .model import Model, State


@dataclass(frozen=True)
class InitialData:
    """Parameters of the default initial condition.

    ``kind = "default"`` gives a swirl confined to the fluid annulus and a
    compactly supported magnetic field; ``kind = "zero"`` gives ``rho = rho_fluid``,
    ``m = 0``, ``H = 0``; ``kind = "uniform"`` gives ``H = field_amplitude e_x``.
    """

    kind: str = "default"
    rho_fluid: float = 1.0
    rho_solid: float = 1.0
    # peak face values of the initial velocity and magnetic field
    vortex_amplitude: float = 0.3
    field_amplitude: float = 0.5

    def __post_init__(self):
        if self.kind not in ("default", "zero", "uniform"):
            raise ValueError(f"unknown initial-data kind {self.kind!r}")
        if not (self.rho_fluid > 0 and self.rho_solid > 0):
            raise ValueError("initial densities must be positive")


def radial_bump(r: np.ndarray, r0: float, r1: float) -> np.ndarray:
    """C² bump ``(1 - s²)³`` on ``r0 < r < r1``, zero elsewhere."""
    mid, half = 0.5 * (r0 + r1), 0.5 * (r1 - r0)
    s = (r - mid) / half
    return np.where(np.abs(s) < 1.0, (1.0 - s * s) ** 3, 0.0)


def _edge_radius(grid: Grid, pair) -> tuple[np.ndarray, tuple[np.ndarray, ...]]:
    X = grid.edge_centers(*pair)
    return np.sqrt(sum(x * x for x in X)), X


def _fluid_band(model: Model) -> tuple[float, float]:
    reg = model.region
    # keep one cell of clearance beyond each transition band
    pad = 0.5 * model.coeffs.width + model.grid.h
    return reg.R_inner + pad, reg.R_outer - pad


def stream_potential(model: Model, amplitude: float, angular) -> np.ndarray:
    """Edge potential ``A`` with ``A_01 = amplitude * bump(r) * angular(X)``, others zero."""
    grid = model.grid
    r0, r1 = _fluid_band(model)
    A = grid.zeros_edge()
    r, X = _edge_radius(grid, (0, 1))
    A[0] = amplitude * radial_bump(r, r0, r1) * angular(X, r)
    return A


def _swirl_angular(X, r):
    theta = np.arctan2(X[1], X[0])
    return 1.0 + 0.3 * np.sin(2.0 * theta)


def _field_angular(X, r):
    theta = np.arctan2(X[1], X[0])
    return 0.5 + np.cos(theta - 0.3) + 0.5 * np.sin(2.0 * theta)


def project_div_muH(H: np.ndarray, mu: np.ndarray, *, tol: float = 1e-12, maxiter: int = 5000,
                    ops: SparseOps | None = None) -> np.ndarray:
    """Return ``H - grad(phi)`` with ``div(mu_face (H - grad phi)) = 0``.

    ``mu`` is the cell field; it is averaged to faces.  The weighted Poisson
    problem is solved by Jacobi-preconditioned CG, then the remaining roundoff
    divergence of ``mu H`` is removed by an FFT projection of ``B = mu H``.
    The result does not depend on the grid spacing, so unit spacing is used.
    """
    d = H.shape[0]
    n = H.shape[1]
    h = 1.0
    mu_f = cell_to_face(mu)
    if np.any(mu_f <= 0):
        raise ValueError("mu must be positive")
    B = mu_f * H
    rhs = -div(B, h).ravel()
    if np.linalg.norm(rhs) > 0:
        ops = ops if ops is not None and ops.grid.h == 1.0 else SparseOps(Grid(d, n / 2, n))
        A = ops.weighted_laplacian(mu_f)
        # A = G^T mu G; solve A phi = G^T mu H = -div(mu H); mean of phi is free
        rhs = rhs - rhs.mean()
        phi, _ = pcg(lambda x: A @ x, rhs, precond=1.0 / A.diagonal(), rtol=tol,
                     maxiter=maxiter, what="div(mu H) projection")
        B = mu_f * (H - grad(phi.reshape((n,) * d), h))
    B = remove_divergence(B, h)
    return B / mu_f


def _normalized(F: np.ndarray, peak: float) -> np.ndarray:
    """Rescale so that the largest face value equals ``peak``."""
    top = float(np.max(np.abs(F)))
    return F * (peak / top) if top > 0 else F


def make_initial_state(model: Model, spec: InitialData | None = None) -> State:
    spec = spec or InitialData()
    grid, reg = model.grid, model.region
    rho = np.where(reg.labels == Region.FLUID, spec.rho_fluid, spec.rho_solid).astype(float)
    if spec.kind == "zero":
        return State(model, rho, grid.zeros_face(), grid.zeros_face(), 0.0)
    if spec.kind == "uniform":
        H = grid.zeros_face()
        H[0] = spec.field_amplitude
        B = project_div_muH(H, model.coeffs.mu) * model.mu_face
        return State(model, rho, grid.zeros_face(), B, 0.0)

    h = grid.h
    u = _normalized(curl_adjoint(stream_potential(model, 1.0, _swirl_angular), h), spec.vortex_amplitude)
    # cutoff: momentum vanishes on every face not strictly inside the fluid region
    fluid_face = cell_to_face((reg.labels == Region.FLUID).astype(float)) == 1.0
    m = np.where(fluid_face, cell_to_face(rho) * u, 0.0)
    H = _normalized(curl_adjoint(stream_potential(model, 1.0, _field_angular), h), spec.field_amplitude)
    H = project_div_muH(H, model.coeffs.mu)
    return State(model, rho, m, model.mu_face * H, 0.0)
