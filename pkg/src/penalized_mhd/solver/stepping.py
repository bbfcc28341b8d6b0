"""One IMEX step: explicit transport, pressure and Lorentz terms followed by
a joint implicit friction-viscosity solve and an implicit resistive solve.

Momentum and ``B = mu H`` live on faces, density in cells.  The Lorentz
force is assembled as the exact discrete adjoint of the induction term, so
the magnetic and kinetic exchanges cancel to roundoff in the energy balance.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Protocol

import numpy as np
import scipy.sparse as sp

from ..eos import pressure, sound_speed
from ..linalg import CGInfo
from ..operators import (
    _pairs, cell_to_face, curl, curl_adjoint, dminus, dplus, edge_to_face_adjoint,
    face_to_cell, face_to_edge, shift,
)
from .model import Model, State

LIMITERS = ("none", "minmod", "mc")


class NegativeDensityError(RuntimeError):
    def __init__(self, index: tuple[int, ...], value: float, t: float):
        super().__init__(f"non-positive density {value:.3e} in cell {index} at t={t:.6g}")
        self.index = index
        self.value = value
        self.t = t


class Forcing(Protocol):
    """Source terms: ``rho`` (cells), ``m`` (faces), ``emf`` (edges, applied through curl^T)."""

    def rho(self, t: float) -> np.ndarray: ...
    def m(self, t: float) -> np.ndarray: ...
    def emf(self, t: float) -> np.ndarray: ...


@dataclass
class StepOptions:
    limiter: str = "none"
    cg_tol: float = 1e-10
    cg_maxit: int = 2000

    def __post_init__(self):
        if self.limiter not in LIMITERS:
            raise ValueError(f"limiter must be one of {LIMITERS}, got {self.limiter!r}")
        if not self.cg_tol > 0:
            raise ValueError("cg_tol must be > 0")
        if not self.cg_maxit > 0:
            raise ValueError("cg_maxit must be > 0")


@dataclass
class StepReport:
    """Dissipation increments (already multiplied by dt) and solver statistics."""

    viscous: float = 0.0
    resistive: float = 0.0
    friction: float = 0.0
    cg: dict = field(default_factory=dict)


def _minmod(a, b):
    return np.where(a * b > 0, np.sign(a) * np.minimum(np.abs(a), np.abs(b)), 0.0)


def reconstruct(q: np.ndarray, axis: int, limiter: str) -> tuple[np.ndarray, np.ndarray]:
    """Left/right states at the interface between ``q[k]`` and ``q[k+1]``."""
    qp = shift(q, axis, 1)
    qm = shift(q, axis, -1)
    if limiter == "none":
        slope = 0.5 * (qp - qm)
    else:
        dl, dr = q - qm, qp - q
        if limiter == "minmod":
            slope = _minmod(dl, dr)
        else:
            slope = _minmod(_minmod(2.0 * dl, 2.0 * dr), 0.5 * (dl + dr))
    return q + 0.5 * slope, qp - 0.5 * shift(slope, axis, 1)


def _upwind(G, qL, qR):
    return np.where(G > 0, G * qL, G * qR)


def fast_speed(model: Model, rho: np.ndarray, B: np.ndarray) -> np.ndarray:
    """``sqrt(c^2 + c_A^2)`` per cell."""
    c2 = sound_speed(rho, model.eos) ** 2
    Hc = face_to_cell(B / model.mu_face)
    cA2 = model.coeffs.mu * np.sum(Hc * Hc, axis=0) / np.maximum(rho, 1e-10)
    return np.sqrt(c2 + cA2)


def mass_flux(model: Model, rho: np.ndarray, u: np.ndarray, speed: np.ndarray, limiter: str) -> np.ndarray:
    """Rusanov flux of ``rho`` through every face."""
    F = np.empty_like(u)
    for a in range(model.grid.d):
        rL, rR = reconstruct(rho, a, limiter)
        alpha = np.abs(u[a]) + np.maximum(speed, shift(speed, a))
        F[a] = 0.5 * u[a] * (rL + rR) - 0.5 * alpha * (rR - rL)
    return F


def lorentz_force(B: np.ndarray, H: np.ndarray, h: float) -> np.ndarray:
    """``curl H x B`` on faces, adjoint to the edge-averaged EMF of :func:`emf`."""
    d = B.shape[0]
    C = curl(H, h)
    F = np.zeros_like(B)
    for p, (a, b) in enumerate(_pairs(d)):
        Ba, Bb = face_to_edge(B, (a, b))
        F[a] -= edge_to_face_adjoint(C[p] * Bb, b)
        F[b] += edge_to_face_adjoint(C[p] * Ba, a)
    return F


def emf(u: np.ndarray, B: np.ndarray) -> np.ndarray:
    """Ideal electromotive field ``u_a B_b - u_b B_a`` on edges."""
    d = u.shape[0]
    out = []
    for a, b in _pairs(d):
        ua, ub = face_to_edge(u, (a, b))
        Ba, Bb = face_to_edge(B, (a, b))
        out.append(ua * Bb - ub * Ba)
    return np.stack(out)


def hyperbolic_rhs(model: Model, rho, m, B, limiter: str = "none"):
    """Time derivatives of ``(rho, m, B)`` from the non-diffusive terms."""
    grid = model.grid
    h, d = grid.h, grid.d
    rho_f = cell_to_face(rho)
    u = m / rho_f
    speed = fast_speed(model, rho, B)

    F = mass_flux(model, rho, u, speed, limiter)
    drho = -sum(dminus(F[a], a, h) for a in range(d))

    dm = np.zeros_like(m)
    for a in range(d):
        # flux of u_a along axis a, at cell centres
        G = 0.5 * (F[a] + shift(F[a], a, -1))
        qL, qR = reconstruct(u[a], a, limiter)
        flux = _upwind(G, shift(qL, a, -1), shift(qR, a, -1))
        dm[a] -= dplus(flux, a, h)
        for b in range(d):
            if b == a:
                continue
            # flux of u_a along axis b, at the (a, b) edge
            G = 0.5 * (F[b] + shift(F[b], a))
            qL, qR = reconstruct(u[a], b, limiter)
            dm[a] -= dminus(_upwind(G, qL, qR), b, h)

    p = pressure(rho, model.eos)
    for a in range(d):
        dm[a] -= dplus(p, a, h)
    dm += lorentz_force(B, B / model.mu_face, h)

    dB = curl_adjoint(emf(u, B), h)
    return drho, dm, dB


def _check_positive(rho: np.ndarray, t: float) -> None:
    bad = ~(rho > 0)
    if np.any(bad):
        idx = np.unravel_index(np.argmax(bad), rho.shape)
        raise NegativeDensityError(tuple(int(i) for i in idx), float(rho[idx]), t)


def _forced(model, rho, m, B, t, limiter, forcing):
    drho, dm, dB = hyperbolic_rhs(model, rho, m, B, limiter)
    if forcing is not None:
        drho = drho + forcing.rho(t)
        dm = dm + forcing.m(t)
        dB = dB + curl_adjoint(forcing.emf(t), model.grid.h)
    return drho, dm, dB


def explicit_stage(state: State, dt: float, limiter: str = "none", forcing: Forcing | None = None):
    """Two-stage SSP Runge-Kutta (Heun) update of the hyperbolic part."""
    model, t = state.model, state.t
    r0, m0, B0 = state.rho, state.m, state.B
    k = _forced(model, r0, m0, B0, t, limiter, forcing)
    r1, m1, B1 = r0 + dt * k[0], m0 + dt * k[1], B0 + dt * k[2]
    _check_positive(r1, t + dt)
    k = _forced(model, r1, m1, B1, t + dt, limiter, forcing)
    r2 = 0.5 * (r0 + r1 + dt * k[0])
    m2 = 0.5 * (m0 + m1 + dt * k[1])
    B2 = 0.5 * (B0 + B1 + dt * k[2])
    _check_positive(r2, t + dt)
    return r2, m2, B2


def friction_stage(model: Model, rho_f: np.ndarray, m: np.ndarray, dt: float) -> tuple[np.ndarray, float]:
    """Pointwise backward Euler for ``rho du/dt = -beta u``; returns ``(m, dissipation)``."""
    beta = model.beta_face
    m1 = m / (1.0 + dt * beta / rho_f)
    u1 = m1 / rho_f
    D = dt * float(np.sum(beta * u1 * u1)) * model.grid.cell_volume
    return m1, D


def viscous_stage(model: Model, rho_f: np.ndarray, m: np.ndarray, dt: float,
                  opts: StepOptions) -> tuple[np.ndarray, float, CGInfo]:
    """Backward Euler ``(rho + dt K) u1 = m`` with the SPD viscous stiffness ``K``."""
    K = model.viscous_matrix
    r = rho_f.ravel()
    b = m.ravel()
    A = (sp.diags(r) + dt * K).tocsr()
    u1, info = model.factors["viscous"].solve(A, b, x0=b / r, rtol=opts.cg_tol,
                                             maxiter=opts.cg_maxit, what="viscous solve")
    D = dt * float(u1 @ (K @ u1)) * model.grid.cell_volume
    return (r * u1).reshape(m.shape), D, info


def friction_viscous_stage(model: Model, rho_f: np.ndarray, m: np.ndarray, dt: float,
                           opts: StepOptions) -> tuple[np.ndarray, float, float, CGInfo]:
    """Backward Euler ``(rho + dt beta + dt K) u1 = m`` for friction and viscosity together.

    Solving both at once keeps the large bulk viscosity in solid regions from
    re-injecting velocity after the friction update.  Returns
    ``(m, friction dissipation, viscous dissipation, info)``.
    """
    K = model.viscous_matrix
    r = rho_f.ravel()
    beta = model.beta_face.ravel()
    b = m.ravel()
    diag = r + dt * beta
    A = (sp.diags(diag) + dt * K).tocsr()
    u1, info = model.factors["viscous"].solve(A, b, x0=b / diag, rtol=opts.cg_tol,
                                             maxiter=opts.cg_maxit, what="viscous solve")
    vol = model.grid.cell_volume
    Df = dt * float(np.sum(beta * u1 * u1)) * vol
    Dv = dt * float(u1 @ (K @ u1)) * vol
    return (r * u1).reshape(m.shape), Df, Dv, info


def resistive_stage(model: Model, B: np.ndarray, dt: float,
                    opts: StepOptions) -> tuple[np.ndarray, float, CGInfo]:
    """Backward Euler ``(mu + dt C^T eta C) H1 = B``, then ``B1 = B - dt C^T(eta C H1)``.

    The last form keeps ``div B`` unchanged to roundoff whatever the solver
    tolerance, because the update is a discrete curl.
    """
    K = model.resistive_matrix
    mu = model.mu_face.ravel()
    b = B.ravel()
    A = (sp.diags(mu) + dt * K).tocsr()
    H1, info = model.factors["resistive"].solve(A, b, x0=b / mu, rtol=opts.cg_tol,
                                               maxiter=opts.cg_maxit, what="resistive solve")
    h = model.grid.h
    C = curl(H1.reshape(B.shape), h)
    E = model.eta_edge * C
    B1 = B - dt * curl_adjoint(E, h)
    D = dt * float(np.sum(E * C)) * model.grid.cell_volume
    return B1, D, info


def step(state: State, dt: float, opts: StepOptions | None = None,
         forcing: Forcing | None = None) -> tuple[State, StepReport]:
    """Advance ``state`` by ``dt``; returns the new state and dissipation increments."""
    if not dt > 0:
        raise ValueError(f"time step must be positive, got {dt}")
    opts = opts or StepOptions()
    model = state.model
    rho, m, B = explicit_stage(state, dt, opts.limiter, forcing)
    rho_f = cell_to_face(rho)
    report = StepReport()
    m, report.friction, report.viscous, info = friction_viscous_stage(model, rho_f, m, dt, opts)
    report.cg["viscous"] = info.iterations
    B, report.resistive, info = resistive_stage(model, B, dt, opts)
    report.cg["resistive"] = info.iterations
    new = State(model, rho, m, B, state.t + dt, state.step_count + 1)
    return new, report


def max_speed(state: State) -> float:
    """Largest ``|u| + c + c_A`` over cells."""
    model = state.model
    rho = state.rho
    uc = face_to_cell(state.u)
    umag = np.sqrt(np.sum(uc * uc, axis=0))
    c = sound_speed(rho, model.eos)
    Hc = face_to_cell(state.H)
    cA = np.sqrt(model.coeffs.mu * np.sum(Hc * Hc, axis=0) / np.maximum(rho, 1e-10))
    return float(np.max(umag + c + cA))


def cfl_dt(state: State, cfl: float, dt_min: float = 1e-12, dt_max: float = 1.0) -> float:
    """``cfl * h / max(|u| + c + c_A)`` clamped to ``[dt_min, dt_max]``."""
    if not 0 < cfl < 1:
        raise ValueError(f"cfl must lie in (0, 1), got {cfl}")
    s = max_speed(state)
    if not s > 0:
        return dt_max
    return float(min(max(cfl * state.grid.h / s, dt_min), dt_max))
