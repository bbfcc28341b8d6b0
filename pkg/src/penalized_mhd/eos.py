"""Barotropic equation of state, stresses and the total energy functional."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .operators import cell_to_face

# guards divisions in diagnostics only; never applied to the state
RHO_FLOOR = 1e-10


class EosError(ValueError):
    pass


@dataclass(frozen=True)
class EosParams:
    a: float = 1.0
    gamma: float = 1.4

    def __post_init__(self):
        if not self.a > 0:
            raise EosError(f"pressure amplitude a must be > 0, got {self.a}")
        if self.gamma == 1.0:
            raise EosError("gamma = 1 has no power-law pressure potential")
        if not self.gamma > 1.0:
            raise EosError(f"gamma must exceed d/2 >= 1, got {self.gamma}")

    def check_dimension(self, d: int) -> None:
        if not self.gamma > d / 2:
            raise EosError(f"gamma={self.gamma} violates gamma > d/2 = {d / 2}")


def default_eos(d: int) -> EosParams:
    return EosParams(a=1.0, gamma=1.4 if d == 2 else 5.0 / 3.0)


def _check_density(rho):
    rho = np.asarray(rho, dtype=float)
    if np.any(rho < 0):
        raise EosError("negative density")
    return rho


def pressure(rho, eos: EosParams):
    rho = _check_density(rho)
    return eos.a * rho ** eos.gamma


def pressure_potential(rho, eos: EosParams):
    """Internal energy density ``P`` with ``P'(rho) rho - P(rho) = p(rho)``, ``P(0) = 0``."""
    rho = _check_density(rho)
    return eos.a * rho ** eos.gamma / (eos.gamma - 1.0)


def sound_speed(rho, eos: EosParams):
    rho = _check_density(rho)
    return np.sqrt(eos.a * eos.gamma * rho ** (eos.gamma - 1.0))


def maxwell_tensor(H, mu):
    """``mu (H ⊗ H - |H|²/2 I)`` for ``H`` of shape ``(d, ...)``."""
    H = np.asarray(H, dtype=float)
    d = H.shape[0]
    T = np.einsum("i...,j...->ij...", H, H)
    half_sq = 0.5 * np.sum(H * H, axis=0)
    for a in range(d):
        T[a, a] = T[a, a] - half_sq
    return np.asarray(mu) * T


def viscous_stress(Du, nu, lam, d: int):
    """Newtonian stress ``nu (2 Du - 2/d tr(Du) I) + lam tr(Du) I``."""
    Du = np.asarray(Du, dtype=float)
    tr = np.trace(Du, axis1=0, axis2=1)
    S = 2.0 * np.asarray(nu) * Du
    for a in range(d):
        S[a, a] = S[a, a] + (np.asarray(lam) - 2.0 * np.asarray(nu) / d) * tr
    return S


@dataclass(frozen=True)
class EnergyValue:
    kinetic: float
    internal: float
    magnetic: float
    valid: bool = True

    @property
    def total(self) -> float:
        if not self.valid:
            return float("inf")
        return self.kinetic + self.internal + self.magnetic


def kinetic_density(m, rho_face):
    """``|m|²/(2 rho)`` per face, 0 where ``rho = m = 0``, ``inf`` where only ``rho = 0``."""
    m = np.asarray(m, dtype=float)
    out = np.zeros_like(m)
    pos = rho_face > 0
    out[pos] = 0.5 * m[pos] ** 2 / rho_face[pos]
    out[~pos & (m != 0)] = np.inf
    return out


def energy_parts(rho, m, B, mu_face, eos: EosParams, cell_volume: float) -> EnergyValue:
    """Staggered midpoint quadrature of the total energy.

    ``rho`` is cell-centred; momentum ``m`` and ``B = mu H`` live on faces,
    each face component carrying the volume of its own dual cell.
    """
    rho_face = cell_to_face(rho)
    kin = kinetic_density(m, rho_face)
    valid = bool(np.all(np.isfinite(kin)))
    kinetic = float(np.sum(kin[np.isfinite(kin)]) * cell_volume)
    internal = float(np.sum(pressure_potential(rho, eos)) * cell_volume)
    magnetic = float(0.5 * np.sum(B * B / mu_face) * cell_volume)
    return EnergyValue(kinetic=kinetic, internal=internal, magnetic=magnetic, valid=valid)


def total_energy(state, coeffs, eos: EosParams) -> EnergyValue:
    mu_face = cell_to_face(coeffs.mu)
    return energy_parts(state.rho, state.m, state.B, mu_face, eos, state.grid.cell_volume)


def energy_density(rho, m, H, mu, eos: EosParams):
    """Pointwise energy density for co-located values (used by convexity probes)."""
    rho = np.asarray(rho, dtype=float)
    m = np.asarray(m, dtype=float)
    H = np.asarray(H, dtype=float)
    msq = np.sum(m * m, axis=0)
    with np.errstate(divide="ignore", invalid="ignore"):
        kin = np.where(rho > 0, 0.5 * msq / np.where(rho > 0, rho, 1.0),
                       np.where(msq == 0, 0.0, np.inf))
    return kin + pressure_potential(rho, eos) + 0.5 * mu * np.sum(H * H, axis=0)
