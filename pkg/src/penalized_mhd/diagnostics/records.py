"""Per-instant diagnostics: energy, boundary traces, region norms."""

from __future__ import annotations

from dataclasses import asdict, dataclass, field

import numpy as np

from ..eos import EnergyValue, energy_parts
from ..geometry import RegionMap
from ..operators import curl, div, edge_to_cell, face_to_cell, gaffney_ratio

TRACE_KEYS = ("H_cross_n", "H_dot_n", "curlH_cross_n", "curlH_dot_n")
REGION_KEYS = ("u_solid", "divu_solid", "H_ext", "curlH_ext")


def interpolate(f: np.ndarray, shifts, grid, points: np.ndarray) -> np.ndarray:
    """Periodic multilinear interpolation of a staggered scalar array.

    ``shifts[a]`` is the storage offset in cells along axis ``a`` (0 for cell
    centres, 0.5 for a staggered direction); ``points`` has shape ``(N, d)``.
    """
    d, n, h = grid.d, grid.n, grid.h
    pos = (points + grid.L) / h - 0.5 - np.asarray(shifts, dtype=float)
    base = np.floor(pos).astype(int)
    frac = pos - base
    out = np.zeros(points.shape[0])
    for corner in range(2 ** d):
        weight = np.ones(points.shape[0])
        idx = []
        for a in range(d):
            bit = (corner >> a) & 1
            weight = weight * (frac[:, a] if bit else 1.0 - frac[:, a])
            idx.append(np.mod(base[:, a] + bit, n))
        out += weight * f[tuple(idx)]
    return out


def _face_shifts(d, a):
    return tuple(0.5 if k == a else 0.0 for k in range(d))


def _edge_shifts(d, pair):
    return tuple(0.5 if k in pair else 0.0 for k in range(d))


def sample_face_vector(F: np.ndarray, grid, points: np.ndarray) -> np.ndarray:
    return np.stack([interpolate(F[a], _face_shifts(grid.d, a), grid, points)
                     for a in range(grid.d)], axis=1)


def sample_curl(W: np.ndarray, grid, points: np.ndarray) -> np.ndarray:
    """Edge field sampled at points; 2-D gives ``(N, 1)``, 3-D the ``(x, y, z)`` vector."""
    vals = [interpolate(W[p], _edge_shifts(grid.d, pair), grid, points)
            for p, pair in enumerate(grid.pairs)]
    if grid.d == 2:
        return np.stack(vals, axis=1)
    return np.stack([vals[2], -vals[1], vals[0]], axis=1)


def _boundary_l2(values: np.ndarray, weights: np.ndarray) -> float:
    return float(np.sqrt(np.sum(weights * values)))


def trace_norms(H: np.ndarray, region: RegionMap) -> dict[str, float]:
    """Boundary L² norms of the normal and tangential traces of ``H`` and ``curl H`` on the outer sphere."""
    grid = region.grid
    S = region.outer_samples
    n = S.normals
    Hs = sample_face_vector(H, grid, S.points)
    Hn = np.sum(Hs * n, axis=1)
    Ht2 = np.sum(Hs * Hs, axis=1) - Hn ** 2
    Cs = sample_curl(curl(H, grid.h), grid, S.points)
    if grid.d == 2:
        # curl H is out of plane: fully tangential to the boundary curve
        Cn = np.zeros(len(S))
        Ct2 = Cs[:, 0] ** 2
    else:
        Cn = np.sum(Cs * n, axis=1)
        Ct2 = np.sum(Cs * Cs, axis=1) - Cn ** 2
    w = S.weights
    return {
        "H_cross_n": _boundary_l2(np.maximum(Ht2, 0.0), w),
        "H_dot_n": _boundary_l2(Hn ** 2, w),
        "curlH_cross_n": _boundary_l2(np.maximum(Ct2, 0.0), w),
        "curlH_dot_n": _boundary_l2(Cn ** 2, w),
    }


def _masked_l2(sq: np.ndarray, mask: np.ndarray, vol: float) -> float:
    return float(np.sqrt(np.sum(sq[mask]) * vol))


def region_norms_sq(u: np.ndarray, H: np.ndarray, region: RegionMap, margin: float) -> dict[str, float]:
    """Squared plateau-masked L² norms (cell quadrature)."""
    grid = region.grid
    h, vol = grid.h, grid.cell_volume
    solid = region.solid_plateau(margin)
    ext = region.ext_plateau(margin)
    uc = face_to_cell(u)
    Hc = face_to_cell(H)
    Cc = edge_to_cell(curl(H, h))
    return {
        "u_solid": float(np.sum(np.sum(uc * uc, axis=0)[solid]) * vol),
        "divu_solid": float(np.sum(div(u, h)[solid] ** 2) * vol),
        "H_ext": float(np.sum(np.sum(Hc * Hc, axis=0)[ext]) * vol),
        "curlH_ext": float(np.sum(np.sum(Cc * Cc, axis=0)[ext]) * vol),
    }


def region_norms(u: np.ndarray, H: np.ndarray, region: RegionMap, margin: float) -> dict[str, float]:
    return {k: float(np.sqrt(v)) for k, v in region_norms_sq(u, H, region, margin).items()}


def default_margin(width: float) -> float:
    return 2.0 * width


@dataclass
class DiagnosticsRecord:
    t: float
    energy: EnergyValue
    dissipation: dict
    traces: dict
    regions: dict
    div_muH: float
    mass: float
    gaffney: float
    rho_solid_drift: float = 0.0
    extra: dict = field(default_factory=dict)

    @property
    def dissipated(self) -> float:
        return float(sum(self.dissipation.values()))

    def row(self) -> dict:
        out = {"t": self.t, "kinetic": self.energy.kinetic, "internal": self.energy.internal,
               "magnetic": self.energy.magnetic, "energy": self.energy.total}
        out.update({f"D_{k}": v for k, v in self.dissipation.items()})
        out.update(self.traces)
        out.update(self.regions)
        out.update({"div_muH": self.div_muH, "mass": self.mass, "gaffney": self.gaffney,
                    "rho_solid_drift": self.rho_solid_drift})
        return out

    def as_dict(self) -> dict:
        d = asdict(self)
        d["energy"]["total"] = self.energy.total
        return d


def state_energy(state) -> EnergyValue:
    m = state.model
    return energy_parts(state.rho, state.m, state.B, m.mu_face, m.eos, state.grid.cell_volume)


def make_record(state, dissipation: dict, rho0: np.ndarray | None = None,
                margin: float | None = None) -> DiagnosticsRecord:
    model = state.model
    region = model.region
    if margin is None:
        margin = default_margin(model.coeffs.width)
    H = state.H
    u = state.u
    drift = 0.0
    if rho0 is not None:
        solid = region.solid_plateau(margin)
        drift = float(np.sum(np.abs(state.rho - rho0)[solid]) * state.grid.cell_volume)
    g = gaffney_ratio(H, state.grid.h) if np.any(H) else float("nan")
    return DiagnosticsRecord(
        t=state.t,
        energy=state_energy(state),
        dissipation=dict(dissipation),
        traces=trace_norms(H, region),
        regions=region_norms(u, H, region, margin),
        div_muH=state.div_muH_relative(),
        mass=state.mass(),
        gaffney=g,
        rho_solid_drift=drift,
    )


def energy_budget(records) -> float:
    """``max_k [E(t_k) + D(t_k) - E(0)] / E(0)`` over a trajectory or record sequence."""
    records = list(getattr(records, "records", records))
    if len(records) < 2:
        raise ValueError("energy budget needs at least two records")
    E0 = records[0].energy.total
    D0 = records[0].dissipated
    worst = max(r.energy.total + r.dissipated - D0 - E0 for r in records)
    if E0 == 0.0:
        return float(worst)
    return float(worst / E0)
