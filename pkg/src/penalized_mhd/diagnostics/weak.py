"""Weak-form residuals of the continuity, renormalized continuity, momentum
and induction identities, evaluated on stored snapshots.

Space integrals use midpoint quadrature at the native storage locations,
time integrals the trapezoid rule over the snapshot times.  Each member's
absolute residual is divided by the largest absolute term appearing in
the identity for any member; the reported value is the maximum over the
family.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..eos import maxwell_tensor, pressure, viscous_stress
from ..geometry import Region
from ..operators import cell_to_face, curl, div, face_to_cell, grad, sym_grad
from .families import Family, TestFamily, curl_form, make_family

IDENTITIES = ("continuity", "renormalized", "momentum", "induction",
              "isolator_limit", "pmc_limit", "pec_limit", "isolator_type_limit")

COMPATIBLE = {
    "continuity": {Family.TORUS_TRIG, Family.FLUID_BUMP},
    "renormalized": {Family.TORUS_TRIG, Family.FLUID_BUMP},
    "momentum": {Family.FLUID_BUMP, Family.TORUS_TRIG},
    "induction": {Family.TORUS_TRIG, Family.FLUID_BUMP},
    "isolator_limit": {Family.CURL_FREE_EXT},
    "pmc_limit": {Family.FLUID_BUMP},
    "pec_limit": {Family.CLOSURE},
    "isolator_type_limit": {Family.FLUID_BUMP},
}

DEFAULT_FAMILY = {
    "continuity": Family.TORUS_TRIG, "renormalized": Family.TORUS_TRIG, "momentum": Family.FLUID_BUMP,
    "induction": Family.TORUS_TRIG, "isolator_limit": Family.CURL_FREE_EXT, "pmc_limit": Family.FLUID_BUMP,
    "pec_limit": Family.CLOSURE, "isolator_type_limit": Family.FLUID_BUMP,
}

# limit identity certified by each penalized scenario
SCENARIO_IDENTITY = {"isolator": "isolator_limit", "pmc": "pmc_limit", "pec": "pec_limit",
                     "isolator_type": "isolator_type_limit"}


class FamilyMismatch(ValueError):
    pass


@dataclass(frozen=True)
class Renormalization:
    """``b`` with bounded ``b'``: ``ratio`` is ``rho/(1+rho)``, ``cutoff`` a smoothed ``min(rho, k)``."""

    kind: str = "ratio"
    k: float = 1.0
    delta: float = 0.1

    def b(self, rho):
        if self.kind == "ratio":
            return rho / (1.0 + rho)
        s = rho - self.k
        t = np.clip((s + self.delta) / (2 * self.delta), 0.0, 1.0)
        Q = np.where(s > self.delta, s, 2 * self.delta * (t ** 3 - 0.5 * t ** 4))
        return rho - Q

    def db(self, rho):
        if self.kind == "ratio":
            return 1.0 / (1.0 + rho) ** 2
        t = np.clip((rho - self.k + self.delta) / (2 * self.delta), 0.0, 1.0)
        return 1.0 - t * t * (3 - 2 * t)


DEFAULT_RENORMALIZATIONS = (Renormalization("ratio"), Renormalization("cutoff", 1.0, 0.1))


@dataclass
class WeakResult:
    which: str
    family: str
    residual: float
    per_member: list = field(default_factory=list)


def _trapezoid_weights(times: np.ndarray) -> np.ndarray:
    w = np.zeros_like(times)
    dt = np.diff(times)
    w[:-1] += 0.5 * dt
    w[1:] += 0.5 * dt
    return w


class _CachedForcing:
    """Memoizes source evaluations by time (they are reused for every member)."""

    def __init__(self, forcing):
        self._f = forcing
        self._cache = {}

    def _get(self, name, t):
        key = (name, t)
        if key not in self._cache:
            self._cache[key] = getattr(self._f, name)(t)
        return self._cache[key]

    def rho(self, t):
        return self._get("rho", t)

    def m(self, t):
        return self._get("m", t)

    def emf(self, t):
        return self._get("emf", t)


class _Locations:
    """Coordinates and domain masks at cells, faces and edges."""

    def __init__(self, grid, R_outer):
        self.grid = grid
        self.cells = grid.cell_centers()
        self.faces = [grid.face_centers(a) for a in range(grid.d)]
        self.edges = [grid.edge_centers(a, b) for a, b in grid.pairs]
        inside = lambda X: np.sqrt(sum(x * x for x in X)) < R_outer  # noqa: E731
        self.in_cells = inside(self.cells)
        self.in_faces = np.stack([inside(X) for X in self.faces])
        self.in_edges = np.stack([inside(X) for X in self.edges])


def _face_values(phi, loc):
    """Component ``a`` of a vector test function sampled at face ``a`` locations."""
    return np.stack([phi.value(X)[a] for a, X in enumerate(loc.faces)])


def _edge_curl(phi, loc):
    return np.stack([curl_form(phi, X, [pair])[0] for X, pair in zip(loc.edges, loc.grid.pairs)])


def _normalized(residual, terms) -> tuple[float, float]:
    """``(|residual|, largest |term|)`` for one member."""
    return abs(residual), max((abs(v) for v in terms), default=0.0)


def weak_residual(snapshots, family: TestFamily | Family | str | None, which: str,
                  forcing=None, renormalizations=DEFAULT_RENORMALIZATIONS) -> WeakResult:
    """Maximum normalized residual of identity ``which`` over a test family.

    ``snapshots`` is a time-ordered list of states whose first entry is the
    initial state.  ``forcing`` (optional) supplies the source terms of a
    manufactured run, with the same interface the solver uses.
    """
    if which not in IDENTITIES:
        raise ValueError(f"unknown identity {which!r}; expected one of {IDENTITIES}")
    snaps = list(snapshots)
    if len(snaps) < 2:
        raise ValueError("need at least two snapshots (initial and final)")
    times = np.array([s.t for s in snaps])
    if np.any(np.diff(times) <= 0):
        raise ValueError("snapshot times must be strictly increasing")
    model = snaps[0].model
    region = model.region
    kind = "scalar" if which in ("continuity", "renormalized") else "vector"
    if family is None:
        family = DEFAULT_FAMILY[which]
    if not isinstance(family, TestFamily):
        family = make_family(family, region, model.coeffs.width, kind)
    if family.tag not in COMPATIBLE[which]:
        raise FamilyMismatch(f"family {family.tag.value} is not admissible for {which}")
    if family.kind != kind:
        raise FamilyMismatch(f"{which} needs {kind} test functions, family has {family.kind}")

    loc = _Locations(model.grid, region.R_outer)
    w = _trapezoid_weights(times)
    if forcing is not None:
        forcing = _CachedForcing(forcing)
    if which == "continuity":
        per = _continuity(snaps, family, loc, w, forcing)
    elif which == "renormalized":
        per = []
        for rn in renormalizations:
            per.extend(_renormalized(snaps, family, loc, w, forcing, rn))
    elif which == "momentum":
        per = _momentum(snaps, family, loc, w, forcing)
    else:
        per = _induction(snaps, family, loc, w, forcing, which)
    scale = max((t for _, t in per), default=0.0)
    worst = max((r for r, _ in per), default=0.0)
    residual = 0.0 if scale == 0.0 else worst / scale
    per_member = [0.0 if scale == 0.0 else r / scale for r, _ in per]
    return WeakResult(which, family.tag.value, residual, per_member)


def _continuity(snaps, family, loc, w, forcing):
    vol = loc.grid.cell_volume
    out = []
    for phi in family.members:
        pc = phi.value(loc.cells)
        gf = np.stack([phi.grad(X)[a] for a, X in enumerate(loc.faces)])
        T1 = float(np.sum(snaps[-1].rho * pc) * vol)
        T0 = float(np.sum(snaps[0].rho * pc) * vol)
        flux = sum(wk * float(np.sum(s.m * gf)) * vol for wk, s in zip(w, snaps))
        src = 0.0
        if forcing is not None:
            src = sum(wk * float(np.sum(forcing.rho(s.t) * pc)) * vol for wk, s in zip(w, snaps))
        out.append(_normalized(T1 - T0 - flux - src, (T1, T0, flux, src)))
    return out


def _renormalized(snaps, family, loc, w, forcing, rn):
    grid = loc.grid
    vol, h = grid.cell_volume, grid.h
    per_snap = []
    for s in snaps:
        uc = face_to_cell(s.u)
        divu = div(s.u, h)
        b = rn.b(s.rho)
        db = rn.db(s.rho)
        S = forcing.rho(s.t) if forcing is not None else None
        per_snap.append((b, uc, (db * s.rho - b) * divu, db * S if S is not None else None))
    out = []
    for phi in family.members:
        pc = phi.value(loc.cells)
        gc = phi.grad(loc.cells)
        T1 = float(np.sum(per_snap[-1][0] * pc) * vol)
        T0 = float(np.sum(per_snap[0][0] * pc) * vol)
        adv = sum(wk * float(np.sum(b * np.sum(uc * gc, axis=0))) * vol
                  for wk, (b, uc, _, _) in zip(w, per_snap))
        comp = sum(wk * float(np.sum(c * pc)) * vol for wk, (_, _, c, _) in zip(w, per_snap))
        src = 0.0
        if forcing is not None:
            src = sum(wk * float(np.sum(S * pc)) * vol for wk, (_, _, _, S) in zip(w, per_snap))
        R = T1 - T0 - adv + comp - src
        out.append(_normalized(R, (T1, T0, adv, comp, src)))
    return out


def _momentum(snaps, family, loc, w, forcing):
    grid = loc.grid
    d, h, vol = grid.d, grid.h, grid.cell_volume
    model = snaps[0].model
    co = model.coeffs
    gmu_c = face_to_cell(grad(co.mu, h))
    fields = []
    for s in snaps:
        mc, uc, Hc = face_to_cell(s.m), face_to_cell(s.u), face_to_cell(s.H)
        conv = np.einsum("a...,b...->ab...", mc, uc)
        p = pressure(s.rho, model.eos)
        S = viscous_stress(sym_grad(s.u, h), co.nu, co.lam, d)
        M = maxwell_tensor(Hc, co.mu)
        # curl H x B = div M - |H|^2/2 grad mu
        corr = -0.5 * np.sum(Hc * Hc, axis=0) * gmu_c
        fric = cell_to_face(co.beta) * s.u
        fields.append((conv - S - M, p, corr, fric, s))
    out = []
    for phi in family.members:
        J = phi.jac(loc.cells)
        divphi = sum(J[a, a] for a in range(d))
        pc = phi.value(loc.cells)
        pf = _face_values(phi, loc)
        T1 = float(np.sum(snaps[-1].m * pf) * vol)
        T0 = float(np.sum(snaps[0].m * pf) * vol)
        flux = pres = lor = fr = src = 0.0
        for wk, (Tn, p, corr, fric, s) in zip(w, fields):
            flux += wk * float(np.sum(Tn * J)) * vol
            pres += wk * float(np.sum(p * divphi)) * vol
            lor += wk * float(np.sum(corr * pc)) * vol
            fr += wk * float(np.sum(fric * pf)) * vol
            if forcing is not None:
                src += wk * float(np.sum(forcing.m(s.t) * pf)) * vol
        R = T1 - T0 - flux - pres - lor + fr - src
        out.append(_normalized(R, (T1, T0, flux, pres, lor, fr, src)))
    return out


def _wedge(X, Y, pairs):
    return np.stack([X[a] * Y[b] - X[b] * Y[a] for a, b in pairs])


def _induction(snaps, family, loc, w, forcing, which):
    grid = loc.grid
    h, vol, pairs = grid.h, grid.cell_volume, grid.pairs
    model = snaps[0].model
    limit = which != "induction"
    fluid = (model.region.labels == Region.FLUID) if limit else None
    eta_e = model.eta_edge
    rhs_cells = loc.in_cells if limit else np.ones_like(loc.in_cells)
    rhs_edges = loc.in_edges if limit else np.ones_like(loc.in_edges)
    lhs_faces = loc.in_faces if (limit and which != "isolator_limit") else np.ones_like(loc.in_faces)
    fields = []
    for s in snaps:
        uc = face_to_cell(s.u)
        if limit:
            uc = uc * fluid
        adv = _wedge(face_to_cell(s.B), uc, pairs) * rhs_cells
        res = eta_e * curl(s.H, h) * rhs_edges
        fields.append((adv, res, s))
    out = []
    for phi in family.members:
        pf = _face_values(phi, loc) * lhs_faces
        cc = curl_form(phi, loc.cells, pairs)
        ce = _edge_curl(phi, loc)
        T1 = float(np.sum(snaps[-1].B * pf) * vol)
        T0 = float(np.sum(snaps[0].B * pf) * vol)
        A = Rs = src = 0.0
        for wk, (adv, res, s) in zip(w, fields):
            A += wk * float(np.sum(adv * cc)) * vol
            Rs += wk * float(np.sum(res * ce)) * vol
            if forcing is not None:
                src += wk * float(np.sum(forcing.emf(s.t) * ce)) * vol
        R = T1 - T0 + A + Rs - src
        out.append(_normalized(R, (T1, T0, A, Rs, src)))
    return out


def certify_all(snapshots, forcing=None) -> list[WeakResult]:
    """Every smooth-solution identity over each admissible family, plus the
    limit identity of the run's scenario."""
    snaps = list(snapshots)
    tag = snaps[0].model.coeffs.scenario.tag.value
    out = []
    for which in ("continuity", "renormalized", "momentum", "induction"):
        for fam in sorted(COMPATIBLE[which], key=lambda f: f.value):
            out.append(weak_residual(snaps, fam, which, forcing))
    if tag in SCENARIO_IDENTITY:
        out.append(weak_residual(snaps, None, SCENARIO_IDENTITY[tag], forcing))
    return out
