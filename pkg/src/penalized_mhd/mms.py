"""Manufactured smooth solution for the unpenalized 2-D system.

The exact fields are trigonometric on the torus ``[-1, 1)^2``; sympy derives
the source terms that make them an exact solution, and the solver runs with
those sources added.  Errors at the final time give the observed order.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
import sympy as sp

from .coefficients import Scenario, Tag, penalized_coefficients
from .eos import EosParams
from .geometry import build_grid, classify_regions
from .operators import curl_adjoint, l2
from .solver.model import Model, State
from .solver.run import RunConfig, Trajectory, integrate

x, y, t = sp.symbols("x y t", real=True)


@dataclass(frozen=True)
class ManufacturedSolution:
    """Exact ``rho``, ``u`` and potential ``A`` (with ``H = (d_y A, -d_x A)``)."""

    nu: float = 0.02
    lam: float = 0.0
    mu: float = 1.0
    eta: float = 0.02
    eos: EosParams = field(default_factory=lambda: EosParams(a=1.0, gamma=1.4))

    @cached_property
    def exprs(self) -> dict:
        pi = sp.pi
        rho = 1 + sp.Rational(1, 5) * sp.sin(pi * (x - t)) * sp.cos(pi * y)
        u = (sp.Rational(1, 10) + sp.Rational(3, 10) * sp.sin(pi * y) * sp.cos(t),
             sp.Rational(1, 5) * sp.sin(pi * x) * sp.cos(pi * y - t))
        A = sp.Rational(1, 5) * sp.cos(pi * x + t) * sp.sin(pi * y)
        mu, nu, lam, eta = (sp.nsimplify(v) for v in (self.mu, self.nu, self.lam, self.eta))
        a, gamma = sp.nsimplify(self.eos.a), sp.nsimplify(self.eos.gamma)
        X = (x, y)

        H = (sp.diff(A, y), -sp.diff(A, x))
        B = tuple(mu * h for h in H)
        m = tuple(rho * ui for ui in u)
        p = a * rho ** gamma
        j = sp.diff(H[1], x) - sp.diff(H[0], y)

        div_u = sp.diff(u[0], x) + sp.diff(u[1], y)
        D = [[sp.Rational(1, 2) * (sp.diff(u[i], X[k]) + sp.diff(u[k], X[i])) for k in range(2)]
             for i in range(2)]
        S = [[2 * nu * D[i][k] + ((lam - nu) * div_u if i == k else 0) for k in range(2)]
             for i in range(2)]
        lorentz = (-j * B[1], j * B[0])

        s_rho = sp.diff(rho, t) + sum(sp.diff(m[k], X[k]) for k in range(2))
        s_m = tuple(
            sp.diff(m[i], t)
            + sum(sp.diff(m[i] * u[k], X[k]) for k in range(2))
            + sp.diff(p, X[i])
            - sum(sp.diff(S[i][k], X[k]) for k in range(2))
            - lorentz[i]
            for i in range(2))
        emf = u[0] * B[1] - u[1] * B[0]
        sigma = sp.diff(mu * A, t) - emf + eta * j
        return {"rho": rho, "m": m, "H": H, "A": A, "s_rho": s_rho, "s_m": s_m, "sigma": sigma}

    @cached_property
    def funcs(self) -> dict:
        e = self.exprs
        f = lambda expr: sp.lambdify((x, y, t), expr, "numpy", cse=True)  # noqa: E731
        return {
            "rho": f(e["rho"]), "m": [f(c) for c in e["m"]], "H": [f(c) for c in e["H"]],
            "A": f(e["A"]), "s_rho": f(e["s_rho"]), "s_m": [f(c) for c in e["s_m"]],
            "sigma": f(e["sigma"]),
        }


def _eval(fn, X, time):
    return np.broadcast_to(fn(X[0], X[1], time), X[0].shape).astype(float)


class ManufacturedForcing:
    """Source terms sampled at the native storage locations of one grid."""

    def __init__(self, sol: ManufacturedSolution, grid):
        self.sol = sol
        self.grid = grid
        self._cells = grid.cell_centers()
        self._faces = [grid.face_centers(a) for a in range(2)]
        self._corner = grid.edge_centers(0, 1)

    def rho(self, time: float) -> np.ndarray:
        return _eval(self.sol.funcs["s_rho"], self._cells, time)

    def m(self, time: float) -> np.ndarray:
        return np.stack([_eval(self.sol.funcs["s_m"][a], self._faces[a], time) for a in range(2)])

    def emf(self, time: float) -> np.ndarray:
        return _eval(self.sol.funcs["sigma"], self._corner, time)[None]


def exact_fields(sol: ManufacturedSolution, grid, time: float) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Exact ``rho`` (cells), ``m`` and ``H`` (faces).

    ``H`` is the discrete curl of the exact corner potential so that the
    initial field is exactly solenoidal; it differs from point values by O(h²).
    """
    f = sol.funcs
    rho = _eval(f["rho"], grid.cell_centers(), time)
    m = np.stack([_eval(f["m"][a], grid.face_centers(a), time) for a in range(2)])
    A = _eval(f["A"], grid.edge_centers(0, 1), time)
    H = curl_adjoint(A[None], grid.h)
    return rho, m, H


def manufactured_model(sol: ManufacturedSolution, n: int) -> Model:
    grid = build_grid(2, 1.0, n)
    region = classify_regions(grid, 0.7, 0.3)
    scen = Scenario(Tag.NONE, nu_F=sol.nu, lambda_F=sol.lam, mu_F=sol.mu, mu_int=sol.mu,
                    eta_F=sol.eta, eta_int=sol.eta, mu_ext=sol.mu, eta_ext=sol.eta)
    coeffs = penalized_coefficients(region, scen, 1.0)
    return Model(grid, region, coeffs, sol.eos)


@dataclass
class ManufacturedRun:
    n: int
    errors: dict
    trajectory: Trajectory
    forcing: ManufacturedForcing


def run_manufactured(n: int, T: float = 0.25, dt_coeff: float = 4.0, snapshot_every: int = 0,
                     sol: ManufacturedSolution | None = None) -> ManufacturedRun:
    """Run to ``T`` with ``dt = dt_coeff * h^2`` and return L² errors of rho, m, H."""
    sol = sol or ManufacturedSolution()
    model = manufactured_model(sol, n)
    grid = model.grid
    rho, m, H = exact_fields(sol, grid, 0.0)
    state = State(model, rho, m, model.mu_face * H, 0.0)
    forcing = ManufacturedForcing(sol, grid)
    dt = dt_coeff * grid.h ** 2
    steps = max(1, int(np.ceil(T / dt - 1e-9)))
    cfg = RunConfig(T=T, dt_fixed=T / steps, output_every=max(1, steps), snapshot_every=snapshot_every,
                    cg_tol=1e-12)
    traj = integrate(state, cfg, forcing)
    fin = traj.final
    rho_e, m_e, H_e = exact_fields(sol, grid, fin.t)
    h = grid.h
    errors = {
        "rho": l2(fin.rho - rho_e, h, 2),
        "m": l2(fin.m - m_e, h, 2),
        "H": l2(fin.H - H_e, h, 2),
    }
    return ManufacturedRun(n, errors, traj, forcing)


def observed_orders(coarse: dict, fine: dict, ratio: float = 2.0) -> dict:
    return {k: float(np.log(coarse[k] / fine[k]) / np.log(ratio)) for k in coarse}


def convergence_study(ns=(64, 128), **kw) -> dict:
    runs = [run_manufactured(n, **kw) for n in ns]
    out = {"n": list(ns), "errors": [r.errors for r in runs], "orders": []}
    for a, b in zip(runs, runs[1:]):
        out["orders"].append(observed_orders(a.errors, b.errors, b.n / a.n))
    return out
