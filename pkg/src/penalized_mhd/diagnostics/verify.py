"""Operator identity and truncation checks on random and smooth fields."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..geometry import build_grid
from ..operators import curl, curl_adjoint, div, dplus, gaffney_ratio, grad, l2

IDENTITY_TOL = 1e-13


@dataclass
class OperatorReport:
    d: int
    n: int
    samples: int
    # worst relative defect per identity
    defects: dict = field(default_factory=dict)
    truncation_order: float = float("nan")
    gaffney_max: float = float("nan")
    gaffney_finite: bool = False
    gaffney_samples: int = 0

    @property
    def identities_ok(self) -> bool:
        return all(v <= IDENTITY_TOL for v in self.defects.values())

    @property
    def ok(self) -> bool:
        return self.identities_ok and self.gaffney_finite and self.truncation_order >= 1.8

    def lines(self) -> list[str]:
        out = [f"operator suite: d={self.d} n={self.n} random fields={self.samples}"]
        for k, v in self.defects.items():
            out.append(f"  {k:<24s} max relative defect {v:.3e} (tol {IDENTITY_TOL:.0e})")
        out.append(f"  derivative truncation order {self.truncation_order:.3f}")
        out.append(f"  Gaffney ratio over {self.gaffney_samples} band-limited fields: max {self.gaffney_max:.4f}"
                   f" ({'finite' if self.gaffney_finite else 'NOT finite'})")
        return out


def _inner(a, b) -> float:
    return float(np.sum(a * b))


def identity_defects(d: int, n: int, samples: int, rng: np.random.Generator, L: float = 1.0) -> dict:
    """Worst relative defects of ``div curl^T = 0``, ``curl grad = 0`` and the two adjoint pairs."""
    h = build_grid(d, L, n).h
    npair = d * (d - 1) // 2
    worst = {"div_curl": 0.0, "curl_grad": 0.0, "grad_div_adjoint": 0.0, "curl_adjoint": 0.0}
    for _ in range(samples):
        p = rng.standard_normal((n,) * d)
        F = rng.standard_normal((d,) + (n,) * d)
        W = rng.standard_normal((npair,) + (n,) * d)
        # scale each defect by the size of the terms it cancels
        worst["div_curl"] = max(worst["div_curl"],
                                np.max(np.abs(div(curl_adjoint(W, h), h))) * h * h / np.max(np.abs(W)))
        worst["curl_grad"] = max(worst["curl_grad"],
                                 np.max(np.abs(curl(grad(p, h), h))) * h * h / np.max(np.abs(p)))
        g = grad(p, h)
        lhs, rhs = _inner(g, F), -_inner(p, div(F, h))
        scale = np.sqrt(_inner(g, g) * _inner(F, F))
        worst["grad_div_adjoint"] = max(worst["grad_div_adjoint"], abs(lhs - rhs) / scale)
        C = curl(F, h)
        lhs, rhs = _inner(C, W), _inner(F, curl_adjoint(W, h))
        scale = np.sqrt(_inner(C, C) * _inner(W, W))
        worst["curl_adjoint"] = max(worst["curl_adjoint"], abs(lhs - rhs) / scale)
    return {k: float(v) for k, v in worst.items()}


def truncation_order(d: int = 2, n: int = 32, L: float = 1.0) -> float:
    """Observed order of the staggered difference ``dplus`` on a smooth field."""
    errs = []
    for m in (n, 2 * n):
        g = build_grid(d, L, m)
        X = g.cell_centers()
        f = np.sin(np.pi * X[0] / L) * np.cos(np.pi * X[-1] / L)
        Xf = g.face_centers(0)
        exact = np.pi / L * np.cos(np.pi * Xf[0] / L) * np.cos(np.pi * Xf[-1] / L)
        errs.append(l2(dplus(f, 0, g.h) - exact, g.h, d))
    return float(np.log2(errs[0] / errs[1]))


def band_limited_field(d: int, n: int, rng: np.random.Generator, kmax: int = 4) -> np.ndarray:
    """Real random face vector field with Fourier modes ``|k_i| <= kmax``."""
    out = np.zeros((d,) + (n,) * d)
    for a in range(d):
        spec = np.zeros((n,) * d, dtype=complex)
        idx = np.ix_(*[np.r_[0:kmax + 1, n - kmax:n]] * d)
        shape = spec[idx].shape
        spec[idx] = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
        out[a] = np.real(np.fft.ifftn(spec)) * n ** d
    return out


def gaffney_survey(d: int, n: int, samples: int, rng: np.random.Generator, L: float = 1.0) -> np.ndarray:
    h = build_grid(d, L, n).h
    return np.array([gaffney_ratio(band_limited_field(d, n, rng), h) for _ in range(samples)])


def operator_suite(d: int = 2, n: int = 32, samples: int = 100, gaffney_samples: int = 200,
                   seed: int = 0, L: float = 1.0) -> OperatorReport:
    rng = np.random.default_rng(seed)
    rep = OperatorReport(d, n, samples)
    rep.defects = identity_defects(d, n, samples, rng, L)
    rep.truncation_order = truncation_order(d, n, L)
    ratios = gaffney_survey(d, n, gaffney_samples, rng, L)
    rep.gaffney_samples = gaffney_samples
    rep.gaffney_finite = bool(np.all(np.isfinite(ratios)))
    rep.gaffney_max = float(np.max(ratios)) if ratios.size else float("nan")
    return rep
