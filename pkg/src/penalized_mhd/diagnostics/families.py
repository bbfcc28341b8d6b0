"""Analytic test functions for the weak-form certifier.

Scalars expose ``value`` and ``grad``; vectors expose ``value`` and ``jac``
with ``jac[a][b] = d_b phi_a``.  Points are given as a tuple of coordinate
arrays of equal shape.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np


class Family(str, enum.Enum):
    TORUS_TRIG = "torus_trig"
    FLUID_BUMP = "fluid_bump"
    CURL_FREE_EXT = "curl_free_ext"
    CLOSURE = "closure"


@dataclass(frozen=True)
class TrigScalar:
    """``cos(pi k.x / L + phase)``; ``k = 0`` gives the constant 1 (phase 0)."""

    k: tuple
    phase: float
    L: float

    def _arg(self, X):
        return sum(np.pi * kk / self.L * x for kk, x in zip(self.k, X)) + self.phase

    def value(self, X):
        return np.cos(self._arg(X)) * np.ones_like(X[0])

    def grad(self, X):
        s = np.sin(self._arg(X))
        return np.stack([-np.pi * kk / self.L * s * np.ones_like(X[0]) for kk in self.k])

    def hess(self, X):
        c = np.cos(self._arg(X))
        w = [np.pi * kk / self.L for kk in self.k]
        d = len(self.k)
        return np.stack([np.stack([-w[a] * w[b] * c * np.ones_like(X[0]) for b in range(d)])
                         for a in range(d)])


@dataclass(frozen=True)
class RadialBump:
    """``(1 - s²)³`` with ``s`` mapping ``[r0, r1]`` to ``[-1, 1]``; C² with compact support."""

    r0: float
    r1: float

    def _s(self, r):
        mid, half = 0.5 * (self.r0 + self.r1), 0.5 * (self.r1 - self.r0)
        return (r - mid) / half, half

    def value(self, r):
        s, _ = self._s(r)
        return np.where(np.abs(s) < 1, (1 - s * s) ** 3, 0.0)

    def deriv(self, r):
        s, half = self._s(r)
        return np.where(np.abs(s) < 1, -6 * s * (1 - s * s) ** 2 / half, 0.0)


@dataclass(frozen=True)
class BumpScalar:
    bump: RadialBump
    trig: TrigScalar

    def value(self, X):
        r = np.sqrt(sum(x * x for x in X))
        return self.bump.value(r) * self.trig.value(X)

    def grad(self, X):
        r = np.sqrt(sum(x * x for x in X))
        safe = np.where(r > 0, r, 1.0)
        db = self.bump.deriv(r)
        g = self.trig.value(X)
        gg = self.trig.grad(X)
        b = self.bump.value(r)
        return np.stack([db * x / safe * g + b * gg[a] for a, x in enumerate(X)])


@dataclass(frozen=True)
class AxisVector:
    """``e_axis * scalar``."""

    axis: int
    scalar: object
    d: int

    def value(self, X):
        out = np.zeros((self.d,) + X[0].shape)
        out[self.axis] = self.scalar.value(X)
        return out

    def jac(self, X):
        out = np.zeros((self.d, self.d) + X[0].shape)
        out[self.axis] = self.scalar.grad(X)
        return out


@dataclass(frozen=True)
class GradVector:
    """Gradient of a torus trigonometric scalar: curl-free everywhere."""

    scalar: TrigScalar

    def value(self, X):
        return self.scalar.grad(X)

    def jac(self, X):
        return self.scalar.hess(X)


def curl_form(phi, X, pairs) -> np.ndarray:
    """``d_a phi_b - d_b phi_a`` for each axis pair."""
    J = phi.jac(X)
    return np.stack([J[b, a] - J[a, b] for a, b in pairs])


def _wavevectors(d: int):
    if d == 2:
        return [(1, 0), (0, 1), (1, 1), (1, -1)]
    return [(1, 0, 0), (0, 1, 0), (0, 0, 1), (1, 1, 0), (0, 1, 1)]


def trig_scalars(d: int, L: float, include_constant: bool = True) -> list[TrigScalar]:
    out = [TrigScalar((0,) * d, 0.0, L)] if include_constant else []
    for k in _wavevectors(d):
        out.append(TrigScalar(k, 0.0, L))
        out.append(TrigScalar(k, -0.5 * np.pi, L))
    return out


def fluid_bump_radii(region, width: float) -> tuple[float, float]:
    """Support of the bump family: the fluid annulus minus the transition bands and one cell."""
    pad = 0.5 * width + region.grid.h
    return region.R_inner + pad, region.R_outer - pad


@dataclass(frozen=True)
class TestFamily:
    tag: Family
    kind: str            # "scalar" or "vector"
    members: tuple
    # integrate only over r < R_outer (the closed fluid domain including the solid)
    restrict_to_domain: bool = False

    def __len__(self):
        return len(self.members)


def make_family(tag, region, width: float, kind: str = "vector") -> TestFamily:
    tag = Family(tag)
    grid = region.grid
    d, L = grid.d, grid.L
    if kind not in ("scalar", "vector"):
        raise ValueError("kind must be 'scalar' or 'vector'")
    if tag is Family.TORUS_TRIG:
        scal = trig_scalars(d, L)
        if kind == "scalar":
            return TestFamily(tag, kind, tuple(scal))
        return TestFamily(tag, kind, tuple(AxisVector(a, s, d) for a in range(d) for s in scal))
    r0, r1 = fluid_bump_radii(region, width)
    bump = RadialBump(r0, r1)
    bumps = [BumpScalar(bump, s) for s in trig_scalars(d, L)[:5]]
    if tag is Family.FLUID_BUMP:
        if kind == "scalar":
            return TestFamily(tag, kind, tuple(bumps))
        return TestFamily(tag, kind, tuple(AxisVector(a, s, d) for a in range(d) for s in bumps))
    if kind == "scalar":
        raise ValueError(f"family {tag.value} has vector members only")
    if tag is Family.CURL_FREE_EXT:
        consts = [AxisVector(a, TrigScalar((0,) * d, 0.0, L), d) for a in range(d)]
        grads = [GradVector(s) for s in trig_scalars(d, L, include_constant=False)]
        bumpv = [AxisVector(a, s, d) for a in range(d) for s in bumps]
        return TestFamily(tag, kind, tuple(consts + grads + bumpv))
    # CLOSURE: smooth on the closed domain, not vanishing on its boundary
    scal = trig_scalars(d, L)[:5]
    return TestFamily(tag, kind, tuple(AxisVector(a, s, d) for a in range(d) for s in scal),
                      restrict_to_domain=True)
