"""Penalized transport coefficients β, ν, λ, μ, η.

Every coefficient takes one constant value in the fluid annulus, one in the
immersed solid and one in the exterior; the three plateaus are joined by a
C¹ smoothstep across bands of width ``w`` centred on the two interfaces.
A single dial ``eps`` drives every singular value: diverging entries are
``1/eps`` and vanishing ones are ``eps``.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .geometry import RegionMap, mollifier

NAMES = ("beta", "nu", "lam", "mu", "eta")


class CoefficientError(ValueError):
    pass


class Tag(str, enum.Enum):
    ISOLATOR = "isolator"
    PMC = "pmc"
    PEC = "pec"
    ISOLATOR_TYPE = "isolator_type"
    NONE = "none"

    @classmethod
    def parse(cls, value) -> "Tag":
        if isinstance(value, cls):
            return value
        key = str(value).strip().lower().replace("-", "_")
        try:
            return cls(key)
        except ValueError:
            raise CoefficientError(
                f"unknown scenario {value!r}; expected one of {[t.value for t in cls]}"
            ) from None


@dataclass(frozen=True)
class Scenario:
    """Scenario tag plus the ε-independent material constants.

    ``mu_ext`` is the fixed exterior permeability used by the isolator limit,
    ``eta_ext`` the fixed exterior resistivity used by the PMC limit.
    """

    tag: Tag = Tag.NONE
    nu_F: float = 0.02
    lambda_F: float = 0.0
    mu_F: float = 1.0
    mu_int: float = 2.0
    eta_F: float = 0.02
    eta_int: float = 0.05
    mu_ext: float = 1.0
    eta_ext: float = 0.02

    def __post_init__(self):
        object.__setattr__(self, "tag", Tag.parse(self.tag))
        positive = ("nu_F", "mu_F", "mu_int", "eta_F", "eta_int", "mu_ext", "eta_ext")
        for name in positive:
            if not getattr(self, name) > 0:
                raise CoefficientError(f"{name} must be > 0, got {getattr(self, name)}")
        if not self.lambda_F >= 0:
            raise CoefficientError(f"lambda_F must be >= 0, got {self.lambda_F}")


@dataclass(frozen=True)
class CoefficientTriple:
    F: float
    int: float
    ext: float

    def __post_init__(self):
        for v in (self.F, self.int, self.ext):
            if not (np.isfinite(v) and v >= 0):
                raise CoefficientError(f"coefficient values must be finite and >= 0: {self}")

    @property
    def lo(self) -> float:
        return min(self.F, self.int, self.ext)

    @property
    def hi(self) -> float:
        return max(self.F, self.int, self.ext)


def schedule(scenario: Scenario, eps: float, d: int = 2) -> dict[str, CoefficientTriple]:
    """Plateau values of the five coefficients at penalization level ``eps``."""
    if not 0.0 < eps <= 1.0:
        raise CoefficientError(f"epsilon must lie in (0, 1], got {eps}")
    s = scenario
    if s.tag is Tag.NONE:
        return {
            "beta": CoefficientTriple(0.0, 0.0, 0.0),
            "nu": CoefficientTriple(s.nu_F, s.nu_F, s.nu_F),
            "lam": CoefficientTriple(s.lambda_F, s.lambda_F, s.lambda_F),
            "mu": CoefficientTriple(s.mu_F, s.mu_F, s.mu_F),
            "eta": CoefficientTriple(s.eta_F, s.eta_F, s.eta_F),
        }

    big = 1.0 / eps
    # d = 3 needs divergent shear viscosity in the solids, d = 2 divergent bulk viscosity
    nu_solid = big if d == 3 else s.nu_F
    lam_solid = big if d == 2 else s.lambda_F
    mu_ext, eta_ext = {
        Tag.ISOLATOR: (s.mu_ext, big),
        Tag.PMC: (big, s.eta_ext),
        Tag.PEC: (eps, eps),
        Tag.ISOLATOR_TYPE: (eps, big),
    }[s.tag]
    return {
        "beta": CoefficientTriple(0.0, big, big),
        "nu": CoefficientTriple(s.nu_F, nu_solid, nu_solid),
        "lam": CoefficientTriple(s.lambda_F, lam_solid, lam_solid),
        "mu": CoefficientTriple(s.mu_F, s.mu_int, mu_ext),
        "eta": CoefficientTriple(s.eta_F, s.eta_int, eta_ext),
    }


@dataclass(frozen=True)
class CoefficientField:
    beta: np.ndarray
    nu: np.ndarray
    lam: np.ndarray
    mu: np.ndarray
    eta: np.ndarray
    triples: dict = field(repr=False)
    width: float
    eps: float | None = None
    scenario: Scenario | None = None

    def __getitem__(self, name: str) -> np.ndarray:
        return getattr(self, name)

    def is_uniform(self, name: str) -> bool:
        t = self.triples[name]
        return t.F == t.int == t.ext


def blend(region: RegionMap, triple: CoefficientTriple, w: float) -> np.ndarray:
    """Two-band smoothstep blend of one coefficient triple over the grid."""
    q_in = mollifier(region.dist_inner, w)
    q_out = mollifier(region.dist_outer, w)
    # a*(1-q) + b*q reproduces both plateau values bit-exactly
    inner = triple.int * (1.0 - q_in) + triple.F * q_in
    outer = triple.F * (1.0 - q_out) + triple.ext * q_out
    value = np.where(q_in < 1.0, inner, outer)
    return np.clip(value, triple.lo, triple.hi)


def build_coefficient_field(region: RegionMap, triples: dict[str, CoefficientTriple], w: float,
                            eps: float | None = None, scenario: Scenario | None = None) -> CoefficientField:
    h = region.grid.h
    if w < 2.0 * h * (1.0 - 1e-12):
        raise CoefficientError(f"transition width w={w} must be at least 2h={2 * h}")
    if region.has_inner and region.R_outer - region.R_inner < w:
        raise CoefficientError("transition bands overlap: need R_outer - R_inner >= w")
    if region.R_outer + 0.5 * w >= region.grid.L:
        raise CoefficientError("outer transition band reaches the periodic seam")
    missing = set(NAMES) - set(triples)
    if missing:
        raise CoefficientError(f"missing coefficient triples: {sorted(missing)}")

    fields = {name: blend(region, triples[name], w) for name in NAMES}
    for name in ("mu", "eta"):
        if np.any(fields[name] <= 0):
            raise CoefficientError(f"{name} must be strictly positive everywhere")
    if np.any(fields["nu"] <= 0):
        raise CoefficientError("nu must be strictly positive everywhere")
    return CoefficientField(triples=dict(triples), width=float(w), eps=eps, scenario=scenario, **fields)


def penalized_coefficients(region: RegionMap, scenario: Scenario, eps: float,
                           transition_cells: float = 4.0) -> CoefficientField:
    """Convenience wrapper: schedule plus blend with ``w = transition_cells * h``."""
    triples = schedule(scenario, eps, region.grid.d)
    return build_coefficient_field(region, triples, transition_cells * region.grid.h,
                                   eps=eps, scenario=scenario)
