"""Preconditioned conjugate gradients for the SPD systems of the implicit stages."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
import scipy.sparse.linalg as spla


class SolverNonConvergence(RuntimeError):
    def __init__(self, what: str, residual: float, iterations: int):
        super().__init__(f"{what}: no convergence after {iterations} iterations "
                         f"(relative residual {residual:.3e})")
        self.what = what
        self.residual = residual
        self.iterations = iterations


@dataclass
class CGInfo:
    iterations: int
    residual: float


def pcg(apply_A: Callable[[np.ndarray], np.ndarray], b: np.ndarray, *,
        x0: np.ndarray | None = None,
        precond: Callable[[np.ndarray], np.ndarray] | np.ndarray | None = None,
        rtol: float = 1e-10, atol: float = 0.0, maxiter: int = 2000,
        what: str = "pcg") -> tuple[np.ndarray, CGInfo]:
    """Solve ``A x = b`` for symmetric positive (semi-)definite ``A``.

    ``precond`` is either a callable applying ``M^{-1}`` or an array holding
    the inverse diagonal (Jacobi).  Converged when ``|r| <= max(rtol |b|, atol)``.
    """
    if precond is None:
        apply_M = lambda r: r  # noqa: E731
    elif callable(precond):
        apply_M = precond
    else:
        inv_diag = precond
        apply_M = lambda r: inv_diag * r  # noqa: E731

    x = np.zeros_like(b) if x0 is None else x0.copy()
    r = b - apply_A(x) if x0 is not None else b.copy()
    bnorm = float(np.linalg.norm(b))
    target = max(rtol * bnorm, atol)
    rnorm = float(np.linalg.norm(r))
    if rnorm <= target or bnorm == 0.0:
        return x, CGInfo(0, rnorm / bnorm if bnorm else 0.0)

    z = apply_M(r)
    p = z.copy()
    rz = float(np.vdot(r, z))
    for it in range(1, maxiter + 1):
        Ap = apply_A(p)
        pAp = float(np.vdot(p, Ap))
        if pAp <= 0.0:
            break
        alpha = rz / pAp
        x += alpha * p
        r -= alpha * Ap
        rnorm = float(np.linalg.norm(r))
        if rnorm <= target:
            return x, CGInfo(it, rnorm / bnorm)
        z = apply_M(r)
        rz_new = float(np.vdot(r, z))
        p *= rz_new / rz
        p += z
        rz = rz_new
    raise SolverNonConvergence(what, rnorm / bnorm, maxiter)


class FactorCache:
    """Sparse LU of a recent system matrix, reused as a CG preconditioner.

    The implicit systems drift slowly from step to step (density and time step
    change a little), so an old factorization is an excellent preconditioner.
    It is rebuilt when the last solve needed more than ``refactor_after``
    iterations.
    """

    def __init__(self, refactor_after: int = 8):
        self.refactor_after = refactor_after
        self._lu = None
        self.last_iterations = None
        self.factorizations = 0

    def solve(self, A, b: np.ndarray, *, x0=None, rtol: float, maxiter: int, what: str):
        if self._lu is None or (self.last_iterations or 0) > self.refactor_after:
            self._lu = spla.splu(A.tocsc(), permc_spec="MMD_AT_PLUS_A")
            self.factorizations += 1
        x, info = pcg(lambda v: A @ v, b, x0=x0, precond=self._lu.solve, rtol=rtol,
                      maxiter=maxiter, what=what)
        self.last_iterations = info.iterations
        return x, info
