"""Second-order staggered difference operators on the periodic grid.

Field layouts (``n`` cells per axis, ``d`` dimensions):

* cell scalar: ``(n,)*d``
* face vector: ``(d,) + (n,)*d``; component ``a`` sits at ``+h/2`` along ``a``
* edge field:  ``(P,) + (n,)*d`` with one slot per axis pair in ``grid.pairs``;
  the slot for ``(a, b)`` sits at ``+h/2`` along ``a`` and ``b``.  In 2-D this
  is the single corner scalar, in 3-D the pairs ``(0,1), (0,2), (1,2)`` hold
  ``curl_z, -curl_y, curl_x``.

Every operator is built from the two one-sided differences ``dplus`` and
``dminus`` so that summation by parts holds exactly and ``div(curl_adjoint(.))``
vanishes by construction.
"""

from __future__ import annotations

import numpy as np
import scipy.sparse as sp

from .geometry import Grid


def shift(f: np.ndarray, axis: int, k: int = 1) -> np.ndarray:
    """Periodic shift: ``shift(f, a, k)[i] == f[i + k]`` along ``axis``."""
    return np.roll(f, -k, axis=axis)


def dplus(f: np.ndarray, axis: int, h: float) -> np.ndarray:
    return (shift(f, axis, 1) - f) / h


def dminus(f: np.ndarray, axis: int, h: float) -> np.ndarray:
    return (f - shift(f, axis, -1)) / h


def grad(f: np.ndarray, h: float) -> np.ndarray:
    """Cell scalar -> face vector."""
    return np.stack([dplus(f, a, h) for a in range(f.ndim)])


def div(F: np.ndarray, h: float) -> np.ndarray:
    """Face vector -> cell scalar; the negative adjoint of :func:`grad`."""
    out = dminus(F[0], 0, h)
    for a in range(1, F.shape[0]):
        out = out + dminus(F[a], a, h)
    return out


def _pairs(d: int) -> list[tuple[int, int]]:
    return [(a, b) for a in range(d) for b in range(a + 1, d)]


def curl(H: np.ndarray, h: float) -> np.ndarray:
    """Face vector -> edge field, ``W_ab = d_a H_b - d_b H_a``."""
    d = H.shape[0]
    return np.stack([dplus(H[b], a, h) - dplus(H[a], b, h) for a, b in _pairs(d)])


def curl_adjoint(W: np.ndarray, h: float) -> np.ndarray:
    """Edge field -> face vector, the exact adjoint of :func:`curl`."""
    d = W.ndim - 1
    out = np.zeros((d,) + W.shape[1:])
    for p, (a, b) in enumerate(_pairs(d)):
        out[a] += dminus(W[p], b, h)
        out[b] -= dminus(W[p], a, h)
    return out


def curl2_vec(H: np.ndarray, h: float) -> np.ndarray:
    """2-D scalar curl ``d_x H_y - d_y H_x`` at cell corners."""
    return dplus(H[1], 0, h) - dplus(H[0], 1, h)


def curl2_scal(psi: np.ndarray, h: float) -> np.ndarray:
    """2-D vector curl ``(d_y psi, -d_x psi)`` of a corner scalar, on faces."""
    return np.stack([dminus(psi, 1, h), -dminus(psi, 0, h)])


def curl3(H: np.ndarray, h: float) -> np.ndarray:
    """3-D curl as a conventional ``(x, y, z)`` edge vector."""
    W = curl(H, h)
    return np.stack([W[2], -W[1], W[0]])


def curl3_adjoint(E: np.ndarray, h: float) -> np.ndarray:
    """3-D curl of a conventional edge vector ``(E_x, E_y, E_z)``, on faces."""
    return curl_adjoint(np.stack([E[2], -E[1], E[0]]), h)


# --- averaging between staggered locations ---------------------------------

def cell_to_face(c: np.ndarray) -> np.ndarray:
    return np.stack([0.5 * (c + shift(c, a)) for a in range(c.ndim)])


def cell_to_edge(c: np.ndarray) -> np.ndarray:
    out = []
    for a, b in _pairs(c.ndim):
        ca = shift(c, a)
        out.append(0.25 * (c + ca + shift(c, b) + shift(ca, b)))
    return np.stack(out)


def face_to_cell(F: np.ndarray) -> np.ndarray:
    """Face vector -> cell-centred vector by two-point averaging."""
    return np.stack([0.5 * (F[a] + shift(F[a], a, -1)) for a in range(F.shape[0])])


def face_to_edge(F: np.ndarray, pair: tuple[int, int]) -> tuple[np.ndarray, np.ndarray]:
    """Components ``a`` and ``b`` of a face vector averaged onto edge ``(a, b)``."""
    a, b = pair
    return 0.5 * (F[a] + shift(F[a], b)), 0.5 * (F[b] + shift(F[b], a))


def edge_to_face_adjoint(W: np.ndarray, along: int) -> np.ndarray:
    """Adjoint of a two-point average taken along ``along`` (edge -> face)."""
    return 0.5 * (W + shift(W, along, -1))


def edge_to_cell(W: np.ndarray) -> np.ndarray:
    out = []
    for p, (a, b) in enumerate(_pairs(W.ndim - 1)):
        w = W[p]
        wa = shift(w, a, -1)
        out.append(0.25 * (w + wa + shift(w, b, -1) + shift(wa, b, -1)))
    return np.stack(out)


# --- strain ---------------------------------------------------------------

def strain_native(u: np.ndarray, h: float) -> tuple[np.ndarray, np.ndarray]:
    """Symmetric gradient at its native locations.

    Returns the diagonal ``D_aa`` at cell centres, shape ``(d,)+(n,)*d``, and
    the off-diagonal ``D_ab`` on edges, shape ``(P,)+(n,)*d``.
    """
    d = u.shape[0]
    diag = np.stack([dminus(u[a], a, h) for a in range(d)])
    off = np.stack([0.5 * (dplus(u[a], b, h) + dplus(u[b], a, h)) for a, b in _pairs(d)])
    return diag, off


def sym_grad(u: np.ndarray, h: float) -> np.ndarray:
    """Symmetric gradient as a cell-centred ``(d, d) + (n,)*d`` tensor."""
    d = u.shape[0]
    diag, off = strain_native(u, h)
    off_c = edge_to_cell(off)
    D = np.zeros((d, d) + u.shape[1:])
    for a in range(d):
        D[a, a] = diag[a]
    for p, (a, b) in enumerate(_pairs(d)):
        D[a, b] = off_c[p]
        D[b, a] = off_c[p]
    return D


def grad_full(H: np.ndarray, h: float) -> list[np.ndarray]:
    """All ``d*d`` one-sided derivatives ``d_b H_a`` at their native locations."""
    d = H.shape[0]
    return [dminus(H[a], a, h) if a == b else dplus(H[a], b, h) for a in range(d) for b in range(d)]


def l2(f, h: float, d: int) -> float:
    """Discrete L² norm over the torus; ``f`` may be a list of native-location arrays."""
    if isinstance(f, (list, tuple)):
        return float(np.sqrt(sum(np.sum(np.square(g)) for g in f) * h ** d))
    return float(np.sqrt(np.sum(np.square(f)) * h ** d))


def gaffney_ratio(H: np.ndarray, h: float) -> float:
    """``|grad H| / (|H| + |curl H| + |div H|)`` in discrete L² norms.

    Returns ``nan`` for the zero field, where the ratio is undefined.
    """
    d = H.shape[0]
    num = l2(grad_full(H, h), h, d)
    den = l2(H, h, d) + l2(curl(H, h), h, d) + l2(div(H, h), h, d)
    if den == 0.0:
        return float("nan")
    return num / den


# --- constant-coefficient inverse Laplacian ------------------------------

def laplacian_symbol(n: int, d: int, h: float) -> np.ndarray:
    k = 2.0 * np.pi * np.fft.fftfreq(n)
    one = (2.0 * np.cos(k) - 2.0) / h ** 2
    sym = np.zeros((n,) * d)
    for a in range(d):
        shape = [1] * d
        shape[a] = n
        sym = sym + one.reshape(shape)
    return sym


def solve_poisson_fft(r: np.ndarray, h: float) -> np.ndarray:
    """Mean-zero solution of ``div(grad(phi)) = r - mean(r)``."""
    n, d = r.shape[0], r.ndim
    sym = laplacian_symbol(n, d, h)
    rhat = np.fft.fftn(r)
    sym.flat[0] = 1.0
    phat = rhat / sym
    phat.flat[0] = 0.0
    return np.real(np.fft.ifftn(phat))


def remove_divergence(B: np.ndarray, h: float) -> np.ndarray:
    """Constant-coefficient clean-up ``B - grad(lap^-1 div B)``."""
    return B - grad(solve_poisson_fft(div(B, h), h), h)


# --- sparse matrix forms (same stencils, used by the implicit solvers) ----

class SparseOps:
    """CSR versions of the stencils above for one grid.

    Vectors are flattened in C order; a face vector stacks its ``d``
    components, an edge field its ``P`` pair slots.
    """

    def __init__(self, grid: Grid):
        self.grid = grid
        self.N = grid.n ** grid.d
        eye = sp.identity(self.N, format="csr")
        # forward differences along each axis
        self.P = [((self._shift(a) - eye) / grid.h).tocsr() for a in range(grid.d)]

    def _shift(self, a: int) -> sp.csr_matrix:
        n, d = self.grid.n, self.grid.d
        eye1 = sp.identity(n, format="csr")
        shift1 = sp.csr_matrix((np.ones(n), (np.arange(n), (np.arange(n) + 1) % n)), shape=(n, n))
        mats = [eye1] * d
        mats[a] = shift1
        S = mats[0]
        for m in mats[1:]:
            S = sp.kron(S, m, format="csr")
        return S

    @property
    def grad(self):
        return sp.vstack(self.P, format="csr")

    @property
    def div(self):
        return (-self.grad.T).tocsr()

    @property
    def curl(self):
        d = self.grid.d
        rows = []
        for a, b in _pairs(d):
            blocks = [None] * d
            blocks[b] = self.P[a]
            blocks[a] = -self.P[b]
            rows.append(blocks)
        return sp.bmat(rows, format="csr")

    def strain(self):
        """Matrix mapping a face vector to ``[D_aa (cells) ..., D_ab (edges) ...]``."""
        d = self.grid.d
        Z = None
        rows = []
        for a in range(d):
            blocks = [Z] * d
            blocks[a] = -self.P[a].T
            rows.append(blocks)
        for a, b in _pairs(d):
            blocks = [Z] * d
            blocks[a] = 0.5 * self.P[b]
            blocks[b] = 0.5 * self.P[a]
            rows.append(blocks)
        return sp.bmat(rows, format="csr")

    def viscous_stiffness(self, nu: np.ndarray, lam: np.ndarray) -> sp.csr_matrix:
        """SPSD matrix ``K`` with ``u.K u = sum S(Du):Du`` (cell sums, no volume factor)."""
        d = self.grid.d
        nu_f = nu.ravel()
        shear = 2.0 * nu_f
        coupling = lam.ravel() - 2.0 * nu_f / d
        blocks = [[None] * (d + len(_pairs(d))) for _ in range(d + len(_pairs(d)))]
        for a in range(d):
            for b in range(d):
                diag = coupling + (shear if a == b else 0.0)
                blocks[a][b] = sp.diags(diag)
        nu_e = cell_to_edge(nu)
        for p in range(len(_pairs(d))):
            blocks[d + p][d + p] = sp.diags(4.0 * nu_e[p].ravel())
        W = sp.bmat(blocks, format="csr")
        Bm = self.strain()
        return (Bm.T @ W @ Bm).tocsr()

    def resistive_stiffness(self, eta: np.ndarray) -> sp.csr_matrix:
        """SPSD matrix ``C^T diag(eta_edge) C``."""
        C = self.curl
        return (C.T @ sp.diags(cell_to_edge(eta).ravel()) @ C).tocsr()

    def weighted_laplacian(self, mu_face: np.ndarray) -> sp.csr_matrix:
        """SPSD matrix ``G^T diag(mu_face) G`` (minus the weighted Laplacian)."""
        G = self.grad
        return (G.T @ sp.diags(mu_face.ravel()) @ G).tocsr()


def viscous_force(u: np.ndarray, nu: np.ndarray, lam: np.ndarray, h: float) -> np.ndarray:
    """``div S(Du)`` on faces, the negative gradient of the discrete dissipation."""
    d = u.shape[0]
    diag, off = strain_native(u, h)
    tr = diag.sum(axis=0)
    nu_e = cell_to_edge(nu)
    F = np.zeros_like(u)
    for a in range(d):
        S_aa = 2.0 * nu * diag[a] + (lam - 2.0 * nu / d) * tr
        F[a] += dplus(S_aa, a, h)
    for p, (a, b) in enumerate(_pairs(d)):
        S_ab = 2.0 * nu_e[p] * off[p]
        F[a] += dminus(S_ab, b, h)
        F[b] += dminus(S_ab, a, h)
    return F


def viscous_dissipation(u: np.ndarray, nu: np.ndarray, lam: np.ndarray, h: float) -> float:
    """Discrete ``int S(Du):Du dx`` matching :func:`viscous_force`."""
    d = u.shape[0]
    diag, off = strain_native(u, h)
    tr = diag.sum(axis=0)
    cells = 2.0 * nu * np.sum(diag ** 2, axis=0) + (lam - 2.0 * nu / d) * tr ** 2
    edges = 4.0 * cell_to_edge(nu) * off ** 2
    return float((np.sum(cells) + np.sum(edges)) * h ** d)
