"""Symplectic potentials, metric assembly, and the Ricci potential.

A torus-invariant Kahler metric on the toric manifold of a reflexive
polytope P is encoded by a strictly convex symplectic potential

    f = f_G + psi,      f_G(x) = sum_i l_i(x) log l_i(x),

where f_G is the canonical boundary-singular potential and psi is smooth up
to the boundary.  We work with the convention without the 1/2 prefactor on
f_G: with offsets normalized to one this makes the Ricci potential

    u = -(log det Hess f + f - x . grad f) + c

exactly constant for the canonical potential of the interval (value -log 2
before normalization) and of the simplex (-log 3), which pins down all
metric constants.  The additive constant c is chosen so that
(1/V) int_P e^{-u} dmu = 1 with V = vol(P).

Metric dictionary used throughout (x = moment coordinates, F = Hess f,
H = F^{-1}):

    |grad v|^2_g = <H grad v, grad v>
    Lap_g v      = d_j (H^{jk} d_k v)        (divergence form; volume = dmu)
    R            = - d_j d_k H^{jk}          (scalar curvature)

These satisfy R - n = -Lap_g u identically in the continuum; on the grid
the identity holds to O(h^2) and is used as a self-test.  f_G derivatives
are always evaluated in closed form; only psi (smooth) is differentiated
with grid stencils.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from toricflow.grid import QuadratureGrid, build_grid
from toricflow.polytope import ReflexivePolytope

__all__ = [
    "SymplecticPotential",
    "MetricSample",
    "KahlerPotentialSamples",
    "SupNorms",
    "PositivityError",
    "guillemin",
    "ricci_potential",
    "legendre",
    "sup_norms",
    "BoxBump",
    "FacetBump",
    "CosineBump",
    "PsiSum",
    "random_psi",
    "make_potential",
    "snapshot_table",
]


class PositivityError(ValueError):
    """Hessian of the symplectic potential lost positive definiteness."""


# ---------------------------------------------------------------------------
# canonical potential
# ---------------------------------------------------------------------------

def guillemin(P: ReflexivePolytope, x: np.ndarray):
    """Canonical potential sum_i l_i log l_i with closed-form derivatives.

    ``x`` has shape (N, n) and must be strictly interior.  Returns
    ``(value (N,), grad (N, n), hess (N, n, n))``.
    """
    x = np.atleast_2d(np.asarray(x, dtype=float))
    V = P.normals_array()          # (m, n)
    c = P.offsets_array()          # (m,)
    ell = x @ V.T + c              # (N, m)
    if np.any(ell <= 0):
        raise ValueError("point on or outside the boundary of the polytope")
    logl = np.log(ell)
    val = np.sum(ell * logl, axis=1)
    grad = (logl + 1.0) @ V
    hess = np.einsum("Nm,ma,mb->Nab", 1.0 / ell, V, V)
    return val, grad, hess


def _guillemin_cached(grid: QuadratureGrid):
    cache = getattr(grid, "_fg_cache", None)
    if cache is None:
        cache = guillemin(grid.polytope, grid.nodes)
        grid._fg_cache = cache
    return cache


# ---------------------------------------------------------------------------
# smooth perturbations with analytic derivatives
# ---------------------------------------------------------------------------

class BoxBump:
    """amplitude * prod_k (1 - x_k^2)^power; meant for box-like polytopes."""

    def __init__(self, amplitude: float, power: int = 2):
        if power < 1:
            raise ValueError("power must be >= 1")
        self.amplitude = float(amplitude)
        self.power = int(power)

    def value(self, x):
        q = 1.0 - x ** 2
        return self.amplitude * np.prod(q ** self.power, axis=1)

    def grad(self, x):
        p = self.power
        q = 1.0 - x ** 2
        full = np.prod(q ** p, axis=1)
        # d/dx_k: p q_k^{p-1} (-2 x_k) * prod_{j != k} q_j^p
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = np.where(q > 0, 1.0 / q, 0.0)
        return self.amplitude * full[:, None] * p * (-2.0 * x) * ratio

    def hess(self, x):
        n = x.shape[1]
        p = self.power
        q = 1.0 - x ** 2
        full = self.amplitude * np.prod(q ** p, axis=1)
        r = np.where(q > 0, 1.0 / q, 0.0)
        g = p * (-2.0 * x) * r                     # log-derivative per axis
        out = np.einsum("Nk,Nl->Nkl", g, g) * full[:, None, None]
        for k in range(n):
            d2log = p * (-2.0 * r[:, k] - 4.0 * x[:, k] ** 2 * r[:, k] ** 2)
            out[:, k, k] += full * d2log
        return out


class FacetBump:
    """amplitude * prod_i l_i(x)^power; smooth bump vanishing on all facets."""

    def __init__(self, P: ReflexivePolytope, amplitude: float, power: int = 1):
        if power < 1:
            raise ValueError("power must be >= 1")
        self.amplitude = float(amplitude)
        self.power = int(power)
        self.V = P.normals_array()
        self.c = P.offsets_array()

    def _ell(self, x):
        return x @ self.V.T + self.c

    def value(self, x):
        return self.amplitude * np.prod(self._ell(x) ** self.power, axis=1)

    def grad(self, x):
        ell = self._ell(x)
        full = self.amplitude * np.prod(ell ** self.power, axis=1)
        s = (self.power / ell) @ self.V            # (N, n) log-derivative
        return full[:, None] * s

    def hess(self, x):
        ell = self._ell(x)
        full = self.amplitude * np.prod(ell ** self.power, axis=1)
        s = (self.power / ell) @ self.V
        ds = -np.einsum("Nm,ma,mb->Nab", self.power / ell ** 2, self.V, self.V)
        return full[:, None, None] * (np.einsum("Na,Nb->Nab", s, s) + ds)


class CosineBump:
    """amplitude * cos(pi <k, x> / 2 + phase), a truncated cosine profile."""

    def __init__(self, amplitude: float, wavevector, phase: float = 0.0):
        self.amplitude = float(amplitude)
        self.k = np.asarray(wavevector, dtype=float)
        self.phase = float(phase)

    def _arg(self, x):
        return 0.5 * np.pi * (x @ self.k) + self.phase

    def value(self, x):
        return self.amplitude * np.cos(self._arg(x))

    def grad(self, x):
        a = -self.amplitude * np.sin(self._arg(x)) * 0.5 * np.pi
        return a[:, None] * self.k[None, :]

    def hess(self, x):
        a = -self.amplitude * np.cos(self._arg(x)) * (0.5 * np.pi) ** 2
        kk = np.einsum("a,b->ab", self.k, self.k)
        return a[:, None, None] * kk[None, :, :]


class PsiSum:
    """Sum of perturbation terms, itself exposing value/grad/hess."""

    def __init__(self, terms):
        self.terms = list(terms)

    def value(self, x):
        out = np.zeros(x.shape[0])
        for t in self.terms:
            out += t.value(x)
        return out

    def grad(self, x):
        out = np.zeros_like(x)
        for t in self.terms:
            out += t.grad(x)
        return out

    def hess(self, x):
        n = x.shape[1]
        out = np.zeros((x.shape[0], n, n))
        for t in self.terms:
            out += t.hess(x)
        return out


def random_psi(P: ReflexivePolytope, rng: np.random.Generator,
               amplitude: float = 0.05, nterms: int = 2) -> PsiSum:
    """Random smooth perturbation, scaled down until it is metric-safe."""
    terms = []
    for _ in range(nterms):
        a = amplitude * rng.uniform(0.3, 1.0) * rng.choice([-1.0, 1.0])
        p = int(rng.integers(1, 3))
        terms.append(FacetBump(P, a, p))
    return PsiSum(terms)


# ---------------------------------------------------------------------------
# potential and metric containers
# ---------------------------------------------------------------------------

@dataclass
class SymplecticPotential:
    """Grid samples of the smooth correction psi, so f = f_G + psi."""

    grid: QuadratureGrid
    psi: np.ndarray
    psi_fn: object = None   # optional analytic bundle (value/grad/hess)

    def __post_init__(self):
        self.psi = np.asarray(self.psi, dtype=float)
        if self.psi.shape != (self.grid.num_nodes,):
            raise ValueError("psi shape does not match grid")
        if not np.all(np.isfinite(self.psi)):
            raise ValueError("psi contains non-finite values")

    def with_psi(self, psi: np.ndarray) -> "SymplecticPotential":
        # evolved states lose the analytic tag deliberately
        return SymplecticPotential(self.grid, psi, psi_fn=None)


def make_potential(grid: QuadratureGrid, psi_fn=None) -> SymplecticPotential:
    """Sample an analytic perturbation (or zero) onto the grid."""
    if psi_fn is None:
        psi = np.zeros(grid.num_nodes)
    else:
        psi = np.asarray(psi_fn.value(grid.nodes), dtype=float)
    return SymplecticPotential(grid, psi, psi_fn=psi_fn)


@dataclass
class MetricSample:
    """Per-node metric data assembled from a symplectic potential."""

    sp: SymplecticPotential
    F: np.ndarray          # (N, n, n) Hess f
    H: np.ndarray          # (N, n, n) inverse Hessian
    detF: np.ndarray       # (N,)
    logdetF: np.ndarray    # (N,)
    y: np.ndarray          # (N, n) = grad f, Legendre image of the nodes
    u: np.ndarray          # (N,) normalized Ricci potential
    c: float               # normalization constant added to u_raw
    grad_u: np.ndarray     # (N, n) Euclidean gradient of u
    grad_usq: np.ndarray   # (N,) |grad u|^2_g
    hess_u: np.ndarray     # (N, n, n) Euclidean Hessian of u
    lap_u: np.ndarray      # (N,) metric Laplacian of u
    R: np.ndarray          # (N,) scalar curvature
    dual_hess_u: np.ndarray  # (N, n, n) Hessian of u in Legendre coordinates

    @property
    def grid(self) -> QuadratureGrid:
        return self.sp.grid


def _invert_spd(F: np.ndarray):
    """Closed-form inverse and determinant for (N,1,1) or (N,2,2) fields."""
    n = F.shape[1]
    if n == 1:
        det = F[:, 0, 0]
        H = np.empty_like(F)
        H[:, 0, 0] = 1.0 / det
        return H, det
    a, b, d = F[:, 0, 0], F[:, 0, 1], F[:, 1, 1]
    det = a * d - b * b
    H = np.empty_like(F)
    H[:, 0, 0] = d / det
    H[:, 1, 1] = a / det
    H[:, 0, 1] = H[:, 1, 0] = -b / det
    return H, det


def check_positive(F: np.ndarray) -> np.ndarray:
    """Boolean mask of nodes where F is positive definite (Sylvester)."""
    if F.shape[1] == 1:
        return F[:, 0, 0] > 0
    det = F[:, 0, 0] * F[:, 1, 1] - F[:, 0, 1] * F[:, 1, 0]
    return (F[:, 0, 0] > 0) & (det > 0)


def hessian_of(sp: SymplecticPotential) -> np.ndarray:
    """Hess f = closed-form Hess f_G plus stencil Hessian of psi."""
    _, _, d2fG = _guillemin_cached(sp.grid)
    return d2fG + sp.grid.hess(sp.psi)


def ricci_potential(sp: SymplecticPotential) -> MetricSample:
    """Assemble the full metric package from a symplectic potential.

    Raises PositivityError if Hess f has a non-positive eigenvalue at any
    node, and ValueError if the normalization integral is not finite.
    """
    grid = sp.grid
    fG, dfG, d2fG = _guillemin_cached(grid)
    F = d2fG + grid.hess(sp.psi)
    ok = check_positive(F)
    if not ok.all():
        bad = int(np.flatnonzero(~ok)[0])
        raise PositivityError(
            f"Hessian not positive definite at node {bad} "
            f"(x = {grid.nodes[bad]})")
    H, detF = _invert_spd(F)
    logdet = np.log(detF)

    f = fG + sp.psi
    gradf = dfG + grid.grad(sp.psi)
    x_dot_gradf = np.einsum("Nk,Nk->N", grid.nodes, gradf)
    u_raw = -(logdet + f - x_dot_gradf)

    V = grid.volume
    mass = grid.integrate(np.exp(-u_raw))
    if not np.isfinite(mass) or mass <= 0:
        raise ValueError("normalization integral of e^{-u} is not finite")
    c = float(np.log(mass / V))
    u = u_raw + c

    grad_u = grid.grad(u)
    grad_usq = np.einsum("Njk,Nj,Nk->N", H, grad_u, grad_u)
    hess_u = grid.hess(u)

    n = grid.dim
    # dH[:, a, b, c] = d_c H_{ab}
    dH = np.empty((grid.num_nodes, n, n, n))
    for a in range(n):
        for b in range(a, n):
            g = grid.grad(H[:, a, b])
            dH[:, a, b, :] = g
            dH[:, b, a, :] = g
    divH = np.einsum("Njkj->Nk", dH)
    lap_u = np.einsum("Njk,Njk->N", H, hess_u) + np.einsum("Nk,Nk->N", divH, grad_u)

    if n == 1:
        R = -(grid.d2[0] @ H[:, 0, 0])
    else:
        R = -(grid.d2[0] @ H[:, 0, 0]
              + 2.0 * (grid.dxy @ H[:, 0, 1])
              + grid.d2[1] @ H[:, 1, 1])

    # Hessian of u in the Legendre (dual) coordinates via the chain rule:
    # U_{jk} = H_{aj} u_{ac} H_{ck} + u_a (d_c H_{aj}) H_{ck}
    U = np.einsum("Naj,Nac,Nck->Njk", H, hess_u, H)
    U += np.einsum("Na,Najc,Nck->Njk", grad_u, dH, H)
    U = 0.5 * (U + np.swapaxes(U, 1, 2))

    y = gradf
    return MetricSample(sp=sp, F=F, H=H, detF=detF, logdetF=logdet, y=y,
                        u=u, c=c, grad_u=grad_u, grad_usq=grad_usq,
                        hess_u=hess_u, lap_u=lap_u, R=R, dual_hess_u=U)


# ---------------------------------------------------------------------------
# Legendre transform
# ---------------------------------------------------------------------------

@dataclass
class KahlerPotentialSamples:
    """Samples of the dual (Kahler) potential phi(y) = <x, y> - f(x)."""

    y: np.ndarray           # (N, n) dual coordinates, = grad f at the nodes
    phi: np.ndarray         # (N,)
    dual_hess: np.ndarray   # (N, n, n) Hess_y phi = H(x)
    x: np.ndarray           # (N, n) source nodes

    def sort_1d(self):
        """Return (y, phi, dual_hess) sorted by y for one-dimensional data."""
        order = np.argsort(self.y[:, 0])
        return (self.y[order, 0], self.phi[order],
                self.dual_hess[order, 0, 0], self.x[order, 0])


def legendre(sp: SymplecticPotential, ms: MetricSample | None = None) -> KahlerPotentialSamples:
    """Legendre-transform samples y = grad f, phi = <x,y> - f."""
    if ms is None:
        ms = ricci_potential(sp)
    grid = sp.grid
    fG, _, _ = _guillemin_cached(grid)
    f = fG + sp.psi
    y = ms.y
    phi = np.einsum("Nk,Nk->N", grid.nodes, y) - f
    if grid.dim == 1:
        dy = np.diff(y[np.argsort(y[:, 0]), 0])
        if np.any(dy <= 0):
            raise PositivityError("grad f is not monotone: convexity lost")
    return KahlerPotentialSamples(y=y, phi=phi, dual_hess=ms.H, x=grid.nodes)


def legendre_roundtrip_error(sp: SymplecticPotential, margin: float = 4.0) -> float:
    """Max-norm error of reconstructing f from the discrete dual samples.

    The discrete conjugate f**(x) = max_j (<x, y_j> - phi_j) is evaluated on
    nodes at distance >= margin*h from the clip edge (the conjugate of a
    sample cloud is only supported inside its convex hull).
    """
    ks = legendre(sp)
    grid = sp.grid
    fG, _, _ = _guillemin_cached(grid)
    f = fG + sp.psi
    inner = grid.ell.min(axis=1) >= margin * grid.h
    X = grid.nodes[inner]
    recon = np.empty(X.shape[0])
    chunk = 2048
    for s in range(0, X.shape[0], chunk):
        block = X[s:s + chunk]
        vals = block @ ks.y.T - ks.phi[None, :]
        recon[s:s + chunk] = vals.max(axis=1)
    return float(np.max(np.abs(recon - f[inner])))


# ---------------------------------------------------------------------------
# norms
# ---------------------------------------------------------------------------

@dataclass
class SupNorms:
    c0_u: float
    c0_grad: float
    c0_lap: float
    l2_grad: float

    def as_tuple(self):
        return (self.c0_u, self.c0_grad, self.c0_lap, self.l2_grad)


def sup_norms(ms: MetricSample) -> SupNorms:
    """Grid surrogates for the C0 norms of u, grad u, Lap u and the L2 norm."""
    grid = ms.grid
    Y = grid.integrate(ms.grad_usq)
    return SupNorms(
        c0_u=float(np.max(np.abs(ms.u))),
        c0_grad=float(np.sqrt(max(np.max(ms.grad_usq), 0.0))),
        c0_lap=float(np.max(np.abs(ms.lap_u))),
        l2_grad=float(np.sqrt(max(Y, 0.0))),
    )


# ---------------------------------------------------------------------------
# snapshots
# ---------------------------------------------------------------------------

def snapshot_table(sp: SymplecticPotential, ms: MetricSample | None = None) -> str:
    """Flat columnar dump (one node per line) for external plotting."""
    if ms is None:
        ms = ricci_potential(sp)
    grid = sp.grid
    n = grid.dim
    cols = [f"x{k}" for k in range(n)] + ["weight", "psi", "u", "grad_usq",
                                          "lap_u", "R", "detF"]
    header = " ".join(cols)
    data = np.column_stack([grid.nodes, grid.weights, sp.psi, ms.u,
                            ms.grad_usq, ms.lap_u, ms.R, ms.detF])
    lines = [header]
    for row in data:
        lines.append(" ".join(f"{v:.12g}" for v in row))
    return "\n".join(lines) + "\n"
