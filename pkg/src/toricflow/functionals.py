"""Energy functionals and inequality monitors for the toric flow.

Everything here consumes the per-node metric packages built by
:mod:`toricflow.potential` and produces scalars: the Mabuchi energy
(relative to a reference potential), the dissipation Y = int |grad u|^2,
the auxiliary F functional against a fixed reference metric, the J
functional against the initial metric, the Hessian-gradient inequality
terms, and the smoothing ratio.

Functionals that are only defined up to an additive constant (Mabuchi, J)
are reported relative to the initial metric, with bounded integrands: the
Mabuchi energy difference uses log(det F_0 / det F) and the linear
functional applied to psi - psi_0, never the singular absolute integrals.

The linear functional uses the identity

    int_{dP} v dsigma - n int_P v dmu = int_P x . grad v dmu,

valid for smooth v on any polytope with all facet offsets equal to one
(divergence theorem applied to v(x) x), so no boundary extrapolation of
grid fields is ever needed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.interpolate import CubicSpline

from toricflow.potential import MetricSample, SupNorms, sup_norms

__all__ = [
    "mabuchi",
    "linear_functional",
    "dissipation",
    "dissipation_dual_1d",
    "FValue",
    "f_functional",
    "df_dt_rhs",
    "HessianGradientTerms",
    "hessian_gradient_terms",
    "smoothing_ratio",
    "combined_monitor",
    "LogCoshPotential",
    "GaussianBump",
    "SumPotential",
    "ScaledPotential",
    "convexity_scale",
    "j_linear_path",
    "j_closed_form_1d",
    "j_mixed_volume_bound",
    "j_from_samples_1d",
    "DiagnosticRecord",
    "CSV_COLUMNS",
]


# ---------------------------------------------------------------------------
# Mabuchi energy and dissipation
# ---------------------------------------------------------------------------

def linear_functional(ms: MetricSample, values: np.ndarray) -> float:
    """L_P(v) = int_{dP} v dsigma - n int v dmu for a smooth node field."""
    grid = ms.grid
    gv = grid.grad(values)
    return grid.integrate(np.einsum("Nk,Nk->N", grid.nodes, gv))


def mabuchi(ms: MetricSample, ms0: MetricSample) -> float:
    """Mabuchi energy of ms relative to ms0 (zero when ms == ms0).

    M(f) - M(f0) = int log(det F0 / det F) dmu + L_P(psi - psi0); both
    integrands are bounded up to the boundary.
    """
    if ms.grid is not ms0.grid:
        raise ValueError("potentials live on different grids")
    grid = ms.grid
    log_ratio = ms0.logdetF - ms.logdetF
    dpsi = ms.sp.psi - ms0.sp.psi
    return grid.integrate(log_ratio) + linear_functional(ms, dpsi)


def dissipation(ms: MetricSample) -> float:
    """Y = int_P |grad u|^2_g dmu >= 0."""
    return max(ms.grid.integrate(ms.grad_usq), 0.0)


def dissipation_dual_1d(ms: MetricSample) -> float:
    """Independent evaluation of Y on the Legendre side (n = 1 only).

    In dual coordinates Y = int (du/dy)^2 dy; computed from the sorted
    sample cloud with nonuniform differences and trapezoid weights.
    """
    if ms.grid.dim != 1:
        raise ValueError("dual-side oracle implemented for n = 1")
    order = np.argsort(ms.y[:, 0])
    y = ms.y[order, 0]
    u = ms.u[order]
    du = np.gradient(u, y)
    return float(np.trapezoid(du ** 2, y))


# ---------------------------------------------------------------------------
# F functional against a fixed reference metric
# ---------------------------------------------------------------------------

@dataclass
class FValue:
    value: float          # -int log det(H_ref F) + int tr(H_ref F)
    trace_term: float     # int tr(H_ref F) dmu
    lower_bound: float    # 0.5 * trace_term
    margin: float         # value - lower_bound (>= 0 pointwise)


def _matmul_fields(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    return np.einsum("Nab,Nbc->Nac", A, B)


def _det_field(M: np.ndarray) -> np.ndarray:
    if M.shape[1] == 1:
        return M[:, 0, 0]
    return M[:, 0, 0] * M[:, 1, 1] - M[:, 0, 1] * M[:, 1, 0]


def f_functional(ms: MetricSample, ms_ref: MetricSample) -> FValue:
    """F = -int log det(H_ref Hess f) dmu + int tr(H_ref Hess f) dmu.

    The product matrix is smooth and positive definite up to the boundary
    when both potentials satisfy the canonical boundary behavior, so both
    integrands are bounded.  Satisfies F >= (1/2) int tr(...) pointwise
    because log det M <= tr(M)/2 for positive definite M.
    """
    if ms.grid is not ms_ref.grid:
        raise ValueError("potentials live on different grids")
    grid = ms.grid
    M = _matmul_fields(ms_ref.H, ms.F)
    det = _det_field(M)
    tr = np.einsum("Naa->N", M)
    if np.any(det <= 0) or np.any(tr <= 0):
        raise ValueError("reference-product matrix lost positive definiteness")
    trace_term = grid.integrate(tr)
    value = grid.integrate(-np.log(det) + tr)
    lower = 0.5 * trace_term
    return FValue(value=value, trace_term=trace_term,
                  lower_bound=lower, margin=value - lower)


def df_dt_rhs(ms: MetricSample, ms_ref: MetricSample) -> float:
    """int (R(ref) - R(f)) u dmu, the flow derivative of the F functional.

    Insensitive to the normalization constant in u because the average
    scalar curvature equals n for every admissible potential.
    """
    return ms.grid.integrate((ms_ref.R - ms.R) * ms.u)


# ---------------------------------------------------------------------------
# Hessian-gradient inequality terms
# ---------------------------------------------------------------------------

@dataclass
class HessianGradientTerms:
    """Terms of the integral estimate for int Hess u(grad u, grad u).

    ``pair``         |int <U grad u, grad u> dmu| with U the Hessian of u in
                     dual coordinates (indices raised by the metric),
    ``hess_sq``      int |U|_g^2 |grad u|^2 dmu,
    ``grad_gradsq``  int |grad |grad u|^2|_g^2 dmu,
    ``bound_lin``    5 (||grad u||^2 + ||Lap u||) Y,
    ``bound_quad``   (19 ||Lap u||^2 + ||grad u||^4) Y,
    ``bound_mid``    3 ||Lap u||^2 Y + 2 grad_gradsq,
    ``cauchy``       sqrt(hess_sq * Y).

    The chain pair <= cauchy, hess_sq <= bound_mid <= ... <= bound_quad and
    pair <= bound_lin is monitored along every run.  The first link holds
    for the discrete sums unconditionally (pointwise spectral <= Frobenius
    plus Cauchy-Schwarz on the weighted sums).
    """

    pair: float
    hess_sq: float
    grad_gradsq: float
    bound_lin: float
    bound_quad: float
    bound_mid: float
    cauchy: float
    Y: float


def hessian_gradient_terms(ms: MetricSample, norms: SupNorms | None = None) -> HessianGradientTerms:
    grid = ms.grid
    if norms is None:
        norms = sup_norms(ms)
    Y = dissipation(ms)
    U = ms.dual_hess_u

    pair_integrand = np.einsum("Njk,Nj,Nk->N", U, ms.grad_u, ms.grad_u)
    pair = abs(grid.integrate(pair_integrand))

    FU = _matmul_fields(ms.F, U)
    hess_sq_int = np.einsum("Nab,Nba->N", FU, FU) * ms.grad_usq
    hess_sq = grid.integrate(hess_sq_int)

    q = ms.grad_usq
    gq = grid.grad(q)
    grad_gradsq = grid.integrate(np.einsum("Njk,Nj,Nk->N", ms.H, gq, gq))

    g2 = norms.c0_grad ** 2
    lap = norms.c0_lap
    bound_lin = 5.0 * (g2 + lap) * Y
    bound_quad = (19.0 * lap ** 2 + g2 ** 2) * Y
    bound_mid = 3.0 * lap ** 2 * Y + 2.0 * grad_gradsq
    cauchy = float(np.sqrt(max(hess_sq, 0.0) * Y))
    return HessianGradientTerms(pair=pair, hess_sq=hess_sq,
                                grad_gradsq=grad_gradsq,
                                bound_lin=bound_lin, bound_quad=bound_quad,
                                bound_mid=bound_mid, cauchy=cauchy, Y=Y)


def smoothing_ratio(norms: SupNorms, dim: int, floor: float = 1e-13):
    """||u||^{n+1} / (||grad u||_{L2} ||grad u||^n), or None when stationary."""
    if norms.c0_grad < floor or norms.l2_grad < floor:
        return None
    return norms.c0_u ** (dim + 1) / (norms.l2_grad * norms.c0_grad ** dim)


def combined_monitor(M: float, J: float, kappa: float) -> float:
    """M + kappa * J, the drift monitor combining both energies."""
    return M + kappa * J


# ---------------------------------------------------------------------------
# J functional on dual (Kahler) potentials
# ---------------------------------------------------------------------------

class LogCoshPotential:
    """phi(y) = sum_k scale * 2 log cosh(y_k / 2), the dual of the canonical
    interval potential (and products thereof)."""

    def __init__(self, dim: int, scale: float = 1.0):
        self.dim = dim
        self.scale = float(scale)

    def value(self, y):
        return self.scale * np.sum(2.0 * np.log(np.cosh(0.5 * y)), axis=-1)

    def grad(self, y):
        return self.scale * np.tanh(0.5 * y)

    def hess(self, y):
        n = y.shape[-1]
        out = np.zeros(y.shape[:-1] + (n, n))
        d = 0.5 * self.scale / np.cosh(0.5 * y) ** 2
        for k in range(n):
            out[..., k, k] = d[..., k]
        return out


class GaussianBump:
    """a * exp(-|y - c|^2 / w^2) with analytic gradient and Hessian."""

    def __init__(self, amplitude: float, center, width: float):
        self.a = float(amplitude)
        self.c = np.atleast_1d(np.asarray(center, dtype=float))
        self.w = float(width)

    def value(self, y):
        d = y - self.c
        return self.a * np.exp(-np.sum(d * d, axis=-1) / self.w ** 2)

    def grad(self, y):
        d = y - self.c
        v = self.value(y)
        return (-2.0 / self.w ** 2) * d * v[..., None]

    def hess(self, y):
        n = y.shape[-1]
        d = y - self.c
        v = self.value(y)
        out = (4.0 / self.w ** 4) * np.einsum("...a,...b->...ab", d, d) * v[..., None, None]
        for k in range(n):
            out[..., k, k] += (-2.0 / self.w ** 2) * v
        return out


class SumPotential:
    def __init__(self, terms):
        self.terms = list(terms)

    def value(self, y):
        return sum(t.value(y) for t in self.terms)

    def grad(self, y):
        return sum(t.grad(y) for t in self.terms)

    def hess(self, y):
        return sum(t.hess(y) for t in self.terms)


class ScaledPotential:
    def __init__(self, base, factor: float):
        self.base = base
        self.factor = float(factor)

    def value(self, y):
        return self.factor * self.base.value(y)

    def grad(self, y):
        return self.factor * self.base.grad(y)

    def hess(self, y):
        return self.factor * self.base.hess(y)


def convexity_scale(phi0, dphi, axes, safety: float = 0.5) -> float:
    """Largest power-of-two factor t <= 1 keeping phi0 + t*dphi convex.

    Since positive definite matrices form a convex cone, convexity at the
    endpoint guarantees it along the whole linear path.  ``safety`` keeps a
    fraction of the reference Hessian in reserve.
    """
    pts, _ = _tensor_ygrid(axes)
    G0 = phi0.hess(pts)
    D = dphi.hess(pts)

    def ok(t):
        G = G0 * (1.0 - safety) + t * D
        if np.any(G[:, 0, 0] <= 0):
            return False
        return not np.any(_det_field(G) <= 0) if G.shape[1] > 1 else True

    t = 1.0
    for _ in range(60):
        if ok(t):
            return t
        t *= 0.5
    raise ValueError("perturbation cannot be scaled to convexity")


def _tensor_ygrid(axes):
    axes = [np.asarray(a, dtype=float) for a in axes]
    if len(axes) == 1:
        pts = axes[0][:, None]
        w = np.ones_like(axes[0])
        w[1:-1] = 0.5 * (axes[0][2:] - axes[0][:-2])
        w[0] = 0.5 * (axes[0][1] - axes[0][0])
        w[-1] = 0.5 * (axes[0][-1] - axes[0][-2])
        return pts, w
    wx = np.gradient(axes[0])
    wy = np.gradient(axes[1])
    g0, g1 = np.meshgrid(axes[0], axes[1], indexing="ij")
    pts = np.stack([g0.ravel(), g1.ravel()], axis=-1)
    w = np.outer(wx, wy).ravel()
    return pts, w


def j_linear_path(phi0, dphi, axes, s_points: int = 16) -> float:
    """J along the linear path of metrics between phi0 and phi0 + dphi.

    J = int_0^1 int dphi (tr(G_s^{-1} G_0) - n) det G_s dy ds with
    G_s = Hess phi0 + s Hess dphi.  Gauss-Legendre in s, trapezoid on the
    tensor y-grid given by ``axes``.  Raises if any intermediate metric
    degenerates.
    """
    pts, w = _tensor_ygrid(axes)
    n = pts.shape[1]
    G0 = phi0.hess(pts)
    D = dphi.hess(pts)
    v = dphi.value(pts)
    s_nodes, s_w = np.polynomial.legendre.leggauss(s_points)
    s_nodes = 0.5 * (s_nodes + 1.0)
    s_w = 0.5 * s_w
    total = 0.0
    for s, sw in zip(s_nodes, s_w):
        Gs = G0 + s * D
        det = _det_field(Gs)
        if np.any(det <= 0) or np.any(Gs[:, 0, 0] <= 0):
            raise ValueError("intermediate metric on the path degenerates")
        if n == 1:
            integrand = v * (G0[:, 0, 0] - Gs[:, 0, 0])
        else:
            # tr(Gs^{-1} G0) det Gs = tr(adj(Gs) G0)
            adj = np.empty_like(Gs)
            adj[:, 0, 0] = Gs[:, 1, 1]
            adj[:, 1, 1] = Gs[:, 0, 0]
            adj[:, 0, 1] = -Gs[:, 0, 1]
            adj[:, 1, 0] = -Gs[:, 1, 0]
            integrand = v * (np.einsum("Nab,Nba->N", adj, G0) - n * det)
        total += sw * float(np.dot(w, integrand))
    return total


def j_closed_form_1d(dphi, axes) -> float:
    """(1/2) int (dphi')^2 dy, the closed form of the n=1 path integral."""
    pts, w = _tensor_ygrid(axes)
    g = dphi.grad(pts)[:, 0]
    return 0.5 * float(np.dot(w, g * g))


def j_mixed_volume_bound(phi0, dphi, axes) -> float:
    """(n/(n+1)) int dphi (det G_0 - det G_1) dy; upper bound for J,
    attained with equality when n = 1."""
    pts, w = _tensor_ygrid(axes)
    n = pts.shape[1]
    G0 = phi0.hess(pts)
    G1 = G0 + dphi.hess(pts)
    v = dphi.value(pts)
    return (n / (n + 1.0)) * float(np.dot(w, v * (_det_field(G0) - _det_field(G1))))


def j_from_samples_1d(ms0: MetricSample, ms1: MetricSample,
                      npoints: int = 2048) -> float:
    """J between two sampled n=1 metrics via spline interpolation in y.

    A monitoring-grade evaluation: both dual potentials are interpolated on
    a common y-window (intersection of the sampled ranges) and the n=1
    closed form of the path integral is applied.
    """
    if ms0.grid.dim != 1:
        raise ValueError("sample-based J implemented for n = 1")
    curves = []
    for ms in (ms0, ms1):
        order = np.argsort(ms.y[:, 0])
        y = ms.y[order, 0]
        fG_psi = None  # phi = <x, y> - f reconstructed below
        x = ms.grid.nodes[order, 0]
        from toricflow.potential import _guillemin_cached  # shared cache
        fG, _, _ = _guillemin_cached(ms.grid)
        f = (fG + ms.sp.psi)[order]
        phi = x * y - f
        curves.append((y, phi, ms.H[order, 0, 0]))
    lo = max(curves[0][0][0], curves[1][0][0])
    hi = min(curves[0][0][-1], curves[1][0][-1])
    span = hi - lo
    yy = np.linspace(lo + 0.02 * span, hi - 0.02 * span, npoints)
    splines = [(CubicSpline(y, phi), CubicSpline(y, H)) for y, phi, H in curves]
    dphi = splines[1][0](yy) - splines[0][0](yy)
    G0 = splines[0][1](yy)
    G1 = splines[1][1](yy)
    return 0.5 * float(np.trapezoid(dphi * (G0 - G1), yy))


# ---------------------------------------------------------------------------
# diagnostic record
# ---------------------------------------------------------------------------

CSV_COLUMNS = [
    "t", "M", "Y", "F", "J",
    "sup_u", "sup_grad", "sup_lap", "l2_grad",
    "hg_pair", "hg_hess_sq", "hg_grad_gradsq", "hg_bound_lin", "hg_bound_quad",
    "smoothing_ratio", "smoothing_flag",
    "y_growth_margin", "df_rhs", "lbound_margin", "c", "dt",
]


@dataclass
class DiagnosticRecord:
    """One monitoring row of a flow run; serializes to one CSV line."""

    t: float
    M: float
    Y: float
    F: float
    J: float
    sup_u: float
    sup_grad: float
    sup_lap: float
    l2_grad: float
    hg_pair: float
    hg_hess_sq: float
    hg_grad_gradsq: float
    hg_bound_lin: float
    hg_bound_quad: float
    smoothing_ratio: float
    smoothing_flag: str
    y_growth_margin: float
    df_rhs: float
    lbound_margin: float
    c: float
    dt: float

    def to_csv_row(self) -> str:
        vals = []
        for col in CSV_COLUMNS:
            v = getattr(self, col)
            if isinstance(v, str):
                vals.append(v)
            else:
                if not np.isfinite(v):
                    raise ValueError(f"non-finite value in column {col}")
                vals.append(repr(float(v)))
        return ",".join(vals)

    @staticmethod
    def csv_header() -> str:
        return ",".join(CSV_COLUMNS)
