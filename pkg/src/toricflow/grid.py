"""Structured quadrature grids on moment polytopes with finite differences.

The grid is a uniform tensor lattice over the bounding box of the polytope,
clipped to the safety region {min_i l_i(x) >= h/2}.  That region is convex,
so the kept nodes along any axis line form one contiguous run and standard
second-order stencils (central in the interior, one-sided at run ends)
apply.  Weights follow a midpoint/trapezoid hybrid:

* along each x-line the rule is composite trapezoid over the kept span plus
  rectangle end strips out to the exact chord of P, so each line integrates
  its chord exactly on constants;
* across lines (n=2) the rule is midpoint with the two extremal slabs of P
  accounted for by their exact areas, folded into the nearest line.

All weights are positive and the total weight equals vol(P) up to O(h^2)
(exactly in one dimension).  Integrands produced by the rest of the package
are smooth up to the boundary of P, for which the rule is O(h^2).

Boundary (dsigma) quadrature lives on each facet separately: composite
midpoint in the facet parameter with total weight equal to the exact
lattice length of the facet.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from toricflow.polytope import ReflexivePolytope, moments

__all__ = ["QuadratureGrid", "build_grid", "GridError"]


class GridError(ValueError):
    pass


@dataclass
class FacetQuadrature:
    points: np.ndarray   # (k, n)
    weights: np.ndarray  # (k,) dsigma weights
    normal: np.ndarray   # (n,) primitive facet normal


@dataclass
class QuadratureGrid:
    polytope: ReflexivePolytope
    resolution: int
    h: float
    axes: list[np.ndarray]
    mask: np.ndarray                 # tensor boolean, True = kept node
    nodes: np.ndarray                # (N, n)
    weights: np.ndarray              # (N,)
    ell: np.ndarray                  # (N, m) facet distances at nodes
    normals: np.ndarray              # (m, n)
    d1: list[sp.csr_matrix]          # first derivative per axis
    d2: list[sp.csr_matrix]          # second derivative per axis
    dxy: sp.csr_matrix | None        # mixed derivative (n=2)
    facets: list[FacetQuadrature]
    flat_index: np.ndarray           # tensor int array, -1 where dropped
    volume: float = 0.0

    @property
    def dim(self) -> int:
        return self.polytope.dimension

    @property
    def num_nodes(self) -> int:
        return self.nodes.shape[0]

    def integrate(self, values: np.ndarray) -> float:
        """Quadrature of a node field against dmu."""
        return float(np.dot(self.weights, values))

    def grad(self, values: np.ndarray) -> np.ndarray:
        """(N, n) gradient of a node field, second order."""
        return np.stack([d @ values for d in self.d1], axis=-1)

    def hess(self, values: np.ndarray) -> np.ndarray:
        """(N, n, n) Hessian of a node field, second order, symmetrized."""
        n = self.dim
        out = np.empty((self.num_nodes, n, n))
        for a in range(n):
            out[:, a, a] = self.d2[a] @ values
        if n == 2:
            out[:, 0, 1] = out[:, 1, 0] = self.dxy @ values
        return out

    def boundary_integrate(self, func) -> float:
        """Integrate a callable(points)->values over dP against dsigma."""
        total = 0.0
        for fq in self.facets:
            total += float(np.dot(fq.weights, func(fq.points)))
        return total


def build_grid(P: ReflexivePolytope, resolution: int) -> QuadratureGrid:
    """Tensor grid over the bounding box of P clipped to min_i l_i >= h/2."""
    if resolution < 16:
        raise GridError("resolution must be at least 16 nodes per axis")
    n = P.dimension
    lo, hi = P.bounding_box()
    lo = np.array([float(c) for c in lo])
    hi = np.array([float(c) for c in hi])
    h = float(max(hi - lo)) / resolution

    axes = []
    for k in range(n):
        m = int(np.floor((hi[k] - lo[k]) / h - 0.5 + 1e-12))
        axes.append(lo[k] + h * np.arange(1, m + 1))
        if m < 3:
            raise GridError("resolution too small to place interior nodes")

    normals = P.normals_array()
    offsets = P.offsets_array()

    if n == 1:
        X = axes[0][:, None]
    else:
        g0, g1 = np.meshgrid(axes[0], axes[1], indexing="ij")
        X = np.stack([g0.ravel(), g1.ravel()], axis=-1)
    ell_full = X @ normals.T + offsets
    keep = ell_full.min(axis=1) >= 0.5 * h * (1.0 - 1e-12)
    shape = tuple(len(a) for a in axes)
    mask = keep.reshape(shape)
    mask = _prune_short_runs(mask)
    if not mask.any():
        raise GridError("clip region contains no interior nodes")

    flat_index = -np.ones(shape, dtype=np.int64)
    flat_index[mask] = np.arange(int(mask.sum()))
    nodes = X[mask.ravel()]
    ell = ell_full[mask.ravel()]

    exact = moments(P)
    volume = float(exact.volume)

    if n == 1:
        weights = _weights_1d(axes[0][mask.ravel()], float(lo[0]), float(hi[0]), h)
    else:
        weights = _weights_2d(P, axes, mask, flat_index, h)

    d1, d2, dxy = _fd_operators(axes, mask, flat_index, h,
                                normals=normals, ell=ell)
    facets = _facet_quadrature(P, h)

    return QuadratureGrid(
        polytope=P, resolution=resolution, h=h, axes=axes, mask=mask,
        nodes=nodes, weights=weights, ell=ell, normals=normals,
        d1=d1, d2=d2, dxy=dxy, facets=facets, flat_index=flat_index,
        volume=volume)


def _prune_short_runs(mask: np.ndarray) -> np.ndarray:
    """Drop nodes on axis runs shorter than 3 (stencils need three points)."""
    mask = mask.copy()
    if mask.ndim == 1:
        return mask if int(mask.sum()) >= 3 else np.zeros_like(mask)
    changed = True
    while changed:
        changed = False
        for axis in (0, 1):
            m = mask if axis == 0 else mask.T
            for line in m:
                idx = np.flatnonzero(line)
                if idx.size == 0:
                    continue
                # contiguity is guaranteed by convexity; runs at the ends of
                # a convex region can still be short near corners
                runs = np.split(idx, np.flatnonzero(np.diff(idx) > 1) + 1)
                for run in runs:
                    if run.size < 3:
                        line[run] = False
                        changed = True
    return mask


def _row_rule(xs: np.ndarray, a: float, b: float, h: float) -> np.ndarray:
    """Trapezoid over the node span plus rectangle strips to the chord [a,b]."""
    m = xs.size
    w = np.full(m, h)
    if m >= 2:
        w[0] = w[-1] = 0.5 * h
    else:
        w[0] = 0.0
    w[0] += max(xs[0] - a, 0.0)
    w[-1] += max(b - xs[-1], 0.0)
    return w


def _weights_1d(xs: np.ndarray, a: float, b: float, h: float) -> np.ndarray:
    return _row_rule(xs, a, b, h)


def _chord(P: ReflexivePolytope, y: float) -> tuple[float, float]:
    """Exact x-extent of P cut by the horizontal line at height y."""
    verts = P.vertices_array()
    m = verts.shape[0]
    xs = []
    for i in range(m):
        p, q = verts[i], verts[(i + 1) % m]
        y0, y1 = p[1], q[1]
        if y0 == y1:
            if abs(y - y0) < 1e-14:
                xs.extend([p[0], q[0]])
            continue
        t = (y - y0) / (y1 - y0)
        if -1e-14 <= t <= 1 + 1e-14:
            xs.append(p[0] + t * (q[0] - p[0]))
    if not xs:
        raise GridError(f"line y={y} misses the polygon")
    return min(xs), max(xs)


def _clip_area_below(P: ReflexivePolytope, y: float, above: bool) -> float:
    """Area of P cap {y' >= y} (above=True) or {y' <= y}."""
    poly = [tuple(v) for v in P.vertices_array()]
    out = []
    mm = len(poly)
    sgn = 1.0 if above else -1.0
    for i in range(mm):
        p, q = poly[i], poly[(i + 1) % mm]
        fp = sgn * (p[1] - y)
        fq = sgn * (q[1] - y)
        if fp >= 0:
            out.append(p)
        if (fp > 0 > fq) or (fp < 0 < fq):
            t = fp / (fp - fq)
            out.append((p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])))
    if len(out) < 3:
        return 0.0
    area = 0.0
    for i in range(len(out)):
        x0, y0 = out[i]
        x1, y1 = out[(i + 1) % len(out)]
        area += x0 * y1 - x1 * y0
    return abs(area) / 2.0


def _weights_2d(P, axes, mask, flat_index, h) -> np.ndarray:
    N = int(mask.sum())
    weights = np.zeros(N)
    ys = axes[1]
    rows_with_nodes = np.flatnonzero(mask.any(axis=0))
    for j in rows_with_nodes:
        cols = np.flatnonzero(mask[:, j])
        xs = axes[0][cols]
        a, b = _chord(P, ys[j])
        wx = _row_rule(xs, a, b, h)
        weights[flat_index[cols, j]] += h * wx

    # extremal slabs beyond the midpoint coverage of the first/last rows
    j0, j1 = rows_with_nodes[0], rows_with_nodes[-1]
    verts = P.vertices_array()
    y_min, y_max = verts[:, 1].min(), verts[:, 1].max()
    for j, edge_y, above in ((j0, ys[j0] - 0.5 * h, False), (j1, ys[j1] + 0.5 * h, True)):
        slab = _clip_area_below(P, edge_y, above)
        if slab <= 0:
            continue
        cols = np.flatnonzero(mask[:, j])
        idx = flat_index[cols, j]
        w = weights[idx]
        weights[idx] += slab * w / w.sum()
    # interior coverage gaps (rows inside [y_min, y_max] without nodes beyond
    # the extremal ones) are absorbed by the slab terms above
    return weights


def _iter_lines(mask: np.ndarray, axis: int):
    """Yield (fixed_indices, variable_indices) of kept runs along an axis."""
    if mask.ndim == 1:
        idx = np.flatnonzero(mask)
        if idx.size:
            yield (), idx
        return
    other = 1 - axis
    for j in range(mask.shape[other]):
        line = mask[:, j] if axis == 0 else mask[j, :]
        idx = np.flatnonzero(line)
        if idx.size == 0:
            continue
        runs = np.split(idx, np.flatnonzero(np.diff(idx) > 1) + 1)
        for run in runs:
            yield (j,), run


def _line_flat(flat_index, axis, fixed, run):
    if flat_index.ndim == 1:
        return flat_index[run]
    j = fixed[0]
    return flat_index[run, j] if axis == 0 else flat_index[j, run]


def _fd_operators(axes, mask, flat_index, h, normals=None, ell=None):
    """Second-order first/second derivative CSR matrices per axis.

    Near facets whose normal is not axis-aligned, the second-derivative and
    mixed rows are rebuilt from directional second differences adapted to
    the facet (see _rotate_near_facets): the one-sided direction is then
    the degenerate normal of the metric, which is the stable configuration.
    """
    N = int(mask.sum())
    ndim = 1 if mask.ndim == 1 else 2
    d1 = []
    d2rows = []   # per axis: dict row -> list[(col, val)]
    for axis in range(ndim):
        rows1, cols1, vals1 = [], [], []
        rdict: dict[int, list] = {}
        for fixed, run in _iter_lines(mask, axis):
            gidx = _line_flat(flat_index, axis, fixed, run)
            m = len(gidx)
            if m < 3:
                raise GridError("internal: run shorter than 3 survived pruning")
            for k in range(m):
                r = int(gidx[k])
                if k == 0:
                    st1 = [(0, -3.0), (1, 4.0), (2, -1.0)]
                elif k == m - 1:
                    st1 = [(m - 3, 1.0), (m - 2, -4.0), (m - 1, 3.0)]
                else:
                    st1 = [(k - 1, -1.0), (k + 1, 1.0)]
                for kk, c in st1:
                    rows1.append(r); cols1.append(gidx[kk]); vals1.append(c / (2 * h))
                if k == 0:
                    if m >= 4:
                        st2 = [(0, 2.0), (1, -5.0), (2, 4.0), (3, -1.0)]
                    else:
                        st2 = [(0, 1.0), (1, -2.0), (2, 1.0)]
                elif k == m - 1:
                    if m >= 4:
                        st2 = [(m - 1, 2.0), (m - 2, -5.0), (m - 3, 4.0), (m - 4, -1.0)]
                    else:
                        st2 = [(m - 3, 1.0), (m - 2, -2.0), (m - 1, 1.0)]
                else:
                    st2 = [(k - 1, 1.0), (k, -2.0), (k + 1, 1.0)]
                rdict[r] = [(int(gidx[kk]), c / (h * h)) for kk, c in st2]
        d1.append(sp.csr_matrix((vals1, (rows1, cols1)), shape=(N, N)))
        d2rows.append(rdict)

    if ndim == 1:
        d2 = [_rows_to_csr(d2rows[0], N)]
        return d1, d2, None

    dxyrows = _mixed_rows(mask, flat_index, h)
    if normals is not None and ell is not None:
        _rotate_near_facets(mask, flat_index, h, normals, ell,
                            d2rows[0], d2rows[1], dxyrows)
    d2 = [_rows_to_csr(d2rows[0], N), _rows_to_csr(d2rows[1], N)]
    dxy = _rows_to_csr(dxyrows, N)
    return d1, d2, dxy


def _rows_to_csr(rows: dict, N: int) -> sp.csr_matrix:
    r, c, v = [], [], []
    for row, entries in rows.items():
        for col, val in entries:
            r.append(row); c.append(col); v.append(val)
    return sp.csr_matrix((v, (r, c)), shape=(N, N))


_CENTRAL = ((-1, -0.5), (1, 0.5))
_FORWARD = ((0, -1.5), (1, 2.0), (2, -0.5))
_BACKWARD = ((0, 1.5), (-1, -2.0), (-2, 0.5))


def _run_position(mask_line: np.ndarray, k: int) -> tuple[int, int]:
    """(offset to run start, offset to run end) of index k within its run."""
    lo = k
    while lo - 1 >= 0 and mask_line[lo - 1]:
        lo -= 1
    hi = k
    while hi + 1 < mask_line.size and mask_line[hi + 1]:
        hi += 1
    return k - lo, hi - k


def _axis_stencils(before: int, after: int):
    """Feasible one-axis first-derivative stencils, preferred order first."""
    out = []
    if before >= 1 and after >= 1:
        out.append(_CENTRAL)
    if after >= 2:
        out.append(_FORWARD)
    if before >= 2:
        out.append(_BACKWARD)
    return out


def _mixed_rows(mask, flat_index, h) -> dict:
    """Direct tensor-product d^2/dxdy rows, second order at every node.

    Composing the one-dimensional operators is not consistent near run ends
    (the truncation-error coefficient jumps between one-sided and central
    rows, and the outer derivative amplifies the jump), so the mixed stencil
    is built as a genuine product cx_a * cy_b over a rectangle of existing
    nodes, with both axis stencils chosen jointly.
    """
    rows: dict[int, list] = {}
    nz = np.argwhere(mask)
    for i, j in nz:
        r = int(flat_index[i, j])
        sx_list = _axis_stencils(*_run_position(mask[:, j], i))
        sy_list = _axis_stencils(*_run_position(mask[i, :], j))
        chosen = None
        for sx in sx_list:
            for sy in sy_list:
                if all(flat_index[i + a, j + b] >= 0 for a, _ in sx for b, _ in sy):
                    chosen = (sx, sy)
                    break
            if chosen:
                break
        if chosen is None:
            # first-order 2x2 fallback for pathological corners
            chosen = _fallback_2x2(mask, i, j)
            if chosen is None:
                raise GridError(f"no mixed stencil at node ({i},{j})")
        sx, sy = chosen
        rows[r] = [(int(flat_index[i + a, j + b]), ca * cb / (h * h))
                   for a, ca in sx for b, cb in sy]
    return rows


_DIR_END4 = (2.0, -5.0, 4.0, -1.0)   # one-sided second derivative, O(h^2)
_DIR_END3 = (1.0, -2.0, 1.0)         # shifted second difference, O(h)


def _directional_row(mask, flat_index, i, j, d, h):
    """Second-difference row along lattice direction d at node (i, j).

    Prefers the centered stencil, then 4-point one-sided (either way),
    then the 3-point shifted one.  Returns (entries, unit) where entries
    divide by the squared step along d and unit-normalizes to the unit
    directional second derivative; None if no stencil fits.
    """
    step2 = float(d[0] * d[0] + d[1] * d[1]) * h * h

    def at(k):
        ii, jj = i + k * d[0], j + k * d[1]
        if 0 <= ii < mask.shape[0] and 0 <= jj < mask.shape[1] and mask[ii, jj]:
            return int(flat_index[ii, jj])
        return None

    c0, cp, cm = at(0), at(1), at(-1)
    if cp is not None and cm is not None:
        return [(cm, 1.0 / step2), (c0, -2.0 / step2), (cp, 1.0 / step2)]
    for s in (1, -1):
        pts = [at(s * k) for k in range(4)]
        if all(p is not None for p in pts):
            return [(p, c / step2) for p, c in zip(pts, _DIR_END4)]
    for s in (1, -1):
        pts = [at(s * k) for k in range(3)]
        if all(p is not None for p in pts):
            return [(p, c / step2) for p, c in zip(pts, _DIR_END3)]
    return None


def _combine_rows(parts) -> list:
    acc: dict[int, float] = {}
    for coef, entries in parts:
        if coef == 0.0:
            continue
        for col, val in entries:
            acc[col] = acc.get(col, 0.0) + coef * val
    return [(c, v) for c, v in acc.items() if v != 0.0]


def _int_normal(v) -> tuple[int, int]:
    return (int(round(v[0])), int(round(v[1])))


def _edge_direction(v_along, v_other) -> tuple[int, int]:
    """Inward edge direction at a vertex: tangent to v_along, into v_other."""
    w = (-v_along[1], v_along[0])
    if v_other[0] * w[0] + v_other[1] * w[1] < 0:
        w = (-w[0], -w[1])
    return w


def _recover_hessian_rows(mask, flat_index, i, j, h, dirs):
    """Rows for (xx, xy, yy) from second differences along three directions.

    Returns None if any directional stencil cannot be placed.
    """
    rows_q = []
    A = np.empty((3, 3))
    for k, d in enumerate(dirs):
        row = _directional_row(mask, flat_index, i, j, d, h)
        if row is None:
            return None
        rows_q.append(row)
        u = np.array(d, dtype=float)
        u /= np.linalg.norm(u)
        A[k] = [u[0] ** 2, 2.0 * u[0] * u[1], u[1] ** 2]
    if abs(np.linalg.det(A)) < 1e-10:
        return None
    Ainv = np.linalg.inv(A)
    return tuple(_combine_rows(zip(Ainv[k], rows_q)) for k in range(3))


def _rotate_near_facets(mask, flat_index, h, normals, ell, d2x, d2y, dxy,
                        strip_band: float = 2.5, pair_band: float = 4.0):
    """Rebuild Hessian rows near non-axis facets from adapted directions.

    The metric degenerates in the facet-normal direction at a facet and in
    both edge directions at a vertex.  Stability of the explicit flow
    requires that one-sided second differences only carry the degenerate
    (vanishing-diffusivity) directions; axis-aligned one-sided stencils at
    a diagonal staircase couple O(1) diffusivities anti-dissipatively and
    blow up in finite time.  Hence:

    * within ``pair_band*h`` of a vertex involving a non-axis facet, the
      Hessian entries are recovered from second differences along the two
      inward edge directions plus one transverse direction;
    * within ``strip_band*h`` of a single non-axis facet, from the facet
      tangent (centered), the inward normal (one-sided), and the x axis.

    Axis-aligned facets and their vertices keep the plain axis stencils,
    which already have this adapted structure.
    """
    diag = [k for k, v in enumerate(normals) if v[0] != 0.0 and v[1] != 0.0]
    if not diag:
        return
    m = normals.shape[0]
    strip_scale = [strip_band * h * float(np.max(np.abs(normals[k]))) for k in range(m)]
    pair_scale = [pair_band * h * float(np.max(np.abs(normals[k]))) for k in range(m)]
    ii, jj = np.nonzero(mask)
    for i, j in zip(ii, jj):
        r = int(flat_index[i, j])
        near_pair = [k for k in range(m) if ell[r, k] < pair_scale[k]]
        dirs = None
        if len(near_pair) >= 2 and any(k in diag for k in near_pair):
            ks = sorted(near_pair, key=lambda k: ell[r, k])[:2]
            va, vb = _int_normal(normals[ks[0]]), _int_normal(normals[ks[1]])
            if abs(va[0] * vb[1] - va[1] * vb[0]) >= 1:
                d1 = _edge_direction(va, vb)
                d2 = _edge_direction(vb, va)
                d3a = (d1[0] - d2[0], d1[1] - d2[1])
                d3b = (d1[0] + d2[0], d1[1] + d2[1])
                d3 = min((d for d in (d3a, d3b) if d != (0, 0)),
                         key=lambda d: d[0] ** 2 + d[1] ** 2)
                dirs = (d1, d2, d3)
        if dirs is None:
            near_strip = [k for k in diag if ell[r, k] < strip_scale[k]]
            if not near_strip:
                continue
            k = min(near_strip, key=lambda k: ell[r, k] / strip_scale[k])
            vi = _int_normal(normals[k])
            dirs = ((-vi[1], vi[0]), vi, (1, 0))
        rec = _recover_hessian_rows(mask, flat_index, i, j, h, dirs)
        if rec is None:
            continue  # keep axis rows where no adapted stencil fits
        d2x[r], dxy[r], d2y[r] = rec


def _fallback_2x2(mask, i, j):
    for s in (1, -1):
        for t in (1, -1):
            ii, jj = i + s, j + t
            if (0 <= ii < mask.shape[0] and 0 <= jj < mask.shape[1]
                    and mask[ii, j] and mask[i, jj] and mask[ii, jj]):
                return (((0, -float(s)), (s, float(s))),
                        ((0, -float(t)), (t, float(t))))
    return None


def _facet_quadrature(P: ReflexivePolytope, h: float) -> list[FacetQuadrature]:
    from toricflow.polytope import _facet_segment, _sigma_length  # internal reuse

    facets = []
    if P.dimension == 1:
        for i, v in enumerate(P.normals):
            x = -float(P.offsets[i]) / float(v[0])
            facets.append(FacetQuadrature(
                points=np.array([[x]]), weights=np.array([1.0]),
                normal=np.array([float(v[0])])))
        return facets
    for i in range(P.num_facets):
        a, b = _facet_segment(P, i)
        L = float(_sigma_length(P, i))
        af = np.array([float(c) for c in a])
        bf = np.array([float(c) for c in b])
        m = max(1, int(round(np.linalg.norm(bf - af) / h)))
        s = (np.arange(m) + 0.5) / m
        pts = af[None, :] + s[:, None] * (bf - af)[None, :]
        w = np.full(m, L / m)
        facets.append(FacetQuadrature(points=pts, weights=w,
                                      normal=P.normals_array()[i]))
    return facets
