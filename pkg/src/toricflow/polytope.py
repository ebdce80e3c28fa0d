"""Exact rational geometry of reflexive Delzant moment polytopes.

A reflexive polytope is described by facet inequalities

    l_i(x) = <v_i, x> + 1 >= 0,

with primitive integer normals v_i, so the origin is an interior point at
lattice distance one from every facet.  Everything in this module is exact:
coordinates are ``fractions.Fraction`` and equality tests (e.g. whether the
Futaki character vanishes) are genuine equalities, not tolerance checks.

Measures.  ``dmu`` is Lebesgue measure on P.  On a facet with primitive
normal v the boundary measure ``dsigma`` is Euclidean (n-1)-measure divided
by the Euclidean length of v; equivalently it is the lattice measure of the
facet hyperplane.  Under this normalization every polytope with all offsets
equal to one satisfies

    vol_sigma(boundary P) = n * vol(P)

exactly, which is the calibration that makes the linear functional

    L_P(f) = int_{dP} f dsigma - n int_P f dmu

vanish on constants.  L_P applied to the coordinate functions is the toric
Futaki character; L_P applied to convex piecewise-linear functions is the
K-semistability test functional.

Only dimensions 1 and 2 are supported (intervals and reflexive polygons),
which covers the projective line/plane, products, and the toric del Pezzo
surfaces shipped in :func:`builtin`.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Iterable, Sequence

import numpy as np

__all__ = [
    "ReflexivePolytope",
    "PiecewiseLinearConvex",
    "ValidationReport",
    "PolytopeError",
    "validate",
    "moments",
    "donaldson_functional",
    "futaki_character",
    "builtin",
    "builtin_names",
    "parse_polytope_file",
    "dump_polytope_file",
]

Frac = Fraction
Vec = tuple[Fraction, ...]

BUILTIN_NAMES = ("cp1", "cp2", "cp1xcp1", "dp1", "dp2", "dp3")


class PolytopeError(ValueError):
    """Structurally inconsistent or unsupported polytope data."""


def _frac_vec(v: Iterable) -> Vec:
    return tuple(Fraction(c) for c in v)


def _dot(a: Sequence[Fraction], b: Sequence[Fraction]) -> Fraction:
    return sum((x * y for x, y in zip(a, b)), Fraction(0))


def _det2(a: Sequence[Fraction], b: Sequence[Fraction]) -> Fraction:
    return a[0] * b[1] - a[1] * b[0]


@dataclass(frozen=True)
class PiecewiseLinearConvex:
    """max of finitely many affine functions: x -> max_k (<a_k, x> + b_k)."""

    pieces: tuple[tuple[Vec, Fraction], ...]

    @classmethod
    def from_pieces(cls, pieces: Iterable[tuple[Iterable, object]]) -> "PiecewiseLinearConvex":
        return cls(tuple((_frac_vec(a), Fraction(b)) for a, b in pieces))

    @classmethod
    def affine(cls, slope: Iterable, intercept=0) -> "PiecewiseLinearConvex":
        return cls.from_pieces([(slope, intercept)])

    @classmethod
    def crease(cls, slope: Iterable, offset) -> "PiecewiseLinearConvex":
        """max(0, <slope, x> - offset), the single-crease test function."""
        a = _frac_vec(slope)
        zero = tuple(Fraction(0) for _ in a)
        return cls(((zero, Fraction(0)), (a, -Fraction(offset))))

    @property
    def dimension(self) -> int:
        return len(self.pieces[0][0])

    def __call__(self, x: Sequence) -> Fraction:
        xf = _frac_vec(x)
        return max(_dot(a, xf) + b for a, b in self.pieces)


@dataclass(frozen=True)
class ReflexivePolytope:
    """Facet description l_i(x) = <normal_i, x> + offset_i >= 0 plus vertices."""

    dimension: int
    normals: tuple[Vec, ...]
    offsets: tuple[Fraction, ...]
    vertices: tuple[Vec, ...]
    name: str = ""

    @classmethod
    def from_facets(cls, normals: Iterable[Iterable], offsets: Iterable = None,
                    name: str = "") -> "ReflexivePolytope":
        """Build from facet data alone; vertices are derived exactly."""
        norm = tuple(_frac_vec(v) for v in normals)
        if not norm:
            raise PolytopeError("no facets given")
        dim = len(norm[0])
        if any(len(v) != dim for v in norm):
            raise PolytopeError("facet normals of mixed dimension")
        if dim not in (1, 2):
            raise PolytopeError(f"dimension {dim} not supported (only n=1, n=2)")
        if offsets is None:
            offs = tuple(Fraction(1) for _ in norm)
        else:
            offs = tuple(Fraction(c) for c in offsets)
            if len(offs) != len(norm):
                raise PolytopeError("offsets/normals length mismatch")
        verts = _vertices_from_facets(dim, norm, offs)
        return cls(dim, norm, offs, verts, name)

    @property
    def num_facets(self) -> int:
        return len(self.normals)

    def ell(self, x: Sequence) -> tuple[Fraction, ...]:
        xf = _frac_vec(x)
        return tuple(_dot(v, xf) + c for v, c in zip(self.normals, self.offsets))

    def contains(self, x: Sequence) -> bool:
        return all(e >= 0 for e in self.ell(x))

    def bounding_box(self) -> tuple[Vec, Vec]:
        lo = tuple(min(v[k] for v in self.vertices) for k in range(self.dimension))
        hi = tuple(max(v[k] for v in self.vertices) for k in range(self.dimension))
        return lo, hi

    # float views used by the numerical modules
    def normals_array(self) -> np.ndarray:
        return np.array([[float(c) for c in v] for v in self.normals])

    def offsets_array(self) -> np.ndarray:
        return np.array([float(c) for c in self.offsets])

    def vertices_array(self) -> np.ndarray:
        return np.array([[float(c) for c in v] for v in self.vertices])

    def __repr__(self) -> str:  # pragma: no cover - cosmetic
        tag = self.name or "polytope"
        return f"ReflexivePolytope({tag}, n={self.dimension}, facets={self.num_facets})"


def _vertices_from_facets(dim, normals, offsets) -> tuple[Vec, ...]:
    """Intersect facet subsets; keep feasible points lying on >= dim facets."""
    m = len(normals)
    found: list[Vec] = []
    for idx in combinations(range(m), dim):
        if dim == 1:
            (i,) = idx
            if normals[i][0] == 0:
                continue
            x = (-offsets[i] / normals[i][0],)
        else:
            i, j = idx
            d = _det2(normals[i], normals[j])
            if d == 0:
                continue
            # solve v_i . x = -c_i, v_j . x = -c_j
            x = (
                (-offsets[i] * normals[j][1] + offsets[j] * normals[i][1]) / d,
                (-offsets[j] * normals[i][0] + offsets[i] * normals[j][0]) / d,
            )
        ells = [_dot(v, x) + c for v, c in zip(normals, offsets)]
        if all(e >= 0 for e in ells) and x not in found:
            found.append(x)
    if not found:
        raise PolytopeError("facet data defines an empty or unbounded region")
    if dim == 2:
        found = _sort_ccw(found)
    else:
        found.sort()
    return tuple(found)


def _sort_ccw(points: list[Vec]) -> list[Vec]:
    cx = sum(p[0] for p in points) / len(points)
    cy = sum(p[1] for p in points) / len(points)
    return sorted(points, key=lambda p: np.arctan2(float(p[1] - cy), float(p[0] - cx)))


# ---------------------------------------------------------------------------
# validation
# ---------------------------------------------------------------------------

@dataclass
class ValidationReport:
    passed: bool
    origin_interior: bool
    vertices_on_n_facets: bool
    delzant: bool
    reflexive: bool
    messages: list[str] = field(default_factory=list)

    def __bool__(self) -> bool:
        return self.passed


def _is_primitive(v: Vec) -> bool:
    ints = []
    for c in v:
        if c.denominator != 1:
            return False
        ints.append(abs(int(c)))
    g = 0
    for c in ints:
        g = np.gcd(g, c)
    return g == 1


def validate(P: ReflexivePolytope) -> ValidationReport:
    """Check the four defining invariants; report which fail and where."""
    msgs: list[str] = []
    if not P.normals or not P.vertices:
        raise PolytopeError("facets and vertices must be populated")

    origin_ok = all(c > 0 for c in P.offsets)
    if not origin_ok:
        msgs.append("origin not strictly interior (some offset <= 0)")

    reflexive = True
    for i, (v, c) in enumerate(zip(P.normals, P.offsets)):
        if c != 1:
            reflexive = False
            msgs.append(f"facet {i}: offset {c} != 1")
        if not _is_primitive(v):
            reflexive = False
            msgs.append(f"facet {i}: normal {tuple(map(str, v))} not primitive integer")
    for j, w in enumerate(P.vertices):
        if any(c.denominator != 1 for c in w):
            reflexive = False
            msgs.append(f"vertex {j}: not a lattice point")

    incidence_ok = True
    delzant = True
    for j, w in enumerate(P.vertices):
        ells = P.ell(w)
        if any(e < 0 for e in ells):
            raise PolytopeError(f"vertex {j} violates facet inequality")
        active = [i for i, e in enumerate(ells) if e == 0]
        if len(active) != P.dimension:
            incidence_ok = False
            msgs.append(f"vertex {j}: lies on {len(active)} facets, expected {P.dimension}")
            continue
        if P.dimension == 1:
            d = P.normals[active[0]][0]
        else:
            d = _det2(P.normals[active[0]], P.normals[active[1]])
        if abs(d) != 1:
            delzant = False
            msgs.append(f"vertex {j}: incident normal determinant {d}, expected +-1")

    passed = origin_ok and incidence_ok and delzant and reflexive
    return ValidationReport(passed, origin_ok, incidence_ok, delzant, reflexive, msgs)


# ---------------------------------------------------------------------------
# exact moments
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Moments:
    volume: Fraction
    first_moment: Vec
    boundary_volume: Fraction
    boundary_first_moment: Vec

    @property
    def barycenter(self) -> Vec:
        return tuple(m / self.volume for m in self.first_moment)


def _sigma_length(P: ReflexivePolytope, i: int) -> Fraction:
    """Lattice (dsigma) measure of facet i."""
    if P.dimension == 1:
        return Fraction(1)
    a, b = _facet_segment(P, i)
    d = tuple(b[k] - a[k] for k in range(2))
    # d is an integer vector orthogonal to the primitive normal v_i, hence an
    # integer multiple of the primitive tangent (-v_y, v_x); that multiple is
    # the lattice length.
    v = P.normals[i]
    t = (-v[1], v[0])
    if t[0] != 0:
        k = d[0] / t[0]
    else:
        k = d[1] / t[1]
    return abs(k)


def _facet_segment(P: ReflexivePolytope, i: int) -> tuple[Vec, Vec]:
    ends = [w for w in P.vertices if _dot(P.normals[i], w) + P.offsets[i] == 0]
    if len(ends) != 2:
        raise PolytopeError(f"facet {i} has {len(ends)} incident vertices, expected 2")
    return ends[0], ends[1]


def moments(P: ReflexivePolytope) -> Moments:
    """Exact volume, first moment, and their boundary (dsigma) counterparts."""
    n = P.dimension
    if n == 1:
        a, b = P.vertices[0][0], P.vertices[-1][0]
        if a == b:
            raise PolytopeError("degenerate interval")
        vol = b - a
        mom = ((b * b - a * a) / 2,)
        bvol = Fraction(2)  # each endpoint carries sigma-weight 1
        bmom = (a + b,)
        return Moments(vol, mom, bvol, bmom)

    verts = list(P.vertices)
    vol = Fraction(0)
    mx = Fraction(0)
    my = Fraction(0)
    for a, b in zip(verts, verts[1:] + verts[:1]):
        d = _det2(a, b)  # fan triangle (0, a, b), signed
        vol += d / 2
        mx += d * (a[0] + b[0]) / 6
        my += d * (a[1] + b[1]) / 6
    if vol < 0:
        vol, mx, my = -vol, -mx, -my
    if vol == 0:
        raise PolytopeError("degenerate (zero-area) polygon")

    bvol = Fraction(0)
    bmx = Fraction(0)
    bmy = Fraction(0)
    for i in range(P.num_facets):
        L = _sigma_length(P, i)
        a, b = _facet_segment(P, i)
        bvol += L
        bmx += L * (a[0] + b[0]) / 2
        bmy += L * (a[1] + b[1]) / 2
    return Moments(vol, (mx, my), bvol, (bmx, bmy))


# ---------------------------------------------------------------------------
# exact integration of piecewise-linear convex functions
# ---------------------------------------------------------------------------

def _clip_halfplane(poly: list[Vec], a: Vec, b: Fraction) -> list[Vec]:
    """Sutherland-Hodgman clip of a convex polygon to {<a,x> + b >= 0}, exact."""
    if not poly:
        return []
    out: list[Vec] = []
    m = len(poly)
    for i in range(m):
        p, q = poly[i], poly[(i + 1) % m]
        fp = _dot(a, p) + b
        fq = _dot(a, q) + b
        if fp >= 0:
            out.append(p)
        if (fp > 0 > fq) or (fp < 0 < fq):
            t = fp / (fp - fq)
            out.append(tuple(p[k] + t * (q[k] - p[k]) for k in range(2)))
    # drop exact duplicates
    dedup: list[Vec] = []
    for p in out:
        if not dedup or p != dedup[-1]:
            dedup.append(p)
    if len(dedup) > 1 and dedup[0] == dedup[-1]:
        dedup.pop()
    return dedup


def _polygon_area_moment(poly: list[Vec]) -> tuple[Fraction, Vec]:
    if len(poly) < 3:
        return Fraction(0), (Fraction(0), Fraction(0))
    area = Fraction(0)
    mx = Fraction(0)
    my = Fraction(0)
    for a, b in zip(poly, poly[1:] + poly[:1]):
        d = _det2(a, b)
        area += d / 2
        mx += d * (a[0] + b[0]) / 6
        my += d * (a[1] + b[1]) / 6
    if area < 0:
        area, mx, my = -area, -mx, -my
    return area, (mx, my)


def _active_regions(P: ReflexivePolytope, f: PiecewiseLinearConvex):
    """Split P along the crease loci of f; yield (piece, region polygon)."""
    pieces = f.pieces
    base = list(P.vertices)
    for k, (ak, bk) in enumerate(pieces):
        region = base
        for j, (aj, bj) in enumerate(pieces):
            if j == k:
                continue
            diff = tuple(ak[t] - aj[t] for t in range(2))
            region = _clip_halfplane(region, diff, bk - bj)
            if not region:
                break
        if region:
            yield (ak, bk), region


def _integrate_pl_interval(f: PiecewiseLinearConvex, a: Fraction, b: Fraction) -> Fraction:
    """Exact integral of a 1-D piecewise-linear max over [a, b]."""
    if a == b:
        return Fraction(0)
    pieces = [(p[0][0], p[1]) for p in f.pieces]
    # breakpoints: pairwise intersections inside (a, b)
    pts = {a, b}
    for (s1, c1), (s2, c2) in combinations(pieces, 2):
        if s1 != s2:
            t = (c2 - c1) / (s1 - s2)
            if a < t < b:
                pts.add(t)
    knots = sorted(pts)
    total = Fraction(0)
    for lo, hi in zip(knots, knots[1:]):
        mid = (lo + hi) / 2
        s, c = max(pieces, key=lambda p: p[0] * mid + p[1])
        total += s * (hi * hi - lo * lo) / 2 + c * (hi - lo)
    return total


def _integrate_pl_segment(f: PiecewiseLinearConvex, a: Vec, b: Vec, length: Fraction) -> Fraction:
    """Exact integral of f over the segment [a, b] against measure length*ds."""
    # restrict each piece to the parametrized segment x(s) = a + s (b - a)
    restricted = []
    for slope, c in f.pieces:
        g1 = _dot(slope, tuple(b[k] - a[k] for k in range(len(a))))
        g0 = _dot(slope, a) + c
        restricted.append(((g1,), g0))
    f1 = PiecewiseLinearConvex(tuple(restricted))
    return length * _integrate_pl_interval(f1, Fraction(0), Fraction(1))


def donaldson_functional(P: ReflexivePolytope, f: PiecewiseLinearConvex) -> Fraction:
    """Exact L_P(f) = int_{dP} f dsigma - n int_P f dmu.

    The interior integral decomposes P along the crease loci of f and
    integrates each active affine piece over its (convex) region; the
    boundary integral is piecewise-linear integration over each facet with
    the lattice dsigma measure.  Nonnegative for all convex f exactly when
    the polytope is K-semistable; on affine f it reduces to the pairing
    with the Futaki character.
    """
    if f.dimension != P.dimension:
        raise PolytopeError("function/polytope dimension mismatch")
    n = P.dimension
    if n == 1:
        a, b = P.vertices[0][0], P.vertices[-1][0]
        interior = _integrate_pl_interval(f, a, b)
        boundary = f((a,)) + f((b,))
        return boundary - interior

    interior = Fraction(0)
    for (ak, bk), region in _active_regions(P, f):
        area, mom = _polygon_area_moment(region)
        interior += _dot(ak, mom) + bk * area
    boundary = Fraction(0)
    for i in range(P.num_facets):
        a, b = _facet_segment(P, i)
        boundary += _integrate_pl_segment(f, a, b, _sigma_length(P, i))
    return boundary - n * interior


def futaki_character(P: ReflexivePolytope) -> Vec:
    """L_P applied to the coordinate functions; zero iff the barycenter is 0."""
    out = []
    for k in range(P.dimension):
        e = [0] * P.dimension
        e[k] = 1
        out.append(donaldson_functional(P, PiecewiseLinearConvex.affine(e)))
    return tuple(out)


# ---------------------------------------------------------------------------
# built-in library and file format
# ---------------------------------------------------------------------------

_BUILTIN_FACETS = {
    # interval [-1, 1]
    "cp1": [(1,), (-1,)],
    # simplex with vertices (-1,-1), (2,-1), (-1,2)
    "cp2": [(1, 0), (0, 1), (-1, -1)],
    # square [-1, 1]^2
    "cp1xcp1": [(1, 0), (0, 1), (-1, 0), (0, -1)],
    # one-point blow-up of the plane: quadrilateral, off-center barycenter
    "dp1": [(1, 0), (0, 1), (1, 1), (-1, -1)],
    # two-point blow-up: pentagon
    "dp2": [(1, 0), (0, 1), (1, 1), (0, -1), (-1, -1)],
    # three-point blow-up: centrally symmetric hexagon
    "dp3": [(1, 0), (0, 1), (1, 1), (-1, 0), (0, -1), (-1, -1)],
}


def builtin_names() -> tuple[str, ...]:
    return BUILTIN_NAMES


def builtin(name: str) -> ReflexivePolytope:
    """Return one of the standard reflexive polytopes by name."""
    key = name.lower()
    if key not in _BUILTIN_FACETS:
        raise PolytopeError(f"unknown builtin polytope {name!r}; know {BUILTIN_NAMES}")
    return ReflexivePolytope.from_facets(_BUILTIN_FACETS[key], name=key)


def parse_polytope_file(text: str, name: str = "") -> ReflexivePolytope:
    """Parse the plain-text facet format.

    Lines: ``dimension <n>``, optional ``name <label>``, and one
    ``facet <n ints> <offset>`` per facet.  ``#`` starts a comment.
    Raises PolytopeError with a line number on malformed input.
    """
    dim = None
    label = name
    facets: list[tuple[list[int], int]] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        kind = parts[0].lower()
        try:
            if kind == "dimension":
                dim = int(parts[1])
            elif kind == "name":
                label = parts[1]
            elif kind == "facet":
                nums = [int(p) for p in parts[1:]]
                if dim is None:
                    raise PolytopeError(f"line {lineno}: facet before dimension")
                if len(nums) not in (dim, dim + 1):
                    raise PolytopeError(
                        f"line {lineno}: facet needs {dim} normal entries "
                        f"(+ optional offset), got {len(nums)}")
                if len(nums) == dim:
                    nums.append(1)
                facets.append((nums[:dim], nums[dim]))
            elif kind == "vertex":
                pass  # informational; vertices are re-derived from facets
            else:
                raise PolytopeError(f"line {lineno}: unknown keyword {kind!r}")
        except (IndexError, ValueError) as exc:
            raise PolytopeError(f"line {lineno}: cannot parse {line!r}: {exc}") from exc
    if dim is None or not facets:
        raise PolytopeError("file must declare a dimension and at least one facet")
    P = ReflexivePolytope.from_facets(
        [v for v, _ in facets], [c for _, c in facets], name=label)
    return P


def dump_polytope_file(P: ReflexivePolytope) -> str:
    lines = [f"dimension {P.dimension}"]
    if P.name:
        lines.append(f"name {P.name}")
    for v, c in zip(P.normals, P.offsets):
        entries = " ".join(str(int(x)) for x in v)
        lines.append(f"facet {entries} {int(c)}")
    for w in P.vertices:
        entries = " ".join(str(x) for x in w)
        lines.append(f"vertex {entries}")
    return "\n".join(lines) + "\n"
