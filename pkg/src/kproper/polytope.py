"""Exact convex polytopes in dimension <= 3.

A polytope is stored by its H-representation, a list of half-planes
``<m, normal> >= offset`` with primitive integer normals and rational
offsets, plus an optional list of linear equations for lower-dimensional
polytopes (fixed-point sets of finite linear groups).  Vertex enumeration,
volumes, the lattice boundary measure, barycenters and lattice points are
all computed in exact rational arithmetic; no square root or float is ever
taken.

The enumeration strategy is deliberately unsophisticated: candidate
vertices are intersections of dim-many facet hyperplanes, filtered by
feasibility.  Inputs here are desk-scale (a few dozen facets), where this
is both fast and easy to trust.
"""

from __future__ import annotations

import functools
import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from math import ceil, floor, gcd, lcm

from .rationals import (
    GeometryError,
    ValidationError,
    det,
    dot,
    format_rational,
    identity_matrix,
    is_unimodular,
    mat_vec,
    parse_rational,
    primitive,
    solve_exact,
    solve_linear_system,
    transpose,
    vec_add,
    vec_scale,
    vec_sub,
)


@dataclass(frozen=True)
class HalfSpace:
    """The closed half-space <m, normal> >= offset."""

    normal: tuple[int, ...]
    offset: Fraction


@dataclass(frozen=True)
class LinearEquation:
    """The hyperplane <m, coeffs> = rhs."""

    coeffs: tuple[int, ...]
    rhs: Fraction


def _canonical_halfspace(normal, offset) -> HalfSpace:
    normal = tuple(int(x) for x in normal)
    if all(x == 0 for x in normal):
        raise ValidationError("half-space normal must be nonzero")
    g = gcd(*normal)
    return HalfSpace(tuple(x // g for x in normal), Fraction(offset) / g)


def _canonical_equation(coeffs, rhs) -> LinearEquation | None:
    coeffs = tuple(int(x) for x in coeffs)
    rhs = Fraction(rhs)
    if all(x == 0 for x in coeffs):
        if rhs != 0:
            raise ValidationError("inconsistent equation 0 = nonzero")
        return None
    g = gcd(*coeffs)
    coeffs = tuple(x // g for x in coeffs)
    rhs = rhs / g
    # fix an overall sign so equal hyperplanes serialize identically
    lead = next(x for x in coeffs if x != 0)
    if lead < 0:
        coeffs = tuple(-x for x in coeffs)
        rhs = -rhs
    return LinearEquation(coeffs, rhs)


@dataclass(frozen=True)
class Polytope:
    dim: int
    hrep: tuple[HalfSpace, ...]
    equalities: tuple[LinearEquation, ...] = ()
    _vertex_cache: object = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        if self.dim < 1 or self.dim > 3:
            raise ValidationError(f"polytope dimension {self.dim} unsupported (need 1 <= n <= 3)")
        seen: dict[tuple[int, ...], Fraction] = {}
        for hs in self.hrep:
            if len(hs.normal) != self.dim:
                raise ValidationError("half-space dimension mismatch")
            canon = _canonical_halfspace(hs.normal, hs.offset)
            prev = seen.get(canon.normal)
            # parallel constraints: keep only the tightest offset
            if prev is None or canon.offset > prev:
                seen[canon.normal] = canon.offset
        object.__setattr__(
            self, "hrep", tuple(HalfSpace(n, c) for n, c in sorted(seen.items()))
        )
        eqs = []
        for eq in self.equalities:
            if len(eq.coeffs) != self.dim:
                raise ValidationError("equation dimension mismatch")
            canon = _canonical_equation(eq.coeffs, eq.rhs)
            if canon is not None and canon not in eqs:
                eqs.append(canon)
        object.__setattr__(self, "equalities", tuple(sorted(eqs, key=lambda e: (e.coeffs, e.rhs))))

    def contains(self, point) -> bool:
        return all(dot(point, hs.normal) >= hs.offset for hs in self.hrep) and all(
            dot(point, eq.coeffs) == eq.rhs for eq in self.equalities
        )


def make_polytope(dim, halfspaces, equalities=()) -> Polytope:
    """Build a polytope from (normal, offset) pairs and (coeffs, rhs) pairs."""
    hs = tuple(HalfSpace(tuple(n), Fraction(c)) for n, c in halfspaces)
    eqs = tuple(LinearEquation(tuple(a), Fraction(r)) for a, r in equalities)
    return Polytope(dim, hs, eqs)


# ---------------------------------------------------------------------------
# feasibility and boundedness


def _fm_feasible(dim: int, constraints) -> bool:
    """Fourier-Motzkin feasibility for a system <x, n_i> >= c_i."""
    if dim == 1:
        lower = None
        upper = None
        for (n,), c in constraints:
            if n > 0:
                bound = Fraction(c, n)
                lower = bound if lower is None else max(lower, bound)
            elif n < 0:
                bound = Fraction(c, n)
                upper = bound if upper is None else min(upper, bound)
            elif c > 0:
                return False
        return lower is None or upper is None or lower <= upper
    pos, neg, zero = [], [], []
    for n, c in constraints:
        if n[-1] > 0:
            pos.append((n, c))
        elif n[-1] < 0:
            neg.append((n, c))
        else:
            zero.append((n[:-1], c))
    reduced = list(zero)
    for (np_, cp), (nq, cq) in itertools.product(pos, neg):
        # eliminate the last coordinate from the pair (x >= L from p, x <= U from q)
        pk, qk = np_[-1], nq[-1]
        normal = tuple(pk * b - qk * a for a, b in zip(np_[:-1], nq[:-1]))
        offset = pk * cq - qk * cp
        if all(x == 0 for x in normal):
            if offset > 0:
                return False
        else:
            reduced.append((normal, offset))
    if not reduced:
        return True
    return _fm_feasible(dim - 1, reduced)


def _rot90(v):
    return (-v[1], v[0])


def _cross3(a, b):
    return (
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    )


def _recession_directions(dim: int, normals):
    """Candidate extreme directions of {d : <d, n_i> >= 0 for all i}."""
    candidates = []
    if dim == 1:
        candidates = [(1,), (-1,)]
    elif dim == 2:
        for n in normals:
            candidates.append(_rot90(n))
            candidates.append(_rot90(tuple(-x for x in n)))
    else:
        for a, b in itertools.combinations(normals, 2):
            c = _cross3(a, b)
            if any(x != 0 for x in c):
                candidates.append(c)
                candidates.append(tuple(-x for x in c))
    # a lineality direction exists whenever the normals do not span
    rows = [list(n) for n in normals]
    if rows:
        _, nullspace = solve_linear_system(rows, [0] * len(rows))
        for v in nullspace:
            scaled = _integerize(v)
            candidates.append(scaled)
            candidates.append(tuple(-x for x in scaled))
    else:
        candidates.append(tuple(1 if i == 0 else 0 for i in range(dim)))
    return candidates


def _integerize(v):
    denom = lcm(*(Fraction(x).denominator for x in v)) if v else 1
    return tuple(int(Fraction(x) * denom) for x in v)


def _is_bounded(dim: int, constraints) -> bool:
    normals = [n for n, _ in constraints]
    for d in _recession_directions(dim, normals):
        if all(x == 0 for x in d):
            continue
        if all(dot(d, n) >= 0 for n in normals):
            return False
    return True


# ---------------------------------------------------------------------------
# vertex enumeration


def _candidate_vertices(dim: int, constraints):
    found = set()
    if dim == 1:
        for (n,), c in constraints:
            if n != 0:
                found.add((Fraction(c, n),))
    else:
        for subset in itertools.combinations(constraints, dim):
            matrix = tuple(n for n, _ in subset)
            rhs = tuple(c for _, c in subset)
            point = solve_exact(matrix, rhs)
            if point is not None:
                found.add(point)
    return [p for p in found if all(dot(p, n) >= c for n, c in constraints)]


def _reduce_by_equalities(p: Polytope):
    """Project an equality-carrying polytope onto its affine hull.

    Returns None when the equalities are inconsistent, otherwise
    (origin, basis, sub) with ``sub`` a pure-inequality polytope in the
    parameter space, or (origin, (), None) when the hull is a single point.
    """
    rows = [list(eq.coeffs) for eq in p.equalities]
    rhs = [eq.rhs for eq in p.equalities]
    solution = solve_linear_system(rows, rhs)
    if solution is None:
        return None
    origin, basis = solution
    if not basis:
        return origin, (), None
    sub_constraints = []
    for hs in p.hrep:
        coeffs = tuple(dot(b, hs.normal) for b in basis)
        offset = hs.offset - dot(origin, hs.normal)
        if all(x == 0 for x in coeffs):
            if offset > 0:
                return None
            continue
        denom = lcm(*(x.denominator for x in coeffs), offset.denominator)
        sub_constraints.append((tuple(int(x * denom) for x in coeffs), offset * denom))
    sub = make_polytope(len(basis), sub_constraints) if sub_constraints else None
    if sub is None:
        # affine subspace with no constraints: unbounded unless 0-dimensional
        raise GeometryError("polytope is unbounded")
    return origin, basis, sub


def vertices(p: Polytope) -> tuple:
    """Exact vertex set, sorted lexicographically; () for an empty polytope.

    Raises GeometryError when the feasible region is unbounded, since an
    unbounded region is not described by vertices alone.
    """
    if p._vertex_cache is not None:
        return p._vertex_cache
    if p.equalities:
        reduced = _reduce_by_equalities(p)
        if reduced is None:
            result = ()
        else:
            origin, basis, sub = reduced
            if not basis:
                result = (tuple(origin),) if all(
                    dot(origin, hs.normal) >= hs.offset for hs in p.hrep
                ) else ()
            else:
                cols = transpose(basis)
                result = tuple(
                    sorted(tuple(vec_add(origin, mat_vec(cols, t))) for t in vertices(sub))
                )
    else:
        constraints = [(hs.normal, hs.offset) for hs in p.hrep]
        cands = _candidate_vertices(p.dim, constraints)
        if not cands:
            if _fm_feasible(p.dim, constraints):
                raise GeometryError("polytope is unbounded")
            result = ()
        elif not _is_bounded(p.dim, constraints):
            raise GeometryError("polytope is unbounded")
        else:
            result = tuple(sorted(cands))
    object.__setattr__(p, "_vertex_cache", result)
    return result


def affine_dimension(p: Polytope) -> int:
    """Dimension of the affine hull of the vertex set; -1 when empty."""
    verts = vertices(p)
    if not verts:
        return -1
    if len(verts) == 1:
        return 0
    rows = [list(vec_sub(v, verts[0])) for v in verts[1:]]
    _, nullspace = solve_linear_system(rows, [0] * len(rows))
    return p.dim - len(nullspace)


# ---------------------------------------------------------------------------
# measures


def _order_ccw_2d(points):
    n = len(points)
    center = tuple(sum(v[i] for v in points) / n for i in range(2))

    def cmp(a, b):
        va, vb = vec_sub(a, center), vec_sub(b, center)
        ha = 0 if (va[1] > 0 or (va[1] == 0 and va[0] > 0)) else 1
        hb = 0 if (vb[1] > 0 or (vb[1] == 0 and vb[0] > 0)) else 1
        if ha != hb:
            return -1 if ha < hb else 1
        cross = va[0] * vb[1] - va[1] * vb[0]
        if cross > 0:
            return -1
        if cross < 0:
            return 1
        return 0

    return sorted(points, key=functools.cmp_to_key(cmp))


def _facets_3d(p: Polytope, verts):
    facets = []
    seen = set()
    for hs in p.hrep:
        on = tuple(v for v in verts if dot(v, hs.normal) == hs.offset)
        if len(on) >= 3 and on not in seen:
            seen.add(on)
            facets.append((hs.normal, on))
    return facets


def _order_facet_cycle(normal, points):
    n = len(points)
    center = tuple(sum(v[i] for v in points) / n for i in range(3))
    ref = vec_sub(points[0], center)

    def half(v):
        s = det((normal, ref, v))
        if s != 0:
            return 0 if s > 0 else 1
        return 0 if dot(ref, v) > 0 else 1

    def cmp(a, b):
        va, vb = vec_sub(a, center), vec_sub(b, center)
        ha, hb = half(va), half(vb)
        if ha != hb:
            return -1 if ha < hb else 1
        s = det((normal, va, vb))
        if s > 0:
            return -1
        if s < 0:
            return 1
        return 0

    return sorted(points, key=functools.cmp_to_key(cmp))


def volume(p: Polytope) -> Fraction:
    """Euclidean volume, exact; 0 for empty or lower-dimensional polytopes."""
    verts = vertices(p)
    if len(verts) <= p.dim:
        return Fraction(0)
    if affine_dimension(p) < p.dim:
        return Fraction(0)
    if p.dim == 1:
        return verts[-1][0] - verts[0][0]
    if p.dim == 2:
        ordered = _order_ccw_2d(list(verts))
        total = Fraction(0)
        for a, b in zip(ordered, ordered[1:] + ordered[:1]):
            total += a[0] * b[1] - a[1] * b[0]
        return abs(total) / 2
    base = verts[0]
    total = Fraction(0)
    for normal, on in _facets_3d(p, verts):
        if dot(base, normal) == dot(on[0], normal):
            continue
        cycle = _order_facet_cycle(normal, list(on))
        anchor = cycle[0]
        for a, b in zip(cycle[1:], cycle[2:]):
            total += abs(
                det((vec_sub(anchor, base), vec_sub(a, base), vec_sub(b, base)))
            )
    return total / 6


def boundary_measure(p: Polytope) -> Fraction:
    """Total lattice length of the boundary of a full-dimensional polygon.

    Each edge contributes its length measured against the primitive integer
    vector in the edge direction (Donaldson's boundary measure on moment
    polygons).  This is a rational number; no Euclidean norm appears.
    """
    if p.dim != 2:
        raise GeometryError("boundary measure is defined for polygons only")
    verts = vertices(p)
    if len(verts) < 3 or affine_dimension(p) < 2:
        raise GeometryError("boundary measure requires a full-dimensional polygon")
    ordered = _order_ccw_2d(list(verts))
    total = Fraction(0)
    for a, b in zip(ordered, ordered[1:] + ordered[:1]):
        d = vec_sub(b, a)
        direction = primitive(_integerize(d))
        k = 0 if direction[0] != 0 else 1
        total += abs(Fraction(d[k], direction[k]))
    return total


def barycenter(p: Polytope) -> tuple:
    """Exact centroid via triangulation; requires positive volume."""
    verts = vertices(p)
    if volume(p) == 0:
        raise GeometryError("barycenter requires a polytope of positive volume")
    if p.dim == 1:
        return ((verts[0][0] + verts[-1][0]) / 2,)
    if p.dim == 2:
        ordered = _order_ccw_2d(list(verts))
        base = ordered[0]
        total = Fraction(0)
        acc = (Fraction(0), Fraction(0))
        for a, b in zip(ordered[1:], ordered[2:]):
            u, v = vec_sub(a, base), vec_sub(b, base)
            area = (u[0] * v[1] - u[1] * v[0]) / 2
            centroid = tuple((base[i] + a[i] + b[i]) / 3 for i in range(2))
            acc = vec_add(acc, vec_scale(area, centroid))
            total += area
        return tuple(c / total for c in acc)
    base = verts[0]
    total = Fraction(0)
    acc = (Fraction(0), Fraction(0), Fraction(0))
    for normal, on in _facets_3d(p, verts):
        if dot(base, normal) == dot(on[0], normal):
            continue
        cycle = _order_facet_cycle(normal, list(on))
        anchor = cycle[0]
        for a, b in zip(cycle[1:], cycle[2:]):
            vol = abs(det((vec_sub(anchor, base), vec_sub(a, base), vec_sub(b, base)))) / 6
            centroid = tuple((base[i] + anchor[i] + a[i] + b[i]) / 4 for i in range(3))
            acc = vec_add(acc, vec_scale(vol, centroid))
            total += vol
    return tuple(c / total for c in acc)


# ---------------------------------------------------------------------------
# transformations


def translate(p: Polytope, t) -> Polytope:
    """The polytope p + t, exactly."""
    if len(t) != p.dim:
        raise ValidationError("translation vector dimension mismatch")
    hs = tuple(HalfSpace(h.normal, h.offset + dot(t, h.normal)) for h in p.hrep)
    eqs = tuple(LinearEquation(e.coeffs, e.rhs + dot(t, e.coeffs)) for e in p.equalities)
    return Polytope(p.dim, hs, eqs)


def scale(p: Polytope, factor) -> Polytope:
    """The dilate factor * p for a positive rational factor."""
    factor = Fraction(factor)
    if factor <= 0:
        raise GeometryError("scale factor must be positive")
    hs = tuple(HalfSpace(h.normal, h.offset * factor) for h in p.hrep)
    eqs = tuple(LinearEquation(e.coeffs, e.rhs * factor) for e in p.equalities)
    return Polytope(p.dim, hs, eqs)


def apply_unimodular(p: Polytope, g) -> Polytope:
    """The image g(p) of the polytope under a unimodular integer matrix."""
    if not is_unimodular(g):
        raise ValidationError("polytope transformations must be unimodular")
    # <g m, n> >= c  iff  <m, g^T n> >= c, so the image has normals (g^{-1})^T n
    inverse = _integer_inverse(g)
    git = transpose(inverse)
    hs = tuple(
        _canonical_halfspace(mat_vec(git, h.normal), h.offset) for h in p.hrep
    )
    eqs = tuple(
        LinearEquation(tuple(int(x) for x in mat_vec(git, e.coeffs)), e.rhs)
        for e in p.equalities
    )
    return Polytope(p.dim, hs, eqs)


def _integer_inverse(g):
    n = len(g)
    cols = [solve_exact(g, tuple(1 if i == j else 0 for i in range(n))) for j in range(n)]
    return tuple(tuple(int(cols[j][i]) for j in range(n)) for i in range(n))


def fixed_subpolytope(p: Polytope, group) -> Polytope:
    """Intersection of p with the fixed subspace of a finite linear group.

    The matrices in ``group`` act on the dual lattice side; the induced
    action on the polytope's ambient space is by transposes, so a point y is
    fixed when (g^T - I) y = 0 for every g.  Every group element must map
    the vertex set of p onto itself (the polytope must already be centered),
    otherwise this raises.
    """
    verts = set(vertices(p))
    eqs = list(p.equalities)
    eye = identity_matrix(p.dim)
    for g in group:
        if not is_unimodular(g):
            raise ValidationError("group elements must be unimodular integer matrices")
        gt = transpose(g)
        image = {tuple(mat_vec(gt, v)) for v in verts}
        if image != verts:
            raise GeometryError("group does not preserve polytope")
        for row_g, row_i in zip(gt, eye):
            coeffs = tuple(int(a - b) for a, b in zip(row_g, row_i))
            if any(coeffs):
                eqs.append(LinearEquation(coeffs, Fraction(0)))
    return Polytope(p.dim, p.hrep, tuple(eqs))


def lattice_points(p: Polytope, k: int = 1) -> tuple:
    """All points of p whose k-th multiple is a lattice point, sorted.

    Enumerates integer points of the dilate k*p through its bounding box
    with exact membership tests, then rescales.  Unbounded input raises.
    """
    if not isinstance(k, int) or k < 1:
        raise GeometryError("lattice refinement k must be a positive integer")
    verts = vertices(p)
    if not verts:
        return ()
    lo = [ceil(min(v[i] for v in verts) * k) for i in range(p.dim)]
    hi = [floor(max(v[i] for v in verts) * k) for i in range(p.dim)]
    # integer form of <z, n> >= k*c: den*<z, n> >= num with den > 0
    ineqs = []
    for hs in p.hrep:
        bound = hs.offset * k
        ineqs.append((hs.normal, bound.numerator, bound.denominator))
    eqs = []
    for e in p.equalities:
        rhs = e.rhs * k
        eqs.append((e.coeffs, rhs.numerator, rhs.denominator))
    points = []
    for z in itertools.product(*(range(lo[i], hi[i] + 1) for i in range(p.dim))):
        ok = all(den * sum(a * b for a, b in zip(z, n)) >= num for n, num, den in ineqs)
        if ok:
            ok = all(den * sum(a * b for a, b in zip(z, c)) == num for c, num, den in eqs)
        if ok:
            points.append(tuple(Fraction(x, k) for x in z))
    return tuple(sorted(points))


def integral_points(p: Polytope) -> tuple[tuple[int, ...], ...]:
    """Integer lattice points of p (the k = 1 case, cast to int tuples)."""
    return tuple(tuple(int(x) for x in pt) for pt in lattice_points(p, 1))


def polygon_from_vertices(points) -> Polytope:
    """Rebuild an H-representation from a planar vertex set.

    Used for round-trip checks; input points must all be extreme (they are
    whenever they came from vertices()).
    """
    pts = sorted({tuple(Fraction(x) for x in pt) for pt in points})
    if not pts:
        raise GeometryError("cannot rebuild a polygon from no vertices")
    if any(len(pt) != 2 for pt in pts):
        raise ValidationError("polygon_from_vertices expects planar points")
    if len(pts) == 1:
        (x, y), = pts
        return make_polytope(2, [((1, 0), x), ((-1, 0), -x), ((0, 1), y), ((0, -1), -y)])
    if len(pts) == 2 or _collinear(pts):
        a, b = pts[0], pts[-1]
        d = primitive(_integerize(vec_sub(b, a)))
        n = _rot90(d)
        return make_polytope(
            2,
            [
                (n, dot(a, n)),
                (tuple(-x for x in n), -dot(a, n)),
                (d, dot(a, d)),
                (tuple(-x for x in d), -dot(b, d)),
            ],
        )
    ordered = _order_ccw_2d(pts)
    halfspaces = []
    for a, b in zip(ordered, ordered[1:] + ordered[:1]):
        n = primitive(_integerize(_rot90(vec_sub(b, a))))
        halfspaces.append((n, dot(a, n)))
    return make_polytope(2, halfspaces)


def _collinear(pts) -> bool:
    a = pts[0]
    base = None
    for b in pts[1:]:
        d = vec_sub(b, a)
        if base is None:
            base = d
        elif base[0] * d[1] - base[1] * d[0] != 0:
            return False
    return True


# ---------------------------------------------------------------------------
# JSON form


def polytope_to_json(p: Polytope, include_vrep: bool = False) -> dict:
    data = {
        "dim": p.dim,
        "hrep": [
            {"normal": list(h.normal), "offset": format_rational(h.offset)} for h in p.hrep
        ],
    }
    if p.equalities:
        data["equalities"] = [
            {"coeffs": list(e.coeffs), "rhs": format_rational(e.rhs)} for e in p.equalities
        ]
    if include_vrep:
        data["vrep"] = [[format_rational(x) for x in v] for v in vertices(p)]
    return data


def polytope_from_json(data: dict) -> Polytope:
    from .rationals import InputError

    if not isinstance(data, dict) or "hrep" not in data:
        raise InputError('polytope JSON must be an object with an "hrep" list')
    hrep = []
    for i, entry in enumerate(data["hrep"]):
        try:
            normal = tuple(int(x) for x in entry["normal"])
        except (KeyError, TypeError, ValueError) as exc:
            raise InputError(f"hrep[{i}]: malformed normal") from exc
        offset = parse_rational(entry.get("offset"), where=f"hrep[{i}].offset")
        hrep.append((normal, offset))
    dim = data.get("dim", len(hrep[0][0]) if hrep else 0)
    eqs = []
    for i, entry in enumerate(data.get("equalities", [])):
        try:
            coeffs = tuple(int(x) for x in entry["coeffs"])
        except (KeyError, TypeError, ValueError) as exc:
            raise InputError(f"equalities[{i}]: malformed coeffs") from exc
        eqs.append((coeffs, parse_rational(entry.get("rhs"), where=f"equalities[{i}].rhs")))
    return make_polytope(dim, hrep, eqs)
