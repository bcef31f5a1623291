"""Tian's alpha invariant of an ample toric class, for the compact group
generated by the real torus and the finite stabilizer of the class.

After translating the moment polytope so its barycenter is the origin (the
class-level normalization; the shift is an exact rational translation), the
invariant is a finite minimization over polytope data:

    alpha = min over rays i, min over y in the fixed polytope P^K of
            1 / (<y, u_i> + a_i')

where a_i' are the recentered coefficients and P^K is the subpolytope fixed
by the stabilizer (the full centered polytope in torus-only mode).  The
inner quantity is linear in y, so only vertices of P^K matter.

`alpha_oracle` is the independent brute-force route: it enumerates
stabilizer orbits of lattice points of dilates of the polytope, forms the
invariant product section of each orbit and takes the minimum of the exact
log-canonical thresholds

    lct = min_i  k N / (sum_{m in orbit} <m, u_i> + N k a_i),

which is an upper bound for the invariant, decreasing in the search depth.
The two routes are kept separate on purpose; the tests play them against
each other.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .polytope import (
    Polytope,
    barycenter,
    fixed_subpolytope,
    lattice_points,
    translate,
    vertices,
)
from .rationals import (
    GeometryError,
    InputError,
    clear_denominators,
    dot,
    identity_matrix,
    integer_vector,
    mat_mul,
    mat_vec,
    transpose,
    vec_sub,
)
from .toric import (
    ToricDivisor,
    fan_automorphisms,
    is_ample,
    moment_polytope,
)

GROUP_MODES = ("full", "torus", "explicit")


@dataclass(frozen=True)
class SymmetryContext:
    """An ample divisor with its recentered polytope and class stabilizer."""

    divisor: ToricDivisor
    group_mode: str
    stabilizer: tuple
    centered_polytope: Polytope
    centered_coeffs: tuple[Fraction, ...]


def class_stabilizer(d: ToricDivisor) -> tuple:
    """Fan automorphisms whose transpose maps the recentered moment polytope
    onto itself (equivalently, which preserve the divisor class up to linear
    equivalence)."""
    if not is_ample(d):
        raise GeometryError("class stabilizer requires an ample divisor")
    centered, _ = _centered(d)
    vert_set = set(vertices(centered))
    kept = []
    for g in fan_automorphisms(d.fan):
        gt = transpose(g)
        if {tuple(mat_vec(gt, v)) for v in vert_set} == vert_set:
            kept.append(g)
    return tuple(kept)


def _centered(d: ToricDivisor):
    p = moment_polytope(d)
    beta = barycenter(p)
    centered = translate(p, tuple(-x for x in beta))
    shifted = tuple(a + dot(beta, u) for a, u in zip(d.coeffs, d.fan.rays))
    return centered, shifted


def _close_under_products(generators, bound: int):
    elements = {identity_matrix(len(generators[0]))} if generators else set()
    elements |= {tuple(tuple(int(x) for x in row) for row in g) for g in generators}
    frontier = list(elements)
    while frontier:
        g = frontier.pop()
        for h in list(elements):
            for prod in (mat_mul(g, h), mat_mul(h, g)):
                prod = tuple(tuple(int(x) for x in row) for row in prod)
                if prod not in elements:
                    elements.add(prod)
                    frontier.append(prod)
        if len(elements) > bound:
            raise GeometryError("explicit group does not generate a finite subgroup")
    return tuple(sorted(elements))


def symmetry_context(
    d: ToricDivisor, group_mode: str = "full", explicit_group=None
) -> SymmetryContext:
    if group_mode not in GROUP_MODES:
        raise InputError(f'unknown group mode "{group_mode}"; expected one of {GROUP_MODES}')
    if not is_ample(d):
        raise GeometryError("alpha invariant requires an ample class")
    centered, shifted = _centered(d)
    if group_mode == "full":
        stabilizer = class_stabilizer(d)
    elif group_mode == "torus":
        stabilizer = ()
    else:
        if not explicit_group:
            raise InputError("explicit group mode needs a nonempty matrix list")
        autos = set(fan_automorphisms(d.fan))
        closure = _close_under_products(
            [tuple(tuple(int(x) for x in row) for row in g) for g in explicit_group],
            bound=len(autos),
        )
        vert_set = set(vertices(centered))
        for g in closure:
            if g not in autos:
                raise GeometryError("explicit group element is not a fan automorphism")
            gt = transpose(g)
            if {tuple(mat_vec(gt, v)) for v in vert_set} != vert_set:
                raise GeometryError("explicit group element does not preserve the class")
        stabilizer = closure
    ctx = SymmetryContext(
        divisor=d,
        group_mode=group_mode,
        stabilizer=stabilizer,
        centered_polytope=centered,
        centered_coeffs=shifted,
    )
    assert all(x == 0 for x in barycenter(centered))
    return ctx


def fixed_polytope(ctx: SymmetryContext) -> Polytope:
    if ctx.group_mode == "torus" or not ctx.stabilizer:
        return ctx.centered_polytope
    return fixed_subpolytope(ctx.centered_polytope, ctx.stabilizer)


def alpha_invariant(ctx: SymmetryContext) -> Fraction:
    """The invariant via the vertex formula on the fixed subpolytope."""
    fixed = fixed_polytope(ctx)
    verts = vertices(fixed)
    if not verts:
        raise GeometryError("fixed subpolytope is empty")
    worst = max(
        dot(v, ray) + a
        for v in verts
        for ray, a in zip(ctx.divisor.fan.rays, ctx.centered_coeffs)
    )
    assert worst > 0
    return 1 / worst


def alpha_oracle(ctx: SymmetryContext, k_max: int = 12) -> Fraction:
    """Brute-force upper bound from invariant linear systems up to depth k_max.

    Clears coefficient denominators first (the invariant scales exactly, by
    1/t under D -> tD), enumerates lattice points of the dilates k P for the
    integral model, groups them into stabilizer orbits under the affine
    lattice action, and evaluates the exact lct of each orbit product
    section.  Nonincreasing in k_max and never below alpha_invariant.
    """
    if not isinstance(k_max, int) or k_max < 1:
        raise InputError("oracle depth must be a positive integer")
    d = ctx.divisor
    multiplier, int_coeffs = clear_denominators(d.coeffs)
    integral = ToricDivisor(d.fan, tuple(Fraction(c) for c in int_coeffs))
    p_int = moment_polytope(integral)
    verts = [integer_vector(v) for v in vertices(p_int)]
    base_anchor = min(verts)
    group = ctx.stabilizer if ctx.group_mode != "torus" else ()
    if not group:
        group = (identity_matrix(d.fan.dim),)
    actions = []
    for g in group:
        gt = transpose(g)
        image_anchor = min(tuple(int(x) for x in mat_vec(gt, v)) for v in verts)
        # g^T P = P + tau with integral tau; the affine action on k P is
        # z -> g^T z - k tau
        tau = integer_vector(vec_sub(image_anchor, base_anchor))
        actions.append((gt, tau))
    rays = d.fan.rays
    best: Fraction | None = None
    for k in range(1, k_max + 1):
        points = {
            tuple(int(x * k) for x in pt) for pt in lattice_points(p_int, k)
        }
        seen: set = set()
        for z in sorted(points):
            if z in seen:
                continue
            orbit = set()
            for gt, tau in actions:
                image = tuple(int(a) - k * t for a, t in zip(mat_vec(gt, z), tau))
                assert image in points
                orbit.add(image)
            seen |= orbit
            size = len(orbit)
            for i, ray in enumerate(rays):
                denom = sum(dot(m, ray) for m in orbit) + size * k * int_coeffs[i]
                assert denom >= 0
                if denom > 0:
                    value = Fraction(k * size, denom)
                    if best is None or value < best:
                        best = value
    assert best is not None
    return multiplier * best
