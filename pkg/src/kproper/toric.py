"""Smooth complete toric varieties from fan data.

A fan is a list of primitive integer ray generators together with the index
sets of its maximal cones.  Torus-invariant divisors D = sum a_i D_i carry a
piecewise linear support function with value -a_i on the i-th ray, and all
positivity notions reduce to exact linear algebra on that function:

* D is ample iff the support function is strictly concave, checked cone by
  cone through the linear functional m_sigma with <m_sigma, u_i> = -a_i;
* the moment polytope is P_D = {m : <m, u_i> >= -a_i};
* on surfaces, intersection numbers come from the cyclic wall relation
  u_{i-1} + u_{i+1} = c_i u_i, which also encodes D_i . D_i = -c_i.

Mixed volumes of moment polytopes provide an independent route to
intersection numbers for nef classes (n <= 3) and serve as a cross-check of
the wall formula in the tests.
"""

from __future__ import annotations

import functools
import itertools
from dataclasses import dataclass
from fractions import Fraction

from .polytope import Polytope, boundary_measure, make_polytope, volume
from .rationals import (
    GeometryError,
    ValidationError,
    det,
    dot,
    format_rational,
    identity_matrix,
    is_primitive,
    is_unimodular,
    mat_mul,
    mat_vec,
    parse_rational,
    solve_exact,
)


@dataclass(frozen=True)
class Fan:
    """A complete simplicial fan given by primitive rays and maximal cones."""

    dim: int
    rays: tuple[tuple[int, ...], ...]
    max_cones: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        if self.dim < 1:
            raise ValidationError("fan dimension must be positive")
        rays = tuple(tuple(int(x) for x in r) for r in self.rays)
        if not rays:
            raise ValidationError("fan needs at least one ray")
        for r in rays:
            if len(r) != self.dim:
                raise ValidationError(f"ray {r} has wrong dimension (expected {self.dim})")
            if all(x == 0 for x in r):
                raise ValidationError("zero vector is not a valid ray")
            if not is_primitive(r):
                raise ValidationError(f"ray {r} is not primitive")
        if len(set(rays)) != len(rays):
            raise ValidationError("duplicate rays in fan")
        cones = []
        for cone in self.max_cones:
            idx = tuple(sorted(int(i) for i in cone))
            if len(idx) != self.dim or len(set(idx)) != self.dim:
                raise ValidationError(f"maximal cone {cone} must have {self.dim} distinct rays")
            if any(i < 0 or i >= len(rays) for i in idx):
                raise ValidationError(f"maximal cone {cone} references a missing ray")
            cones.append(idx)
        if len(set(cones)) != len(cones):
            raise ValidationError("duplicate maximal cones in fan")
        object.__setattr__(self, "rays", rays)
        object.__setattr__(self, "max_cones", tuple(sorted(cones)))

    @property
    def n_rays(self) -> int:
        return len(self.rays)

    def cone_matrix(self, cone) -> tuple:
        """Rows are the ray generators of the cone."""
        return tuple(self.rays[i] for i in cone)


@dataclass(frozen=True)
class FanValidation:
    smooth: bool
    complete: bool


def _angle_cmp(u, v) -> int:
    hu = 0 if (u[1] > 0 or (u[1] == 0 and u[0] > 0)) else 1
    hv = 0 if (v[1] > 0 or (v[1] == 0 and v[0] > 0)) else 1
    if hu != hv:
        return -1 if hu < hv else 1
    cross = u[0] * v[1] - u[1] * v[0]
    if cross > 0:
        return -1
    if cross < 0:
        return 1
    return 0


@functools.lru_cache(maxsize=None)
def angular_order(fan: Fan) -> tuple[int, ...]:
    """Ray indices of a 2d fan sorted counterclockwise by angle."""
    if fan.dim != 2:
        raise GeometryError("angular order is defined for surface fans only")
    return tuple(
        sorted(range(fan.n_rays), key=functools.cmp_to_key(
            lambda i, j: _angle_cmp(fan.rays[i], fan.rays[j])
        ))
    )


@functools.lru_cache(maxsize=None)
def validate_fan(fan: Fan) -> FanValidation:
    """Smoothness (unimodular cones) and completeness of the fan.

    Completeness for surfaces: the counterclockwise-consecutive ray pairs
    are exactly the maximal cones and every consecutive determinant is
    positive (equivalently the rays positively span the plane).  In
    dimension 3 the check is combinatorial: every facet of a maximal cone
    is shared by exactly two maximal cones and every ray is used.
    """
    smooth = all(abs(det(fan.cone_matrix(c))) == 1 for c in fan.max_cones)
    complete = _is_complete(fan)
    return FanValidation(smooth=smooth, complete=complete)


def _is_complete(fan: Fan) -> bool:
    if fan.dim == 1:
        return set(fan.rays) == {(1,), (-1,)} and len(fan.max_cones) == 2
    if fan.dim == 2:
        if fan.n_rays < 3:
            return False
        order = angular_order(fan)
        expected = set()
        for p in range(len(order)):
            i, j = order[p], order[(p + 1) % len(order)]
            if det((fan.rays[i], fan.rays[j])) <= 0:
                return False
            expected.add(tuple(sorted((i, j))))
        return expected == set(fan.max_cones)
    facets: dict[tuple[int, ...], int] = {}
    for cone in fan.max_cones:
        for facet in itertools.combinations(cone, fan.dim - 1):
            facets[facet] = facets.get(facet, 0) + 1
    used = {i for cone in fan.max_cones for i in cone}
    return bool(fan.max_cones) and used == set(range(fan.n_rays)) and all(
        v == 2 for v in facets.values()
    )


def _require_valid(fan: Fan) -> None:
    check = validate_fan(fan)
    if not (check.smooth and check.complete):
        raise GeometryError(
            f"operation requires a smooth complete fan (smooth={check.smooth}, "
            f"complete={check.complete})"
        )


@functools.lru_cache(maxsize=None)
def fan_automorphisms(fan: Fan) -> tuple:
    """All g in GL(n, Z) permuting the rays and preserving the cone set.

    Candidates are generated by sending one lattice basis chosen among the
    rays to every ordered tuple of rays, which bounds the search at
    (#rays)^n maps; each integral unimodular candidate is kept when it
    permutes the rays and maps maximal cones to maximal cones.
    """
    n, m = fan.dim, fan.n_rays
    base = next(
        (idx for idx in itertools.permutations(range(m), n)
         if abs(det(tuple(fan.rays[i] for i in idx))) == 1),
        None,
    )
    if base is None:
        raise GeometryError("fan rays contain no lattice basis")
    base_cols = tuple(zip(*(fan.rays[i] for i in base)))
    inverse_cols = [
        solve_exact(base_cols, tuple(1 if r == j else 0 for r in range(n))) for j in range(n)
    ]
    base_inverse = tuple(zip(*inverse_cols))
    ray_index = {r: i for i, r in enumerate(fan.rays)}
    cone_set = set(fan.max_cones)
    found = set()
    for image in itertools.product(range(m), repeat=n):
        img_cols = tuple(zip(*(fan.rays[j] for j in image)))
        # the map with M u_{base_k} = u_{image_k} is M = C B^{-1}
        matrix = mat_mul(img_cols, base_inverse)
        if any(x.denominator != 1 for row in matrix for x in row):
            continue
        g = tuple(tuple(int(x) for x in row) for row in matrix)
        if abs(det(g)) != 1:
            continue
        perm = []
        ok = True
        for r in fan.rays:
            image_ray = tuple(int(x) for x in mat_vec(g, r))
            if image_ray not in ray_index:
                ok = False
                break
            perm.append(ray_index[image_ray])
        if not ok or len(set(perm)) != m:
            continue
        if all(tuple(sorted(perm[i] for i in cone)) in cone_set for cone in fan.max_cones):
            found.add(g)
    result = tuple(sorted(found))
    assert identity_matrix(n) in found
    return result


def ray_permutation(fan: Fan, g) -> tuple[int, ...]:
    """The ray permutation induced by a fan automorphism: i -> index of g(u_i)."""
    ray_index = {r: i for i, r in enumerate(fan.rays)}
    return tuple(ray_index[tuple(int(x) for x in mat_vec(g, r))] for r in fan.rays)


def transform_fan(fan: Fan, g) -> Fan:
    """The fan with rays g(u_i) for a unimodular g, same cone combinatorics."""
    if not is_unimodular(g):
        raise ValidationError("fan transformations must be unimodular")
    rays = tuple(tuple(int(x) for x in mat_vec(g, r)) for r in fan.rays)
    return Fan(fan.dim, rays, fan.max_cones)


# ---------------------------------------------------------------------------
# divisors


@dataclass(frozen=True)
class ToricDivisor:
    """A T-invariant rational divisor sum a_i D_i on a fixed fan."""

    fan: Fan
    coeffs: tuple[Fraction, ...]

    def __post_init__(self):
        coeffs = tuple(Fraction(c) for c in self.coeffs)
        if len(coeffs) != self.fan.n_rays:
            raise ValidationError(
                f"divisor needs {self.fan.n_rays} coefficients, got {len(coeffs)}"
            )
        object.__setattr__(self, "coeffs", coeffs)

    def __add__(self, other: "ToricDivisor") -> "ToricDivisor":
        if self.fan != other.fan:
            raise ValidationError("divisors live on different fans")
        return ToricDivisor(self.fan, tuple(a + b for a, b in zip(self.coeffs, other.coeffs)))

    def __sub__(self, other: "ToricDivisor") -> "ToricDivisor":
        return self + (-1) * other

    def __mul__(self, c) -> "ToricDivisor":
        return ToricDivisor(self.fan, tuple(Fraction(c) * a for a in self.coeffs))

    __rmul__ = __mul__

    def __neg__(self) -> "ToricDivisor":
        return (-1) * self


def canonical_divisor(fan: Fan) -> ToricDivisor:
    """K = -sum D_i."""
    return ToricDivisor(fan, (Fraction(-1),) * fan.n_rays)


def anticanonical_divisor(fan: Fan) -> ToricDivisor:
    return ToricDivisor(fan, (Fraction(1),) * fan.n_rays)


def support_value(d: ToricDivisor, v) -> Fraction:
    """The support function at v: locate a cone containing v, evaluate linearly."""
    fan = d.fan
    if len(v) != fan.dim:
        raise ValidationError("point dimension mismatch")
    for cone in fan.max_cones:
        cols = tuple(zip(*fan.cone_matrix(cone)))
        coords = solve_exact(cols, v)
        if coords is not None and all(c >= 0 for c in coords):
            return sum((c * -d.coeffs[i] for c, i in zip(coords, cone)), Fraction(0))
    raise GeometryError("no maximal cone contains the given point; fan is not complete")


def _cone_functionals(d: ToricDivisor):
    """For each maximal cone, the m with <m, u_i> = -a_i on its generators."""
    out = []
    for cone in d.fan.max_cones:
        m = solve_exact(d.fan.cone_matrix(cone), tuple(-d.coeffs[i] for i in cone))
        assert m is not None  # smooth cones are unimodular
        out.append((cone, m))
    return out


def _positivity(d: ToricDivisor, strict: bool) -> bool:
    _require_valid(d.fan)
    for cone, m in _cone_functionals(d):
        inside = set(cone)
        for j, ray in enumerate(d.fan.rays):
            if j in inside:
                continue
            value = dot(m, ray)
            if strict:
                if value <= -d.coeffs[j]:
                    return False
            elif value < -d.coeffs[j]:
                return False
    return True


def is_ample(d: ToricDivisor) -> bool:
    """Strict concavity of the support function across every wall."""
    return _positivity(d, strict=True)


def is_nef(d: ToricDivisor) -> bool:
    return _positivity(d, strict=False)


def moment_polytope(d: ToricDivisor) -> Polytope:
    """P_D = {m : <m, u_i> >= -a_i}; may be empty for non-effective classes."""
    check = validate_fan(d.fan)
    if not check.complete:
        raise GeometryError("moment polytope requires a complete fan")
    return make_polytope(d.fan.dim, [(r, -a) for r, a in zip(d.fan.rays, d.coeffs)])


@functools.lru_cache(maxsize=None)
def _wall_data(fan: Fan):
    """Per ray, the cyclic neighbors and the integer c_i with
    u_{i-1} + u_{i+1} = c_i u_i (so D_i . D_i = -c_i on the surface)."""
    _require_valid(fan)
    if fan.dim != 2:
        raise GeometryError(
            "surface formula only (use mixed_volume_intersection for nef classes in n <= 3)"
        )
    order = angular_order(fan)
    m = len(order)
    data = {}
    for p in range(m):
        i = order[p]
        prev_i, next_i = order[(p - 1) % m], order[(p + 1) % m]
        total = tuple(a + b for a, b in zip(fan.rays[prev_i], fan.rays[next_i]))
        k = 0 if fan.rays[i][0] != 0 else 1
        c = Fraction(total[k], fan.rays[i][k])
        assert c.denominator == 1 and tuple(int(c) * x for x in fan.rays[i]) == total
        data[i] = (prev_i, next_i, int(c))
    return data


def intersection_number(d: ToricDivisor, e: ToricDivisor) -> Fraction:
    """Exact surface intersection product via the cyclic wall relation.

    Valid for arbitrary rational coefficients (no nefness needed), which is
    what makes the canonical class usable here.
    """
    if d.fan != e.fan:
        raise ValidationError("divisors live on different fans")
    walls = _wall_data(d.fan)
    total = Fraction(0)
    for i, (prev_i, next_i, c) in walls.items():
        d_dot_di = d.coeffs[prev_i] + d.coeffs[next_i] - c * d.coeffs[i]
        total += e.coeffs[i] * d_dot_di
    return total


def mixed_volume_intersection(divisors) -> Fraction:
    """D_1 ... D_n for nef divisors via moment polytope volumes.

    Uses the polarization of D^n = n! Vol(P_D): the alternating sum of
    volumes of moment polytopes of subset sums (Minkowski sums of the
    individual polytopes, since nef support functions add).
    """
    divisors = list(divisors)
    if not divisors:
        raise ValidationError("mixed volume needs at least one divisor")
    fan = divisors[0].fan
    n = fan.dim
    if n > 3:
        raise GeometryError("mixed volume unsupported for n > 3")
    if len(divisors) != n:
        raise ValidationError(f"mixed volume needs exactly {n} divisors on this fan")
    for d in divisors:
        if d.fan != fan:
            raise ValidationError("divisors live on different fans")
        if not is_nef(d):
            raise GeometryError("mixed volume requires nef divisors")
    total = Fraction(0)
    for size in range(1, n + 1):
        for subset in itertools.combinations(range(n), size):
            s = divisors[subset[0]]
            for i in subset[1:]:
                s = s + divisors[i]
            total += (-1) ** (n - size) * volume(moment_polytope(s))
    return total


@dataclass(frozen=True)
class SlopeQuantities:
    mu: Fraction
    rbar: Fraction | None


def slope_quantities(d: ToricDivisor) -> SlopeQuantities:
    """The slope mu = -K.D^{n-1} / D^n, and for surfaces the mean scalar
    curvature rbar = 2 mu, cross-checked against the Donaldson boundary
    measure of the moment polytope divided by its volume."""
    fan = d.fan
    if not is_ample(d):
        raise GeometryError("slope quantities require an ample divisor")
    minus_k = anticanonical_divisor(fan)
    if fan.dim == 2:
        d_sq = intersection_number(d, d)
        if d_sq == 0:
            raise GeometryError("slope undefined: D^n = 0")
        mu = intersection_number(minus_k, d) / d_sq
        rbar = 2 * mu
        p = moment_polytope(d)
        assert rbar == boundary_measure(p) / volume(p)
        return SlopeQuantities(mu=mu, rbar=rbar)
    if fan.dim == 3:
        if not is_nef(minus_k):
            raise GeometryError("slope in dimension 3 needs a nef anticanonical class")
        d_cube = mixed_volume_intersection([d, d, d])
        if d_cube == 0:
            raise GeometryError("slope undefined: D^n = 0")
        mu = mixed_volume_intersection([minus_k, d, d]) / d_cube
        return SlopeQuantities(mu=mu, rbar=None)
    raise GeometryError("slope quantities implemented for n in {2, 3}")


# ---------------------------------------------------------------------------
# builtin fans


def p2_fan() -> Fan:
    """The projective plane: rays e1, e2, -e1-e2."""
    return Fan(2, ((1, 0), (0, 1), (-1, -1)), ((0, 1), (1, 2), (0, 2)))


def dp6_fan() -> Fan:
    """The hexagonal fan of the degree 6 del Pezzo surface (P^2 blown up at
    the three torus-fixed points).

    Rays are listed counterclockwise; note u_4 = (-1, 0), the unique choice
    for which all six boundary divisors are (-1)-curves with
    D_i . D_{i+1} = 1 cyclically.
    """
    rays = ((1, 0), (1, 1), (0, 1), (-1, 0), (-1, -1), (0, -1))
    cones = tuple((i, (i + 1) % 6) for i in range(6))
    return Fan(2, rays, cones)


BUILTIN_FANS = {"p2": p2_fan, "dp6": dp6_fan}


# ---------------------------------------------------------------------------
# JSON forms


def fan_to_json(fan: Fan) -> dict:
    return {
        "dim": fan.dim,
        "rays": [list(r) for r in fan.rays],
        "max_cones": [list(c) for c in fan.max_cones],
    }


def fan_from_json(data: dict) -> Fan:
    from .rationals import InputError

    if not isinstance(data, dict) or "rays" not in data or "max_cones" not in data:
        raise InputError('fan JSON must be an object with "rays" and "max_cones"')
    try:
        rays = tuple(tuple(int(x) for x in r) for r in data["rays"])
        cones = tuple(tuple(int(i) for i in c) for c in data["max_cones"])
        dim = int(data.get("dim", len(rays[0]) if rays else 0))
    except (TypeError, ValueError) as exc:
        raise InputError(f"malformed fan JSON: {exc}") from exc
    return Fan(dim, rays, cones)


def divisor_to_json(d: ToricDivisor) -> dict:
    return {"coeffs": [format_rational(c) for c in d.coeffs]}


def divisor_from_json(fan: Fan, data: dict) -> ToricDivisor:
    from .rationals import InputError

    if not isinstance(data, dict) or "coeffs" not in data:
        raise InputError('divisor JSON must be an object with a "coeffs" list')
    coeffs = tuple(
        parse_rational(c, where=f"coeffs[{i}]") for i, c in enumerate(data["coeffs"])
    )
    return ToricDivisor(fan, coeffs)
