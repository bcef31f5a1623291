"""Picard lattices of blowups of the projective plane at general points.

Classes are written in the basis (H, E_1, ..., E_r) with intersection form
diag(1, -1, ..., -1); the canonical class is K = -3H + sum E_i.  Ampleness
is tested Kleiman-style against the exceptional curves (the classes with
C.C = C.K = -1), which generate the cone of curves for del Pezzo surfaces,
plus the Nakai safeguard D.D > 0.

The exceptional curves are found by bounded search: C.K = -1 pins the
degree d = C.H through 3d - 1 = sum m_i, and C.C = -1 gives
sum m_i^2 = d^2 + 1, which by Cauchy-Schwarz forces d <= 6 for r <= 8.
The enumeration also probes d = 7 and asserts nothing is found there.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass
from fractions import Fraction
from math import isqrt

from .rationals import (
    GeometryError,
    ValidationError,
    format_rational,
    parse_rational,
)


@dataclass(frozen=True)
class BlowupSurface:
    """The blowup of P^2 at r general points, 1 <= r <= 8."""

    r: int

    def __post_init__(self):
        if not isinstance(self.r, int) or not 1 <= self.r <= 8:
            raise ValidationError("blowup surface needs 1 <= r <= 8 points")

    @property
    def rank(self) -> int:
        return self.r + 1

    def cls(self, coords) -> "PicardClass":
        return PicardClass(self, tuple(Fraction(c) for c in coords))

    def hyperplane(self) -> "PicardClass":
        return self.cls((1,) + (0,) * self.r)

    def exceptional(self, i: int) -> "PicardClass":
        if not 1 <= i <= self.r:
            raise ValidationError(f"no exceptional divisor E_{i} on this surface")
        return self.cls((0,) + tuple(-1 if j == i else 0 for j in range(1, self.r + 1)))

    def canonical(self) -> "PicardClass":
        return self.cls((-3,) + (-1,) * self.r)

    def anticanonical(self) -> "PicardClass":
        return self.cls((3,) + (1,) * self.r)


@dataclass(frozen=True)
class PicardClass:
    """coords = (d, m_1, ..., m_r) for the class d H - sum m_i E_i."""

    surface: BlowupSurface
    coords: tuple[Fraction, ...]

    def __post_init__(self):
        coords = tuple(Fraction(c) for c in self.coords)
        if len(coords) != self.surface.rank:
            raise ValidationError(
                f"class needs {self.surface.rank} coordinates, got {len(coords)}"
            )
        object.__setattr__(self, "coords", coords)

    def __add__(self, other: "PicardClass") -> "PicardClass":
        if self.surface != other.surface:
            raise ValidationError("classes live on different surfaces")
        return PicardClass(self.surface, tuple(a + b for a, b in zip(self.coords, other.coords)))

    def __sub__(self, other: "PicardClass") -> "PicardClass":
        return self + (-1) * other

    def __mul__(self, c) -> "PicardClass":
        return PicardClass(self.surface, tuple(Fraction(c) * a for a in self.coords))

    __rmul__ = __mul__

    def __neg__(self) -> "PicardClass":
        return (-1) * self


def pairing(a: PicardClass, b: PicardClass) -> Fraction:
    """Signature (1, r) intersection form: d d' - sum m_i m_i'."""
    if a.surface != b.surface:
        raise ValidationError("pairing requires classes on the same surface")
    d = a.coords[0] * b.coords[0]
    return d - sum(x * y for x, y in zip(a.coords[1:], b.coords[1:]))


def _multiplicity_vectors(r: int, target_sum: int, target_sq: int):
    """Integer vectors m of length r with given sum and sum of squares."""
    bound = isqrt(target_sq)
    out: list[tuple[int, ...]] = []

    def extend(prefix: list[int], remaining_sum: int, remaining_sq: int, slots: int):
        if slots == 0:
            if remaining_sum == 0 and remaining_sq == 0:
                out.append(tuple(prefix))
            return
        for value in range(-bound, bound + 1):
            sq = value * value
            if sq > remaining_sq:
                continue
            rest_sum = remaining_sum - value
            rest_sq = remaining_sq - sq
            k = slots - 1
            if abs(rest_sum) > k * bound:
                continue
            if k == 0:
                if rest_sum == 0 and rest_sq == 0:
                    out.append(tuple(prefix + [value]))
                continue
            # Cauchy-Schwarz: (sum rest)^2 <= k * sum rest^2
            if rest_sum * rest_sum > k * rest_sq:
                continue
            prefix.append(value)
            extend(prefix, rest_sum, rest_sq, k)
            prefix.pop()

    extend([], target_sum, target_sq, r)
    return out


@functools.lru_cache(maxsize=None)
def exceptional_curves(r: int) -> tuple[PicardClass, ...]:
    """All integral classes with C.C = -1 and C.K = -1, lexicographically sorted."""
    surface = BlowupSurface(r)
    found = []
    for d in range(0, 8):
        solutions = _multiplicity_vectors(r, 3 * d - 1, d * d + 1)
        if d == 7:
            assert not solutions, "degree bound d <= 6 violated"
            continue
        for m in solutions:
            found.append(surface.cls((d,) + m))
    curves = tuple(sorted(found, key=lambda c: c.coords))
    for c in curves:
        assert pairing(c, c) == -1 and pairing(c, surface.canonical()) == -1
    return curves


def curve_census(r: int) -> dict[int, int]:
    """Number of exceptional curves by degree d = C.H."""
    census: dict[int, int] = {}
    for c in exceptional_curves(r):
        d = int(c.coords[0])
        census[d] = census.get(d, 0) + 1
    return census


def _positivity(d: PicardClass, strict: bool) -> bool:
    curves = exceptional_curves(d.surface.r)
    self_int = pairing(d, d)
    if strict:
        return self_int > 0 and all(pairing(d, c) > 0 for c in curves)
    return self_int >= 0 and all(pairing(d, c) >= 0 for c in curves)


def is_ample_picard(d: PicardClass) -> bool:
    """Kleiman positivity against all exceptional curves plus D.D > 0."""
    return _positivity(d, strict=True)


def is_nef_picard(d: PicardClass) -> bool:
    return _positivity(d, strict=False)


def nakai_binding(d: PicardClass) -> bool:
    """True when the D.D > 0 safeguard is the deciding constraint (all curve
    pairings positive but the self-intersection is not)."""
    curves = exceptional_curves(d.surface.r)
    return all(pairing(d, c) > 0 for c in curves) and pairing(d, d) <= 0


def slope_picard(d: PicardClass) -> Fraction:
    """mu = -K.D / D.D for an ample class on the blowup surface."""
    if not is_ample_picard(d):
        raise GeometryError("slope requires an ample class")
    d_sq = pairing(d, d)
    if d_sq == 0:
        raise GeometryError("slope undefined: D.D = 0")
    return pairing(d.surface.anticanonical(), d) / d_sq


def dp1_surface() -> BlowupSurface:
    """The degree 1 del Pezzo surface: P^2 blown up at eight general points."""
    return BlowupSurface(8)


def picard_class_to_json(d: PicardClass) -> dict:
    return {"r": d.surface.r, "coords": [format_rational(c) for c in d.coords]}


def picard_class_from_json(data: dict) -> PicardClass:
    from .rationals import InputError

    if not isinstance(data, dict) or "r" not in data or "coords" not in data:
        raise InputError('Picard class JSON must be an object with "r" and "coords"')
    surface = BlowupSurface(int(data["r"]))
    coords = tuple(
        parse_rational(c, where=f"coords[{i}]") for i, c in enumerate(data["coords"])
    )
    return PicardClass(surface, coords)
