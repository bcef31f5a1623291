"""Properness criteria for the K-energy as exact decision procedures.

The main checker decides, for an ample class L, a slack parameter
epsilon > 0 and an alpha invariant source, the three conditions

  (1)  epsilon < (n+1)/n * alpha(L),
  (2)  K + epsilon L     ample,
  (3)  (epsilon - n mu) L - (n-1) K  ample,   mu = -K.L^{n-1} / L^n,

whose conjunction certifies that the K-energy is proper (on all potentials,
or on G-invariant potentials when alpha came from a symmetry group).  Two
degenerate regimes have their own modes: c1 < 0 (K ample) needs only the
non-strict form of (3), and Fano classes polarized by -K reduce to
alpha(-K) > n/(n+1).

Everything is computed in divisor form with exact rationals: conditions
(2) and (3) become finitely many linear inequalities against walls (toric
surfaces), exceptional curves (blowups of P^2) or user-supplied test curves
(abstract slices), and for a one-parameter family a L_lambda all of them are
affine in the scale a, so the feasible set of scales at fixed lambda is an
exact open interval.  Sweeps refine the feasible lambda-window endpoints by
bisection with exact feasibility probes.

A failing criterion is reported as "criterion not satisfied", never as a
properness disproof; the conditions are sufficient, not sharp.  A weaker
historical variant of condition (3) (Song-Weinkove's inequality, tested
against a wedge with the reference metric) is intentionally not implemented;
only the stronger class form above is decided.

Comparison-only constants from the literature, recorded for documentation
tables and never used in computation: Zhou-Zhu prove properness of the same
hexagonal family for 1/(1 + sqrt(10)/5) < lambda < 1 + sqrt(10)/5 (approx
0.61..1.63), and Dervan proves K-stability of the degree-1 family for
(10 - sqrt(10))/9 < lambda < sqrt(10) - 2 (approx 0.76..1.16).
"""

from __future__ import annotations

import functools
import itertools
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction

from .alpha import alpha_invariant, symmetry_context
from .picard import (
    BlowupSurface,
    PicardClass,
    dp1_surface,
    exceptional_curves,
    is_ample_picard,
    nakai_binding,
    pairing,
    slope_picard,
)
from .rationals import (
    GeometryError,
    InputError,
    ValidationError,
    format_rational,
    parse_rational,
)
from .toric import (
    Fan,
    ToricDivisor,
    anticanonical_divisor,
    canonical_divisor,
    dp6_fan,
    intersection_number,
    is_ample,
    is_nef,
    slope_quantities,
)

SCOPE_ALL = "all potentials"
SCOPE_G = "G-invariant potentials"

VERDICT_PROPER = "proper"
VERDICT_FAIL = "criterion not satisfied"

DOCUMENTED_COMPARISON_INTERVALS = {
    "zhou-zhu (dp6 family, G-invariant properness)": "1/(1+sqrt(10)/5) < lambda < 1+sqrt(10)/5",
    "dervan (dp1 family, K-stability)": "(10-sqrt(10))/9 < lambda < sqrt(10)-2",
}


# ---------------------------------------------------------------------------
# alpha sources


@dataclass(frozen=True)
class StabilizerAlpha:
    """Compute alpha with the vertex formula (toric backends only)."""

    group_mode: str = "full"
    explicit_group: tuple = ()


@dataclass(frozen=True)
class SuppliedAlpha:
    """An externally supplied alpha value (or lower bound) for the class."""

    value: Fraction
    label: str = "supplied value"
    scope: str = SCOPE_ALL


def dervan_alpha_bound(lam) -> Fraction:
    """Builtin lower bound min{1, 1/(2 - lambda)} for the dp1 family classes."""
    lam = Fraction(lam)
    if lam >= 2:
        raise GeometryError("the builtin dp1 alpha bound needs lambda < 2")
    return min(Fraction(1), 1 / (2 - lam))


def resolve_alpha(backend, source):
    """Return (value, provenance label, scope) or raise naming the gap."""
    if isinstance(source, SuppliedAlpha):
        value = Fraction(source.value)
        if value <= 0:
            raise InputError("supplied alpha must be positive")
        return value, source.label, source.scope
    if isinstance(source, StabilizerAlpha):
        if not isinstance(backend, ToricDivisor):
            raise GeometryError(
                "alpha source 'stabilizer formula' is only available for toric "
                "backends; supply a value for this backend"
            )
        ctx = symmetry_context(
            backend, source.group_mode, explicit_group=source.explicit_group or None
        )
        order = len(ctx.stabilizer) if ctx.stabilizer else 1
        label = f"stabilizer formula ({source.group_mode} group, order {order})"
        return alpha_invariant(ctx), label, SCOPE_G
    raise InputError(f"unknown alpha source {source!r}")


# ---------------------------------------------------------------------------
# backends: toric divisor, Picard class, abstract slice


@dataclass(frozen=True)
class SliceCurve:
    name: str
    l_pairing: Fraction
    k_pairing: Fraction


@dataclass(frozen=True)
class AbstractSlice:
    """Intersection-slice model of a polarized manifold.

    Carries just the numbers L^n, K.L^{n-1}, K^n and a list of test curves
    used to decide positivity of classes x L + y K.  This is what lets the
    c1 < 0 mode run on surfaces that have no toric or Picard model here.
    """

    n: int
    l_pow_n: Fraction
    k_dot_l_nm1: Fraction
    k_pow_n: Fraction
    test_curves: tuple[SliceCurve, ...]

    def __post_init__(self):
        if self.n < 1:
            raise ValidationError("slice dimension must be positive")
        object.__setattr__(self, "l_pow_n", Fraction(self.l_pow_n))
        object.__setattr__(self, "k_dot_l_nm1", Fraction(self.k_dot_l_nm1))
        object.__setattr__(self, "k_pow_n", Fraction(self.k_pow_n))
        if self.l_pow_n <= 0:
            raise ValidationError("slice needs L^n > 0")
        curves = tuple(
            SliceCurve(c.name, Fraction(c.l_pairing), Fraction(c.k_pairing))
            for c in self.test_curves
        )
        if not curves:
            raise ValidationError("slice needs at least one test curve")
        object.__setattr__(self, "test_curves", curves)


def canonical_polarization_slice(n: int, volume=1) -> AbstractSlice:
    """The slice of (X, K) with K ample: L = K, so all pairings coincide."""
    v = Fraction(volume)
    return AbstractSlice(
        n=n,
        l_pow_n=v,
        k_dot_l_nm1=v,
        k_pow_n=v,
        test_curves=(SliceCurve("canonical test curve", Fraction(1), Fraction(1)),),
    )


def backend_dim(backend) -> int:
    if isinstance(backend, ToricDivisor):
        return backend.fan.dim
    if isinstance(backend, PicardClass):
        return 2
    if isinstance(backend, AbstractSlice):
        return backend.n
    raise InputError(f"unknown backend {type(backend).__name__}")


def backend_describe(backend) -> str:
    if isinstance(backend, ToricDivisor):
        coeffs = ", ".join(format_rational(c) for c in backend.coeffs)
        return f"toric divisor ({coeffs}) on a {backend.fan.n_rays}-ray fan"
    if isinstance(backend, PicardClass):
        coords = ", ".join(format_rational(c) for c in backend.coords)
        return f"Picard class ({coords}) on the blowup of P^2 at {backend.surface.r} points"
    if isinstance(backend, AbstractSlice):
        return f"abstract intersection slice (n={backend.n})"
    raise InputError(f"unknown backend {type(backend).__name__}")


def _combo_positive(backend, x, y, strict: bool):
    """Decide positivity of x L + y K; return (holds, binding label, margin)."""
    x, y = Fraction(x), Fraction(y)
    if isinstance(backend, ToricDivisor):
        combo = x * backend + y * canonical_divisor(backend.fan)
        holds = is_ample(combo) if strict else is_nef(combo)
        binding = None
        margin = None
        if backend.fan.dim == 2:
            slacks = [
                (intersection_number(combo, _ray_divisor(backend.fan, i)), f"wall at ray {i}")
                for i in range(backend.fan.n_rays)
            ]
            margin, binding = min(slacks)
        return holds, binding, margin
    if isinstance(backend, PicardClass):
        combo = x * backend + y * backend.surface.canonical()
        curves = exceptional_curves(backend.surface.r)
        labels = _curve_labels(backend.surface.r)
        slacks = [pairing(combo, c) for c in curves]
        margin = min(slacks)
        binding = labels[slacks.index(margin)]
        self_int = pairing(combo, combo)
        holds = (margin > 0 and self_int > 0) if strict else (margin >= 0 and self_int >= 0)
        if margin > 0 and self_int <= 0:
            binding = "self-intersection safeguard (D.D > 0)"
            margin = self_int
        return holds, binding, margin
    if isinstance(backend, AbstractSlice):
        slacks = [
            (x * c.l_pairing + y * c.k_pairing, c.name) for c in backend.test_curves
        ]
        margin, binding = min(slacks)
        holds = margin > 0 if strict else margin >= 0
        return holds, binding, margin
    raise InputError(f"unknown backend {type(backend).__name__}")


def _ray_divisor(fan: Fan, i: int) -> ToricDivisor:
    return ToricDivisor(fan, tuple(Fraction(1 if j == i else 0) for j in range(fan.n_rays)))


def _curve_label(c: PicardClass) -> str:
    return "curve (" + ", ".join(format_rational(x) for x in c.coords) + ")"


@functools.lru_cache(maxsize=None)
def _curve_labels(r: int) -> tuple[str, ...]:
    return tuple(_curve_label(c) for c in exceptional_curves(r))


def backend_mu(backend) -> Fraction:
    """The slope mu = -K.L^{n-1} / L^n of the backend class."""
    if isinstance(backend, ToricDivisor):
        return slope_quantities(backend).mu
    if isinstance(backend, PicardClass):
        return slope_picard(backend)
    if isinstance(backend, AbstractSlice):
        return -backend.k_dot_l_nm1 / backend.l_pow_n
    raise InputError(f"unknown backend {type(backend).__name__}")


def _slice_mu(backend: AbstractSlice) -> Fraction:
    return -backend.k_dot_l_nm1 / backend.l_pow_n


# ---------------------------------------------------------------------------
# reports


@dataclass(frozen=True)
class ConditionCheck:
    name: str
    description: str
    holds: bool
    values: dict = field(default_factory=dict)
    binding: str | None = None

    def __post_init__(self):
        object.__setattr__(self, "values", dict(self.values))


@dataclass(frozen=True)
class PropernessReport:
    mode: str
    backend: str
    verdict: str
    scope: str
    conditions: tuple[ConditionCheck, ...]
    alpha: Fraction | None = None
    alpha_provenance: str | None = None
    mu: Fraction | None = None
    notes: tuple[str, ...] = ()

    def __post_init__(self):
        expected = VERDICT_PROPER if all(c.holds for c in self.conditions) else VERDICT_FAIL
        assert self.verdict == expected, "verdict must be the conjunction of the conditions"

    @property
    def proper(self) -> bool:
        return self.verdict == VERDICT_PROPER


def report_to_json(report: PropernessReport) -> dict:
    return {
        "kind": "properness-report",
        "mode": report.mode,
        "backend": report.backend,
        "verdict": report.verdict,
        "scope": report.scope,
        "alpha": None if report.alpha is None else format_rational(report.alpha),
        "alpha_provenance": report.alpha_provenance,
        "mu": None if report.mu is None else format_rational(report.mu),
        "notes": list(report.notes),
        "conditions": [
            {
                "name": c.name,
                "description": c.description,
                "holds": c.holds,
                "values": dict(c.values),
                "binding": c.binding,
            }
            for c in report.conditions
        ],
    }


def report_from_json(data: dict) -> PropernessReport:
    if not isinstance(data, dict) or data.get("kind") != "properness-report":
        raise InputError("not a properness report")
    conditions = tuple(
        ConditionCheck(
            name=c["name"],
            description=c["description"],
            holds=bool(c["holds"]),
            values=dict(c["values"]),
            binding=c.get("binding"),
        )
        for c in data["conditions"]
    )
    return PropernessReport(
        mode=data["mode"],
        backend=data["backend"],
        verdict=data["verdict"],
        scope=data["scope"],
        conditions=conditions,
        alpha=None if data.get("alpha") is None else parse_rational(data["alpha"]),
        alpha_provenance=data.get("alpha_provenance"),
        mu=None if data.get("mu") is None else parse_rational(data["mu"]),
        notes=tuple(data.get("notes", [])),
    )


# ---------------------------------------------------------------------------
# the checkers


@dataclass(frozen=True)
class KClassSetup:
    backend: object
    epsilon: Fraction
    alpha_source: object

    def __post_init__(self):
        object.__setattr__(self, "epsilon", Fraction(self.epsilon))
        if self.epsilon < 0:
            raise InputError("epsilon must be nonnegative")


def check_properness(setup: KClassSetup) -> PropernessReport:
    """Decide the three-condition properness criterion for an ample class.

    epsilon = 0 carries no alpha slack and is exactly the c1 < 0 regime, so
    such requests are routed to check_negative_c1 on the same backend.
    """
    backend = setup.backend
    n = backend_dim(backend)
    eps = setup.epsilon
    if eps == 0:
        return check_negative_c1(backend)
    ample, _, _ = _combo_positive(backend, 1, 0, strict=True)
    if not ample:
        raise GeometryError("class not Kahler: the backend class is not ample")
    alpha, label, scope = resolve_alpha(backend, setup.alpha_source)
    bound = Fraction(n + 1, n) * alpha
    cond1 = ConditionCheck(
        name="condition (1)",
        description="epsilon < (n+1)/n * alpha",
        holds=eps < bound,
        values={
            "epsilon": format_rational(eps),
            "alpha": format_rational(alpha),
            "bound": format_rational(bound),
        },
        binding="alpha bound" if eps >= bound else None,
    )
    holds2, binding2, margin2 = _combo_positive(backend, eps, 1, strict=True)
    cond2 = ConditionCheck(
        name="condition (2)",
        description="K + epsilon L ample",
        holds=holds2,
        values=_margin_values(margin2),
        binding=binding2,
    )
    mu = backend_mu(backend)
    factor = eps - n * mu
    holds3, binding3, margin3 = _combo_positive(backend, factor, -(n - 1), strict=True)
    cond3 = ConditionCheck(
        name="condition (3)",
        description="(epsilon - n*mu) L - (n-1) K ample",
        holds=holds3,
        values={"mu": format_rational(mu), "L-coefficient": format_rational(factor),
                **_margin_values(margin3)},
        binding=binding3,
    )
    conditions = (cond1, cond2, cond3)
    verdict = VERDICT_PROPER if all(c.holds for c in conditions) else VERDICT_FAIL
    return PropernessReport(
        mode="epsilon-criterion",
        backend=backend_describe(backend),
        verdict=verdict,
        scope=scope,
        conditions=conditions,
        alpha=alpha,
        alpha_provenance=label,
        mu=mu,
        notes=_nakai_notes(backend, ((eps, 1), (factor, -(n - 1)))),
    )


def _margin_values(margin) -> dict:
    return {} if margin is None else {"margin": format_rational(margin)}


def _nakai_notes(backend, combos) -> tuple[str, ...]:
    if not isinstance(backend, PicardClass):
        return ()
    notes = []
    for x, y in combos:
        combo = Fraction(x) * backend + Fraction(y) * backend.surface.canonical()
        if nakai_binding(combo):
            notes.append(
                f"self-intersection safeguard is the deciding constraint for "
                f"({format_rational(Fraction(x))}) L + ({format_rational(Fraction(y))}) K"
            )
    return tuple(notes)


def check_negative_c1(backend) -> PropernessReport:
    """The c1 < 0 criterion: (-n mu) L - (n-1) K nef suffices for properness."""
    n = backend_dim(backend)
    k_ample, _, _ = _combo_positive(backend, 0, 1, strict=True)
    if not k_ample:
        raise GeometryError("negative-c1 criterion requires c1 < 0 (ample canonical class)")
    if isinstance(backend, AbstractSlice):
        mu = _slice_mu(backend)
    else:  # rational surfaces never reach this point (K is never ample there)
        mu = backend_mu(backend)
    factor = -n * mu
    holds, binding, margin = _combo_positive(backend, factor, -(n - 1), strict=False)
    cond = ConditionCheck(
        name="condition (nef)",
        description="(-n*mu) L - (n-1) K nef",
        holds=holds,
        values={"mu": format_rational(mu), "L-coefficient": format_rational(factor),
                **_margin_values(margin)},
        binding=binding if not holds else None,
    )
    verdict = VERDICT_PROPER if holds else VERDICT_FAIL
    return PropernessReport(
        mode="negative-c1",
        backend=backend_describe(backend),
        verdict=verdict,
        scope=SCOPE_ALL,
        conditions=(cond,),
        mu=mu,
    )


def check_fano(backend, alpha_source) -> PropernessReport:
    """The anticanonically polarized criterion: alpha(-K) > n/(n+1)."""
    n = backend_dim(backend)
    antik_ample, _, _ = _combo_positive(backend, 0, -1, strict=True)
    if not antik_ample:
        raise GeometryError("Fano criterion requires an ample anticanonical class")
    if isinstance(backend, ToricDivisor):
        anticanonical = anticanonical_divisor(backend.fan)
        alpha, label, scope = resolve_alpha(anticanonical, alpha_source)
    else:
        alpha, label, scope = resolve_alpha(backend, alpha_source)
    threshold = Fraction(n, n + 1)
    cond = ConditionCheck(
        name="condition (1)",
        description="alpha(-K) > n/(n+1)",
        holds=alpha > threshold,
        values={"alpha": format_rational(alpha), "threshold": format_rational(threshold)},
        binding="alpha bound" if alpha <= threshold else None,
    )
    verdict = VERDICT_PROPER if cond.holds else VERDICT_FAIL
    return PropernessReport(
        mode="fano",
        backend=backend_describe(backend),
        verdict=verdict,
        scope=scope,
        conditions=(cond,),
        alpha=alpha,
        alpha_provenance=label,
    )


def jflow_converges_surface(d, w) -> bool:
    """Smooth convergence of the surface J-flow as a class condition.

    With c = (W.D)/D^2, the flow with target W on the class D converges
    smoothly iff 2c D - W is ample.  Both classes must be ample classes of
    the same surface backend.
    """
    if isinstance(d, ToricDivisor) and isinstance(w, ToricDivisor):
        if d.fan != w.fan:
            raise ValidationError("classes live on different fans")
        if d.fan.dim != 2:
            raise GeometryError("the J-flow class condition is a surface statement")
        if not (is_ample(d) and is_ample(w)):
            raise GeometryError("both classes must be ample")
        d_sq = intersection_number(d, d)
        if d_sq <= 0:
            raise GeometryError("D^2 must be positive")
        c = intersection_number(w, d) / d_sq
        return is_ample(2 * c * d - w)
    if isinstance(d, PicardClass) and isinstance(w, PicardClass):
        if d.surface != w.surface:
            raise ValidationError("classes live on different surfaces")
        if not (is_ample_picard(d) and is_ample_picard(w)):
            raise GeometryError("both classes must be ample")
        d_sq = pairing(d, d)
        if d_sq <= 0:
            raise GeometryError("D^2 must be positive")
        c = pairing(w, d) / d_sq
        return is_ample_picard(2 * c * d - w)
    raise InputError("J-flow condition needs two toric divisors or two Picard classes")


# ---------------------------------------------------------------------------
# one-parameter families and feasibility in the scale


@dataclass(frozen=True)
class ToricFamily:
    """lambda -> ToricDivisor(base + lambda * slope) with recomputed alpha."""

    name: str
    fan: Fan
    base: tuple[Fraction, ...]
    slope: tuple[Fraction, ...]
    group_mode: str = "full"

    def class_at(self, lam) -> ToricDivisor:
        lam = Fraction(lam)
        return ToricDivisor(
            self.fan, tuple(b + lam * s for b, s in zip(self.base, self.slope))
        )

    def is_ample_at(self, lam) -> bool:
        return is_ample(self.class_at(lam))

    def alpha_unscaled(self, lam):
        ctx = symmetry_context(self.class_at(lam), self.group_mode)
        order = len(ctx.stabilizer) if ctx.stabilizer else 1
        label = f"stabilizer formula ({self.group_mode} group, order {order})"
        return alpha_invariant(ctx), label, SCOPE_G

    def alpha_scope(self) -> str:
        return SCOPE_G


@dataclass(frozen=True)
class PicardFamily:
    """lambda -> PicardClass(base + lambda * slope) with a supplied alpha bound."""

    name: str
    surface: BlowupSurface
    base: tuple[Fraction, ...]
    slope: tuple[Fraction, ...]
    alpha_label: str = "supplied bound (Dervan)"

    def class_at(self, lam) -> PicardClass:
        lam = Fraction(lam)
        return PicardClass(
            self.surface, tuple(b + lam * s for b, s in zip(self.base, self.slope))
        )

    def is_ample_at(self, lam) -> bool:
        return is_ample_picard(self.class_at(lam))

    def alpha_unscaled(self, lam):
        return dervan_alpha_bound(lam), self.alpha_label, SCOPE_ALL

    def alpha_scope(self) -> str:
        return SCOPE_ALL


def dp6_family() -> ToricFamily:
    """(D_1 + D_3 + D_5) + lambda (D_2 + D_4 + D_6) on the hexagonal fan."""
    one, zero = Fraction(1), Fraction(0)
    return ToricFamily(
        name="dp6",
        fan=dp6_fan(),
        base=(one, zero, one, zero, one, zero),
        slope=(zero, one, zero, one, zero, one),
    )


def dp1_family() -> PicardFamily:
    """3H - E_1 - ... - E_7 - lambda E_8 on the blowup of P^2 at 8 points."""
    one, zero = Fraction(1), Fraction(0)
    return PicardFamily(
        name="dp1",
        surface=dp1_surface(),
        base=(Fraction(3),) + (one,) * 7 + (zero,),
        slope=(zero,) * 8 + (one,),
    )


BUILTIN_FAMILIES = {"dp6": dp6_family, "dp1": dp1_family}


@dataclass(frozen=True)
class OpenInterval:
    lo: Fraction
    hi: Fraction

    @property
    def is_empty(self) -> bool:
        return self.lo >= self.hi

    @property
    def midpoint(self) -> Fraction:
        return (self.lo + self.hi) / 2

    def scaled(self, t) -> "OpenInterval":
        t = Fraction(t)
        return OpenInterval(self.lo * t, self.hi * t)


@functools.lru_cache(maxsize=None)
def _family_pairing_data(family):
    """Per constraint: (label, base pairing, slope pairing, K pairing).

    The class pairing at lambda is base + lambda * slope, so each probe of
    the sweep is a handful of multiply-adds per constraint."""
    base_cls = family.class_at(0)
    if isinstance(base_cls, ToricDivisor):
        fan = base_cls.fan
        slope_cls = ToricDivisor(fan, family.slope)
        k = canonical_divisor(fan)
        rows = []
        for i in range(fan.n_rays):
            wall = _ray_divisor(fan, i)
            rows.append(
                (
                    f"wall at ray {i}",
                    intersection_number(base_cls, wall),
                    intersection_number(slope_cls, wall),
                    intersection_number(k, wall),
                )
            )
        return tuple(rows)
    slope_cls = PicardClass(base_cls.surface, family.slope)
    k = base_cls.surface.canonical()
    labels = _curve_labels(base_cls.surface.r)
    return tuple(
        (labels[i], pairing(base_cls, c), pairing(slope_cls, c), pairing(k, c))
        for i, c in enumerate(exceptional_curves(base_cls.surface.r))
    )


def _family_pairings(family, lam):
    """(label, L_lambda.C, K.C) for every positivity constraint of the backend."""
    lam = Fraction(lam)
    return [
        (label, base + lam * slope, kc)
        for label, base, slope, kc in _family_pairing_data(family)
    ]


def _family_mu(family, lam) -> Fraction:
    cls = family.class_at(lam)
    if isinstance(cls, ToricDivisor):
        return slope_quantities(cls).mu
    return slope_picard(cls)


def feasible_scale_interval(family, lam, epsilon=Fraction(1)) -> OpenInterval:
    """The exact open interval of scales a for which a L_lambda passes all
    three conditions at the given epsilon.

    Every constraint is affine in a: the alpha bound because alpha scales as
    1/a, the positivity conditions because pairings are linear.  The
    resulting half-line intersection is certified by a full checker run at
    the midpoint whenever it is nonempty, and for Picard backends the
    quadratic self-intersection safeguards are verified over the whole
    interval (they never bind for the builtin families; if one ever did,
    this raises rather than returning a wrong interval).
    """
    interval, _, _ = _scale_interval_with_bindings(family, lam, epsilon)
    return interval


def _scale_interval_with_bindings(family, lam, epsilon):
    """The interval plus the labels of the constraints attaining lo and hi."""
    lam, epsilon = Fraction(lam), Fraction(epsilon)
    if epsilon <= 0:
        raise InputError("family feasibility needs epsilon > 0 (zero slack is the c1 < 0 mode)")
    if not family.is_ample_at(lam):
        raise GeometryError(f"lambda = {format_rational(lam)} is outside the ample range")
    n = backend_dim(family.class_at(lam))
    alpha1, alpha_label, alpha_scope = family.alpha_unscaled(lam)
    mu1 = _family_mu(family, lam)
    # each bound is (c0, c1) with c0 + c1 * a > 0 required
    bounds: list[tuple[Fraction, Fraction, str]] = [
        (Fraction(0), Fraction(1), "positive scale"),
        (Fraction(n + 1, n) * alpha1 / epsilon, Fraction(-1), "condition (1): alpha bound"),
    ]
    for label, lc, kc in _family_pairings(family, lam):
        bounds.append((kc, epsilon * lc, f"condition (2): {label}"))
        bounds.append((-n * mu1 * lc - (n - 1) * kc, epsilon * lc, f"condition (3): {label}"))
    lo, hi = Fraction(0), None
    lo_label, hi_label = "positive scale", None
    for c0, c1, label in bounds:
        if c1 > 0:
            cut = -c0 / c1
            if cut > lo:
                lo, lo_label = cut, label
        elif c1 < 0:
            cut = -c0 / c1
            if hi is None or cut < hi:
                hi, hi_label = cut, label
        elif c0 <= 0:
            return OpenInterval(Fraction(0), Fraction(0)), label, label
    assert hi is not None  # the alpha bound always caps the scale
    interval = OpenInterval(lo, hi)
    if not interval.is_empty:
        _verify_interval(family, lam, epsilon, interval, alpha1, alpha_label, alpha_scope)
    return interval, lo_label, hi_label


def _verify_interval(family, lam, epsilon, interval, alpha1, alpha_label, alpha_scope):
    mid = interval.midpoint
    backend = family.class_at(lam) * mid
    setup = KClassSetup(
        backend=backend,
        epsilon=epsilon,
        alpha_source=SuppliedAlpha(alpha1 / mid, alpha_label, alpha_scope),
    )
    report = check_properness(setup)
    if not report.proper:
        raise GeometryError(
            "internal inconsistency: checker rejects the feasible-interval midpoint"
        )
    if isinstance(backend, PicardClass):
        n = backend_dim(backend)
        unscaled = family.class_at(lam)
        k = unscaled.surface.canonical()
        mu1 = slope_picard(unscaled)
        l_sq = pairing(unscaled, unscaled)
        lk = pairing(unscaled, k)
        k_sq = pairing(k, k)
        # (K + eps a L)^2 and ((eps a - n mu1) L - (n-1) K)^2 as quadratics in a
        quads = [
            (epsilon**2 * l_sq, 2 * epsilon * lk, k_sq),
            _compose_quadratic(l_sq, lk, k_sq, epsilon, -n * mu1, n - 1),
        ]
        for qa, qb, qc in quads:
            if not _quadratic_positive_on_open(qa, qb, qc, interval.lo, interval.hi):
                raise GeometryError(
                    "self-intersection safeguard binds inside the affine-feasible "
                    "interval; the interval endpoints would not be exact"
                )


def _compose_quadratic(l_sq, lk, k_sq, eps, shift, kfac):
    # ((eps a + shift) L - kfac K)^2 expanded in a
    qa = eps**2 * l_sq
    qb = 2 * eps * (shift * l_sq - kfac * lk)
    qc = shift**2 * l_sq - 2 * shift * kfac * lk + kfac**2 * k_sq
    return qa, qb, qc


def _quadratic_positive_on_open(qa, qb, qc, lo, hi) -> bool:
    """Exact test that qa a^2 + qb a + qc > 0 for every a in (lo, hi).

    Vanishing at an endpoint is fine (the interval is open); an interior
    nonpositive value is not."""

    def q(a):
        return qa * a * a + qb * a + qc

    if q(lo) < 0 or q(hi) < 0:
        return False
    if qa > 0:
        vertex = -qb / (2 * qa)
        if lo < vertex < hi and q(vertex) <= 0:
            return False
    elif qa == 0:
        if qb == 0 and qc <= 0:
            return False
        if q(lo) == 0 and q(hi) == 0:
            return False
    # concave case: nonnegative endpoints bound the interior from below,
    # with interior equality impossible for a nonzero concave quadratic
    return True


# ---------------------------------------------------------------------------
# lambda sweeps


@dataclass(frozen=True)
class FeasibleWindow:
    lo_bracket: tuple[Fraction, Fraction]
    hi_bracket: tuple[Fraction, Fraction]
    witness_lambda: Fraction
    witness_a: Fraction


@dataclass(frozen=True)
class EndpointCheck:
    endpoint: Fraction
    side: str
    empty_at_endpoint: bool
    feasible_inside: bool
    infeasible_outside: bool

    @property
    def confirmed(self) -> bool:
        return self.empty_at_endpoint and self.feasible_inside and self.infeasible_outside


@dataclass(frozen=True)
class FeasibilityReport:
    family: str
    epsilon: Fraction
    lambda_min: Fraction
    lambda_max: Fraction
    step: Fraction
    refine_tol: Fraction
    windows: tuple[FeasibleWindow, ...]
    endpoint_checks: tuple[EndpointCheck, ...]
    diagnostics: dict = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "diagnostics", dict(self.diagnostics))


def sweep_lambda(
    family,
    lambda_min,
    lambda_max,
    step,
    refine_tol,
    epsilon=Fraction(1),
    conjectured_endpoints=(),
    parallel=False,
) -> FeasibilityReport:
    """Scan the family parameter on an exact rational grid, then bisect each
    feasible/infeasible transition down to the requested bracket width.

    Grid points where the class is not ample count as infeasible.  Every
    probe is an exact feasibility decision, so the emitted brackets are
    certificates: the bracket interior contains the true endpoint of the
    feasible window.  Conjectured exact endpoints are verified by probing
    the endpoint itself and both sides at distance refine_tol.
    """
    lambda_min, lambda_max = Fraction(lambda_min), Fraction(lambda_max)
    step, refine_tol = Fraction(step), Fraction(refine_tol)
    epsilon = Fraction(epsilon)
    if step <= 0 or refine_tol <= 0:
        raise InputError("step and refine_tol must be positive")
    if lambda_min > lambda_max:
        raise InputError("empty grid: lambda_min exceeds lambda_max")
    grid = []
    lam = lambda_min
    while lam <= lambda_max:
        grid.append(lam)
        lam += step
    cache: dict[Fraction, bool] = {}

    def feasible(lam: Fraction) -> bool:
        if lam not in cache:
            try:
                cache[lam] = not feasible_scale_interval(family, lam, epsilon).is_empty
            except GeometryError:
                cache[lam] = False
        return cache[lam]

    if parallel:
        with ThreadPoolExecutor() as pool:
            for lam, value in zip(grid, pool.map(_probe, itertools.repeat((family, epsilon)), grid)):
                cache[lam] = value
    flags = [feasible(lam) for lam in grid]
    windows = []
    i = 0
    while i < len(grid):
        if not flags[i]:
            i += 1
            continue
        j = i
        while j + 1 < len(grid) and flags[j + 1]:
            j += 1
        lo_bracket = (
            _bisect(grid[i - 1], grid[i], feasible, refine_tol) if i > 0 else (grid[0], grid[0])
        )
        hi_bracket = (
            _bisect(grid[j + 1], grid[j], feasible, refine_tol)
            if j + 1 < len(grid)
            else (grid[-1], grid[-1])
        )
        witness_lambda = grid[(i + j) // 2]
        interval = feasible_scale_interval(family, witness_lambda, epsilon)
        windows.append(
            FeasibleWindow(
                lo_bracket=lo_bracket,
                hi_bracket=hi_bracket,
                witness_lambda=witness_lambda,
                witness_a=interval.midpoint,
            )
        )
        i = j + 1
    checks = []
    for raw in conjectured_endpoints:
        e = Fraction(raw)
        side = _endpoint_side(e, windows)
        inside = e + refine_tol if side == "lower" else e - refine_tol
        outside = e - refine_tol if side == "lower" else e + refine_tol
        checks.append(
            EndpointCheck(
                endpoint=e,
                side=side,
                empty_at_endpoint=not feasible(e),
                feasible_inside=feasible(inside),
                infeasible_outside=not feasible(outside),
            )
        )
    diagnostics = {"grid_points": str(len(grid)), "alpha_scope": family.alpha_scope()}
    if windows:
        w = windows[0]
        interval, lo_label, hi_label = _scale_interval_with_bindings(
            family, w.witness_lambda, epsilon
        )
        diagnostics["witness_scale_interval"] = (
            f"({format_rational(interval.lo)}, {format_rational(interval.hi)})"
        )
        diagnostics["witness_binding_lower"] = lo_label
        diagnostics["witness_binding_upper"] = hi_label
    return FeasibilityReport(
        family=family.name,
        epsilon=epsilon,
        lambda_min=lambda_min,
        lambda_max=lambda_max,
        step=step,
        refine_tol=refine_tol,
        windows=tuple(windows),
        endpoint_checks=tuple(checks),
        diagnostics=diagnostics,
    )


def _probe(args, lam) -> bool:
    family, epsilon = args
    try:
        return not feasible_scale_interval(family, lam, epsilon).is_empty
    except GeometryError:
        return False


def _bisect(bad, good, feasible, tol):
    while abs(good - bad) > tol:
        mid = (good + bad) / 2
        if feasible(mid):
            good = mid
        else:
            bad = mid
    return (min(bad, good), max(bad, good))


def _endpoint_side(e, windows) -> str:
    best = None
    side = "lower"
    for w in windows:
        lo_center = (w.lo_bracket[0] + w.lo_bracket[1]) / 2
        hi_center = (w.hi_bracket[0] + w.hi_bracket[1]) / 2
        for candidate_side, center in (("lower", lo_center), ("upper", hi_center)):
            dist = abs(e - center)
            if best is None or dist < best:
                best, side = dist, candidate_side
    return side


def feasibility_report_to_json(report: FeasibilityReport) -> dict:
    return {
        "kind": "feasibility-report",
        "family": report.family,
        "epsilon": format_rational(report.epsilon),
        "lambda_min": format_rational(report.lambda_min),
        "lambda_max": format_rational(report.lambda_max),
        "step": format_rational(report.step),
        "refine_tol": format_rational(report.refine_tol),
        "intervals": [
            {
                "lo_bracket": [format_rational(x) for x in w.lo_bracket],
                "hi_bracket": [format_rational(x) for x in w.hi_bracket],
                "witness": {
                    "lambda": format_rational(w.witness_lambda),
                    "a": format_rational(w.witness_a),
                },
            }
            for w in report.windows
        ],
        "endpoint_checks": [
            {
                "endpoint": format_rational(c.endpoint),
                "side": c.side,
                "empty_at_endpoint": c.empty_at_endpoint,
                "feasible_inside": c.feasible_inside,
                "infeasible_outside": c.infeasible_outside,
                "confirmed": c.confirmed,
            }
            for c in report.endpoint_checks
        ],
        "diagnostics": dict(report.diagnostics),
    }


def feasibility_report_from_json(data: dict) -> FeasibilityReport:
    if not isinstance(data, dict) or data.get("kind") != "feasibility-report":
        raise InputError("not a feasibility report")
    windows = tuple(
        FeasibleWindow(
            lo_bracket=tuple(parse_rational(x) for x in w["lo_bracket"]),
            hi_bracket=tuple(parse_rational(x) for x in w["hi_bracket"]),
            witness_lambda=parse_rational(w["witness"]["lambda"]),
            witness_a=parse_rational(w["witness"]["a"]),
        )
        for w in data["intervals"]
    )
    checks = tuple(
        EndpointCheck(
            endpoint=parse_rational(c["endpoint"]),
            side=c["side"],
            empty_at_endpoint=bool(c["empty_at_endpoint"]),
            feasible_inside=bool(c["feasible_inside"]),
            infeasible_outside=bool(c["infeasible_outside"]),
        )
        for c in data["endpoint_checks"]
    )
    return FeasibilityReport(
        family=data["family"],
        epsilon=parse_rational(data["epsilon"]),
        lambda_min=parse_rational(data["lambda_min"]),
        lambda_max=parse_rational(data["lambda_max"]),
        step=parse_rational(data["step"]),
        refine_tol=parse_rational(data["refine_tol"]),
        windows=windows,
        endpoint_checks=checks,
        diagnostics=dict(data.get("diagnostics", {})),
    )
