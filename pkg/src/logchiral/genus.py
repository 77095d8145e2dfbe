"""Elliptic genera of log pairs via the K-theoretic character formula.

The genus of (X, D) is computed as the integral of
``ch(lambda_ell(Omega_X(log D))) * Td(X)`` with Omega_X(log D) presented in
K-theory as ``[Omega_X] + r[O] - sum_j [O(-D_j)]``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .chow import RingElement, RingSpec, exp_class, integrate, projective_space, todd_from_roots
from .errors import (
    DenominatorNotClearing,
    EmptyVerifiableRange,
    InputError,
    MathematicalFailure,
    NegativeQPower,
    NonNilpotentInput,
)
from .qseries import (
    Laurent,
    RationalFunction,
    TruncatedSeries,
    g_series,
    shift_y,
    specialize,
    theta_plus,
    theta_tilde,
)


@dataclass(frozen=True)
class KClass:
    """[sum L(pos)] - [sum L(neg)] + shift * [O], line bundles given by first Chern class."""

    positive_roots: tuple = ()
    negative_roots: tuple = ()
    trivial_rank_shift: int = 0

    def __post_init__(self):
        object.__setattr__(self, "positive_roots", tuple(self.positive_roots))
        object.__setattr__(self, "negative_roots", tuple(self.negative_roots))

    def __add__(self, other: "KClass") -> "KClass":
        return KClass(
            self.positive_roots + other.positive_roots,
            self.negative_roots + other.negative_roots,
            self.trivial_rank_shift + other.trivial_rank_shift,
        )

    def __neg__(self) -> "KClass":
        return KClass(self.negative_roots, self.positive_roots, -self.trivial_rank_shift)

    @property
    def rank(self) -> int:
        return len(self.positive_roots) - len(self.negative_roots) + self.trivial_rank_shift

    def first_chern(self, spec: RingSpec) -> RingElement:
        return sum(self.positive_roots, spec.zero()) - sum(self.negative_roots, spec.zero())

    def dual(self) -> "KClass":
        return KClass(
            tuple(-a for a in self.positive_roots),
            tuple(-a for a in self.negative_roots),
            self.trivial_rank_shift,
        )


@dataclass
class PairData:
    """A smooth projective X with a simple normal crossings divisor D = D_1 + ... + D_r.

    ``cotangent_roots`` are Chern roots of Omega_X. When Omega_X does not split
    into line bundles over the ring, ``cotangent_class`` may carry a virtual
    presentation instead (for P^d: (d+1)[O(-1)] - [O]); it then takes
    precedence and ``cotangent_roots`` may be empty.
    """

    dimension: int
    ring: RingSpec
    cotangent_roots: Sequence[RingElement]
    divisor_classes: Sequence[RingElement]
    name: str = ""
    cotangent_class: KClass | None = None

    def __post_init__(self):
        self.cotangent_roots = tuple(self.cotangent_roots)
        self.divisor_classes = tuple(self.divisor_classes)
        if self.dimension != self.ring.dimension:
            raise InputError("pair dimension differs from the ring dimension")
        if self.cotangent_class is None:
            if len(self.cotangent_roots) != self.dimension:
                raise InputError(
                    f"expected {self.dimension} cotangent roots, got {len(self.cotangent_roots)}"
                )
        elif self.cotangent_class.rank != self.dimension:
            raise InputError("virtual cotangent class has the wrong rank")
        for e in self.all_classes():
            if e.spec is not self.ring:
                raise InputError("class lives in a different ring")
            if e.constant_term() != 0:
                raise InputError(f"class {e.render()} has a nonzero degree-0 part")

    def all_classes(self):
        yield from self.cotangent_roots
        yield from self.divisor_classes
        if self.cotangent_class is not None:
            yield from self.cotangent_class.positive_roots
            yield from self.cotangent_class.negative_roots

    @property
    def r(self) -> int:
        return len(self.divisor_classes)

    def cotangent(self) -> KClass:
        if self.cotangent_class is not None:
            return self.cotangent_class
        return KClass(self.cotangent_roots)

    def todd(self) -> RingElement:
        """Td(X) from the tangent roots, the negated cotangent roots."""
        tangent = self.cotangent().dual()
        td = todd_from_roots(tangent.positive_roots, self.ring)
        if tangent.negative_roots:
            td = td / todd_from_roots(tangent.negative_roots, self.ring)
        return td


@dataclass
class EllipticityReport:
    passed: bool
    factor_exponent: int
    verified_order: int
    first_discrepancy: tuple | None = None
    note: str = ""

    def render(self) -> str:
        lines = [
            f"ellipticity: {'PASS' if self.passed else 'FAIL'}",
            f"d: {self.factor_exponent}",
            f"verified_order: {self.verified_order}",
        ]
        if self.first_discrepancy is not None:
            m, p, lhs, rhs = self.first_discrepancy
            lines.append(f"first_discrepancy: q^{m} y^{p} lhs={lhs} rhs={rhs}")
        if self.note:
            lines.append(f"note: {self.note}")
        return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# lambda_ell


def _exp_powers(eps: RingElement):
    cache: dict[int, RingElement] = {}

    def get(p: int) -> RingElement:
        if p not in cache:
            cache[p] = exp_class(eps * p)
        return cache[p]

    return get


def _twist_numerator(theta: TruncatedSeries, eps: RingElement) -> TruncatedSeries:
    """y^p -> y^p e^(p eps) coefficientwise."""
    spec = eps.spec
    expo = _exp_powers(eps)
    out = []
    for c in theta.coeffs:
        acc = spec.zero()
        for p, v in c.items():
            acc = acc + expo(p).map_coeffs(lambda a, p=p, v=v: Laurent({p: a * v}))
        out.append(acc)
    return TruncatedSeries(out, theta.order)


def _twist_denominator(theta: TruncatedSeries, eps: RingElement) -> TruncatedSeries:
    """y^p -> e^(p eps), i.e. the series at y = e^eps, with Laurent scalars."""
    spec = eps.spec
    expo = _exp_powers(eps)
    out = []
    for c in theta.coeffs:
        acc = spec.zero()
        for p, v in c.items():
            acc = acc + expo(p) * v
        out.append(acc.map_coeffs(Laurent))
    return TruncatedSeries(out, theta.order)


def _constant_series(spec: RingSpec, value, N: int) -> TruncatedSeries:
    return TruncatedSeries([spec.scalar(value)], N)


def ell_of_bundle(roots: Sequence[RingElement], N: int, spec: RingSpec | None = None) -> TruncatedSeries:
    """ch(Ell(E)) = prod_i theta~(q, y e^eps_i) / theta~_+(q, e^eps_i) for E = sum L(eps_i)."""
    roots = list(roots)
    if spec is None:
        if not roots:
            raise ValueError("an empty root list needs the ring spec")
        spec = roots[0].spec
    result = _constant_series(spec, Laurent(1), N)
    if not roots:
        return result
    tt, tp = theta_tilde(N), theta_plus(N)
    for eps in roots:
        if eps.constant_term() != 0:
            raise NonNilpotentInput(f"root {eps.render()} is not nilpotent")
        num = _twist_numerator(tt, eps)
        den = _twist_denominator(tp, eps)
        result = result * num * den.inverse()
    return result


def _to_rational(s: TruncatedSeries) -> TruncatedSeries:
    return s.map(lambda e: e.map_coeffs(RationalFunction.coerce))


def lambda_ell(k: KClass, N: int, spec: RingSpec) -> TruncatedSeries:
    """ch(lambda_ell(k)); coefficients become rational in y once anything is divided out."""
    result = ell_of_bundle(k.positive_roots, N, spec)
    shift = k.trivial_rank_shift
    g = g_series(N).map(spec.scalar)
    if k.negative_roots or shift < 0:
        result = _to_rational(result)
        g = _to_rational(g)
        if k.negative_roots:
            result = result * _to_rational(ell_of_bundle(k.negative_roots, N, spec)).inverse()
    if shift:
        result = result * g**shift
    return result


def log_cotangent_class(p: PairData) -> KClass:
    """[Omega_X] + r[O] - sum_j [O(-D_j)] from the residue sequence."""
    return p.cotangent() + KClass((), p.divisor_classes, p.r)


def _clear(c, m: int) -> Laurent:
    if isinstance(c, Laurent):
        return c
    if isinstance(c, (int, Fraction)):
        return Laurent(c)
    lp = c.to_laurent()
    if lp is None:
        raise DenominatorNotClearing(f"q^{m} coefficient {c!r} is not a Laurent polynomial")
    return lp


def elliptic_genus(p: PairData, N: int, log_class: KClass | None = None) -> TruncatedSeries:
    """Integral of ch(lambda_ell(Omega(log D))) * Td(X), q-order by q-order."""
    k = log_class if log_class is not None else log_cotangent_class(p)
    lam = lambda_ell(k, N, p.ring)
    td = p.todd()
    coeffs = [_clear(integrate(c * td, p.ring), m) for m, c in enumerate(lam.coeffs)]
    return TruncatedSeries(coeffs, N)


def chi_y_direct(p: PairData) -> Laurent:
    """Integral of ch(wedge_{-y} Omega(log D)) * Td(X) straight from the ring."""
    spec = p.ring
    k = log_cotangent_class(p)
    y = Laurent.y()

    def wedge(eps):
        return (exp_class(eps) * (-y)).map_coeffs(RationalFunction.coerce) + 1

    num = spec.scalar(RationalFunction.coerce(1))
    for a in k.positive_roots:
        num = num * wedge(a)
    for d in k.negative_roots:
        num = num / wedge(d)
    num = num * (RationalFunction.coerce(1 - y) ** k.trivial_rank_shift)
    return _clear(integrate(num * p.todd(), spec), 0)


def chi_y(p: PairData) -> Laurent:
    """The q = 0 specialization of the elliptic genus, cross-checked against chi_y_direct."""
    value = specialize(elliptic_genus(p, 0), q=0)
    direct = chi_y_direct(p)
    if value != direct:
        raise MathematicalFailure(f"chi_y routes disagree: {value.render()} vs {direct.render()}")
    return value


def euler_characteristic_open(p: PairData) -> Fraction:
    """e(X \\ D) = (-1)^d times the integral of c_d(Omega(log D))."""
    spec = p.ring
    k = log_cotangent_class(p)
    total = spec.one()
    for a in k.positive_roots:
        total = total * (a + 1)
    for d in k.negative_roots:
        total = total / (d + 1)
    return (-1) ** p.dimension * integrate(total.component(p.dimension), spec)


def euler_spec(p: PairData, N: int) -> TruncatedSeries:
    """The y = 1 specialization; its q^0 term is checked against e(X \\ D)."""
    s = specialize(elliptic_genus(p, N), y=1)
    e = euler_characteristic_open(p)
    if s.coeffs[0] != e:
        raise MathematicalFailure(f"q^0 of the y=1 specialization is {s.coeffs[0]}, expected {e}")
    return s


# ---------------------------------------------------------------------------
# ellipticity


def check_ellipticity(s: TruncatedSeries, d: int) -> EllipticityReport:
    """Compare s(q, qy) with (-y)^(-d) s(q, y) on the certified range."""
    try:
        shifted, M = shift_y(s, 1)
    except (EmptyVerifiableRange, NegativeQPower) as exc:
        return EllipticityReport(False, d, -1, None, note=str(exc))
    if d and not any(p < 0 for c in s.coeffs for p in _clear(c, 0).terms):
        # an index-d elliptic series has negative y-powers, so the shortcut
        # "none in the known range, none beyond" cannot be used to certify it
        M = s.order - 1
        if M < 0:
            return EllipticityReport(
                False, d, -1, None, note="no negative y-power in the known range; nothing is certifiable"
            )
    factor = Laurent({-d: (-1) ** d})
    for m in range(M + 1):
        lhs = shifted.coeffs[m]
        rhs = factor * _clear(s.coeffs[m], m)
        if lhs != rhs:
            exps = sorted(set(lhs.terms) | set(rhs.terms))
            for e in exps:
                a, b = lhs.coefficient(e), rhs.coefficient(e)
                if a != b:
                    return EllipticityReport(False, d, M, (m, e, a, b))
    return EllipticityReport(True, d, M)


def anticanonical_check(p: PairData) -> bool:
    """sum of cotangent roots == sum of divisor classes."""
    return p.cotangent().first_chern(p.ring) == sum(p.divisor_classes, p.ring.zero())


def shift_multiplier(k: KClass, spec: RingSpec) -> RingElement:
    """The factor lambda_ell(k) picks up under y -> qy, as a ring element over Q[y, 1/y].

    Each line bundle L(eps) contributes (-y e^eps)^(-1), each subtracted one
    the reciprocal, each trivial summand (-y)^(-1).
    """
    minus_y_inv = Laurent({-1: -1})
    out = spec.scalar(Laurent(1))
    for a in k.positive_roots:
        out = out * exp_class(-a) * minus_y_inv
    for d in k.negative_roots:
        out = out * exp_class(d) * Laurent({1: -1})
    out = out * minus_y_inv ** k.trivial_rank_shift
    return out


def shift_y_ring(s: TruncatedSeries, k: int = 1) -> tuple[TruncatedSeries, int]:
    """shift_y applied to a series over (Q[y, 1/y] tensor ring), ring monomial by monomial."""
    spec = s.coeffs[0].spec
    monos = sorted({m for c in s.coeffs for m in c.terms}, key=spec.order_key)
    if not monos:
        return s, s.order
    parts = {}
    M = s.order
    for mono in monos:
        comp = TruncatedSeries(
            [_clear(c.terms.get(mono, Laurent()), i) for i, c in enumerate(s.coeffs)], s.order
        )
        shifted, m_ok = shift_y(comp, k)
        parts[mono] = shifted
        M = min(M, m_ok)
    coeffs = [
        RingElement(spec, {mono: parts[mono].coeffs[i] for mono in monos}) for i in range(M + 1)
    ]
    return TruncatedSeries(coeffs, M), M


# ---------------------------------------------------------------------------
# stock pairs


def toric_projective_pair(d: int) -> PairData:
    """P^d with its d+1 coordinate hyperplanes; Omega via the Euler sequence."""
    ring = projective_space(d)
    h = ring.gen("h")
    cot = KClass([-h] * (d + 1), (), -1)
    return PairData(d, ring, (), [-h] * (d + 1), name=f"P{d}-toric", cotangent_class=cot)


def p1_pair(points: int) -> PairData:
    """P^1 with ``points`` distinct marked points."""
    ring = projective_space(1)
    h = ring.gen("h")
    return PairData(1, ring, [-2 * h], [-h] * points, name=f"P1-{points}pt")


def euler_sequence_class(d: int) -> KClass:
    """The log cotangent class of toric P^d read off from the Euler sequence: d copies of O."""
    return KClass((), (), d)
