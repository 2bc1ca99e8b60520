"""Elliptic curves over Q with exact integer invariants.

Covers global minimal models (Laska-Kraus-Connell), reduction-type
classification at every prime, quadratic twisting through the short model,
trace-of-Frobenius by Legendre sums, and the local torsion criterion over
the cyclotomic tower at potentially multiplicative primes.
"""

from __future__ import annotations

import enum
import math
import time
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Optional, Tuple

import numpy as np
from sympy import factorint

from .errors import (
    BadReductionPrime,
    BoundExceeded,
    NotMinimalAtPrime,
    PostconditionFailed,
)
from .padic import Valuation, kronecker_symbol, multiplicative_order, ord_p

AP_PRIME_BOUND = 10**6


@dataclass(frozen=True)
class EllipticCurveQ:
    """Integral Weierstrass model [a1, a2, a3, a4, a6] with cached invariants."""

    a1: int
    a2: int
    a3: int
    a4: int
    a6: int

    def __post_init__(self):
        if self.discriminant == 0:
            raise ValueError("singular Weierstrass equation")
        assert self.c4**3 - self.c6**2 == 1728 * self.discriminant

    @property
    def ainvs(self) -> Tuple[int, int, int, int, int]:
        return (self.a1, self.a2, self.a3, self.a4, self.a6)

    @property
    def b2(self) -> int:
        return self.a1**2 + 4 * self.a2

    @property
    def b4(self) -> int:
        return 2 * self.a4 + self.a1 * self.a3

    @property
    def b6(self) -> int:
        return self.a3**2 + 4 * self.a6

    @property
    def b8(self) -> int:
        return (
            self.a1**2 * self.a6
            + 4 * self.a2 * self.a6
            - self.a1 * self.a3 * self.a4
            + self.a2 * self.a3**2
            - self.a4**2
        )

    @property
    def c4(self) -> int:
        return self.b2**2 - 24 * self.b4

    @property
    def c6(self) -> int:
        return -self.b2**3 + 36 * self.b2 * self.b4 - 216 * self.b6

    @property
    def discriminant(self) -> int:
        return (
            -self.b2**2 * self.b8
            - 8 * self.b4**3
            - 27 * self.b6**2
            + 9 * self.b2 * self.b4 * self.b6
        )

    @property
    def j_invariant(self) -> Fraction:
        return Fraction(self.c4**3, self.discriminant)

    def j_valuation(self, ell: int) -> Valuation:
        """ord_ell of the j-invariant (negative iff ell divides the denominator)."""
        j = self.j_invariant
        if j == 0:
            return ord_p(0, ell)
        return ord_p(j.numerator, ell) - ord_p(j.denominator, ell)

    def transformed(self, u: Fraction, r: Fraction, s: Fraction, t: Fraction) -> "EllipticCurveQ":
        """Apply the change of variables (u, r, s, t); result must be integral."""
        u, r, s, t = Fraction(u), Fraction(r), Fraction(s), Fraction(t)
        a1, a2, a3, a4, a6 = (Fraction(a) for a in self.ainvs)
        na1 = (a1 + 2 * s) / u
        na2 = (a2 - s * a1 + 3 * r - s * s) / u**2
        na3 = (a3 + r * a1 + 2 * t) / u**3
        na4 = (a4 - s * a3 + 2 * r * a2 - (t + r * s) * a1 + 3 * r * r - 2 * s * t) / u**4
        na6 = (a6 + r * a4 + r * r * a2 + r**3 - t * a3 - t * t - r * t * a1) / u**6
        coeffs = [na1, na2, na3, na4, na6]
        if any(c.denominator != 1 for c in coeffs):
            raise ValueError("transformation does not yield an integral model")
        return EllipticCurveQ(*(int(c) for c in coeffs))


def curve_from_ainvs(ainvs: Tuple[int, int, int, int, int]) -> EllipticCurveQ:
    return EllipticCurveQ(*ainvs)


class ReductionKind(enum.Enum):
    GOOD = "GOOD"
    MULT_SPLIT = "MULT_SPLIT"
    MULT_NONSPLIT = "MULT_NONSPLIT"
    ADDITIVE = "ADDITIVE"


class Potentially(enum.Enum):
    POT_GOOD = "POT_GOOD"
    POT_MULT = "POT_MULT"


class TwistClass(enum.Enum):
    """Square class of the twisting parameter in Q_ell^x.

    UNIT_NONSQUARE is the unramified quadratic class.  UNIT_RAMIFIED only
    occurs at ell = 2, where the units split into three nontrivial classes
    (5, 3, 7 mod 8) and only 5 mod 8 is unramified.
    """

    UNIT_SQUARE = "UNIT_SQUARE"
    UNIT_NONSQUARE = "UNIT_NONSQUARE"
    UNIFORMIZER_TIMES_SQUARE = "UNIFORMIZER_TIMES_SQUARE"
    UNIFORMIZER_TIMES_NONSQUARE = "UNIFORMIZER_TIMES_NONSQUARE"
    UNIT_RAMIFIED = "UNIT_RAMIFIED"


@dataclass(frozen=True)
class ReductionInfo:
    prime: int
    kind: ReductionKind
    potentially: Potentially
    twist_class_gamma: Optional[TwistClass] = None

    def __post_init__(self):
        if self.kind == ReductionKind.GOOD:
            assert self.potentially == Potentially.POT_GOOD


@dataclass(frozen=True)
class TraceRecord:
    prime: int
    a_ell: int
    computed_at: float

    def __post_init__(self):
        assert self.a_ell**2 <= 4 * self.prime


# ---------------------------------------------------------------------------
# Laska-Kraus-Connell minimal models.


def _kraus_ok_2(c4: int, c6: int) -> bool:
    if c6 % 4 == 3:
        return True
    return c4 % 16 == 0 and c6 % 32 in (0, 8)


def _kraus_ok_3(c6: int) -> bool:
    return ord_p(c6, 3) != 2


def _minimality_exponent(c4: int, c6: int, disc: int, ell: int) -> int:
    """Largest k such that (c4/ell^4k, c6/ell^6k, disc/ell^12k) is still an
    integral Kraus-valid triple at ell."""
    k = int(ord_p(disc, ell)) // 12
    if c4:
        k = min(k, int(ord_p(c4, ell)) // 4)
    if c6:
        k = min(k, int(ord_p(c6, ell)) // 6)
    while k > 0:
        c4k, c6k = c4 // ell ** (4 * k), c6 // ell ** (6 * k)
        if ell == 2 and not _kraus_ok_2(c4k, c6k):
            k -= 1
            continue
        if ell == 3 and not _kraus_ok_3(c6k):
            k -= 1
            continue
        break
    return k


def _curve_from_c4c6(c4: int, c6: int) -> EllipticCurveQ:
    """Reconstruct the canonical reduced integral model from Kraus-valid (c4, c6)."""
    b2 = (-c6) % 12
    if b2 > 6:
        b2 -= 12
    if (b2 * b2 - c4) % 24:
        raise PostconditionFailed("b2 lift inconsistent with c4 (Kraus violation?)")
    b4 = (b2 * b2 - c4) // 24
    num = -(b2**3) + 36 * b2 * b4 - c6
    if num % 216:
        raise PostconditionFailed("b6 not integral (Kraus violation?)")
    b6 = num // 216
    a1 = b2 % 2
    a2 = (b2 - a1) // 4
    a3 = b6 % 2
    a4 = (b4 - a1 * a3) // 2
    a6 = (b6 - a3) // 4
    E = EllipticCurveQ(a1, a2, a3, a4, a6)
    if (E.c4, E.c6) != (c4, c6):
        raise PostconditionFailed("c4/c6 reconstruction mismatch")
    return E


def minimal_model(
    E: EllipticCurveQ,
) -> Tuple[EllipticCurveQ, Tuple[int, Fraction, Fraction, Fraction]]:
    """Global minimal model and the exact transform (u, r, s, t) onto it."""
    c4, c6 = E.c4, E.c6
    u = 1
    if c4 and c6:
        g = math.gcd(abs(c4), abs(c6))
        candidates = set(factorint(g)) if g > 1 else set()
    elif c4 == 0:
        candidates = set(factorint(abs(c6)))
    else:
        candidates = set(factorint(abs(c4)))
    disc = E.discriminant
    for ell in sorted(candidates):
        k = _minimality_exponent(c4, c6, disc, ell)
        if k:
            u *= ell**k
    E_min = _curve_from_c4c6(c4 // u**4, c6 // u**6)
    # solve for the unique (r, s, t) relating E to E_min at this u
    s = Fraction(u * E_min.a1 - E.a1, 2)
    r = Fraction(u**2 * E_min.a2 - E.a2 + s * E.a1 + s * s, 3)
    t = Fraction(u**3 * E_min.a3 - E.a3 - r * E.a1, 2)
    a4_check = (E.a4 - s * E.a3 + 2 * r * E.a2 - (t + r * s) * E.a1 + 3 * r * r - 2 * s * t) / u**4
    a6_check = (E.a6 + r * E.a4 + r * r * E.a2 + r**3 - t * E.a3 - t * t - r * t * E.a1) / u**6
    if a4_check != E_min.a4 or a6_check != E_min.a6:
        raise PostconditionFailed("minimal-model transform verification failed")
    if E.discriminant % E_min.discriminant:
        raise PostconditionFailed("minimal discriminant does not divide the input's")
    return E_min, (u, r, s, t)


def is_minimal_at(E: EllipticCurveQ, ell: int) -> bool:
    return _minimality_exponent(E.c4, E.c6, E.discriminant, ell) == 0


# ---------------------------------------------------------------------------
# Reduction classification.


def _singular_point_mod_ell(E: EllipticCurveQ, ell: int) -> Tuple[int, int]:
    """The unique singular point of the reduced curve over F_ell."""
    a1, a2, a3, a4, a6 = (a % ell for a in E.ainvs)
    for x in range(ell):
        for y in range(ell):
            f = (y * y + a1 * x * y + a3 * y - (x**3 + a2 * x * x + a4 * x + a6)) % ell
            fx = (a1 * y - (3 * x * x + 2 * a2 * x + a4)) % ell
            fy = (2 * y + a1 * x + a3) % ell
            if f == 0 and fx == 0 and fy == 0:
                return x, y
    raise ValueError(f"reduced curve is nonsingular mod {ell}")


def _tangent_directions_split(E: EllipticCurveQ, ell: int) -> bool:
    """Decide split vs non-split by rationality of the node's tangent cone."""
    x0, y0 = _singular_point_mod_ell(E, ell)
    # translate the node to the origin: (u, r, s, t) = (1, x0, 0, y0)
    a1 = E.a1 % ell
    a2 = (E.a2 + 3 * x0) % ell
    # quadratic part is y^2 + a1' x y - a2' x^2; split iff it has a root in F_ell
    return any((t * t + a1 * t - a2) % ell == 0 for t in range(ell))


def _square_class_odd(value: int, ell: int) -> TwistClass:
    v = int(ord_p(value, ell))
    unit = value // ell**v
    square_unit = kronecker_symbol(unit, ell) == 1
    if v % 2 == 0:
        return TwistClass.UNIT_SQUARE if square_unit else TwistClass.UNIT_NONSQUARE
    return (
        TwistClass.UNIFORMIZER_TIMES_SQUARE
        if square_unit
        else TwistClass.UNIFORMIZER_TIMES_NONSQUARE
    )


_TWO_ADIC_CLASS_REPS = (1, 5, -1, -5, 2, 10, -2, -10)


def _square_class_2(d: int) -> TwistClass:
    v = int(ord_p(d, 2)) % 2
    unit = d // 2 ** int(ord_p(d, 2))
    um8 = unit % 8
    if v == 0:
        if um8 == 1:
            return TwistClass.UNIT_SQUARE
        if um8 == 5:
            return TwistClass.UNIT_NONSQUARE
        return TwistClass.UNIT_RAMIFIED
    return (
        TwistClass.UNIFORMIZER_TIMES_SQUARE
        if um8 == 1
        else TwistClass.UNIFORMIZER_TIMES_NONSQUARE
    )


def _classify_kind(E: EllipticCurveQ, ell: int) -> Tuple[ReductionKind, Potentially]:
    if not is_minimal_at(E, ell):
        raise NotMinimalAtPrime(f"model is not minimal at {ell}")
    if ord_p(E.discriminant, ell) == 0:
        return ReductionKind.GOOD, Potentially.POT_GOOD
    pot = Potentially.POT_MULT if E.j_valuation(ell) < 0 else Potentially.POT_GOOD
    if ord_p(E.c4, ell) == 0:
        if ell >= 5:
            split = kronecker_symbol(-E.c6, ell) == 1
        else:
            split = _tangent_directions_split(E, ell)
        kind = ReductionKind.MULT_SPLIT if split else ReductionKind.MULT_NONSPLIT
    else:
        kind = ReductionKind.ADDITIVE
    return kind, pot


def _twist_class_at_2(E: EllipticCurveQ) -> TwistClass:
    """Find the square class of the parameter whose twist is split at 2.

    Trial-twists through representatives of all eight classes of Q_2^x;
    exactly one twist acquires split multiplicative reduction.
    """
    for d in _TWO_ADIC_CLASS_REPS:
        Ed = quadratic_twist(E, d) if d != 1 else minimal_model(E)[0]
        kind, _ = _classify_kind(Ed, 2)
        if kind == ReductionKind.MULT_SPLIT:
            return _square_class_2(d)
    raise PostconditionFailed("no twist of a POT_MULT curve is split at 2")


def reduction_type(E: EllipticCurveQ, ell: int) -> ReductionInfo:
    """Classify the special fiber at ell on a model minimal there."""
    kind, pot = _classify_kind(E, ell)
    gamma = None
    if pot == Potentially.POT_MULT:
        gamma = _twist_class_at_2(E) if ell == 2 else _square_class_odd(-E.c6, ell)
    return ReductionInfo(ell, kind, pot, gamma)


# ---------------------------------------------------------------------------
# Quadratic twists.


def is_squarefree(d: int) -> bool:
    if d == 0:
        return False
    return all(e == 1 for e in factorint(abs(d)).values())


def quadratic_twist(E: EllipticCurveQ, d: int) -> EllipticCurveQ:
    """Twist by squarefree d through the short model, re-minimalized."""
    if not is_squarefree(d):
        raise ValueError("twist parameter must be squarefree and nonzero")
    A = -27 * E.c4
    B = -54 * E.c6
    twisted = EllipticCurveQ(0, 0, 0, A * d * d, B * d**3)
    E_tw, _ = minimal_model(twisted)
    if d == 1 and E_tw.j_invariant != E.j_invariant:
        raise PostconditionFailed("trivial twist changed the j-invariant")
    return E_tw


def canonical_minimal(E: EllipticCurveQ) -> EllipticCurveQ:
    return minimal_model(E)[0]


# ---------------------------------------------------------------------------
# Point counting.


def count_points_naive(E: EllipticCurveQ, ell: int) -> int:
    """#E(F_ell) by full enumeration of the affine plane, plus infinity."""
    a1, a2, a3, a4, a6 = (a % ell for a in E.ainvs)
    count = 1
    for x in range(ell):
        rhs = (x**3 + a2 * x * x + a4 * x + a6) % ell
        for y in range(ell):
            if (y * y + a1 * x * y + a3 * y) % ell == rhs:
                count += 1
    return count


def trace_naive(E: EllipticCurveQ, ell: int) -> int:
    if ord_p(E.discriminant, ell) != 0:
        raise BadReductionPrime(f"{ell} divides the discriminant")
    return ell + 1 - count_points_naive(E, ell)


def count_points_ap(
    E: EllipticCurveQ, ell: int, bound: int = AP_PRIME_BOUND
) -> TraceRecord:
    """a_ell by the Legendre sum over the completed-square model.

    For odd ell the substitution v = 2y + a1 x + a3 turns the count into
    -sum_x (4x^3 + b2 x^2 + 2 b4 x + b6 | ell).
    """
    if ell > bound:
        raise BoundExceeded(f"{ell} exceeds the configured bound {bound}")
    if ell == 2 or ell % 2 == 0:
        raise ValueError("Legendre-sum path requires an odd prime")
    if ord_p(E.discriminant, ell) != 0:
        raise BadReductionPrime(f"{ell} divides the discriminant")
    x = np.arange(ell, dtype=np.int64)
    c3, c2, c1, c0 = 4 % ell, E.b2 % ell, (2 * E.b4) % ell, E.b6 % ell
    f = (((c3 * x + c2) % ell * x + c1) % ell * x + c0) % ell
    is_square = np.zeros(ell, dtype=bool)
    is_square[(x * x) % ell] = True
    nonzero = f != 0
    s = 2 * int(is_square[f[nonzero]].sum()) - int(nonzero.sum())
    a = -s
    return TraceRecord(ell, a, time.time())


# ---------------------------------------------------------------------------
# Local torsion over the cyclotomic tower at potentially multiplicative primes.


def torsion_in_cyclotomic_local(E: EllipticCurveQ, ell: int, p: int) -> bool:
    """Whether E has nontrivial p-torsion over Q_ell adjoined all p-power
    roots of unity.

    The rigid-analytic uniformization reduces this to the twist character:
    torsion survives iff the character is trivial there, i.e. gamma is a
    square, or generates the unramified quadratic extension while the local
    cyclotomic degree ord(ell mod p) is even.
    """
    if p % 2 == 0 or p == ell:
        raise ValueError("p must be an odd prime different from ell")
    info = reduction_type(E, ell)
    if info.potentially != Potentially.POT_MULT:
        raise ValueError(f"curve is not potentially multiplicative at {ell}")
    gamma = info.twist_class_gamma
    if gamma == TwistClass.UNIT_SQUARE:
        return True
    if gamma == TwistClass.UNIT_NONSQUARE:
        return multiplicative_order(ell, p) % 2 == 0
    return False


def potentially_multiplicative_primes(E: EllipticCurveQ) -> List[int]:
    """Primes where the j-invariant has negative valuation (minimal model)."""
    E_min = canonical_minimal(E)
    return sorted(
        ell
        for ell in factorint(abs(E_min.discriminant))
        if E_min.j_valuation(ell) < 0
    )


def bad_primes(E: EllipticCurveQ) -> List[int]:
    E_min = canonical_minimal(E)
    return sorted(factorint(abs(E_min.discriminant)))


def reduction_summary(E: EllipticCurveQ) -> Dict[int, ReductionInfo]:
    E_min = canonical_minimal(E)
    return {ell: reduction_type(E_min, ell) for ell in bad_primes(E_min)}
