"""Decision procedures for the three hypotheses on a pair (E, p).

The local-torsion condition is decided exactly; the big-image condition is
tested through trace witnesses ruling out every maximal-subgroup class of
GL_2(F_p), with a division-polynomial factorization as the only negative
certificate (small p); the CM condition is a table lookup on exact
j-invariants.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import sympy
from sympy import primerange

from .errors import BadReductionAtP
from .padic import kronecker_symbol, multiplicative_order, ord_p
from .ecq import (
    EllipticCurveQ,
    ReductionKind,
    canonical_minimal,
    count_points_ap,
    potentially_multiplicative_primes,
    reduction_type,
    torsion_in_cyclotomic_local,
)


class Status(enum.Enum):
    HOLDS = "HOLDS"
    FAILS = "FAILS"
    INCONCLUSIVE = "INCONCLUSIVE"


@dataclass(frozen=True)
class Verdict:
    condition: str
    status: Status
    witnesses: Tuple[Tuple[int, str], ...] = ()
    parameters: Dict = field(default_factory=dict)

    def __post_init__(self):
        if self.status == Status.FAILS and not self.witnesses:
            raise ValueError("a FAILS verdict must carry a witness")
        if self.status == Status.INCONCLUSIVE and not self.parameters:
            raise ValueError("an INCONCLUSIVE verdict must carry its budget")

    @property
    def holds(self) -> bool:
        return self.status == Status.HOLDS

    def to_json_dict(self) -> dict:
        return {
            "condition": self.condition,
            "status": self.status.value,
            "witnesses": [{"prime": p, "detail": d} for p, d in self.witnesses],
            "budget": {k: v for k, v in sorted(self.parameters.items())},
        }


def _require_good_odd_p(E: EllipticCurveQ, p: int) -> EllipticCurveQ:
    if p == 2 or not sympy.isprime(p):
        raise ValueError("p must be an odd prime")
    E_min = canonical_minimal(E)
    if ord_p(E_min.discriminant, p) != 0:
        raise BadReductionAtP(f"E has bad reduction at p = {p}")
    return E_min


# ---------------------------------------------------------------------------
# Local torsion condition.


def check_c2(E: EllipticCurveQ, p: int) -> Verdict:
    """Holds iff no potentially multiplicative prime keeps p-torsion over the
    local cyclotomic tower."""
    E_min = _require_good_odd_p(E, p)
    offenders: List[Tuple[int, str]] = []
    primes = potentially_multiplicative_primes(E_min)
    for ell in primes:
        if torsion_in_cyclotomic_local(E_min, ell, p):
            info = reduction_type(E_min, ell)
            offenders.append(
                (
                    ell,
                    f"nontrivial p-torsion locally: kind={info.kind.value}, "
                    f"gamma={info.twist_class_gamma.value}, "
                    f"local cyclotomic degree={multiplicative_order(ell, p)}",
                )
            )
    if offenders:
        return Verdict("C2", Status.FAILS, tuple(offenders), {"primes_checked": primes})
    return Verdict("C2", Status.HOLDS, (), {"primes_checked": primes})


def check_c2_sufficient(E: EllipticCurveQ, p: int) -> Verdict:
    """Sufficient-only criterion: every potentially multiplicative prime is
    non-split multiplicative, p = 3 mod 4, and -p is a residue there."""
    E_min = _require_good_odd_p(E, p)
    primes = potentially_multiplicative_primes(E_min)
    params = {"primes_checked": primes}
    if not primes:
        return Verdict("C2-sufficient", Status.HOLDS, (), params)
    if p % 4 != 3:
        return Verdict(
            "C2-sufficient",
            Status.INCONCLUSIVE,
            (),
            {**params, "reason": f"p = {p} is not 3 mod 4"},
        )
    for ell in primes:
        info = reduction_type(E_min, ell)
        if info.kind != ReductionKind.MULT_NONSPLIT:
            return Verdict(
                "C2-sufficient",
                Status.INCONCLUSIVE,
                (),
                {**params, "reason": f"reduction at {ell} is {info.kind.value}"},
            )
        if kronecker_symbol(-p, ell) != 1:
            return Verdict(
                "C2-sufficient",
                Status.INCONCLUSIVE,
                (),
                {**params, "reason": f"-{p} is not a quadratic residue mod {ell}"},
            )
    return Verdict("C2-sufficient", Status.HOLDS, (), params)


# ---------------------------------------------------------------------------
# Big-image condition via trace witnesses.

_WITNESS_CLASSES = (
    "borel",
    "split_cartan_normalizer",
    "nonsplit_cartan_normalizer",
    "exceptional",
)

DEFAULT_PRIME_BOUND = 10**4


def _division_polynomial_x(A: int, B: int, n: int):
    """n-th division polynomial of y^2 = x^3 + Ax + B as a poly in x (n odd)."""
    x, y = sympy.symbols("x y")
    f = x**3 + A * x + B
    psi = {0: sympy.Integer(0), 1: sympy.Integer(1), 2: 2 * y}
    psi[3] = 3 * x**4 + 6 * A * x**2 + 12 * B * x - A**2
    psi[4] = 4 * y * (
        x**6 + 5 * A * x**4 + 20 * B * x**3 - 5 * A**2 * x**2 - 4 * A * B * x
        - 8 * B**2 - A**3
    )

    def reduce_y(expr):
        return sympy.expand(sympy.expand(expr).subs(y**4, f * f).subs(y**2, f))

    def get(m):
        if m in psi:
            return psi[m]
        k = m // 2
        if m % 2 == 1:
            val = get(k + 2) * get(k) ** 3 - get(k - 1) * get(k + 1) ** 3
        else:
            val = sympy.cancel(
                get(k) * (get(k + 2) * get(k - 1) ** 2 - get(k - 2) * get(k + 1) ** 2) / (2 * y)
            )
        psi[m] = reduce_y(val)
        return psi[m]

    out = reduce_y(get(n))
    poly = sympy.Poly(out, x)
    return poly


def _division_poly_reducible(E_min: EllipticCurveQ, p: int) -> Optional[List[int]]:
    """Degrees of the irreducible factors of the p-division polynomial when it
    splits; None when it is irreducible (a full-orbit certificate)."""
    A, B = -27 * E_min.c4, -54 * E_min.c6
    poly = _division_polynomial_x(A, B, p)
    _, factors = poly.factor_list()
    degrees = sorted(f.degree() for f, _ in factors)
    if len(degrees) == 1 and degrees[0] == (p * p - 1) // 2:
        return None
    return degrees


def check_c1_str(E: EllipticCurveQ, p: int, prime_bound: int = DEFAULT_PRIME_BOUND) -> Verdict:
    """Mod-p surjectivity test by ruling out every maximal-subgroup class.

    A trace a_ell with nonsquare characteristic discriminant and a_ell != 0
    rules out the Borel and split-normalizer classes at once; a nonzero
    square discriminant rules out the nonsplit normalizer; a trace ratio
    a^2/ell outside {0, 1, 2, 4} and the roots of u^2 - 3u + 1 rules out the
    exceptional projective images.  The determinant is onto via the
    cyclotomic character, so full coverage certifies surjectivity mod p.
    """
    E_min = _require_good_odd_p(E, p)
    params: Dict = {"prime_bound": prime_bound}

    if p <= 7:
        degrees = _division_poly_reducible(E_min, p)
        if degrees is not None:
            return Verdict(
                "C1_str",
                Status.FAILS,
                ((p, f"division polynomial factors with degrees {degrees}"),),
                params,
            )

    found: Dict[str, Optional[Tuple[int, str]]] = {c: None for c in _WITNESS_CLASSES}
    if p == 3:
        # PGL_2(F_3) is itself the symmetric group on 4 letters; the
        # exceptional class is vacuous once det is onto.
        found["exceptional"] = (0, "vacuous for p = 3")

    disc = E_min.discriminant
    for ell in primerange(3, prime_bound + 1):
        if all(found.values()):
            break
        if ell == p or disc % ell == 0:
            continue
        a = count_points_ap(E_min, ell).a_ell % p
        D = (a * a - 4 * ell) % p
        chi = kronecker_symbol(D, p)
        if chi == -1 and found["borel"] is None:
            found["borel"] = (ell, f"a={a}, disc nonsquare mod {p}")
        if a != 0:
            if chi == -1 and found["split_cartan_normalizer"] is None:
                found["split_cartan_normalizer"] = (ell, f"a={a}, disc nonsquare mod {p}")
            if chi == 1 and found["nonsplit_cartan_normalizer"] is None:
                found["nonsplit_cartan_normalizer"] = (ell, f"a={a}, disc nonzero square mod {p}")
            if found["exceptional"] is None:
                u = a * a * pow(ell, -1, p) % p
                if u not in (0, 1, 2, 4) and (u * u - 3 * u + 1) % p != 0:
                    found["exceptional"] = (ell, f"trace ratio {u} outside exceptional set mod {p}")
    if all(found.values()):
        witnesses = tuple(
            (ell, f"{cls}: {detail}") for cls, (ell, detail) in found.items()
        )
        return Verdict("C1_str", Status.HOLDS, witnesses, params)
    missing = [c for c, w in found.items() if w is None]
    return Verdict(
        "C1_str",
        Status.INCONCLUSIVE,
        (),
        {**params, "unresolved_classes": missing},
    )


# ---------------------------------------------------------------------------
# CM condition: rational CM j-invariants with their order discriminants.

# (j, order discriminant, maximal?) for the thirteen rational CM j-invariants.
CM_J_TABLE: Tuple[Tuple[int, int, bool], ...] = (
    (0, -3, True),
    (1728, -4, True),
    (-3375, -7, True),
    (8000, -8, True),
    (-32768, -11, True),
    (54000, -12, False),
    (287496, -16, False),
    (-884736, -19, True),
    (-12288000, -27, False),
    (16581375, -28, False),
    (-884736000, -43, True),
    (-147197952000, -67, True),
    (-262537412640768000, -163, True),
)


def check_c3(E: EllipticCurveQ) -> Verdict:
    """Vacuously holds for non-CM curves; fails exactly for CM by one of the
    four non-maximal orders (discriminants -12, -16, -27, -28)."""
    j = E.j_invariant
    params = {"table": "13 rational CM j-invariants"}
    if j.denominator != 1:
        return Verdict("C3", Status.HOLDS, (), {**params, "cm": False})
    for jv, disc, maximal in CM_J_TABLE:
        if j.numerator == jv:
            if maximal:
                return Verdict(
                    "C3", Status.HOLDS, (), {**params, "cm": True, "cm_disc": disc}
                )
            return Verdict(
                "C3",
                Status.FAILS,
                ((abs(disc), f"CM by the non-maximal order of discriminant {disc}"),),
                {**params, "cm": True, "cm_disc": disc},
            )
    return Verdict("C3", Status.HOLDS, (), {**params, "cm": False})
