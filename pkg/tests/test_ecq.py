import math
import random
from fractions import Fraction

import pytest

from iwk.errors import BadReductionPrime, BoundExceeded, NotMinimalAtPrime
from iwk.ecq import (
    EllipticCurveQ,
    Potentially,
    ReductionKind,
    TwistClass,
    _tangent_directions_split,
    canonical_minimal,
    count_points_ap,
    count_points_naive,
    is_minimal_at,
    minimal_model,
    potentially_multiplicative_primes,
    quadratic_twist,
    reduction_summary,
    reduction_type,
    torsion_in_cyclotomic_local,
    trace_naive,
)
from iwk.padic import kronecker_symbol, ord_p


def test_curve_invariants(corpus):
    for label, E in corpus:
        assert E.c4**3 - E.c6**2 == 1728 * E.discriminant
    with pytest.raises(ValueError):
        EllipticCurveQ(0, 0, 0, 0, 0)


def test_5077a1_basic_data(e5077):
    assert e5077.discriminant == 5077
    assert (e5077.c4, e5077.c6) == (336, -5400)
    assert e5077.j_invariant == Fraction(336**3, 5077)


def test_minimal_model_fixed_point(e5077):
    Em, (u, r, s, t) = minimal_model(e5077)
    assert Em == e5077 and u == 1 and (r, s, t) == (0, 0, 0)


def test_minimal_model_recovers_scaled(corpus):
    for u0 in (2, 3, 6):
        for label, E in corpus[:8]:
            big = E.transformed(Fraction(1, u0), 0, 0, 0)
            assert big.discriminant == E.discriminant * u0**12
            back, (u, r, s, t) = minimal_model(big)
            assert u == u0
            assert back.j_invariant == E.j_invariant
            assert abs(back.discriminant) == abs(E.discriminant)


def test_minimal_model_idempotent(corpus):
    for label, E in corpus:
        Em, _ = minimal_model(E)
        Em2, (u, _, _, _) = minimal_model(Em)
        assert Em2 == Em and u == 1
        assert Em.j_invariant == E.j_invariant


def test_corpus_is_canonically_minimal(corpus):
    # every corpus model is the canonical reduced minimal model of itself
    for label, E in corpus:
        assert canonical_minimal(E) == E, label


def test_reduction_5077(e5077):
    info = reduction_type(e5077, 5077)
    assert info.kind == ReductionKind.MULT_NONSPLIT
    assert info.potentially == Potentially.POT_MULT
    assert info.twist_class_gamma == TwistClass.UNIT_NONSQUARE
    assert reduction_type(e5077, 2).kind == ReductionKind.GOOD
    assert reduction_type(e5077, 3).kind == ReductionKind.GOOD


def test_reduction_additive_potentially_good():
    # y^2 = x^3 - 25x: additive at 5 with integral j
    E = EllipticCurveQ(0, 0, 0, -25, 0)
    assert is_minimal_at(E, 5)
    info = reduction_type(E, 5)
    assert info.kind == ReductionKind.ADDITIVE
    assert info.potentially == Potentially.POT_GOOD
    assert info.twist_class_gamma is None


def test_reduction_requires_minimality(e5077):
    big = e5077.transformed(Fraction(1, 5), 0, 0, 0)
    with pytest.raises(NotMinimalAtPrime):
        reduction_type(big, 5)


def test_split_detection_routes_agree(corpus):
    # tangent-direction test vs the -c6 residue criterion at odd
    # multiplicative primes (the production path uses -c6 for ell >= 5)
    for label, E in corpus:
        for ell, info in reduction_summary(E).items():
            if info.kind not in (ReductionKind.MULT_SPLIT, ReductionKind.MULT_NONSPLIT):
                continue
            if ell > 200 or ell == 2:
                continue
            tangent = _tangent_directions_split(canonical_minimal(E), ell)
            assert tangent == (info.kind == ReductionKind.MULT_SPLIT), (label, ell)
            if ell >= 5:
                assert (kronecker_symbol(-E.c6, ell) == 1) == tangent


def test_potentially_multiplicative_iff_negative_j_valuation(corpus):
    for label, E in corpus:
        for ell, info in reduction_summary(E).items():
            assert (info.potentially == Potentially.POT_MULT) == (
                E.j_valuation(ell) < 0
            ), (label, ell)


def test_quadratic_twist_identity_and_involution(corpus):
    for label, E in corpus[:10]:
        assert quadratic_twist(E, 1) == canonical_minimal(E)
        for d in (-1, 2, -3, 5):
            twice = quadratic_twist(quadratic_twist(E, d), d)
            assert twice == canonical_minimal(E), (label, d)


def test_twist_preserves_j(corpus):
    for label, E in corpus[:10]:
        for d in (-1, 5, -55):
            assert quadratic_twist(E, d).j_invariant == E.j_invariant


def test_twist_c6_square_class():
    rng = random.Random(51)
    E = EllipticCurveQ(0, 0, 1, -7, 6)
    for d in (-1, 2, -3, 5, -55, 91):
        Et = quadratic_twist(E, d)
        prod = Et.c6 * E.c6 * d
        assert prod > 0 and math.isqrt(prod) ** 2 == prod, d


def test_twist_self_twist_j_1728():
    E = EllipticCurveQ(0, 0, 0, 1, 0)
    assert quadratic_twist(E, -1) == E


def test_twist_rejects_bad_parameter(e5077):
    with pytest.raises(ValueError):
        quadratic_twist(e5077, 12)
    with pytest.raises(ValueError):
        quadratic_twist(e5077, 0)


def test_reduction_invariant_under_double_twist(e5077):
    for d in (-1, 5):
        for ell in (2, 3, 5077):
            a = reduction_type(e5077, ell)
            b = reduction_type(quadratic_twist(quadratic_twist(e5077, d), d), ell)
            assert a == b


def test_count_points_examples(e5077):
    E = EllipticCurveQ(0, 0, 0, 1, 0)
    assert trace_naive(E, 3) == 0  # supersingular: 4 points over F_3
    assert count_points_naive(E, 3) == 4
    assert trace_naive(e5077, 2) == -2  # full-model enumeration over F_2
    rec = count_points_ap(e5077, 5)
    assert rec.a_ell == trace_naive(e5077, 5)


def test_count_points_errors(e5077):
    with pytest.raises(BadReductionPrime):
        count_points_ap(e5077, 5077)
    with pytest.raises(BoundExceeded):
        count_points_ap(e5077, 11, bound=7)
    with pytest.raises(ValueError):
        count_points_ap(e5077, 2)


def test_count_points_cross_check(corpus):
    from sympy import primerange

    for label, E in corpus[:6]:
        disc = E.discriminant
        for ell in primerange(3, 50):
            if disc % ell == 0:
                continue
            assert count_points_ap(E, ell).a_ell == trace_naive(E, ell), (label, ell)


def test_hasse_bound(corpus):
    from sympy import primerange

    for label, E in corpus:
        for ell in primerange(3, 200):
            if E.discriminant % ell == 0:
                continue
            a = count_points_ap(E, ell).a_ell
            assert a * a <= 4 * ell


def test_torsion_local_split_always_true(corpus):
    for label, E in corpus:
        for ell, info in reduction_summary(E).items():
            if info.kind == ReductionKind.MULT_SPLIT:
                for p in (3, 5, 7):
                    if p != ell:
                        assert torsion_in_cyclotomic_local(E, ell, p), (label, ell, p)


def test_torsion_local_5077(e5077):
    assert torsion_in_cyclotomic_local(e5077, 5077, 7) is False


def test_torsion_local_even_degree_nonsplit():
    # build a curve non-split at 19 and take p = 5: ord(19 mod 5) = 2 is even,
    # so the unramified quadratic lives in the cyclotomic tower
    base = EllipticCurveQ(0, 1, 1, -9, -15)  # multiplicative at 19
    info = reduction_type(base, 19)
    assert info.kind in (ReductionKind.MULT_SPLIT, ReductionKind.MULT_NONSPLIT)
    if info.kind == ReductionKind.MULT_SPLIT:
        d = next(
            d
            for d in (-1, 2, 3, -2, 7, -7, 13)
            if kronecker_symbol(d, 19) == -1
        )
        E = quadratic_twist(base, d)
    else:
        E = base
    assert reduction_type(E, 19).kind == ReductionKind.MULT_NONSPLIT
    from iwk.padic import multiplicative_order

    assert multiplicative_order(19, 5) == 2
    assert torsion_in_cyclotomic_local(E, 19, 5) is True


def test_torsion_local_nonsplit_residue_criterion(corpus):
    # non-split at ell, p = 3 mod 4, -p a residue mod ell: always torsion-free
    from iwk.padic import multiplicative_order

    for label, E in corpus:
        for ell, info in reduction_summary(E).items():
            if info.kind != ReductionKind.MULT_NONSPLIT or ell == 2:
                continue
            for p in (3, 7, 11):
                if p == ell or E.discriminant % p == 0:
                    continue
                if p % 4 == 3 and kronecker_symbol(-p, ell) == 1:
                    assert not torsion_in_cyclotomic_local(E, ell, p), (label, ell, p)


def test_torsion_local_precondition(e5077):
    with pytest.raises(ValueError):
        torsion_in_cyclotomic_local(e5077, 2, 7)  # good reduction at 2


def test_potentially_multiplicative_primes(e5077, corpus):
    assert potentially_multiplicative_primes(e5077) == [5077]
    d = dict(corpus)
    assert potentially_multiplicative_primes(d["27a1"]) == []
    assert potentially_multiplicative_primes(d["14a1"]) == [2, 7]


def _smooth_point_count(E, ell):
    a = [x % ell for x in E.ainvs]
    smooth = 1  # infinity
    for x in range(ell):
        for y in range(ell):
            f = (
                y * y + a[0] * x * y + a[2] * y
                - (x**3 + a[1] * x * x + a[3] * x + a[4])
            ) % ell
            if f:
                continue
            fx = (a[0] * y - (3 * x * x + 2 * a[1] * x + a[3])) % ell
            fy = (2 * y + a[0] * x + a[2]) % ell
            if fx or fy:
                smooth += 1
    return smooth


def test_split_nonsplit_by_smooth_point_count(corpus):
    # a split fiber keeps ell - 1 smooth points, a nonsplit one ell + 1;
    # a third route independent of tangent directions and residue symbols
    checked = 0
    for label, E in corpus:
        for ell, info in reduction_summary(E).items():
            if ell > 50:
                continue
            if info.kind == ReductionKind.MULT_SPLIT:
                assert _smooth_point_count(canonical_minimal(E), ell) == ell - 1, (label, ell)
                checked += 1
            elif info.kind == ReductionKind.MULT_NONSPLIT:
                assert _smooth_point_count(canonical_minimal(E), ell) == ell + 1, (label, ell)
                checked += 1
            elif info.kind == ReductionKind.ADDITIVE:
                assert _smooth_point_count(canonical_minimal(E), ell) == ell, (label, ell)
                checked += 1
    assert checked >= 15


def _class_representative(cls, ell):
    """Squarefree integer in the given square class of Q_ell^x (odd ell)."""
    if cls == TwistClass.UNIT_SQUARE:
        return 1
    if cls == TwistClass.UNIT_NONSQUARE:
        d = 2
        while kronecker_symbol(d, ell) != -1 or d == ell:
            d += 1
        return d
    if cls == TwistClass.UNIFORMIZER_TIMES_SQUARE:
        return ell
    d = 2
    while kronecker_symbol(d, ell) != -1:
        d += 1
    return ell * d


def test_gamma_class_round_trip(corpus):
    # twisting by a representative of the reported class must yield split
    # multiplicative reduction: the defining property of gamma
    from sympy import factorint

    checked = 0
    for label, E in corpus:
        variants = [canonical_minimal(E)]
        for d in (-1, 3):
            variants.append(quadratic_twist(E, d))
        for V in variants:
            for ell, info in reduction_summary(V).items():
                if info.potentially != Potentially.POT_MULT or ell == 2:
                    continue
                rep = _class_representative(info.twist_class_gamma, ell)
                if any(e > 1 for e in factorint(abs(rep)).values()):
                    continue
                W = V if rep == 1 else quadratic_twist(V, rep)
                assert reduction_type(W, ell).kind == ReductionKind.MULT_SPLIT, (
                    label,
                    ell,
                    info.twist_class_gamma,
                )
                checked += 1
    assert checked >= 40


def test_twist_class_at_2():
    # 14a1 is non-split multiplicative at 2: gamma is a nontrivial unit class
    E = EllipticCurveQ(1, 0, 1, 4, -6)
    info = reduction_type(E, 2)
    assert info.kind == ReductionKind.MULT_NONSPLIT
    assert info.twist_class_gamma in (
        TwistClass.UNIT_NONSQUARE,
        TwistClass.UNIT_RAMIFIED,
    )
    # 26b1 is split at 2
    E26 = EllipticCurveQ(1, -1, 1, -3, 3)
    assert reduction_type(E26, 2).twist_class_gamma == TwistClass.UNIT_SQUARE
