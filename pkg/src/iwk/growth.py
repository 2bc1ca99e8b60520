"""Asymptotic growth classes mu_hat * p^n + lambda_hat * n + O(1).

The dominance order is decidable on this two-parameter family because p^n
beats every linear term: comparison is lexicographic in (mu_hat, lambda_hat).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple, Union

from .padic import _check_prime
from .zpmod import DeltaCharacter, FgZpModule, direct_sum, phi

ALL_CHARACTERS = "ALL"


class Comparison(enum.Enum):
    EQUIVALENT = "EQUIVALENT"
    A_DOMINATES = "A_DOMINATES"
    B_DOMINATES = "B_DOMINATES"


@dataclass(frozen=True)
class GrowthClass:
    p: int
    mu_hat: Fraction
    lambda_hat: Fraction
    label: str = ""

    def __post_init__(self):
        _check_prime(self.p)
        mu = Fraction(self.mu_hat)
        lam = Fraction(self.lambda_hat)
        if mu < 0:
            raise ValueError("mu_hat must be non-negative")
        if mu.denominator not in (1, 2):
            raise ValueError("mu_hat denominator must be 1 or 2")
        object.__setattr__(self, "mu_hat", mu)
        object.__setattr__(self, "lambda_hat", lam)

    def to_json_dict(self) -> dict:
        return {
            "p": self.p,
            "mu_hat": str(self.mu_hat),
            "lambda_hat": str(self.lambda_hat),
            "provenance": self.label,
        }


@dataclass(frozen=True)
class IwasawaInvariants:
    """mu and lambda of a torsion Iwasawa module; always ingested, with the
    external provenance recorded verbatim."""

    p: int
    mu: int
    lam: int
    character: Union[DeltaCharacter, str] = ALL_CHARACTERS
    source: str = ""

    def __post_init__(self):
        _check_prime(self.p)
        if self.mu < 0 or self.lam < 0:
            raise ValueError("invariants must be non-negative")


def compare(a: GrowthClass, b: GrowthClass) -> Comparison:
    """Dominance order: exact lexicographic comparison on (mu_hat, lambda_hat)."""
    if a.p != b.p:
        raise ValueError("growth classes at different primes are incomparable")
    if (a.mu_hat, a.lambda_hat) == (b.mu_hat, b.lambda_hat):
        return Comparison.EQUIVALENT
    if (a.mu_hat, a.lambda_hat) > (b.mu_hat, b.lambda_hat):
        return Comparison.A_DOMINATES
    return Comparison.B_DOMINATES


def class_number_growth(inv: IwasawaInvariants) -> GrowthClass:
    """Doubling rule: the class-number exponent grows like 2(mu*p^n + lambda*n)."""
    return GrowthClass(
        inv.p,
        Fraction(2 * inv.mu),
        Fraction(2 * inv.lam),
        label=f"2*(mu*p^n + lambda*n) from {inv.source or 'ingested invariants'}",
    )


def doubling_discrepancy_note(p: int, mu: int, lam: int) -> Optional[str]:
    """Known worked-example mismatch for curve 5077.a1 at p = 7.

    The published example quotes linear growth 2n for the trivial-character
    class-number exponent, while the doubling rule with (mu, lambda) = (0, 2)
    yields 4n.  Both are reported; neither is silently adopted.
    """
    if (p, mu, lam) == (7, 0, 2):
        return (
            "worked example for 5077.a1, p=7 quotes 2n but the doubling rule "
            "gives 4n; computed value kept, discrepancy flagged"
        )
    return None


def euler_phi_prime_power(p: int, m: int) -> int:
    if m < 0:
        raise ValueError("m must be >= 0")
    return 1 if m == 0 else (p - 1) * p ** (m - 1)


def mordell_weil_bound(r_m: int, m: int, p: int) -> Tuple[int, GrowthClass]:
    """Lower bound lambda >= r_m - phi(p^m) and the induced linear growth class.

    Negative bounds are vacuous and clamp to the zero class.
    """
    _check_prime(p)
    if r_m < 0 or m < 0:
        raise ValueError("rank and level must be >= 0")
    lambda_lower = r_m - euler_phi_prime_power(p, m)
    clamped = max(lambda_lower, 0)
    label = f"2*max(r_{m} - phi(p^{m}), 0)*n lower bound"
    if lambda_lower < 0:
        label += " (vacuous: negative coefficient clamped to 0)"
    return lambda_lower, GrowthClass(p, Fraction(0), Fraction(2 * clamped), label)


@dataclass(frozen=True)
class TransferReport:
    i: int
    bound: int
    deviations: Tuple[int, ...] = ()
    failures: Tuple[int, ...] = ()

    @property
    def ok(self) -> bool:
        return not self.failures


def phi_i_transfer(
    selmer_side: Sequence[FgZpModule],
    class_side: Sequence[FgZpModule],
    i: int,
    bound: int,
) -> TransferReport:
    """Check |Phi_i(selmer[n] doubled) - Phi_i(class[n])| <= bound per level.

    Synthetic-data validation of bounded-kernel transfer; failures are
    reported, never raised.
    """
    if len(selmer_side) != len(class_side):
        raise ValueError("windows must have equal length")
    deviations: List[int] = []
    failures: List[int] = []
    for n, (S, A) in enumerate(zip(selmer_side, class_side)):
        if not (S.is_torsion and A.is_torsion):
            raise ValueError("transfer check requires torsion modules")
        doubled = direct_sum(S, S)
        d = phi(doubled, i) - phi(A, i)
        deviations.append(int(d))
        if abs(d) > bound:
            failures.append(n)
    return TransferReport(i, bound, tuple(deviations), tuple(failures))
