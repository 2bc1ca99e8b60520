"""Finitely generated Z_p-module calculus over the truncated ring Z/p^N.

Modules are held in structure-theorem normal form (free rank plus a
descending list of exponents).  Fitting-ideal valuations come with three
independent routes: the closed formula on normal forms, brute-force
minimization over element tuples, and exact minor enumeration on a
presentation matrix.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .errors import BudgetExceeded, NotASubmodule, PrecisionExhausted
from .padic import INFINITY, Valuation, ord_p, teichmuller, _check_prime


@dataclass(frozen=True)
class FgZpModule:
    """Z_p^r + sum of Z/p^{e_j} with e_1 >= e_2 >= ... >= e_s >= 1."""

    p: int
    free_rank: int = 0
    exponents: Tuple[int, ...] = ()

    def __post_init__(self):
        _check_prime(self.p)
        if self.free_rank < 0:
            raise ValueError("free rank must be >= 0")
        exps = tuple(self.exponents)
        if any(e < 1 for e in exps):
            raise ValueError("exponents must be >= 1; drop trivial factors")
        if list(exps) != sorted(exps, reverse=True):
            raise ValueError("exponents must be non-increasing")
        object.__setattr__(self, "exponents", exps)

    @property
    def is_torsion(self) -> bool:
        return self.free_rank == 0

    def torsion_order_valuation(self) -> int:
        return sum(self.exponents)

    def torsion_size(self) -> int:
        return self.p ** sum(self.exponents)


@dataclass(frozen=True)
class Presentation:
    """Relation matrix over Z/p^N; rows index generators, columns relations."""

    p: int
    precision: int
    matrix: Tuple[Tuple[int, ...], ...]

    def __post_init__(self):
        _check_prime(self.p)
        if self.precision < 1:
            raise ValueError("precision must be >= 1")
        mod = self.p**self.precision
        rows = tuple(tuple(x % mod for x in row) for row in self.matrix)
        if rows and any(len(r) != len(rows[0]) for r in rows):
            raise ValueError("ragged matrix")
        object.__setattr__(self, "matrix", rows)

    @property
    def generators(self) -> int:
        return len(self.matrix)

    @property
    def relations(self) -> int:
        return len(self.matrix[0]) if self.matrix else 0


@dataclass(frozen=True)
class FittingIdeal:
    """Ideal p^v Z_p; v = 0 is the unit ideal, INFINITY the zero ideal."""

    generator_valuation: Valuation

    @property
    def is_zero_ideal(self) -> bool:
        return self.generator_valuation == INFINITY

    @property
    def is_unit_ideal(self) -> bool:
        return self.generator_valuation == 0


@dataclass(frozen=True)
class DeltaCharacter:
    """Power omega^index of the Teichmuller character of (Z/p)^x."""

    p: int
    index: int

    def __post_init__(self):
        _check_prime(self.p)
        if not 0 <= self.index <= self.p - 2:
            raise ValueError("character index out of range")

    @property
    def is_trivial(self) -> bool:
        return self.index == 0

    def value(self, a: int, precision: int) -> int:
        """chi(a) as a residue mod p^precision."""
        t = teichmuller(a % self.p, self.p, precision).value
        return pow(t, self.index, self.p**precision)


def all_characters(p: int) -> List[DeltaCharacter]:
    return [DeltaCharacter(p, k) for k in range(p - 1)]


# ---------------------------------------------------------------------------
# Matrix utilities over Z/mod (plain integer lists, exact).


def identity_matrix(n: int) -> List[List[int]]:
    return [[1 if i == j else 0 for j in range(n)] for i in range(n)]


def matmul_mod(A: Sequence[Sequence[int]], B: Sequence[Sequence[int]], mod: int) -> List[List[int]]:
    n, k = len(A), len(A[0]) if A else 0
    m = len(B[0]) if B else 0
    out = [[0] * m for _ in range(n)]
    for i in range(n):
        Ai = A[i]
        for j in range(m):
            out[i][j] = sum(Ai[t] * B[t][j] for t in range(k)) % mod
    return out


def bareiss_det(rows: Sequence[Sequence[int]]) -> int:
    """Exact integer determinant by fraction-free elimination."""
    a = [list(r) for r in rows]
    n = len(a)
    if n == 0:
        return 1
    sign = 1
    prev = 1
    for k in range(n - 1):
        if a[k][k] == 0:
            for i in range(k + 1, n):
                if a[i][k] != 0:
                    a[k], a[i] = a[i], a[k]
                    sign = -sign
                    break
            else:
                return 0
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) // prev
        prev = a[k][k]
    return sign * a[-1][-1]


def is_invertible_mod(A: Sequence[Sequence[int]], p: int) -> bool:
    return bareiss_det(A) % p != 0


# ---------------------------------------------------------------------------
# Smith normal form over the local ring Z/p^N.


def smith_normal_form(
    P: Presentation,
) -> Tuple[List[Valuation], Tuple[List[List[int]], List[List[int]]]]:
    """Diagonalize U*A*V = D by pivoting on minimal-valuation entries.

    Returns one valuation per generator slot, non-decreasing; a slot whose
    divisor vanishes mod p^N is reported INFINITY (the caller's precision
    contract makes residue 0 mean the zero divisor).
    """
    p, N = P.p, P.precision
    mod = p**N
    n, m = P.generators, P.relations
    A = [list(row) for row in P.matrix]
    U = identity_matrix(n)
    V = identity_matrix(m)

    divisors: List[Valuation] = []
    for k in range(min(n, m)):
        # locate a minimal-valuation nonzero entry in the remaining block
        best = None
        best_v = None
        for i in range(k, n):
            for j in range(k, m):
                x = A[i][j]
                if x:
                    v = ord_p(x, p)
                    if best_v is None or v < best_v:
                        best, best_v = (i, j), v
                        if v == 0:
                            break
            if best_v == 0:
                break
        if best is None:
            break
        bi, bj = best
        if bi != k:
            A[k], A[bi] = A[bi], A[k]
            U[k], U[bi] = U[bi], U[k]
        if bj != k:
            for row in A:
                row[k], row[bj] = row[bj], row[k]
            for row in V:
                row[k], row[bj] = row[bj], row[k]
        v = best_v
        pv = p**v
        unit_inv = pow(A[k][k] // pv, -1, mod)
        for j in range(k, m):
            A[k][j] = A[k][j] * unit_inv % mod
        for j in range(n):
            U[k][j] = U[k][j] * unit_inv % mod
        # pivot is now exactly p^v; clear its column and row
        for i in range(k + 1, n):
            if A[i][k]:
                t = A[i][k] // pv
                for j in range(k, m):
                    A[i][j] = (A[i][j] - t * A[k][j]) % mod
                for j in range(n):
                    U[i][j] = (U[i][j] - t * U[k][j]) % mod
        for j in range(k + 1, m):
            if A[k][j]:
                t = A[k][j] // pv
                for i in range(n):
                    A[i][j] = (A[i][j] - t * A[i][k]) % mod
                for i in range(m):
                    V[i][j] = (V[i][j] - t * V[i][k]) % mod
        divisors.append(v)

    while len(divisors) < n:
        divisors.append(INFINITY)
    return divisors, (U, V)


def module_from_presentation(P: Presentation) -> FgZpModule:
    """Structure-theorem normal form of the cokernel of P."""
    divisors, _ = smith_normal_form(P)
    free_rank = sum(1 for v in divisors if v == INFINITY)
    exponents = sorted((int(v) for v in divisors if v != INFINITY and v > 0), reverse=True)
    return FgZpModule(P.p, free_rank, tuple(exponents))


def phi0_of_cokernel(P: Presentation) -> int:
    """ord_p of the (always finite) cokernel order over the ring Z/p^N.

    Divisors cap at N, so a residue-zero divisor contributes exactly N and
    no precision ambiguity arises.
    """
    divisors, _ = smith_normal_form(P)
    N = P.precision
    return sum(N if v == INFINITY else min(int(v), N) for v in divisors)


def diagonal_presentation(M: FgZpModule, precision: Optional[int] = None) -> Presentation:
    """Canonical presentation diag(p^{e_1},...,p^{e_s}) plus relation-free rows.

    The default precision exceeds the sum of the exponents so that every
    minor determinant stays visible."""
    if precision is None:
        precision = sum(M.exponents) + 1
    if M.exponents and precision <= max(M.exponents):
        raise PrecisionExhausted("precision must exceed the largest exponent")
    s = len(M.exponents)
    rows = []
    for i in range(s):
        rows.append(tuple(M.p ** M.exponents[i] if j == i else 0 for j in range(s)))
    for _ in range(M.free_rank):
        rows.append(tuple(0 for _ in range(s)))
    return Presentation(M.p, precision, tuple(rows))


# ---------------------------------------------------------------------------
# Fitting ideals: formula route, minor route, brute-force route.


def fitting_ideal(M: FgZpModule, i: int) -> FittingIdeal:
    """Closed form on the normal form: zero ideal below the free rank, then
    tail products of the invariant factors, then the unit ideal."""
    if i < 0:
        raise ValueError("i must be >= 0")
    r, exps = M.free_rank, M.exponents
    s = len(exps)
    if i < r:
        return FittingIdeal(INFINITY)
    if i < s + r:
        return FittingIdeal(sum(exps[i - r :]))
    return FittingIdeal(0)


def phi(M: FgZpModule, i: int) -> Valuation:
    """Valuation of the i-th Fitting ideal."""
    return fitting_ideal(M, i).generator_valuation


def fitting_from_minors(P: Presentation, i: int) -> FittingIdeal:
    """Minimal valuation over all (n-i) x (n-i) minors, computed exactly over Z.

    Entries lift canonically; a minor determinant is trusted only when its
    valuation stays below the precision N.
    """
    if i < 0:
        raise ValueError("i must be >= 0")
    n, m = P.generators, P.relations
    if i >= n:
        return FittingIdeal(0)
    k = n - i
    if k > m:
        # not enough relation columns to form a single minor: the zero ideal
        return FittingIdeal(INFINITY)
    if n > 6:
        raise BudgetExceeded("minor enumeration capped at 6 generators")
    p, N = P.p, P.precision
    best: Valuation = INFINITY
    for rows in itertools.combinations(range(n), k):
        for cols in itertools.combinations(range(m), k):
            det = bareiss_det([[P.matrix[r][c] for c in cols] for r in rows])
            v = ord_p(det, p)
            if v < best:
                best = v
                if best == 0:
                    return FittingIdeal(0)
    if best >= N:
        raise PrecisionExhausted(
            "all minors vanish mod p^N; cannot certify the zero ideal"
        )
    return FittingIdeal(best)


def _augmented_snf(
    divisors: Sequence[int], column: Sequence[int], p: int, precision: int
) -> Tuple[List[int], List[List[int]]]:
    """SNF data of [diag(p^d) | c]: new divisors (all finite) and the left
    transform, for quotienting a finite module by one more element."""
    s = len(divisors)
    rows = tuple(
        tuple([p ** divisors[i] if j == i else 0 for j in range(s)] + [column[i] % p**precision])
        for i in range(s)
    )
    pres = Presentation(p, precision, rows)
    divs, (U, _) = smith_normal_form(pres)
    out = [min(int(v), precision) if v != INFINITY else precision for v in divs]
    return out, U


def phi_bruteforce(M: FgZpModule, i: int, budget: int = 10**6) -> Valuation:
    """Minimum of ord_p #(M / <a_1,...,a_i>) over all i-tuples of elements.

    Exhaustive and formula-free: each tuple's quotient order comes from SNF
    of the presentation augmented by the chosen columns, built up one
    element at a time.  The innermost element loop is vectorized.
    """
    if not M.is_torsion:
        raise ValueError("brute force requires a torsion module")
    if i < 0:
        raise ValueError("i must be >= 0")
    if i > 3:
        raise BudgetExceeded("brute force supports i <= 3")
    exps = list(M.exponents)
    s = len(exps)
    p = M.p
    size = p ** sum(exps)
    if i >= 1 and size**i > budget:
        raise BudgetExceeded(f"#M^i = {size}^{i} exceeds budget {budget}")

    # quotient of the zero module is trivial for any tuple
    if s == 0:
        return 0

    work_prec = max(exps) + 1
    base_divs, _ = smith_normal_form(diagonal_presentation(M, work_prec))
    base = [min(int(v), work_prec) for v in base_divs[:s]]

    if i == 0:
        return sum(base)

    # all elements of M as coordinate columns, shape (s, #M)
    grids = np.meshgrid(*[np.arange(p**e, dtype=np.int64) for e in exps], indexing="ij")
    elements = np.stack([g.reshape(-1) for g in grids])

    vtab = np.empty(p**work_prec, dtype=np.int64)
    vtab[0] = work_prec
    for r in range(1, p**work_prec):
        x, v = r, 0
        while x % p == 0:
            x //= p
            v += 1
        vtab[r] = v

    def last_level(divs: Sequence[int], W: np.ndarray) -> int:
        total = sum(divs)
        coords = (W @ elements) % np.array([[p**d] for d in divs], dtype=np.int64)
        vals = vtab[coords]
        elt_ord = np.maximum(np.array(divs, dtype=np.int64)[:, None] - vals, 0).max(axis=0)
        return int(total - elt_ord.max())

    def descend(divs: Sequence[int], W: np.ndarray, remaining: int) -> int:
        if remaining == 1:
            return last_level(divs, W)
        best = None
        for col in range(elements.shape[1]):
            c = [int(x) for x in (W @ elements[:, col]) % p**work_prec]
            new_divs, U = _augmented_snf(divs, c, p, work_prec)
            W2 = np.array(matmul_mod(U, W.tolist(), p**work_prec), dtype=np.int64)
            sub = descend(new_divs, W2, remaining - 1)
            if best is None or sub < best:
                best = sub
        return best

    return descend(base, np.eye(s, dtype=np.int64), i)


# ---------------------------------------------------------------------------
# Structural operations.


def dual(M: FgZpModule) -> FgZpModule:
    """Pontryagin dual of a finite module: same invariant factors."""
    if not M.is_torsion:
        raise ValueError("dual is defined here for torsion modules only")
    return FgZpModule(M.p, 0, M.exponents)


def direct_sum(M1: FgZpModule, M2: FgZpModule) -> FgZpModule:
    if M1.p != M2.p:
        raise ValueError("mixed primes")
    exps = tuple(sorted(M1.exponents + M2.exponents, reverse=True))
    return FgZpModule(M1.p, M1.free_rank + M2.free_rank, exps)


def quotient_by_submodule(M: FgZpModule, N: FgZpModule) -> FgZpModule:
    """Quotient by the canonical componentwise embedding of N into M.

    N embeds iff, after aligning sorted invariants, each of N's exponents is
    dominated by M's and the free ranks compare.
    """
    if M.p != N.p:
        raise ValueError("mixed primes")
    if N.free_rank > M.free_rank:
        raise NotASubmodule("free rank too large")
    em, en = list(M.exponents), list(N.exponents)
    if len(en) > len(em):
        raise NotASubmodule("too many cyclic factors")
    en += [0] * (len(em) - len(en))
    if any(f > e for e, f in zip(em, en)):
        raise NotASubmodule("cyclic factor does not embed")
    exps = tuple(sorted((e - f for e, f in zip(em, en) if e - f > 0), reverse=True))
    return FgZpModule(M.p, M.free_rank - N.free_rank, exps)


# ---------------------------------------------------------------------------
# Character decomposition of Z/p^N[Delta]-modules, Delta = (Z/p)^x.


@dataclass(frozen=True)
class GroupRingPresentation:
    """Presentation over Z/p^N[Delta]; an entry is the coefficient tuple
    (c_1, ..., c_{p-1}) of sum_a c_a * delta_a indexed by residues a."""

    p: int
    precision: int
    entries: Tuple[Tuple[Tuple[int, ...], ...], ...] = field(default=())

    def __post_init__(self):
        _check_prime(self.p)
        if self.p == 2:
            raise ValueError("Delta is trivial for p = 2; decomposition undefined")
        mod = self.p**self.precision
        ents = tuple(
            tuple(tuple(c % mod for c in cell) for cell in row) for row in self.entries
        )
        for row in ents:
            for cell in row:
                if len(cell) != self.p - 1:
                    raise ValueError("entry length must be p-1")
        object.__setattr__(self, "entries", ents)

    @property
    def generators(self) -> int:
        return len(self.entries)

    @property
    def relations(self) -> int:
        return len(self.entries[0]) if self.entries else 0

    def underlying_presentation(self) -> Presentation:
        """Forget the Delta-action: expand entries by the regular representation."""
        p, N = self.p, self.precision
        d = p - 1
        n, m = self.generators, self.relations
        rows = [[0] * (m * d) for _ in range(n * d)]
        for i in range(n):
            for j in range(m):
                cell = self.entries[i][j]
                for a in range(1, p):
                    inv_a = pow(a, -1, p)
                    for b in range(1, p):
                        # coefficient of delta_b in (entry * delta_a)
                        rows[i * d + (b - 1)][j * d + (a - 1)] = cell[(b * inv_a) % p - 1]
        return Presentation(p, N, tuple(tuple(r) for r in rows))


def delta_decompose(P: GroupRingPresentation, chi: DeltaCharacter) -> Presentation:
    """chi-component presentation: evaluate every group-ring entry at chi.

    Tensoring the presentation with Z_p(chi) over Z_p[Delta] sends
    sum_a c_a delta_a to sum_a c_a chi(a); exactness on the right keeps the
    generators and relations aligned.
    """
    p, N = P.p, P.precision
    if chi.p != p:
        raise ValueError("character prime mismatch")
    mod = p**N
    chi_vals = {a: chi.value(a, N) for a in range(1, p)}
    rows = tuple(
        tuple(sum(cell[a - 1] * chi_vals[a] for a in range(1, p)) % mod for cell in row)
        for row in P.entries
    )
    return Presentation(p, N, rows)
