"""Exact finite-N expectations that validate every limit formula.

The trace mean at finite N is a polynomial in N: summing over partitions,
each graph contributes a falling factorial (the injective labelings) times a
product of exact entry moments.  Fluctuation covariances extend this to
cross partitions of two graphs' vertex sets with true-expectation centering.
Circulant expectations are enumerated directly over index tuples satisfying
the modular constraint.

Everything here is big-integer rational arithmetic; no floats.  Moments of a
sparse law carry explicit powers of sqrt(N) (E[x^k] = q E[xi^k] N^(k/2-1));
they are tracked in half-integer exponents and must cancel to integer powers
by evaluation time (they always do for the laws shipped here, whose odd
moments vanish).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import product
from typing import Union

from .ensembles import GaussianLaw
from .graphs import TraceGraph, graph_of_partition, merge_under_cross_partition, stats
from .partitions import (
    enumerate_cross_partitions,
    enumerate_set_partitions,
    falling_factorial,
)
from .profiles import SparsePairLaw, SparseScalarLaw

ORACLE_MODELS = ("elliptic", "iid")

MAX_N_POLY = 10**6
MAX_K_MEAN = 6
MAX_N_CIRC = 15
MAX_K_CIRC = 6
MAX_N_FLUCT = 8
MAX_K_FLUCT = 3

OracleLaw = Union[SparsePairLaw, SparseScalarLaw, GaussianLaw]

_Scaled = tuple[Fraction, int]  # (coefficient, half-power of N): value = c * N^(h/2)


def _eval_scaled(coeff: Fraction, half: int, n: int) -> Fraction:
    if coeff == 0:
        return Fraction(0)
    if half % 2 == 0:
        return coeff * Fraction(n) ** (half // 2)
    r = math.isqrt(n)
    if r * r != n:
        raise ValueError(
            f"exact value involves N^({half}/2) at non-square N={n}; "
            "choose a law with vanishing odd moments or a square N"
        )
    return coeff * Fraction(r) ** half


@dataclass(frozen=True)
class ExactMomentTable:
    """Exact finite-N entry moments of a law, as coefficient * N^(half/2)."""

    law: OracleLaw

    def entry(self, k: int) -> _Scaled:
        """E[x^k] of an off-diagonal (or circulant generator) entry."""
        if k == 0:
            return (Fraction(1), 0)
        law = self.law
        if isinstance(law, GaussianLaw):
            return (law.moment(k), 0)
        if isinstance(law, SparsePairLaw):
            return (law.activation * law.atom_moment(k, 0), k - 2)
        return (law.activation * law.atom_moment(k), k - 2)

    def pair(self, k: int, l: int) -> _Scaled:
        """E[x_ij^k x_ji^l]; factorizes for independent-entry laws."""
        if k == 0 and l == 0:
            return (Fraction(1), 0)
        law = self.law
        if isinstance(law, SparsePairLaw):
            return (law.activation * law.atom_moment(k, l), k + l - 2)
        ck, hk = self.entry(k)
        cl, hl = self.entry(l)
        return (ck * cl, hk + hl)

    def diagonal(self, k: int) -> _Scaled:
        if k == 0:
            return (Fraction(1), 0)
        law = self.law
        if isinstance(law, GaussianLaw):
            return (law.moment(k), 0)
        return (law.diagonal_moment(k), 0)

    # entries of A = X / sqrt(N): each power shifts the half-exponent down

    def a_pair(self, k: int, l: int) -> _Scaled:
        c, h = self.pair(k, l)
        return (c, h - (k + l))

    def a_entry_product(self, k: int, l: int) -> _Scaled:
        ck, hk = self.entry(k)
        cl, hl = self.entry(l)
        return (ck * cl, hk + hl - (k + l))

    def a_diagonal(self, k: int) -> _Scaled:
        c, h = self.diagonal(k)
        return (c, h - k)


def _delta0(table: ExactMomentTable, g: TraceGraph, model: str) -> _Scaled:
    """E[prod over edges of a_(phi u, phi v)] for one injective labeling."""
    s = stats(g)
    coeff = Fraction(1)
    half = 0
    for loops_k, count in s.loop_counts:
        c, h = table.a_diagonal(loops_k)
        if c == 0:
            return (Fraction(0), 0)
        coeff *= c**count
        half += h * count
    for (k, l), count in s.ordered_pair_counts:
        if model == "elliptic":
            c, h = table.a_pair(k, l)
        else:
            c, h = table.a_entry_product(k, l)
        if c == 0:
            return (Fraction(0), 0)
        coeff *= c**count
        half += h * count
    return (coeff, half)


def exact_trace_mean(model: str, law: OracleLaw, n: int, k: int) -> Fraction:
    """E[Tr(A^k)] / N at finite N, exactly: sum over partitions of
    (N-1)! / (N-|V|)! times the moment product of the partition graph."""
    if model not in ORACLE_MODELS:
        raise ValueError(f"exact_trace_mean supports {ORACLE_MODELS}, not {model!r}")
    if not 1 <= k <= MAX_K_MEAN:
        raise ValueError(f"k={k} outside 1..{MAX_K_MEAN}")
    if not 1 <= n <= MAX_N_POLY:
        raise ValueError(f"N={n} outside 1..{MAX_N_POLY}")
    table = ExactMomentTable(law)
    total = Fraction(0)
    for pi in enumerate_set_partitions(k):
        g = graph_of_partition(pi)
        coeff, half = _delta0(table, g, model)
        if coeff == 0:
            continue
        total += falling_factorial(n - 1, g.vertex_count - 1) * _eval_scaled(coeff, half, n)
    return total


def exact_trace_mean_enumerated(model: str, law: OracleLaw, n: int, k: int) -> Fraction:
    """Brute-force fallback: the same expectation summed tuple by tuple over
    [N]^k.  Exponential in k; cross-checks the partition formula."""
    if model not in ORACLE_MODELS:
        raise ValueError(f"unsupported model {model!r}")
    if n**k > 2 * 10**6:
        raise ValueError("tuple enumeration too large")
    table = ExactMomentTable(law)
    total = Fraction(0)
    for tup in product(range(n), repeat=k):
        pairs: dict[tuple[int, int], list[int]] = {}
        diags: dict[int, int] = {}
        for m in range(k):
            u, v = tup[m], tup[(m + 1) % k]
            if u == v:
                diags[u] = diags.get(u, 0) + 1
            else:
                a, b = (u, v) if u < v else (v, u)
                rec = pairs.setdefault((a, b), [0, 0])
                rec[0 if u == a else 1] += 1
        coeff = Fraction(1)
        half = 0
        for cnt in diags.values():
            c, h = table.a_diagonal(cnt)
            coeff *= c
            half += h
            if coeff == 0:
                break
        if coeff != 0:
            for up, down in pairs.values():
                c, h = (
                    table.a_pair(up, down)
                    if model == "elliptic"
                    else table.a_entry_product(up, down)
                )
                coeff *= c
                half += h
                if coeff == 0:
                    break
        if coeff != 0:
            total += _eval_scaled(coeff, half, n)
    return total / n


def _pattern_value(table: ExactMomentTable, counts: tuple[int, ...]) -> _Scaled:
    coeff = Fraction(1)
    half = 0
    for m in counts:
        c, h = table.entry(m)
        if c == 0:
            return (Fraction(0), 0)
        coeff *= c
        half += h
    return (coeff, half)


def exact_circulant_trace_mean(law: OracleLaw, n: int, k: int) -> Fraction:
    """E[Tr(C^k)] at finite N: enumerate index tuples with sum = 0 mod N
    (last index solved from the congruence), factorizing by independence."""
    if not 1 <= n <= MAX_N_CIRC:
        raise ValueError(f"N={n} outside 1..{MAX_N_CIRC}")
    if not 1 <= k <= MAX_K_CIRC:
        raise ValueError(f"k={k} outside 1..{MAX_K_CIRC}")
    table = ExactMomentTable(law)

    @lru_cache(maxsize=None)
    def pattern(counts: tuple[int, ...]) -> _Scaled:
        return _pattern_value(table, counts)

    total_coeff: dict[int, Fraction] = {}
    for head in product(range(n), repeat=k - 1):
        last = (-sum(head)) % n
        counts: dict[int, int] = {}
        for j in head:
            counts[j] = counts.get(j, 0) + 1
        counts[last] = counts.get(last, 0) + 1
        c, h = pattern(tuple(sorted(counts.values())))
        if c != 0:
            total_coeff[h] = total_coeff.get(h, Fraction(0)) + c
    total = Fraction(0)
    for h, c in total_coeff.items():
        total += _eval_scaled(c, h - (k - 2), n)
    return total


def _circulant_joint(table, n: int, k: int, l: int) -> Fraction:
    """E[Tr(C^k) Tr(C^l)] by double tuple enumeration."""
    total_coeff: dict[int, Fraction] = {}
    heads_k = list(product(range(n), repeat=k - 1))
    heads_l = list(product(range(n), repeat=l - 1))
    for hk in heads_k:
        tup1 = hk + ((-sum(hk)) % n,)
        base: dict[int, int] = {}
        for j in tup1:
            base[j] = base.get(j, 0) + 1
        for hl in heads_l:
            tup2 = hl + ((-sum(hl)) % n,)
            counts = dict(base)
            for j in tup2:
                counts[j] = counts.get(j, 0) + 1
            c, h = _pattern_value(table, tuple(sorted(counts.values())))
            if c != 0:
                total_coeff[h] = total_coeff.get(h, Fraction(0)) + c
    total = Fraction(0)
    for h, c in total_coeff.items():
        total += _eval_scaled(c, h - (k - 2) - (l - 2), n)
    return total


def exact_fluct_covariance_small(
    model: str, law: OracleLaw, n: int, k: int, l: int
) -> Fraction:
    """Exact E[Z_N(k) Z_N(l)] with true-expectation centering.

    Circulant: full tuple enumeration.  Elliptic/iid: cross-partition sum
    with exact falling factorials; a gluing contributes the difference
    between the merged moment product and the product of the two separate
    ones, which vanishes identically when the gluing shares no dependence.
    """
    if not (1 <= k <= MAX_K_FLUCT and 1 <= l <= MAX_K_FLUCT):
        raise ValueError(f"(k,l)=({k},{l}) outside 1..{MAX_K_FLUCT}")
    if not 1 <= n <= MAX_N_FLUCT:
        raise ValueError(f"N={n} outside 1..{MAX_N_FLUCT}")
    table = ExactMomentTable(law)
    if model == "circulant":
        joint = _circulant_joint(table, n, k, l)
        ek = exact_circulant_trace_mean(law, n, k)
        el = exact_circulant_trace_mean(law, n, l)
        return (joint - ek * el) / n
    if model not in ORACLE_MODELS:
        raise ValueError(f"unsupported model {model!r}")
    total = Fraction(0)
    for pi1 in enumerate_set_partitions(k):
        g1 = graph_of_partition(pi1)
        c1, h1 = _delta0(table, g1, model)
        for pi2 in enumerate_set_partitions(l):
            g2 = graph_of_partition(pi2)
            c2, h2 = _delta0(table, g2, model)
            for sigma in enumerate_cross_partitions((g1.vertex_count, g2.vertex_count)):
                merged, _shared = merge_under_cross_partition([g1, g2], sigma)
                cm, hm = _delta0(table, merged, model)
                omega = _eval_scaled(cm, hm, n) - _eval_scaled(c1, h1, n) * _eval_scaled(
                    c2, h2, n
                )
                if omega != 0:
                    total += falling_factorial(n, sigma.num_blocks) * omega
    return total / n
