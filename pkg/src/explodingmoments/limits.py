"""Limiting values of trace moments, fluctuation covariances, and their
circulant closed forms.

At the critical exponent alpha = 1 the limit of a normalized trace term is a
product of profile constants over the adjacent pairs of its trace graph when
that graph is an admissible tree, and 0 otherwise.  Fluctuation covariances
sum the same product over gluings of two trace graphs that share an edge and
merge into an admissible tree.  For alpha != 1 only the asymptotic order
|V| - 1 - alpha * p survives (p = reduced edge count).

All arithmetic here is exact rational; profile constants enter symbolically
and are substituted at the end.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import factorial
from typing import Mapping, Optional, Sequence, Union

from .graphs import (
    ADMISSIBLE_TREE,
    BLUE,
    RED,
    TraceGraph,
    classify,
    graph_of_partition,
    merge_under_cross_partition,
    stats,
)
from .partitions import (
    enumerate_cross_partitions,
    enumerate_integer_partitions_min2,
    enumerate_pair_partitions,
    enumerate_set_partitions,
)
from .profiles import (
    MomentProfile,
    centrosymmetric_profile,
    pair_table_from_scalar,
    tilde_transform,
)

# 10 covers the tenth Wigner moment in the acceptance suite; Bell(10) ~ 1.2e5
KMAX_TRACE = 10
KMAX_COV = 6

TRACE_MODELS = ("elliptic", "iid", "block", "centrosymmetric", "circulant")

_GRAPH_MODEL = {
    "elliptic": "elliptic",
    "iid": "iid",
    "block": "colored_block",
    "centrosymmetric": "colored_block",
}


@dataclass(frozen=True)
class LimitValue:
    """Either an exact limit, an exact zero, or a symbolic asymptotic order
    N^exponent (the alpha != 1 regimes are classified, never evaluated)."""

    kind: str  # "exact" | "zero_exact" | "symbolic_order"
    value: Optional[Fraction] = None
    exponent: Optional[Fraction] = None


def _require_alpha_one(profile: MomentProfile):
    if profile.alpha != 1:
        raise ValueError(f"limit evaluation requires alpha = 1, got alpha = {profile.alpha}")


@lru_cache(maxsize=65536)
def _tau_factor_keys(g: TraceGraph, graph_model: str):
    """Table lookups an admissible graph's tau product needs: tuples of
    (table, key, count)."""
    s = stats(g)
    if graph_model == "elliptic":
        return tuple(("pair", key, count) for key, count in s.ordered_pair_counts)
    if graph_model == "iid":
        return tuple(("scalar", m, count) for m, count in s.unordered_counts)
    if graph_model == "colored_block":
        if s.colored_pair_counts is None:
            raise ValueError("colored model requires a fully colored graph")
        return tuple(("pair", key, count) for key, count in s.colored_pair_counts)
    raise ValueError(f"unknown graph model {graph_model!r}")


def tau(g: TraceGraph, model: str, profile: MomentProfile) -> Fraction:
    """Limiting trace contribution of one graph: the pair-constant product if
    the graph is an admissible tree for the model, else 0."""
    _require_alpha_one(profile)
    graph_model = _GRAPH_MODEL[model] if model in _GRAPH_MODEL else model
    if classify(g, graph_model) != ADMISSIBLE_TREE:
        return Fraction(0)
    out = Fraction(1)
    for table, key, count in _tau_factor_keys(g, graph_model):
        base = profile.pair(*key) if table == "pair" else profile.scalar(key)
        out *= base**count
    return out


def asymptotic_order(g: TraceGraph, alpha) -> LimitValue:
    """Order classification valid for every alpha > 0.

    Exact zero when some pair carries total multiplicity one or some vertex
    carries exactly one loop; otherwise the term is O(N^(|V| - 1 - alpha*p)).
    For alpha > 1 that exponent is always negative on connected graphs.
    """
    alpha = Fraction(alpha)
    s = stats(g)
    if s.has_single_multiplicity_pair or s.has_single_loop_vertex:
        return LimitValue(kind="zero_exact")
    exponent = Fraction(s.vertex_count - 1) - alpha * s.reduced_edge_count
    if alpha > 1 and s.component_count == 1 and exponent >= 0:
        raise AssertionError("connected graphs must have negative order for alpha > 1")
    return LimitValue(kind="symbolic_order", exponent=exponent)


def limit_trace_moment(model: str, k: int, profile: MomentProfile) -> Fraction:
    """Limit of the normalized trace E[Tr(A^k)] / N, summed over all
    partitions of {1..k} (for the circulant model: limit of E[Tr(C^k)])."""
    if model not in TRACE_MODELS:
        raise ValueError(f"unknown model {model!r}")
    if not 1 <= k <= KMAX_TRACE:
        raise ValueError(f"k={k} outside 1..{KMAX_TRACE}")
    _require_alpha_one(profile)
    if model == "circulant":
        return circulant_limit_moment(k, profile)
    if model == "block":
        # two independent-entry blocks, trace normalized by the block size
        base = _partition_sum(k, "iid", profile)
        return 2 * base
    if model == "centrosymmetric":
        # full-size normalization: average of the two reduction blocks, each
        # an independent-entry model with the tilde scalar constants
        tilde1, tilde2, _ = tilde_transform(
            profile.scalar_table, pair_table_from_scalar(profile.scalar_table, profile.kmax),
            profile.kmax,
        )
        p1 = MomentProfile(alpha=Fraction(1), kmax=profile.kmax, scalar_table=tilde1)
        p2 = MomentProfile(alpha=Fraction(1), kmax=profile.kmax, scalar_table=tilde2)
        return (_partition_sum(k, "iid", p1) + _partition_sum(k, "iid", p2)) / 2
    return _partition_sum(k, model, profile)


def _partition_sum(k: int, model: str, profile: MomentProfile) -> Fraction:
    total = Fraction(0)
    for pi in enumerate_set_partitions(k):
        total += tau(graph_of_partition(pi), model, profile)
    return total


def covariance_graphs(
    g1: TraceGraph, g2: TraceGraph, model: str, profile: MomentProfile
) -> Fraction:
    """Sum over gluings of two trace graphs sharing at least one edge of the
    tau product of the merged graph (0 unless the merge is an admissible
    tree for the model)."""
    _require_alpha_one(profile)
    total = Fraction(0)
    for sigma in enumerate_cross_partitions((g1.vertex_count, g2.vertex_count)):
        merged, shared = merge_under_cross_partition([g1, g2], sigma)
        if not shared:
            continue
        total += tau(merged, model, profile)
    return total


def covariance_trace(k: int, l: int, model: str, profile: MomentProfile) -> Fraction:
    """Limiting Cov(z(k), z(l)) of the centered sqrt(N)-scaled trace
    fluctuations."""
    if model not in TRACE_MODELS:
        raise ValueError(f"unknown model {model!r}")
    if not (1 <= k <= KMAX_COV and 1 <= l <= KMAX_COV):
        raise ValueError(f"(k,l)=({k},{l}) outside 1..{KMAX_COV}")
    if model == "circulant":
        return circulant_covariance(k, l)
    _require_alpha_one(profile)
    if model == "centrosymmetric":
        profile = centrosymmetric_profile(profile.scalar_table, profile.kmax)
        model = "block"
    graphs1 = [graph_of_partition(pi) for pi in enumerate_set_partitions(k)]
    graphs2 = [graph_of_partition(pi) for pi in enumerate_set_partitions(l)]
    total = Fraction(0)
    if model == "block":
        for r1 in (BLUE, RED):
            for r2 in (BLUE, RED):
                for g1 in graphs1:
                    for g2 in graphs2:
                        total += covariance_graphs(
                            g1.recolored(r1), g2.recolored(r2), "block", profile
                        )
        return total
    for g1 in graphs1:
        for g2 in graphs2:
            total += covariance_graphs(g1, g2, model, profile)
    return total


def wick_joint(ks: Sequence[int], model: str, profile: MomentProfile) -> Fraction:
    """Joint moment of the limiting Gaussian family: sum over pair partitions
    of products of covariances; 0 for an odd number of factors."""
    ks = list(ks)
    if len(ks) > KMAX_COV:
        raise ValueError(f"at most {KMAX_COV} factors")
    if len(ks) % 2 == 1:
        return Fraction(0)
    total = Fraction(0)
    for matching in enumerate_pair_partitions(len(ks)):
        term = Fraction(1)
        for i, j in matching.blocks:
            term *= covariance_trace(ks[i - 1], ks[j - 1], model, profile)
        total += term
    return total


def _scalar_of(profile_or_table) -> Mapping[int, Fraction]:
    if isinstance(profile_or_table, MomentProfile):
        return profile_or_table.scalar_table
    return {int(k): Fraction(v) for k, v in profile_or_table.items()}


def circulant_limit_moment(
    k: int, profile: Union[MomentProfile, Mapping[int, Fraction]], paper_formula: bool = False
) -> Fraction:
    """Limit of E[Tr(C^k)] for the circulant model.

    Sums multinomial weights over multisets {m_1..m_r} of multiplicities
    (each >= 2, summing to k).  The corrected form divides by the part
    multiplicity factorials (values are assigned to unordered parts); the
    uncorrected variant (paper_formula=True) omits that symmetry factor and
    is kept for comparison reports only.
    """
    scalar = _scalar_of(profile)
    total = Fraction(0)
    for parts in enumerate_integer_partitions_min2(k):
        term = Fraction(factorial(k))
        for m in parts:
            term /= factorial(m)
            term *= scalar.get(m, Fraction(0))
        if not paper_formula:
            for mult in _part_multiplicities(parts):
                term /= factorial(mult)
        total += term
    return total


def _part_multiplicities(parts: Sequence[int]) -> list[int]:
    counts: dict[int, int] = {}
    for p in parts:
        counts[p] = counts.get(p, 0) + 1
    return list(counts.values())


def circulant_covariance(k: int, l: int) -> Fraction:
    """Stated circulant fluctuation kernel: k! on the diagonal, 0 off it.

    This is the prediction verbatim (unit entry variance); the verification
    layer compares it against oracle and empirical values side by side, and
    for heavy profiles the finite-N oracle exceeds it by an explicit
    (E[x^4] - 1)/N type term.
    """
    return Fraction(factorial(k)) if k == l else Fraction(0)
