"""Monte Carlo trace statistics: normalized trace powers over replicas,
fluctuation covariances, bootstrap standard errors, and predicted-versus-
observed comparison rows.

Replica r uses the derived seed ``spec.seed + r`` (r = 1..M), so runs are
deterministic end to end and replicas can be generated in any order or in
parallel.  Z_N(k) is centered at the empirical replica mean; the O(1/M)
centering bias is covered by the bootstrap standard errors.
"""

from __future__ import annotations

import csv
import io
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Optional, Sequence, Union

import numpy as np
from scipy import sparse

from .ensembles import (
    EnsembleSpec,
    MatrixSample,
    circulant_eigenvalues,
    sample,
    sample_circulant_generator,
)

KMAX_TRACE_POWERS = 8
BOOTSTRAP_DEFAULT = 200
THREADS_ENV = "EXPLODINGMOMENTS_THREADS"
_DENSE_OPS_CAP = 2 * 10**11  # n^2 * M guard for dense replica loops


def trace_powers(m: MatrixSample, k_max: int) -> np.ndarray:
    """[Tr(A^k) / N for k = 1..k_max]; N is the sample's trace normalizer.

    Circulant samples go through eigenvalue powers, sparse samples through
    sparse closed-walk products, dense samples through repeated
    multiplication; the three paths agree on common inputs.
    """
    if not 1 <= k_max <= KMAX_TRACE_POWERS:
        raise ValueError(f"k_max={k_max} outside 1..{KMAX_TRACE_POWERS}")
    norm = m.trace_norm
    if m.kind == "circulant" and m.matrix is None:
        lam = circulant_eigenvalues(m.generator_values)
        out = np.empty(k_max)
        acc = lam.copy()
        for k in range(k_max):
            out[k] = acc.sum().real / norm
            acc *= lam
        return out
    mat = m.matrix
    out = np.empty(k_max)
    power = mat.copy()
    for k in range(k_max):
        if sparse.issparse(power):
            out[k] = power.diagonal().sum() / norm
        else:
            out[k] = np.trace(power) / norm
        if k + 1 < k_max:
            power = power @ mat
    return out


@dataclass
class SampleStats:
    """Empirical trace means, fluctuation covariances, and bootstrap SEs."""

    spec: EnsembleSpec
    k_max: int
    replicates: int
    traces: np.ndarray  # (M, k_max) of Tr(A^k)/N
    mean_traces: np.ndarray
    se_mean: np.ndarray
    cov_z: np.ndarray  # (k_max, k_max) plug-in covariance of Z_N(k)
    se_cov: np.ndarray
    zmoment4: np.ndarray  # E[Z_N(k)^4] per k
    se_zmoment4: np.ndarray

    @property
    def z_values(self) -> np.ndarray:
        # spec.n is the block size for block2, which is also the CLT scale
        return np.sqrt(self.spec.n) * (self.traces - self.mean_traces)

    def seed_range(self) -> tuple[int, int]:
        return (self.spec.seed + 1, self.spec.seed + self.replicates)


def _replica_traces(spec: EnsembleSpec, k_max: int, m: int) -> np.ndarray:
    kind = spec.kind
    if kind == "circulant":
        return _circulant_replica_traces(spec, k_max, m)
    threads = int(os.environ.get(THREADS_ENV, "1") or "1")
    seeds = [spec.seed + r for r in range(1, m + 1)]

    def one(seed: int) -> np.ndarray:
        return trace_powers(sample(replace(spec, seed=seed)), k_max)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            rows = list(pool.map(one, seeds))
    else:
        rows = [one(s) for s in seeds]
    return np.vstack(rows)


def _circulant_replica_traces(spec: EnsembleSpec, k_max: int, m: int) -> np.ndarray:
    """Replica loop vectorized through one batched FFT per chunk; seeds and
    results are identical to the per-replica path."""
    n = spec.n
    out = np.empty((m, k_max))
    chunk = max(1, min(m, 4 * 10**6 // max(n, 1)))
    row = 0
    while row < m:
        hi = min(row + chunk, m)
        gens = np.empty((hi - row, n))
        for i in range(row, hi):
            rng = np.random.default_rng(spec.seed + 1 + i)
            gens[i - row] = sample_circulant_generator(spec.law, n, rng)
        lam = np.conj(np.fft.fft(gens, axis=1)) / np.sqrt(n)
        acc = lam.copy()
        for k in range(k_max):
            out[row:hi, k] = acc.sum(axis=1).real / n
            if k + 1 < k_max:
                acc *= lam
        row = hi
    return out


def run_experiment(
    spec: EnsembleSpec,
    k_max: int,
    replicates: int,
    bootstrap_resamples: int = BOOTSTRAP_DEFAULT,
) -> SampleStats:
    """Generate M replicas from derived seeds seed+1..seed+M and aggregate.

    Fully deterministic given the spec; the bootstrap resampler is seeded
    from the spec as well.
    """
    if replicates < 2:
        raise ValueError("need at least 2 replicates")
    if not 1 <= k_max <= KMAX_TRACE_POWERS:
        raise ValueError(f"k_max={k_max} outside 1..{KMAX_TRACE_POWERS}")
    if spec.storage == "dense" and spec.n**2 * replicates > _DENSE_OPS_CAP:
        raise ValueError("dense replica loop exceeds the resource guard")
    traces = _replica_traces(spec, k_max, replicates)
    return aggregate_stats(spec, traces, bootstrap_resamples)


def _stats_from_traces(traces: np.ndarray, scale: float):
    m = traces.shape[0]
    mean = traces.mean(axis=0)
    z = scale * (traces - mean)
    cov = z.T @ z / m
    m4 = (z**4).mean(axis=0)
    return mean, cov, m4


def aggregate_stats(
    spec: EnsembleSpec, traces: np.ndarray, bootstrap_resamples: int = BOOTSTRAP_DEFAULT
) -> SampleStats:
    m, k_max = traces.shape
    scale = np.sqrt(spec.n)
    mean, cov, m4 = _stats_from_traces(traces, scale)
    se_mean = traces.std(axis=0, ddof=1) / np.sqrt(m)
    rng = np.random.default_rng(np.random.SeedSequence((abs(spec.seed), 0xB007)))
    covs = np.empty((bootstrap_resamples,) + cov.shape)
    m4s = np.empty((bootstrap_resamples, k_max))
    for b in range(bootstrap_resamples):
        idx = rng.integers(0, m, size=m)
        _, covs[b], m4s[b] = _stats_from_traces(traces[idx], scale)
    return SampleStats(
        spec=spec,
        k_max=k_max,
        replicates=m,
        traces=traces,
        mean_traces=mean,
        se_mean=se_mean,
        cov_z=cov,
        se_cov=covs.std(axis=0, ddof=1),
        zmoment4=m4,
        se_zmoment4=m4s.std(axis=0, ddof=1),
    )


def reduction_block_moments(
    spec: EnsembleSpec, k_values: Sequence[int], replicates: int
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Empirical moments of the entries of the first orthogonal-reduction
    block A + JC of centrosymmetric samples.

    Returns (per-replica matrix, means, standard errors) of
    E[(entry * sqrt(N))^k] / N^(k/2-1), averaged over all block entries.
    """
    if spec.kind != "centrosymmetric":
        raise ValueError("reduction moments are defined for centrosymmetric samples")
    n = spec.n
    s = n // 2
    mirror_rows = np.arange(n - 1, n - 1 - s, -1)
    per_rep = np.empty((replicates, len(k_values)))
    for r in range(replicates):
        m = sample(replace(spec, seed=spec.seed + 1 + r)).matrix
        if not sparse.issparse(m):
            m = sparse.csr_matrix(m)
        block = (m[:s, :s] + m[mirror_rows][:, :s]).tocoo()
        vals = block.data
        for col, k in enumerate(k_values):
            # (w*sqrt(N))^k / (s^2 * N^(k/2-1)) summed over all s^2 entries
            per_rep[r, col] = n * float(np.sum(vals**k)) / s**2
    means = per_rep.mean(axis=0)
    ses = per_rep.std(axis=0, ddof=1) / np.sqrt(replicates)
    return per_rep, means, ses


Number = Union[int, float, Fraction]


@dataclass
class ReportRow:
    """One predicted-versus-observed comparison.

    ``l`` is None for a trace-mean row and an integer for a covariance row.
    The z-score compares the empirical value to the prediction; the oracle
    column, when present, is the exact finite-N value and is annotated when
    it differs from the prediction.
    """

    k: int
    l: Optional[int]
    predicted: Number
    oracle: Optional[Number]
    empirical: float
    stderr: float
    zscore: Optional[float]
    passed: bool
    note: str = ""

    def as_record(self) -> dict:
        return {
            "k": self.k,
            "l": self.l,
            "predicted": _num_str(self.predicted),
            "oracle": _num_str(self.oracle) if self.oracle is not None else "",
            "empirical": repr(self.empirical),
            "stderr": repr(self.stderr),
            "zscore": "" if self.zscore is None else repr(self.zscore),
            "pass": self.passed,
            "note": self.note,
        }


def _num_str(x: Number) -> str:
    if isinstance(x, Fraction):
        return f"{x.numerator}/{x.denominator}"
    return repr(x)


def compare_report(
    stats: SampleStats,
    predictions: Sequence[tuple[int, Optional[int], Number]],
    oracle: Optional[dict[tuple[int, Optional[int]], Number]] = None,
    z_threshold: float = 4.0,
) -> list[ReportRow]:
    """One row per prediction target: z = (empirical - predicted) / SE and a
    pass flag |z| <= threshold.  A zero SE with a mismatch is flagged as a
    degenerate row instead of dividing."""
    rows = []
    oracle = oracle or {}
    for k, l, predicted in predictions:
        if l is None:
            emp = float(stats.mean_traces[k - 1])
            se = float(stats.se_mean[k - 1])
        else:
            emp = float(stats.cov_z[k - 1, l - 1])
            se = float(stats.se_cov[k - 1, l - 1])
        ovalue = oracle.get((k, l))
        note = ""
        if ovalue is not None and Fraction(ovalue) != Fraction(predicted):
            note = "oracle-differs-from-prediction"
        if se == 0.0:
            match = emp == float(predicted)
            rows.append(
                ReportRow(k, l, predicted, ovalue, emp, se, None, match,
                          note=(note + ";" if note else "") + "degenerate-zero-se")
            )
            continue
        z = (emp - float(predicted)) / se
        rows.append(ReportRow(k, l, predicted, ovalue, emp, se, z, abs(z) <= z_threshold, note))
    return rows


CSV_COLUMNS = ["k", "l", "predicted", "oracle", "empirical", "stderr", "zscore", "pass", "note"]


def rows_to_csv(rows: Sequence[ReportRow]) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=CSV_COLUMNS)
    writer.writeheader()
    for row in rows:
        rec = row.as_record()
        rec["l"] = "" if rec["l"] is None else rec["l"]
        writer.writerow(rec)
    return buf.getvalue()
