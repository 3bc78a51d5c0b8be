"""The matching statistic, its null distribution and p-values.

The null distribution is the law of ``U(pi) = sum_i e[i, pi(i)]`` for ``pi``
uniform over all perfect matchings. Comparisons between statistic values
are made on the centered scores ``d``. ``U_d`` and ``U_e`` differ by the
constant ``e_++/(n-1)``, so this changes no p-value. It also removes the
cancellation a large common offset would cause.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Literal

import numpy as np
from scipy.special import ndtr

from .errors import DegenerateDistribution, EnumerationTooLarge, InvalidDimension
from .matchings import (
    RNG_ALGORITHM,
    Matching,
    SamplerConfig,
    canonical_matching,
    count_matchings,
    iter_pair_blocks,
    make_rng,
    sample_pairs,
)
from .matrix import CenteredMatrix, Moments, SimilarityMatrix, center_matrix, exact_moments

Alternative = Literal["greater", "less", "two-sided"]
Mode = Literal["exact", "mc", "normal", "auto"]

C1 = 86.0
C2 = 243.0
# Relative tolerance for treating two statistic values as tied.
TIE_RTOL = 1e-12
# Replicates per Monte Carlo stream. Fixed so results do not depend on workers.
MC_CHUNK = 8192
SMALL_N = 10


def _grid(M) -> np.ndarray:
    if isinstance(M, SimilarityMatrix):
        return M.e
    if isinstance(M, CenteredMatrix):
        return M.d
    return np.asarray(M, dtype=float)


def statistic(M, pi: Matching) -> float:
    """``U = sum_i M[i, pi(i)]``; every matched pair contributes both orientations."""
    m = _grid(M)
    if m.ndim != 2 or m.shape != (pi.n, pi.n):
        raise InvalidDimension(f"matrix shape {m.shape} does not match matching of size {pi.n}")
    return math.fsum(m[np.arange(pi.n), pi.pair_of])


def _pair_weights(d: np.ndarray) -> np.ndarray:
    return d + d.T


def _values(w: np.ndarray, pairs: np.ndarray) -> np.ndarray:
    return w[pairs[..., 0], pairs[..., 1]].sum(axis=-1)


def _tie_tol(D: CenteredMatrix) -> float:
    return TIE_RTOL * max(D.max_abs, 1e-300) * D.n


def _exceeds(values: np.ndarray, u0: float, tol: float, alternative: Alternative) -> np.ndarray:
    if alternative == "greater":
        return values >= u0 - tol
    if alternative == "less":
        return values <= u0 + tol
    if alternative == "two-sided":
        return np.abs(values) >= abs(u0) - tol
    raise ValueError(f"unknown alternative {alternative!r}")


def null_values(D: CenteredMatrix, cutoff: int = 16) -> np.ndarray:
    """Centered statistic ``U_d`` for every matching, in enumeration order."""
    w = _pair_weights(D.d)
    return np.concatenate([_values(w, b) for b in iter_pair_blocks(D.n, cutoff)])


def exact_pvalue(
    E: SimilarityMatrix,
    pi0: Matching,
    alternative: Alternative = "greater",
    cutoff: int = 16,
) -> float:
    """Exact permutation p-value by enumerating every matching.

    For ``"greater"`` this is ``#{pi : U(pi) >= U(pi0)} / (n-1)!!``. Ties,
    judged at relative tolerance ``TIE_RTOL``, count as rejections.
    """
    D = center_matrix(E)
    if E.n > cutoff:
        raise EnumerationTooLarge(f"n={E.n} exceeds the enumeration cutoff {cutoff}")
    u0 = statistic(D, pi0)
    tol = _tie_tol(D)
    w = _pair_weights(D.d)
    hits = 0
    for block in iter_pair_blocks(E.n, cutoff):
        hits += int(np.count_nonzero(_exceeds(_values(w, block), u0, tol, alternative)))
    return hits / count_matchings(E.n)


def _mc_hits(w, n, u0, tol, alternative, seed, stream, size) -> int:
    rng = make_rng(seed, stream)
    vals = _values(w, sample_pairs(n, size, rng))
    return int(np.count_nonzero(_exceeds(vals, u0, tol, alternative)))


def mc_null_values(D: CenteredMatrix, cfg: SamplerConfig) -> np.ndarray:
    """``cfg.replicates`` draws of ``U_d`` under the null, in stream order."""
    w = _pair_weights(D.d)
    chunks = _chunks(cfg.replicates)

    def run(k):
        return _values(w, sample_pairs(D.n, chunks[k], make_rng(cfg.seed, k)))

    return np.concatenate(_map(run, range(len(chunks)), cfg.workers))


def _chunks(total: int) -> list[int]:
    full, rem = divmod(total, MC_CHUNK)
    return [MC_CHUNK] * full + ([rem] if rem else [])


def _map(fn, items, workers: int) -> list:
    items = list(items)
    if workers == 1 or len(items) == 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def mc_pvalue(
    E: SimilarityMatrix,
    pi0: Matching,
    cfg: SamplerConfig,
    alternative: Alternative = "greater",
) -> tuple[float, float]:
    """Monte Carlo p-value ``(1 + hits) / (replicates + 1)`` and its standard error.

    Replicates are split into fixed chunks of ``MC_CHUNK`` draws, chunk ``k``
    using stream ``k`` of ``cfg.seed``. Hits are summed in chunk order, so
    the answer is the same for any ``cfg.workers``.
    """
    D = center_matrix(E)
    u0 = statistic(D, pi0)
    tol = _tie_tol(D)
    w = _pair_weights(D.d)
    chunks = _chunks(cfg.replicates)

    def run(k):
        return _mc_hits(w, E.n, u0, tol, alternative, cfg.seed, k, chunks[k])

    hits = sum(_map(run, range(len(chunks)), cfg.workers))
    p = (1 + hits) / (cfg.replicates + 1)
    return p, math.sqrt(p * (1 - p) / cfg.replicates)


def normal_cdf(w: float | np.ndarray):
    """Standard normal CDF (Cephes ``ndtr``, erf/erfc based, ~1e-16 absolute)."""
    return ndtr(w)


def _normal_tail(w: float, alternative: Alternative) -> float:
    if alternative == "greater":
        return float(ndtr(-w))
    if alternative == "less":
        return float(ndtr(w))
    if alternative == "two-sided":
        return float(min(1.0, 2.0 * ndtr(-abs(w))))
    raise ValueError(f"unknown alternative {alternative!r}")


def standardized(E: SimilarityMatrix, pi0: Matching, moments: Moments | None = None) -> float:
    """``W = (U - EU) / sqrt(Var U)`` at ``pi0``."""
    moments = moments or exact_moments(E)
    if moments.variance == 0:
        raise DegenerateDistribution("Var(U) = 0: every matching gives the same statistic")
    return statistic(center_matrix(E), pi0) / math.sqrt(moments.variance)


def normal_pvalue(E: SimilarityMatrix, pi0: Matching, alternative: Alternative = "greater") -> float:
    """P-value from the normal approximation to ``W``."""
    return _normal_tail(standardized(E, pi0), alternative)


@dataclass(frozen=True)
class BoundBreakdown:
    """The two terms of the Berry-Esseen type bound on ``sup |P(W <= w) - Phi(w)|``."""

    term1: float
    term2: float
    alpha: float
    sum_d2: float
    sum_d4: float
    n: int
    c1: float = C1
    c2: float = C2
    warnings: tuple[str, ...] = ()

    @property
    def delta_bound(self) -> float:
        return self.term1 + self.term2


def berry_esseen_bound(D: CenteredMatrix) -> BoundBreakdown:
    """Explicit bound on the Kolmogorov distance between ``W`` and N(0, 1).

    ``86 sqrt(n) sqrt(sum d^4) / sum d^2 + 243 alpha^3 n^(5/2) / (sum d^2)^(3/2)``
    with sums over ``i != j`` and ``alpha = max |d_ij - d_kl|``. Both terms
    are invariant to rescaling ``d``.
    """
    if not isinstance(D, CenteredMatrix):
        raise TypeError("berry_esseen_bound expects a CenteredMatrix")
    if D.sum_d2 == 0:
        raise DegenerateDistribution("sum of d^2 is 0: the statistic is constant")
    n = D.n
    term1 = C1 * math.sqrt(n) * math.sqrt(D.sum_d4) / D.sum_d2
    term2 = C2 * D.alpha**3 * n**2.5 / D.sum_d2**1.5
    warnings = ()
    if n < SMALL_N:
        warnings = (f"bound constants were derived for n >= {SMALL_N}; n={n} is an extrapolation",)
    return BoundBreakdown(term1, term2, D.alpha, D.sum_d2, D.sum_d4, n, warnings=warnings)


@dataclass
class TestReport:
    """Everything ``run_test`` computed, with provenance."""

    __test__ = False  # not a pytest class

    n: int
    u: float
    mean: float
    variance: float
    alternative: str
    mode: str
    w: float | None = None
    p_exact: float | None = None
    p_mc: float | None = None
    mc_std_error: float | None = None
    replicates: int | None = None
    seed: int | None = None
    p_normal: float | None = None
    delta_bound: float | None = None
    bound_terms: dict | None = None
    tie_rtol: float = TIE_RTOL
    rng: str | None = None
    matching: list[int] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self, indent: int | None = 2) -> str:
        return json.dumps(self.to_dict(), indent=indent)


def run_test(
    E: SimilarityMatrix,
    pi0: Matching | None = None,
    cfg: SamplerConfig | None = None,
    mode: Mode = "auto",
    alternative: Alternative = "greater",
) -> TestReport:
    """Test whether the pairing ``pi0`` is unusually similar.

    ``mode="auto"`` enumerates when ``n <= cfg.enumeration_cutoff`` and
    falls back to Monte Carlo otherwise. Whenever ``Var(U) > 0`` the normal
    p-value and the explicit error bound are attached as well.
    """
    cfg = cfg or SamplerConfig()
    pi0 = pi0 if pi0 is not None else canonical_matching(E.n)
    if pi0.n != E.n:
        raise InvalidDimension(f"matching has {pi0.n} points but the matrix has {E.n}")
    if mode not in ("exact", "mc", "normal", "auto"):
        raise ValueError(f"unknown mode {mode!r}")
    if alternative not in ("greater", "less", "two-sided"):
        raise ValueError(f"unknown alternative {alternative!r}")

    moments = exact_moments(E)
    report = TestReport(
        n=E.n,
        u=statistic(E, pi0),
        mean=moments.mean,
        variance=moments.variance,
        alternative=alternative,
        mode=mode,
        matching=pi0.to_list(one_based=True),
        warnings=list(E.warnings),
    )

    use_exact = mode == "exact" or (mode == "auto" and E.n <= cfg.enumeration_cutoff)
    use_mc = mode == "mc" or (mode == "auto" and not use_exact)
    if use_exact:
        report.p_exact = exact_pvalue(E, pi0, alternative, cfg.enumeration_cutoff)
    if use_mc:
        report.p_mc, report.mc_std_error = mc_pvalue(E, pi0, cfg, alternative)
        report.replicates = cfg.replicates
        report.seed = cfg.seed
        report.rng = RNG_ALGORITHM

    if moments.variance == 0:
        report.warnings.append("degenerate null distribution: Var(U) = 0, all matchings give the same U")
        if mode == "normal":
            raise DegenerateDistribution("normal approximation undefined when Var(U) = 0")
        return report

    D = center_matrix(E)
    report.w = statistic(D, pi0) / math.sqrt(moments.variance)
    report.p_normal = _normal_tail(report.w, alternative)
    bound = berry_esseen_bound(D)
    report.delta_bound = bound.delta_bound
    report.bound_terms = {"term1": bound.term1, "term2": bound.term2, "c1": C1, "c2": C2}
    report.warnings.extend(bound.warnings)
    return report
