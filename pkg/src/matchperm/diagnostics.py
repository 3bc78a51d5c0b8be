"""Numerical checks of the exchangeable-pair structure behind the normal bound.

All checks take a :class:`~matchperm.matrix.CenteredMatrix`; the
``4/n`` linearity identity relies on every margin of ``d`` being zero, so raw
similarity matrices are refused.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass

import numpy as np

from .engine import berry_esseen_bound, mc_null_values, normal_cdf, null_values
from .errors import DegenerateDistribution
from .matchings import Matching, SamplerConfig, make_rng, pairs_to_pair_of, sample_pairs
from .matrix import CenteredMatrix, SimilarityMatrix, center_matrix

# Slack on the increment bound for rounding.
BOUND_RTOL = 1e-12


def _require_centered(D) -> CenteredMatrix:
    if not isinstance(D, CenteredMatrix):
        raise TypeError("diagnostics run on centered scores; pass center_matrix(E)")
    return D


def _as_table(pis) -> np.ndarray:
    if isinstance(pis, Matching):
        return pis.pair_of[None, :]
    if isinstance(pis, np.ndarray):
        return np.atleast_2d(pis)
    return np.array([p.pair_of for p in pis])


def coupling_increments(D: CenteredMatrix, pi) -> np.ndarray:
    """``U(pi*) - U(pi)`` for every ordered pair ``(I, J)``, as an ``(n, n)`` array.

    Uses ``2 (d_IJ + d_pi(I)pi(J) - d_I pi(I) - d_J pi(J))``, which is 0 when
    ``J = pi(I)``. The diagonal (``I = J``) is not a valid pair and is set to 0.
    """
    d = D.d
    p = pi.pair_of if isinstance(pi, Matching) else np.asarray(pi)
    own = d[np.arange(D.n), p]
    inc = 2.0 * (d + d[np.ix_(p, p)] - own[:, None] - own[None, :])
    np.fill_diagonal(inc, 0.0)
    return inc


def check_linearity(D: CenteredMatrix, pis) -> float:
    """Largest ``|mean_(I,J) [U(pi*) - U(pi)] + (4/n) U(pi)|`` over the given matchings.

    The mean runs over all ``n(n-1)`` ordered pairs with ``I != J``.
    """
    D = _require_centered(D)
    n = D.n
    worst = 0.0
    for p in _as_table(pis):
        inc = coupling_increments(D, p)
        mean = math.fsum(inc.ravel()) / (n * (n - 1))
        u = math.fsum(D.d[np.arange(n), p])
        worst = max(worst, abs(mean + 4.0 / n * u))
    return worst


def check_increment_bound(D: CenteredMatrix, pis, pairs=None) -> int:
    """Count ``(pi, I, J)`` with ``|U(pi*) - U(pi)| > 4 alpha``.

    With ``pairs=None`` every ordered pair is checked for every matching.
    Otherwise ``pairs`` is an ``(len(pis), 2)`` array aligned with ``pis``.
    """
    D = _require_centered(D)
    limit = 4.0 * D.alpha * (1.0 + BOUND_RTOL)
    table = _as_table(pis)
    if pairs is None:
        off = ~np.eye(D.n, dtype=bool)
        return int(sum(np.count_nonzero(np.abs(coupling_increments(D, p))[off] > limit) for p in table))
    pairs = np.asarray(pairs).reshape(-1, 2)
    if len(pairs) != len(table):
        raise ValueError("pairs must align with pis")
    d = D.d
    rows = np.arange(len(table))
    i, j = pairs[:, 0], pairs[:, 1]
    a, b = table[rows, i], table[rows, j]
    inc = 2.0 * (d[i, j] + d[a, b] - d[i, a] - d[j, b])
    return int(np.count_nonzero(np.abs(inc) > limit))


def sample_triples(n: int, count: int, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    """Uniform matchings with independent uniform ordered pairs ``I != J``."""
    pis = pairs_to_pair_of(sample_pairs(n, count, rng))
    i = rng.integers(n, size=count)
    j = rng.integers(n - 1, size=count)
    j = j + (j >= i)
    return pis, np.column_stack([i, j])


def kolmogorov_distance(w: np.ndarray, rtol: float = 1e-12) -> float:
    """``sup_x |F(x) - Phi(x)|`` for the empirical (or exact, equal-weight) law of ``w``.

    The supremum of a step function against a continuous CDF is attained at
    a jump, so both one-sided limits of ``F`` are compared there. Values
    within ``rtol`` of each other (relative to ``max |w|``) count as one atom.
    """
    w = np.sort(np.asarray(w, dtype=float))
    tol = rtol * max(float(np.max(np.abs(w))), 1.0)
    starts = np.concatenate([[True], np.diff(w) > tol])
    idx = np.flatnonzero(starts)
    atoms = w[idx]
    right = np.append(idx[1:], w.size) / w.size
    left = idx / w.size
    phi = normal_cdf(atoms)
    return float(max(np.max(np.abs(right - phi)), np.max(np.abs(left - phi))))


def _sigma(D: CenteredMatrix) -> float:
    n = D.n
    return math.sqrt(2.0 * (n - 2) / ((n - 1) * (n - 3)) * D.sum_d2)


def empirical_cdf_distance(D: CenteredMatrix, cfg: SamplerConfig | None = None) -> tuple[float, float]:
    """Kolmogorov distance of ``W`` from N(0, 1), paired with the explicit bound.

    Exact (full enumeration) when ``n <= cfg.enumeration_cutoff``, otherwise
    estimated from ``cfg.replicates`` Monte Carlo draws.
    """
    D = _require_centered(D)
    cfg = cfg or SamplerConfig()
    if D.sum_d2 == 0:
        raise DegenerateDistribution("Var(U) = 0: W is undefined")
    if D.n <= cfg.enumeration_cutoff:
        u = null_values(D, cfg.enumeration_cutoff)
    else:
        u = mc_null_values(D, cfg)
    return kolmogorov_distance(u / _sigma(D)), berry_esseen_bound(D).delta_bound


@dataclass
class DiagnosticsReport:
    linearity_max_residual: float
    increment_bound_violations: int
    margin_max_abs: float
    empirical_ks_distance: float | None
    delta_bound: float | None
    samples_used: int
    seed: int
    exact: bool = False

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self, indent: int | None = 2) -> str:
        return json.dumps(self.to_dict(), indent=indent)


def diagnose(D, cfg: SamplerConfig | None = None, n_matchings: int = 1000, n_triples: int = 10_000) -> DiagnosticsReport:
    """Run every check on one centered matrix.

    Linearity is checked on ``n_matchings`` sampled matchings and the
    increment bound on ``n_triples`` sampled ``(pi, I, J)``; both use stream
    0 of ``cfg.seed``. The Kolmogorov distance is skipped when ``Var(U) = 0``.
    """
    if isinstance(D, SimilarityMatrix):
        D = center_matrix(D)
    D = _require_centered(D)
    cfg = cfg or SamplerConfig()
    rng = make_rng(cfg.seed, 2**32)
    pis = pairs_to_pair_of(sample_pairs(D.n, n_matchings, rng))
    lin = check_linearity(D, pis)
    tri_pis, pairs = sample_triples(D.n, n_triples, rng)
    violations = check_increment_bound(D, tri_pis, pairs)

    ks = bound = None
    exact = D.n <= cfg.enumeration_cutoff
    if D.sum_d2 > 0:
        ks, bound = empirical_cdf_distance(D, cfg)
    return DiagnosticsReport(
        linearity_max_residual=lin,
        increment_bound_violations=violations,
        margin_max_abs=D.margin_max_abs(),
        empirical_ks_distance=ks,
        delta_bound=bound,
        samples_used=n_matchings + n_triples + (0 if exact else cfg.replicates),
        seed=cfg.seed,
        exact=exact,
    )
