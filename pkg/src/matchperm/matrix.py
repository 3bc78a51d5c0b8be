"""Similarity matrices, the double-centering transform and exact moments.

The permutation statistic only ever sees ``e[i, j] + e[j, i]`` for a matched
pair, so matrices are symmetrized on ingestion and the diagonal is ignored.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Literal

import numpy as np

from .errors import InternalConsistencyError, InvalidDimension, InvalidValue, TooSmall

Policy = Literal["average", "strict"]

# Relative tolerance used for negative-variance clamping and symmetry checks.
RTOL = 1e-12
# Centered entries below this multiple of max|e| are rounding noise.
_SNAP = 64 * np.finfo(float).eps


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a, dtype=float)
    a.flags.writeable = False
    return a


def _check_side(n: int) -> None:
    if n % 2:
        raise InvalidDimension(f"number of subjects must be even, got n={n}")
    if n < 4:
        raise TooSmall(f"need at least 4 subjects, got n={n}")


def _as_square(raw) -> np.ndarray:
    a = np.array(raw, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise InvalidDimension(f"expected a square matrix, got shape {a.shape}")
    return a


def _offdiag(a: np.ndarray) -> np.ndarray:
    return a[~np.eye(a.shape[0], dtype=bool)]


@dataclass(frozen=True, eq=False)
class SimilarityMatrix:
    """Symmetric scores with zero diagonal for an even number of subjects.

    Build instances with :func:`ingest` or :func:`read_csv`; the constructor
    does not validate.
    """

    e: np.ndarray
    row_sums: np.ndarray
    total: float
    warnings: tuple[str, ...] = ()

    @property
    def n(self) -> int:
        return self.e.shape[0]


@dataclass(frozen=True, eq=False)
class CenteredMatrix:
    """Double-centered scores ``d`` whose row, column and grand sums vanish."""

    d: np.ndarray
    alpha: float
    sum_d2: float
    sum_d4: float

    @property
    def n(self) -> int:
        return self.d.shape[0]

    @property
    def max_abs(self) -> float:
        return float(np.max(np.abs(self.d)))

    def margin_max_abs(self) -> float:
        """Largest absolute row, column or grand sum of ``d``."""
        rows = np.abs(self.d.sum(axis=1)).max()
        cols = np.abs(self.d.sum(axis=0)).max()
        grand = abs(math.fsum(self.d.ravel()))
        return float(max(rows, cols, grand))


@dataclass(frozen=True)
class Moments:
    mean: float
    variance: float


def ingest(raw, policy: Policy = "average") -> SimilarityMatrix:
    """Validate a raw square grid and turn it into a :class:`SimilarityMatrix`.

    Parameters
    ----------
    raw : array_like, shape (n, n)
        Scores ``c(X_i, X_j)``. ``n`` must be even and at least 4.
    policy : {"average", "strict"}
        ``"average"`` replaces the grid by ``(raw + raw.T) / 2``. This leaves
        the statistic unchanged for every matching. ``"strict"`` rejects
        asymmetric input instead.

    Returns
    -------
    SimilarityMatrix
        A nonzero diagonal is zeroed and noted in ``warnings``.
    """
    a = _as_square(raw)
    n = a.shape[0]
    _check_side(n)
    if not np.all(np.isfinite(a)):
        raise InvalidValue("similarity matrix contains non-finite entries")
    if policy not in ("average", "strict"):
        raise ValueError(f"unknown symmetrization policy {policy!r}")

    warnings = []
    if np.any(np.diag(a) != 0):
        warnings.append("nonzero diagonal entries were set to 0; they never enter the statistic")
    np.fill_diagonal(a, 0.0)

    asym = np.max(np.abs(a - a.T))
    if asym > 0:
        if policy == "strict" and asym > RTOL * np.max(np.abs(a)):
            raise InvalidValue(f"matrix is not symmetric (max |e_ij - e_ji| = {asym:g})")
        a = (a + a.T) / 2.0

    row_sums = a.sum(axis=1)
    total = math.fsum(a.ravel())
    return SimilarityMatrix(_readonly(a), _readonly(row_sums), float(total), tuple(warnings))


def _center(a: np.ndarray) -> np.ndarray:
    n = a.shape[0]
    r = a.sum(axis=1)
    c = a.sum(axis=0)
    t = math.fsum(a.ravel())
    d = a - r[:, None] / (n - 2) - c[None, :] / (n - 2) + t / ((n - 1) * (n - 2))
    d = (d + d.T) / 2.0
    np.fill_diagonal(d, 0.0)
    return d


def center_matrix(E: SimilarityMatrix) -> CenteredMatrix:
    """Double-center the scores so that every margin of ``d`` is zero.

    ``d_ij = e_ij - e_i+/(n-2) - e_+j/(n-2) + e_++/((n-1)(n-2))`` off the
    diagonal and 0 on it. The transform ignores constant shifts of the
    off-diagonal entries, so the off-diagonal mean is removed first and a
    second centering pass mops up the rounding left by the first.
    """
    e = E.e
    n = E.n
    scale = float(np.max(np.abs(e)))
    shifted = e - math.fsum(_offdiag(e)) / (n * (n - 1))
    np.fill_diagonal(shifted, 0.0)
    d = _center(_center(shifted))
    if np.max(np.abs(d)) <= _SNAP * scale:
        d = np.zeros_like(d)
    off = _offdiag(d)
    alpha = float(off.max() - off.min())
    sq = off * off
    return CenteredMatrix(
        d=_readonly(d),
        alpha=alpha,
        sum_d2=math.fsum(sq),
        sum_d4=math.fsum(sq * sq),
    )


def _clamp(value: float, scale: float) -> float:
    if value < 0:
        if value < -RTOL * scale:
            raise InternalConsistencyError(
                f"variance evaluated to {value:g}, beyond rounding at scale {scale:g}"
            )
        return 0.0
    if value <= RTOL * scale:
        return 0.0
    return value


def exact_moments(E: SimilarityMatrix) -> Moments:
    """Mean and variance of ``U = sum_i e[i, pi(i)]`` for uniform ``pi``.

    Uses ``EU = e_++/(n-1)`` and the closed-form variance in terms of
    ``sum e^2``, ``e_++`` and the row sums. The variance is invariant to a
    constant shift of the off-diagonal scores, so it is evaluated on the
    mean-removed matrix to avoid cancellation.
    """
    n = E.n
    mean = E.total / (n - 1)
    if center_matrix(E).sum_d2 == 0.0:
        return Moments(mean, 0.0)

    a = E.e - math.fsum(_offdiag(E.e)) / (n * (n - 1))
    np.fill_diagonal(a, 0.0)
    sq = math.fsum((a * a).ravel())
    tot = math.fsum(a.ravel())
    rows = a.sum(axis=1)
    rsq = math.fsum(rows * rows)
    k = 2.0 / ((n - 1) * (n - 3))
    terms = ((n - 2) * sq, tot * tot / (n - 1), -2.0 * rsq)
    var = k * math.fsum(terms)
    scale = k * math.fsum(abs(t) for t in terms)
    return Moments(mean, _clamp(var, scale))


def lemma1_moments(G) -> Moments:
    """Moments of ``V = sum_i g[i, pi(i)]`` for a general zero-diagonal grid.

    ``G`` need not be symmetric. ``EV = sum_i g_i+ / (n-1)``. For the
    variance, with ``f_ij = g_ij - g_i+/(n-1)`` off the diagonal,

        Var V = ((2n-5) sum f_ij^2 + sum f_ij f_ji) / ((n-1)(n-3))

    holds only when the columns of ``f`` also sum to zero. ``V`` depends on
    ``g`` only through ``(g + g.T) / 2``, so the formula is applied to the
    double-centered symmetric part, where it is exact for any ``G``.
    """
    g = _as_square(G.d if isinstance(G, CenteredMatrix) else G)
    n = g.shape[0]
    _check_side(n)
    if not np.all(np.isfinite(g)):
        raise InvalidValue("grid contains non-finite entries")
    if np.any(np.diag(g) != 0):
        raise InvalidValue("grid must have a zero diagonal")

    mean = math.fsum(g.ravel()) / (n - 1)
    h = (g + g.T) / 2.0
    h = h - math.fsum(_offdiag(h)) / (n * (n - 1))
    np.fill_diagonal(h, 0.0)
    f = _center(_center(h))
    s_sq = math.fsum((f * f).ravel())
    s_cross = math.fsum((f * f.T).ravel())
    k = 1.0 / ((n - 1) * (n - 3))
    var = k * ((2 * n - 5) * s_sq + s_cross)
    scale = k * ((2 * n - 5) * s_sq + abs(s_cross))
    return Moments(mean, _clamp(var, scale))


def _is_number(cell: str) -> bool:
    try:
        float(cell)
    except ValueError:
        return False
    return True


def parse_csv_grid(text: str) -> np.ndarray:
    """Parse a dense square matrix from CSV or TSV text.

    A header row and/or header column is detected and dropped when it
    contains a cell that is not a decimal number. Blank lines are skipped.
    """
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise InvalidValue("empty matrix file")
    delimiter = "\t" if "\t" in lines[0] else ","
    rows = [[cell.strip() for cell in row] for row in csv.reader(lines, delimiter=delimiter)]

    if any(not _is_number(c) for c in rows[0][1:]) or (
        len(rows) > 1 and rows[0][0] == "" and len(rows[0]) == len(rows[1])
    ):
        rows = rows[1:]
    if rows and any(not _is_number(r[0]) for r in rows if r):
        rows = [r[1:] for r in rows]

    width = {len(r) for r in rows}
    if len(width) != 1:
        raise InvalidValue("rows have differing numbers of columns")
    try:
        grid = np.array([[float(c) for c in r] for r in rows], dtype=float)
    except ValueError as exc:
        raise InvalidValue(f"unparseable entry: {exc}") from None
    if grid.shape[0] != grid.shape[1]:
        raise InvalidDimension(f"matrix is not square: {grid.shape[0]}x{grid.shape[1]}")
    return grid


def read_csv(path, policy: Policy = "average") -> SimilarityMatrix:
    """Load a similarity matrix from a UTF-8 CSV/TSV file and :func:`ingest` it."""
    text = Path(path).read_text(encoding="utf-8-sig")
    return ingest(parse_csv_grid(text), policy=policy)
