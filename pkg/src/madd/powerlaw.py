"""Discrete truncated power-law fitting.

The model is a probability mass function over integers x >= x_min,

    p(x) = x**-alpha * exp(-lam * x) / Z(alpha, lam, x_min),

whose pure power-law limit (lam = 0) normalizes through the Hurwitz zeta
function. Fitting proceeds in two documented stages:

1. x_min and alpha: for every candidate x_min (the sorted unique sample
   values that leave at least ``min_tail`` samples in the tail), alpha is
   estimated by discrete maximum likelihood and a coarse cutoff search is
   run; the candidate minimizing the Kolmogorov-Smirnov distance between
   the empirical and fitted tail CDFs wins (ties go to the smallest x_min).
2. lam and alpha refinement: with x_min frozen, coordinate ascent
   alternates a bounded one-dimensional likelihood search for lam in
   [0, 1] with a re-fit of alpha, until the log-likelihood stops improving.

The reported normalization constant uses the continuous closed form
c = (alpha - 1) / x_min**(1 - alpha), which is the constant the rest of the
attribute pipeline expects alongside the fitted (alpha, lam, x_min).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize, minimize_scalar
from scipy.special import zeta

from .errors import DegenerateSamples, InsufficientData

ALPHA_BOUNDS = (1.001, 8.0)
LAMBDA_BOUNDS = (0.0, 1.0)
# Coarse cutoff grid used during x_min selection; stage 2 refines around the
# best coarse value. 0 is included so pure power-law data stays exact.
_COARSE_LAMBDAS = (0.0,) + tuple(np.logspace(-4, 0, 13))
_REL_TOL = 1e-12
_MAX_TABLE = 1 << 24


def _norm_constant(alpha: float, lam: float, x_min: int) -> float:
    """Z = sum_{k >= x_min} k^-alpha e^(-lam k), by zeta or chunked sums."""
    if lam <= 0.0:
        return float(zeta(alpha, x_min))
    total = 0.0
    lo = x_min
    chunk = 1 << 16
    while True:
        k = np.arange(lo, lo + chunk, dtype=np.float64)
        total += float(np.sum(k**-alpha * np.exp(-lam * k)))
        lo += chunk
        # remaining tail <= e^(-lam*lo) * zeta(alpha, lo)
        tail_bound = float(np.exp(-lam * lo) * zeta(alpha, lo))
        if tail_bound <= _REL_TOL * total:
            return total
        chunk = min(chunk * 2, 1 << 22)


def _log_likelihood(
    alpha: float, lam: float, x_min: int, n: int, sum_log: float, sum_x: float
) -> float:
    z = _norm_constant(alpha, lam, x_min)
    if not np.isfinite(z) or z <= 0.0:
        return -np.inf
    return -alpha * sum_log - lam * sum_x - n * np.log(z)


def _fit_alpha(lam: float, x_min: int, n: int, sum_log: float, sum_x: float) -> float:
    res = minimize_scalar(
        lambda a: -_log_likelihood(a, lam, x_min, n, sum_log, sum_x),
        bounds=ALPHA_BOUNDS,
        method="bounded",
        options={"xatol": 1e-6},
    )
    return float(res.x)


def _coarse_lambda(alpha: float, x_min: int, n: int, sum_log: float, sum_x: float) -> float:
    best_lam, best_ll = 0.0, -np.inf
    for lam in _COARSE_LAMBDAS:
        ll = _log_likelihood(alpha, lam, x_min, n, sum_log, sum_x)
        if ll > best_ll:
            best_ll, best_lam = ll, lam
    return best_lam


def _fit_lambda(alpha: float, x_min: int, n: int, sum_log: float, sum_x: float) -> float:
    best_lam = _coarse_lambda(alpha, x_min, n, sum_log, sum_x)
    if best_lam == 0.0:
        return 0.0
    best_ll = _log_likelihood(alpha, best_lam, x_min, n, sum_log, sum_x)
    res = minimize_scalar(
        lambda lam: -_log_likelihood(alpha, lam, x_min, n, sum_log, sum_x),
        bounds=(best_lam / 4.0, min(best_lam * 4.0, LAMBDA_BOUNDS[1])),
        method="bounded",
        options={"xatol": 1e-7},
    )
    refined = float(res.x)
    if _log_likelihood(alpha, refined, x_min, n, sum_log, sum_x) >= best_ll:
        return refined
    return best_lam


@dataclass(frozen=True)
class PowerLawFit:
    """Fitted truncated power law with cached distribution tables."""

    alpha: float
    lam: float
    c: float
    x_min: int
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        if self.alpha <= 1.0:
            raise ValueError(f"alpha must exceed 1, got {self.alpha}")
        if self.lam < 0.0:
            raise ValueError(f"lam must be non-negative, got {self.lam}")
        if self.x_min < 1:
            raise ValueError(f"x_min must be >= 1, got {self.x_min}")

    @staticmethod
    def closed_form_c(alpha: float, x_min: int) -> float:
        if x_min < 1:
            raise ValueError(f"x_min must be >= 1, got {x_min}")
        return (alpha - 1.0) / x_min ** (1.0 - alpha)

    @classmethod
    def from_params(cls, alpha: float, lam: float, x_min: int) -> "PowerLawFit":
        return cls(alpha=alpha, lam=lam, c=cls.closed_form_c(alpha, x_min), x_min=x_min)

    @property
    def normalization(self) -> float:
        z = self._cache.get("z")
        if z is None:
            z = _norm_constant(self.alpha, self.lam, self.x_min)
            self._cache["z"] = z
        return z

    def pmf(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        out = np.where(x >= self.x_min, x**-self.alpha * np.exp(-self.lam * x), 0.0)
        return out / self.normalization

    def cdf(self, x):
        """P(X <= x); 0 below x_min, where the fit is not considered valid."""
        x_arr = np.asarray(x, dtype=np.float64)
        scalar = x_arr.ndim == 0
        xi = np.floor(np.atleast_1d(x_arr)).astype(np.int64)
        out = np.zeros(xi.shape, dtype=np.float64)
        inside = xi >= self.x_min
        if np.any(inside):
            if self.lam <= 0.0:
                ks = xi[inside].astype(np.float64)
                out[inside] = 1.0 - zeta(self.alpha, ks + 1.0) / self.normalization
            else:
                table = self._table()
                pos = np.minimum(xi[inside] - self.x_min, len(table) - 1)
                out[inside] = table[pos]
        out = np.clip(out, 0.0, 1.0)
        return float(out[0]) if scalar else out

    def _table(self) -> np.ndarray:
        """Cumulative probabilities from x_min out to where the cutoff has
        extinguished all but ~1e-15 of the mass (queries beyond clamp to the
        last entry). Only used for lam > 0."""
        table = self._cache.get("table")
        if table is None:
            end = self.x_min + min(int(np.ceil(40.0 / self.lam)), _MAX_TABLE)
            ks = np.arange(self.x_min, end + 1, dtype=np.float64)
            table = np.cumsum(ks**-self.alpha * np.exp(-self.lam * ks))
            table /= self.normalization
            table = np.clip(table, 0.0, 1.0)
            self._cache["table"] = table
        return table


def fit_truncated_power_law(
    samples,
    *,
    min_tail: int = 50,
    max_candidates: int = 40,
) -> PowerLawFit:
    """Fit (alpha, lam, x_min) to positive-integer samples by MLE.

    Raises InsufficientData for fewer than 50 samples or fewer than 10
    distinct values, and DegenerateSamples when every value is equal.
    Deterministic for a fixed input order.
    """
    x = np.asarray(list(samples), dtype=np.int64)
    if x.size and x.min() < 1:
        raise ValueError("samples must be positive integers")
    uniq = np.unique(x)
    if uniq.size == 1:
        raise DegenerateSamples(f"all {x.size} samples equal {int(uniq[0])}")
    if x.size < 50 or uniq.size < 10:
        raise InsufficientData(
            f"need >= 50 samples with >= 10 distinct values, "
            f"got {x.size} samples / {uniq.size} distinct"
        )

    x_sorted = np.sort(x)
    log_sorted = np.log(x_sorted.astype(np.float64))
    # Candidates: unique values that keep at least min_tail samples above them.
    tail_counts = x.size - np.searchsorted(x_sorted, uniq, side="left")
    candidates = uniq[tail_counts >= min_tail]
    if candidates.size == 0:
        candidates = uniq[:1]
    if candidates.size > max_candidates:
        idx = np.linspace(0, candidates.size - 1, max_candidates).round().astype(int)
        candidates = candidates[np.unique(idx)]

    best = None  # (ks, x_min, alpha, lam)
    for x_min in candidates.tolist():
        start = int(np.searchsorted(x_sorted, x_min, side="left"))
        tail = x_sorted[start:]
        n = tail.size
        sum_log = float(log_sorted[start:].sum())
        sum_x = float(tail.sum())
        alpha = _fit_alpha(0.0, x_min, n, sum_log, sum_x)
        lam = _coarse_lambda(alpha, x_min, n, sum_log, sum_x)
        if lam > 0.0:
            alpha = _fit_alpha(lam, x_min, n, sum_log, sum_x)
        ks = _ks_distance(tail, alpha, lam, x_min)
        if best is None or ks < best[0] - 1e-12:
            best = (ks, x_min, alpha, lam)

    _, x_min, alpha, lam = best
    start = int(np.searchsorted(x_sorted, x_min, side="left"))
    tail = x_sorted[start:]
    n = tail.size
    sum_log = float(log_sorted[start:].sum())
    sum_x = float(tail.sum())

    lam = _fit_lambda(alpha, x_min, n, sum_log, sum_x)
    alpha = _fit_alpha(lam, x_min, n, sum_log, sum_x)
    if lam > 0.0:
        # The likelihood surface has a narrow (alpha, lam) ridge; a joint
        # simplex polish converges where coordinate ascent crawls.
        def neg_ll(p):
            a = float(np.clip(p[0], *ALPHA_BOUNDS))
            l = float(np.clip(p[1], *LAMBDA_BOUNDS))
            return -_log_likelihood(a, l, x_min, n, sum_log, sum_x)

        res = minimize(
            neg_ll,
            x0=[alpha, lam],
            method="Nelder-Mead",
            options={"xatol": 1e-7, "fatol": 1e-9, "maxiter": 500},
        )
        if -res.fun >= _log_likelihood(alpha, lam, x_min, n, sum_log, sum_x):
            alpha = float(np.clip(res.x[0], *ALPHA_BOUNDS))
            lam = float(np.clip(res.x[1], *LAMBDA_BOUNDS))

    return PowerLawFit.from_params(alpha=float(alpha), lam=float(lam), x_min=int(x_min))


def _ks_distance(tail_sorted: np.ndarray, alpha: float, lam: float, x_min: int) -> float:
    values, counts = np.unique(tail_sorted, return_counts=True)
    ecdf = np.cumsum(counts) / tail_sorted.size
    fit = PowerLawFit.from_params(alpha, lam, x_min)
    model = fit.cdf(values)
    return float(np.max(np.abs(ecdf - model)))
