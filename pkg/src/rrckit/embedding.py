"""Time-delay embedding and polynomial (Kronecker power) feature maps.

A length-L window of an n-channel series is flattened block by block
(channel-major, oldest sample first within each block) and expanded into the
stack of its Kronecker powers of orders 1..p plus a trailing constant 1.
Stacking those feature vectors over a whole series yields the data matrices
that model identification consumes.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import DimensionMismatchError, FeatureBudgetError, OutOfRangeError

__all__ = [
    "DEFAULT_FEATURE_BUDGET",
    "TimeSeries",
    "EmbeddingConfig",
    "DataMatrices",
    "feature_dim",
    "delay_embed",
    "kron_power",
    "eth_map",
    "build_data_matrices",
    "autocorrelation",
    "suggest_lag",
]

# Total feature entries allowed in one expansion; d_p(nL) grows like (nL)^p.
DEFAULT_FEATURE_BUDGET = 10_000_000


@dataclass
class TimeSeries:
    """A uniformly sampled n-variate series of T samples (row t = sample x_t).

    ``values`` may be passed as a 1-D array for scalar series; it is stored
    as a (T, 1) column. ``times``, when present, carries the sample
    timestamps; ``dt`` the uniform spacing; ``labels`` the channel names.
    """

    values: np.ndarray
    dt: float | None = None
    labels: list[str] | None = None
    times: np.ndarray | None = None

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.ndim == 1:
            values = values[:, None]
        if values.ndim != 2:
            raise ValueError(f"values must be 1-D or 2-D, got ndim={values.ndim}")
        if values.shape[0] < 1 or values.shape[1] < 1:
            raise ValueError(f"values must be non-empty, got shape {values.shape}")
        if not np.all(np.isfinite(values)):
            raise ValueError("values must be finite")
        self.values = values
        if self.labels is not None and len(self.labels) != values.shape[1]:
            raise ValueError(
                f"{len(self.labels)} labels for {values.shape[1]} channels"
            )
        if self.times is not None:
            times = np.asarray(self.times, dtype=float)
            if times.shape != (values.shape[0],):
                raise ValueError("times must have one entry per sample")
            self.times = times

    @property
    def n(self) -> int:
        return self.values.shape[1]

    @property
    def T(self) -> int:
        return self.values.shape[0]


@dataclass(frozen=True)
class EmbeddingConfig:
    """Window length L and tensor order p of the feature map."""

    L: int
    p: int

    def __post_init__(self):
        if self.L < 1:
            raise ValueError(f"L must be >= 1, got {self.L}")
        if self.p < 1:
            raise ValueError(f"p must be >= 1, got {self.p}")


@dataclass
class DataMatrices:
    """Feature matrix H0 (d_p(nL) x cols), target matrix H1 (nL x cols).

    Column k covers window end time L + k (1-based); ``t_range`` is the
    inclusive (first, last) pair of covered end times.
    """

    H0: np.ndarray
    H1: np.ndarray
    t_range: tuple[int, int]


def feature_dim(m: int, p: int) -> int:
    """Dimension of the order-p feature map on R^m: sum_{k=1..p} m^k + 1."""
    return sum(m**k for k in range(1, p + 1)) + 1


def _check_budget(entries: int, budget: int) -> None:
    if entries > budget:
        raise FeatureBudgetError(
            f"expansion needs {entries} entries, exceeding the budget of {budget}"
        )


@lru_cache(maxsize=64)
def _sorted_monomial_indices(m: int, q: int) -> np.ndarray:
    """(m**q, q) row-major multi-indices with each row sorted ascending.

    Row k corresponds to the k-th entry of the q-fold Kronecker power.
    Sorting each multi-index makes permuted entries evaluate through the
    identical float product, so they compare bit-equal.
    """
    grids = np.meshgrid(*([np.arange(m)] * q), indexing="ij")
    idx = np.stack([g.ravel() for g in grids], axis=1)
    idx.sort(axis=1)
    idx.setflags(write=False)
    return idx


def kron_power(x: np.ndarray, p: int, budget: int = DEFAULT_FEATURE_BUDGET) -> np.ndarray:
    """p-fold Kronecker power of a vector, length len(x)**p.

    Entry ordering follows the recursive definition x (x) x^{(x)(p-1)};
    each entry equals the product of x over its multi-index.
    """
    x = np.asarray(x, dtype=float).ravel()
    if p < 1:
        raise ValueError(f"p must be >= 1, got {p}")
    m = x.size
    _check_budget(m**p, budget)
    if p == 1:
        return x.copy()
    return np.prod(x[_sorted_monomial_indices(m, p)], axis=1)


def eth_map(x: np.ndarray, p: int, budget: int = DEFAULT_FEATURE_BUDGET) -> np.ndarray:
    """Polynomial feature vector [x^(1); x^(2); ...; x^(p); 1] of length d_p(m).

    The final entry is exactly 1, carrying the constant term of any model
    trained on these features.
    """
    x = np.asarray(x, dtype=float).ravel()
    if p < 1:
        raise ValueError(f"p must be >= 1, got {p}")
    m = x.size
    _check_budget(feature_dim(m, p), budget)
    parts = [kron_power(x, q, budget) for q in range(1, p + 1)]
    parts.append(np.array([1.0]))
    return np.concatenate(parts)


def delay_embed(series: TimeSeries, L: int, t: int) -> np.ndarray:
    """Length-nL window vector at end time t (1-based), channel-major.

    Block j holds channel j's samples at times t-L+1 .. t, oldest first.

    Raises
    ------
    OutOfRangeError
        If t < L or t > T.
    """
    if L < 1:
        raise ValueError(f"L must be >= 1, got {L}")
    if t < L or t > series.T:
        raise OutOfRangeError(
            f"t = {t} outside the embeddable range [{L}, {series.T}]"
        )
    window = series.values[t - L : t, :]  # (L, n), rows oldest..newest
    return window.T.reshape(-1).copy()


def _window_matrix(values: np.ndarray, L: int) -> np.ndarray:
    """All delay windows as columns: (nL, T - L + 1), channel-major rows."""
    T, n = values.shape
    cols = T - L + 1
    out = np.empty((n * L, cols))
    for j in range(n):
        for lag in range(L):
            out[j * L + lag, :] = values[lag : lag + cols, j]
    return out


def build_data_matrices(
    x: TimeSeries,
    y: TimeSeries,
    cfg: EmbeddingConfig,
    budget: int = DEFAULT_FEATURE_BUDGET,
) -> DataMatrices:
    """Assemble feature/target matrices over every window of a series pair.

    H0 column k is the order-p feature vector of x's window ending at time
    L + k; H1 column k is y's raw window at the same time. Both series must
    share their length and channel count.
    """
    if x.T != y.T or x.n != y.n:
        raise DimensionMismatchError(
            f"series shapes differ: x is {x.T}x{x.n}, y is {y.T}x{y.n}"
        )
    if x.T < cfg.L:
        raise OutOfRangeError(f"series of length {x.T} too short for L = {cfg.L}")
    m = x.n * cfg.L
    d = feature_dim(m, cfg.p)
    cols = x.T - cfg.L + 1
    _check_budget(d * cols, budget)

    Xw = _window_matrix(x.values, cfg.L)  # (m, cols)
    H1 = _window_matrix(y.values, cfg.L)
    H0 = np.empty((d, cols))
    row = 0
    for q in range(1, cfg.p + 1):
        idx = _sorted_monomial_indices(m, q)
        H0[row : row + m**q, :] = np.prod(Xw[idx, :], axis=1)
        row += m**q
    H0[row, :] = 1.0
    return DataMatrices(H0=H0, H1=H1, t_range=(cfg.L, x.T))


def autocorrelation(x: np.ndarray, max_lag: int) -> np.ndarray:
    """Sample autocorrelation at lags 0..max_lag (biased normalization).

    Returns NaN at every lag for a zero-variance (constant) channel.
    """
    x = np.asarray(x, dtype=float).ravel()
    centered = x - x.mean()
    denom = float(np.dot(centered, centered))
    out = np.empty(max_lag + 1)
    if denom <= 0.0:
        out[:] = np.nan
        return out
    for k in range(max_lag + 1):
        out[k] = float(np.dot(centered[: x.size - k], centered[k:])) / denom
    return out


def suggest_lag(series: TimeSeries) -> tuple[list[int], int]:
    """First lag where each channel's autocorrelation drops below 1/e.

    A heuristic aid for choosing the window length, not part of the training
    path. Constant channels report lag 1. Returns (per-channel lags, their
    maximum).
    """
    if series.T < 3:
        raise ValueError(f"need at least 3 samples, got {series.T}")
    threshold = 1.0 / np.e
    lags = []
    for j in range(series.n):
        acf = autocorrelation(series.values[:, j], series.T - 1)
        if np.isnan(acf[0]):
            lags.append(1)
            continue
        below = np.nonzero(acf[1:] < threshold)[0]
        lags.append(int(below[0]) + 1 if below.size else series.T - 1)
    return lags, max(lags)
