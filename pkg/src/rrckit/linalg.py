"""Truncated-SVD rank, orthogonal projectors, and the greedy sparse least-squares solver.

Everything else in the toolkit reduces to the solver in this module: model
identification solves (possibly rank-deficient) linear systems column by
column, keeping only the coefficients whose magnitude survives a threshold
and re-solving on the restricted support until the iterate stabilizes.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionMismatchError, RankZeroError

__all__ = [
    "SVDFactors",
    "SolverConfig",
    "SparseSolution",
    "heaviside_delta",
    "rank_delta",
    "truncated_projector",
    "sparse_lstsq",
]


@dataclass(frozen=True)
class SVDFactors:
    """Economy-sized SVD of a real matrix A, stored so that U @ diag(S) @ V = A.

    Attributes
    ----------
    U : (m, s) ndarray
        Left singular vectors, orthonormal columns, s = min(m, n).
    S : (s,) ndarray
        Singular values, non-increasing and non-negative.
    V : (s, n) ndarray
        Right singular vectors, orthonormal rows.
    """

    U: np.ndarray
    S: np.ndarray
    V: np.ndarray


@dataclass(frozen=True)
class SolverConfig:
    """Parameters of the sparse least-squares solver.

    Attributes
    ----------
    delta : float
        Singular-value threshold and convergence tolerance. Must be > 0.
    max_iter : int
        Iteration cap per column. Must be >= 1.
    epsilon : float
        Support-inclusion threshold: coefficients with magnitude <= epsilon
        are dropped between refinement passes. epsilon = 0 keeps every
        nonzero coefficient ("keep-all" mode).
    """

    delta: float
    max_iter: int = 50
    epsilon: float = 1e-8

    def __post_init__(self):
        if not self.delta > 0:
            raise ValueError(f"delta must be > 0, got {self.delta}")
        if self.max_iter < 1:
            raise ValueError(f"max_iter must be >= 1, got {self.max_iter}")
        if self.epsilon < 0:
            raise ValueError(f"epsilon must be >= 0, got {self.epsilon}")


@dataclass
class SparseSolution:
    """Result of :func:`sparse_lstsq`.

    Attributes
    ----------
    X : (n, p) ndarray
        Coefficient matrix, one solution per right-hand-side column.
    nnz_per_column : list of int
        Number of nonzero entries in each returned column.
    iterations_per_column : list of int
        Refinement passes executed per column; equal to the cap when the
        column did not converge (not an error).
    residual_norms : list of float
        Euclidean residual ||A x_j - y_j|| per column, in the original
        (unprojected) system.
    rank : int
        Numerical rank of A at the configured threshold.
    """

    X: np.ndarray
    nnz_per_column: list[int] = field(default_factory=list)
    iterations_per_column: list[int] = field(default_factory=list)
    residual_norms: list[float] = field(default_factory=list)
    rank: int = 0


def heaviside_delta(x: float, delta: float) -> int:
    """Thresholded step function: 1 if x > delta, else 0. Requires delta > 0."""
    if not delta > 0:
        raise ValueError(f"delta must be > 0, got {delta}")
    return 1 if x > delta else 0


def _economy_svd(A: np.ndarray) -> SVDFactors:
    U, S, V = np.linalg.svd(np.asarray(A, dtype=float), full_matrices=False)
    return SVDFactors(U=U, S=S, V=V)


def rank_delta(A: np.ndarray, delta: float) -> int:
    """Numerical rank: the number of singular values strictly above delta.

    Singular values come from an economy-sized SVD; an SVD convergence
    failure propagates as ``numpy.linalg.LinAlgError``.
    """
    if not delta > 0:
        raise ValueError(f"delta must be > 0, got {delta}")
    S = np.linalg.svd(np.asarray(A, dtype=float), compute_uv=False)
    return int(np.sum(S > delta))


def truncated_projector(
    A: np.ndarray, delta: float
) -> tuple[np.ndarray, int, SVDFactors]:
    """Rank-r orthogonal projector onto the top left singular subspace of A.

    r is the numerical rank at threshold delta and Q = sum_{j<=r} u_j u_j^T,
    so ||A - Q A||_F <= sqrt(min(m, n) - r) * delta.

    Returns
    -------
    (Q, r, factors)
        Q : (m, m) orthogonal projector, r : the numerical rank,
        factors : the economy SVD used to build Q.

    Raises
    ------
    RankZeroError
        If no singular value exceeds delta: the data carries no signal
        distinguishable from noise at that threshold.
    """
    factors = _economy_svd(A)
    r = int(np.sum(factors.S > delta))
    if r == 0:
        raise RankZeroError(
            f"rank_delta(A, {delta:g}) = 0: no singular value exceeds the threshold"
        )
    Ur = factors.U[:, :r]
    return Ur @ Ur.T, r, factors


def _minimum_norm_lstsq(A: np.ndarray, y: np.ndarray) -> np.ndarray:
    # SVD-backed minimum-norm least squares; deterministic on rank-deficient
    # subproblems, which magnitude-restricted supports routinely produce.
    return np.linalg.lstsq(A, y, rcond=None)[0]


def sparse_lstsq(A: np.ndarray, Y: np.ndarray, cfg: SolverConfig) -> SparseSolution:
    """Greedy truncated-SVD sparse least squares, column by column.

    The system is projected onto the top-r left singular subspace of A
    (r the numerical rank at ``cfg.delta``); each column starts from the
    delta-truncated pseudoinverse solution and is refined by repeatedly
    keeping the largest-magnitude coefficients (strictly above
    ``cfg.epsilon``, at least one, at most r) and re-solving the restricted
    subproblem by minimum-norm least squares. A column stops when its
    max-norm update falls to ``cfg.delta`` or after ``cfg.max_iter`` passes.

    Every returned column x then has at most r nonzero entries and, on
    well-posed inputs, satisfies
    ``||A x - y|| <= ||x|| * sqrt(r*(min(m,n)-r)) * delta + ||(I - Q) y||``
    with Q the truncated projector of A.

    Parameters
    ----------
    A : (m, n) ndarray
    Y : (m,) or (m, p) ndarray
        Right-hand sides; a vector is treated as a single column.
    cfg : SolverConfig

    Raises
    ------
    RankZeroError
        If ``rank_delta(A, cfg.delta) == 0``.
    DimensionMismatchError
        If Y does not have m rows.
    """
    A = np.asarray(A, dtype=float)
    Y = np.asarray(Y, dtype=float)
    if Y.ndim == 1:
        Y = Y[:, None]
    m, n = A.shape
    if Y.shape[0] != m:
        raise DimensionMismatchError(
            f"Y has {Y.shape[0]} rows, expected {m} to match A"
        )
    p = Y.shape[1]

    factors = _economy_svd(A)
    r = int(np.sum(factors.S > cfg.delta))
    if r == 0:
        raise RankZeroError(
            f"rank_delta(A, {cfg.delta:g}) = 0: no singular value exceeds the threshold"
        )

    Ur = factors.U[:, :r]
    A_hat = Ur.T @ A                      # (r, n) projected system
    Y_hat = Ur.T @ Y                      # (r, p)
    X0 = factors.V[:r].T @ (Y_hat / factors.S[:r, None])  # truncated-pinv start

    def support_size(magnitudes: np.ndarray) -> int:
        # At least one column is always kept; at most r can carry signal.
        return min(max(int(np.sum(magnitudes > cfg.epsilon)), 1), r)

    X = np.zeros((n, p))
    nnz, iters, residuals = [], [], []
    for j in range(p):
        x_prev = X0[:, j].copy()
        # Stable descending-magnitude order; ties resolve to the lower index.
        order = np.argsort(-np.abs(x_prev), kind="stable")
        n0 = support_size(np.abs(x_prev))
        x = x_prev
        k = 0
        error = 1.0 + cfg.delta
        while k < cfg.max_iter and error > cfg.delta:
            support = order[:n0]
            coeffs = _minimum_norm_lstsq(A_hat[:, support], Y_hat[:, j])
            x = np.zeros(n)
            x[support] = coeffs
            error = float(np.max(np.abs(x - x_prev))) if n else 0.0
            x_prev = x
            order = np.argsort(-np.abs(x), kind="stable")
            n0 = support_size(np.abs(x))
            k += 1
        X[:, j] = x
        nnz.append(int(np.count_nonzero(x)))
        iters.append(k)
        residuals.append(float(np.linalg.norm(A @ x - Y[:, j])))

    return SparseSolution(
        X=X,
        nnz_per_column=nnz,
        iterations_per_column=iters,
        residual_norms=residuals,
        rank=r,
    )
