"""Training, evaluation, rollout, and persistence of regressive reservoir computers.

A trained model maps a delay window through the polynomial feature map, the
monomial compression matrix, and a sparse output-coupling matrix; a 0/1
selector then extracts one predicted sample per channel from the dilated
output. Iterating prediction and window sliding simulates the system
forward.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .compression import CompressionMatrix, compress, compression_matrix
from .embedding import EmbeddingConfig, TimeSeries, build_data_matrices, eth_map
from .errors import (
    DimensionMismatchError,
    ModelFormatError,
    ModelVersionError,
    NumericBlowupError,
)
from .linalg import SolverConfig, sparse_lstsq

__all__ = [
    "SCHEMA_VERSION",
    "TrainingDiagnostics",
    "RRCModel",
    "selector_matrix",
    "train_rrc",
    "train_autoregressive",
    "transform",
    "forecast",
    "save_model",
    "load_model",
]

SCHEMA_VERSION = 1
_FORMAT_MARKER = "rrc-model"
_RNG_NAME = "numpy-pcg64"


@dataclass
class TrainingDiagnostics:
    """Fit quality and provenance recorded at training time."""

    rank: int
    nnz: int
    residual_fro: float
    relative_residual: float
    column_residuals: list[float]
    column_bounds: list[float]
    train_min: list[float]
    train_max: list[float]
    delta: float
    epsilon: float
    max_iter: int
    nu: float
    seed: int
    rng_name: str = _RNG_NAME


@dataclass(eq=False)
class RRCModel:
    """A trained model: embedding parameters, compression, output coupling.

    W_hat has one row per window slot (nL rows) and one column per
    compressed feature; selector_offset in [1, L] picks which slot of each
    channel block the selector exposes (L = newest, which is what advances
    an autoregressive rollout).
    """

    n: int
    L: int
    p: int
    selector_offset: int
    R: CompressionMatrix
    W_hat: np.ndarray
    diagnostics: TrainingDiagnostics

    def __post_init__(self):
        nL = self.n * self.L
        if self.W_hat.shape != (nL, self.R.rows):
            raise DimensionMismatchError(
                f"W_hat shape {self.W_hat.shape}, expected ({nL}, {self.R.rows})"
            )
        if not 1 <= self.selector_offset <= self.L:
            raise ValueError(
                f"selector_offset must lie in [1, {self.L}], got {self.selector_offset}"
            )

    def __eq__(self, other) -> bool:
        if not isinstance(other, RRCModel):
            return NotImplemented
        return (
            (self.n, self.L, self.p, self.selector_offset)
            == (other.n, other.L, other.p, other.selector_offset)
            and self.R == other.R
            and np.array_equal(self.W_hat, other.W_hat)
            and self.diagnostics == other.diagnostics
        )

    @property
    def selector_indices(self) -> np.ndarray:
        """0-based window-slot index selected for each channel."""
        return np.arange(self.n) * self.L + (self.selector_offset - 1)


def selector_matrix(n: int, L: int, offset: int) -> np.ndarray:
    """0/1 matrix (n x nL) whose row j selects window slot (j-1)*L + offset."""
    if not 1 <= offset <= L:
        raise ValueError(f"offset must lie in [1, {L}], got {offset}")
    K = np.zeros((n, n * L))
    for j in range(n):
        K[j, j * L + offset - 1] = 1.0
    return K


def train_rrc(
    x: TimeSeries,
    y: TimeSeries,
    cfg: EmbeddingConfig,
    solver: SolverConfig,
    seed: int = 0,
    nu: float = 1.0,
    group_eps: float | None = None,
    selector_offset: int | None = None,
) -> RRCModel:
    """Identify the sparse output-coupling matrix mapping x windows to y windows.

    Builds the compression matrix from the given seed, assembles the
    feature/target matrices, and solves W_hat (R H0) = H1 through the
    transposed system so each output row is fitted independently by the
    sparse solver.

    Raises
    ------
    RankZeroError
        If the compressed feature matrix has numerical rank 0 at
        ``solver.delta``.
    DimensionMismatchError
        If the series shapes disagree.
    """
    R = compression_matrix(x.n, cfg.L, cfg.p, nu=nu, eps=group_eps, seed=seed)
    data = build_data_matrices(x, y, cfg)
    G = compress(R, data.H0)              # (rho, cols)
    A_sys = G.T                           # (cols, rho)
    Y_sys = data.H1.T                     # (cols, nL)
    solution = sparse_lstsq(A_sys, Y_sys, solver)
    # C-contiguous so matvecs match a reloaded model bit for bit.
    W_hat = np.ascontiguousarray(solution.X.T)  # (nL, rho)

    # Per-column certificate pieces, without materializing the projector.
    U, S, _ = np.linalg.svd(A_sys, full_matrices=False)
    r = solution.rank
    s_nm = float(np.sqrt(r * (min(A_sys.shape) - r)))
    Ur = U[:, :r]
    deflated = Y_sys - Ur @ (Ur.T @ Y_sys)
    bounds = [
        float(
            np.linalg.norm(solution.X[:, j]) * s_nm * solver.delta
            + np.linalg.norm(deflated[:, j])
        )
        for j in range(Y_sys.shape[1])
    ]

    residual_fro = float(np.linalg.norm(W_hat @ G - data.H1))
    h1_norm = float(np.linalg.norm(data.H1))
    diagnostics = TrainingDiagnostics(
        rank=r,
        nnz=int(np.count_nonzero(W_hat)),
        residual_fro=residual_fro,
        relative_residual=residual_fro / h1_norm if h1_norm > 0 else 0.0,
        column_residuals=[float(v) for v in solution.residual_norms],
        column_bounds=bounds,
        train_min=[float(v) for v in x.values.min(axis=0)],
        train_max=[float(v) for v in x.values.max(axis=0)],
        delta=solver.delta,
        epsilon=solver.epsilon,
        max_iter=solver.max_iter,
        nu=nu,
        seed=seed,
    )
    return RRCModel(
        n=x.n,
        L=cfg.L,
        p=cfg.p,
        selector_offset=cfg.L if selector_offset is None else selector_offset,
        R=R,
        W_hat=W_hat,
        diagnostics=diagnostics,
    )


def train_autoregressive(
    x: TimeSeries,
    cfg: EmbeddingConfig,
    solver: SolverConfig,
    seed: int = 0,
    **kwargs,
) -> RRCModel:
    """Train on one-step-ahead targets: pair each sample with its successor."""
    if x.T < cfg.L + 1:
        raise ValueError(
            f"autoregressive training needs at least L + 1 = {cfg.L + 1} samples, got {x.T}"
        )
    x_in = TimeSeries(x.values[:-1], dt=x.dt, labels=x.labels)
    y_out = TimeSeries(x.values[1:], dt=x.dt, labels=x.labels)
    return train_rrc(x_in, y_out, cfg, solver, seed=seed, **kwargs)


def transform(model: RRCModel, window: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Apply the trained map to one delay window.

    Returns (y_dilated, y_selected): the full nL-dimensional output and the
    n entries the selector exposes.
    """
    window = np.asarray(window, dtype=float).ravel()
    nL = model.n * model.L
    if window.size != nL:
        raise DimensionMismatchError(f"window has {window.size} entries, expected {nL}")
    y_dilated = model.W_hat @ compress(model.R, eth_map(window, model.p))
    return y_dilated, y_dilated[model.selector_indices]


def _rollout_guard(model: RRCModel, guard_factor: float) -> float:
    lo = np.asarray(model.diagnostics.train_min)
    hi = np.asarray(model.diagnostics.train_max)
    scale = float(np.max(hi - lo))
    if scale <= 0.0:
        scale = max(1.0, float(np.max(np.abs(np.concatenate([lo, hi])))))
    return guard_factor * scale


def forecast(
    model: RRCModel,
    seed_window: np.ndarray,
    horizon: int,
    guard_factor: float = 1e6,
) -> TimeSeries:
    """Autoregressive rollout: predict, slide each channel block, repeat.

    Parameters
    ----------
    seed_window : (nL,) array
        Starting delay window (channel-major, oldest first per block).
    horizon : int
        Number of steps to simulate.
    guard_factor : float
        Divergence guard; a predicted entry whose magnitude exceeds
        guard_factor times the training data range aborts the rollout.

    Raises
    ------
    NumericBlowupError
        When the rollout diverges past the guard (carries the step index).
    """
    if horizon < 1:
        raise ValueError(f"horizon must be >= 1, got {horizon}")
    window = np.asarray(seed_window, dtype=float).ravel().copy()
    nL = model.n * model.L
    if window.size != nL:
        raise DimensionMismatchError(
            f"seed window has {window.size} entries, expected {nL}"
        )
    guard = _rollout_guard(model, guard_factor)
    out = np.empty((horizon, model.n))
    for step in range(1, horizon + 1):
        _, y_sel = transform(model, window)
        worst = float(np.max(np.abs(y_sel)))
        if not np.isfinite(worst) or worst > guard:
            raise NumericBlowupError(step=step, value=worst, guard=guard)
        out[step - 1] = y_sel
        for j in range(model.n):
            block = slice(j * model.L, (j + 1) * model.L)
            window[block] = np.append(window[block][1:], y_sel[j])
    return TimeSeries(out)


def save_model(model: RRCModel, path: str | Path) -> None:
    """Write the model as a versioned JSON document (lossless round trip)."""
    rows, cols = model.W_hat.shape
    triplets = [
        [int(i), int(j), float(model.W_hat[i, j])]
        for i, j in zip(*np.nonzero(model.W_hat))
    ]
    doc = {
        "format": _FORMAT_MARKER,
        "schema_version": SCHEMA_VERSION,
        "n": model.n,
        "L": model.L,
        "p": model.p,
        "selector_offset": model.selector_offset,
        "compression": {
            "rho": model.R.rows,
            "d": model.R.cols,
            "groups": [list(g) for g in model.R.groups],
            "group_spread": model.R.group_spread,
        },
        "W_hat": {"rows": rows, "cols": cols, "triplets": triplets},
        "diagnostics": asdict(model.diagnostics),
    }
    Path(path).write_text(json.dumps(doc, indent=1), encoding="utf-8")


def load_model(path: str | Path) -> RRCModel:
    """Read a model written by :func:`save_model`.

    Raises
    ------
    ModelFormatError
        If the file is not a model document.
    ModelVersionError
        If the schema version is unsupported.
    """
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise ModelFormatError(f"not a model file: {exc}") from exc
    if not isinstance(doc, dict) or doc.get("format") != _FORMAT_MARKER:
        raise ModelFormatError("missing or wrong format marker")
    version = doc.get("schema_version")
    if version != SCHEMA_VERSION:
        raise ModelVersionError(
            f"unsupported schema version {version}, expected {SCHEMA_VERSION}"
        )
    comp = doc["compression"]
    R = CompressionMatrix(
        groups=tuple(tuple(int(k) for k in g) for g in comp["groups"]),
        n=doc["n"],
        L=doc["L"],
        p=doc["p"],
        group_spread=float(comp["group_spread"]),
    )
    w_doc = doc["W_hat"]
    W_hat = np.zeros((w_doc["rows"], w_doc["cols"]))
    for i, j, value in w_doc["triplets"]:
        W_hat[int(i), int(j)] = float(value)
    return RRCModel(
        n=doc["n"],
        L=doc["L"],
        p=doc["p"],
        selector_offset=doc["selector_offset"],
        R=R,
        W_hat=W_hat,
        diagnostics=TrainingDiagnostics(**doc["diagnostics"]),
    )
