"""Nonnegative state-space model over NMF coefficients.

The generative model treats each data frame ``x_t`` (a nonnegative vector,
e.g. one column of a magnitude spectrogram) as a multinomial draw whose cell
probabilities are ``W @ h_t``, with ``W`` a column-stochastic basis and
``h_t`` a point on the simplex.  The coefficients themselves evolve through a
vector-autoregressive prior with elementwise-exponential innovations:

    mean(h_t | past) = sum_j lags[j] @ h_{t-j},   j = 1..order

Training interleaves EM updates of the basis and coefficients with one
multiplicative sweep on the lag matrices per iteration.  Filtering estimates
``h_t`` causally, one frame at a time: predict the coefficient mean from the
stored history, start the EM refinement at that prediction, and anneal the
prior toward uniform when several refinements are requested.

Training consumes frames at their natural scale, so energetic frames carry
proportionally more weight in the basis and lag fits.  Filtering instead
normalizes each incoming frame to unit mass: the count vector then sums to
one regardless of frame energy, which gives the exponential prior's
``1/eta`` term the same relative strength on every frame and keeps the
tracking behaviour independent of the signal's loudness.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .core import EPS, Array, nonneg_matrix, normalize_columns, stochastic_matrix
from .plca import is_nmf_update_w

__all__ = [
    "ConvergenceError",
    "DnmfModel",
    "TrainConfig",
    "FilterState",
    "predict_state",
    "solve_beta",
    "update_state",
    "build_lag_matrix",
    "estimate_nvar",
    "train",
    "filter_frame",
    "map_objective",
    "concat_models",
]


class ConvergenceError(RuntimeError):
    """Raised when an iterative numerical solve fails to reach tolerance."""


@dataclass
class DnmfModel:
    """A trained factorization with autoregressive coefficient dynamics.

    Attributes
    ----------
    basis : np.ndarray
        Column-stochastic matrix, shape (n_features, n_components).
    lags : list of np.ndarray
        One square nonnegative matrix per autoregressive lag, each of shape
        (n_components, n_components).  Deliberately unnormalized: row scale
        acts as an importance weight between lags.
    """

    basis: Array
    lags: list[Array] = field(default_factory=list)

    def __post_init__(self) -> None:
        self.basis = stochastic_matrix(self.basis, name="basis")
        checked = []
        for j, a in enumerate(self.lags):
            a = nonneg_matrix(a, name=f"lag matrix {j + 1}")
            if a.shape != (self.n_components, self.n_components):
                raise ValueError(
                    f"lag matrix {j + 1} has shape {a.shape}, expected "
                    f"({self.n_components}, {self.n_components})"
                )
            checked.append(a)
        self.lags = checked

    @property
    def n_features(self) -> int:
        return self.basis.shape[0]

    @property
    def n_components(self) -> int:
        return self.basis.shape[1]

    @property
    def order(self) -> int:
        return len(self.lags)


@dataclass
class TrainConfig:
    """Knobs for :func:`train`.

    ``prior_start`` is the EM iteration at which the temporal machinery
    engages: lag matrices are re-estimated from that iteration on, and
    coefficient updates start using predictions one iteration later.
    ``anneal`` tempers predictions elementwise (``eta ** anneal``) so early
    dynamic iterations cannot lock the coefficients too hard.
    """

    iters: int = 100
    prior_start: int = 50
    anneal: float = 0.15
    seed: int = 0
    eps: float = EPS

    def __post_init__(self) -> None:
        if self.iters < 1:
            raise ValueError("iters must be at least 1")
        if not 0 <= self.prior_start <= self.iters:
            raise ValueError("prior_start must lie in [0, iters]")
        if not 0.0 < self.anneal <= 1.0:
            raise ValueError("anneal must lie in (0, 1]")
        if self.eps <= 0.0:
            raise ValueError("eps must be positive")


class FilterState:
    """Mutable state for causal, frame-by-frame coefficient estimation.

    Holds the model, a ring buffer with the last ``model.order`` coefficient
    vectors, the number of EM refinements per frame, and the annealing
    exponent applied to predictions (``prediction ** (anneal / r)`` at inner
    iteration ``r``).  Filtering is fully deterministic: identical state and
    identical frames produce bit-identical coefficient streams.
    """

    def __init__(
        self,
        model: DnmfModel,
        anneal: float = 0.15,
        inner_iters: int = 1,
    ):
        if not 0.0 < anneal <= 1.0:
            raise ValueError("anneal must lie in (0, 1]")
        if inner_iters < 1:
            raise ValueError("inner_iters must be at least 1")
        self.model = model
        self.anneal = float(anneal)
        self.inner_iters = int(inner_iters)
        self.history: deque[Array] = deque(maxlen=model.order)

    def reset(self) -> None:
        """Forget all stored history."""
        self.history.clear()


def predict_state(model: DnmfModel, history) -> Array:
    """Predicted coefficient mean from the autoregressive dynamics.

    Parameters
    ----------
    model : DnmfModel
        Must have ``order >= 1``.
    history : sequence of np.ndarray
        Past coefficient vectors, oldest first; ``history[-1]`` is the most
        recent frame.  Missing lags (fewer than ``order`` entries) are
        substituted with all-ones vectors.

    Returns
    -------
    np.ndarray
        Nonnegative prediction, length ``model.n_components``.
    """
    if model.order < 1:
        raise ValueError("predict_state requires a model with order >= 1")
    ones = np.ones(model.n_components)
    eta = np.zeros(model.n_components)
    n = len(history)
    for j, a in enumerate(model.lags, start=1):
        past = np.asarray(history[n - j], dtype=np.float64) if j <= n else ones
        eta += a @ past
    return eta


def solve_beta(
    c: Array, eta: Array, tol: float = 1e-12, max_iter: int = 200
) -> float:
    """Find the multiplier normalizing the coefficient update to the simplex.

    Solves ``g(beta) = sum_i c[i] / (beta + 1/eta[i]) = 1`` for the unique
    root right of the pole at ``-min(1/eta[i])`` (taken over entries with
    ``c[i] > 0``, where ``g`` is strictly decreasing from +inf to 0).

    Uses Newton's method started at ``sum(c) - 1`` (exact when ``eta`` is
    uniform), safeguarded by a maintained bracket with bisection fallback.

    Parameters
    ----------
    c : np.ndarray
        Nonnegative weighted counts with positive total.
    eta : np.ndarray
        Strictly positive prior means, same length.
    tol : float
        Convergence threshold on ``|g(beta) - 1|``.
    max_iter : int
        Maximum Newton/bisection steps before raising.

    Returns
    -------
    float
        The root ``beta``; ``beta + 1/eta[i] > 0`` wherever ``c[i] > 0``.
    """
    c = np.asarray(c, dtype=np.float64)
    eta = np.asarray(eta, dtype=np.float64)
    if c.shape != eta.shape or c.ndim != 1:
        raise ValueError("c and eta must be 1-D arrays of equal length")
    if np.any(c < 0.0):
        raise ValueError("counts must be nonnegative")
    if np.any(eta <= 0.0):
        raise ValueError("prior means must be strictly positive")
    total = float(c.sum())
    if total <= 0.0:
        raise ValueError("counts must have positive total")

    support = c > 0.0
    cs = c[support]
    inv = 1.0 / eta[support]
    pole = float(-inv.min())

    def g(b: float) -> float:
        return float((cs / (b + inv)).sum())

    # Bracket the root: g(lo) > 1 just right of the pole, g(hi) < 1 far out.
    lo = pole + 1e-9 * max(1.0, abs(pole))
    for _ in range(1100):
        if g(lo) > 1.0:
            break
        lo = pole + (lo - pole) * 0.125
    else:
        raise ConvergenceError("could not bracket the normalizer near its pole")
    hi = max(1.0, total)
    for _ in range(1100):
        if g(hi) < 1.0:
            break
        hi = 2.0 * hi + 1.0
    else:
        raise ConvergenceError("could not bracket the normalizer from above")

    resolution = 8.0 * np.finfo(np.float64).eps
    beta = min(max(total - 1.0, lo), hi)
    for _ in range(max_iter):
        val = g(beta)
        if abs(val - 1.0) <= tol:
            return float(beta)
        if val > 1.0:
            lo = max(lo, beta)
        else:
            hi = min(hi, beta)
        if hi - lo <= resolution * max(1.0, abs(lo), abs(hi)):
            # When the root sits almost on the pole, g moves by more than
            # tol across one float64 ulp of beta, so the residual test can
            # never pass; the bracket itself is then the sharper certificate.
            return float(0.5 * (lo + hi))
        deriv = float(-(cs / (beta + inv) ** 2).sum())
        cand = beta - (val - 1.0) / deriv
        if not lo < cand < hi:
            cand = 0.5 * (lo + hi)
        beta = cand
    raise ConvergenceError(
        f"normalizer did not reach |g(beta)-1| <= {tol:g} in {max_iter} steps"
    )


def _em_step(xf: Array, w: Array, eta: Array, h: Array, eps: float = EPS) -> Array:
    """One constrained EM refinement of a single frame's coefficients.

    ``xf`` is the raw (floored) frame; responsibilities come from the current
    coefficient estimate ``h`` (they enter only through their weighted column
    sums, so the full per-bin posterior is never materialized); ``eta`` is
    the prior mean for this frame.  The counts keep the frame's natural
    scale, so the normalizing multiplier grows with the frame energy and the
    ``1/eta`` prior term acts as a proportionally gentle correction.
    """
    hs = np.maximum(h, eps)
    wh = np.maximum(w @ hs, eps)
    c = hs * (w.T @ (xf / wh))
    beta = solve_beta(c, eta)
    out = c / (beta + 1.0 / eta)
    return out / out.sum()


def update_state(x: Array, model: DnmfModel, eta: Array, coeffs=None) -> Array:
    """Single EM update of one frame's coefficients under a given prior mean.

    Responsibilities are computed from ``coeffs`` when provided, otherwise
    from the prediction ``eta`` itself (the natural estimate before the frame
    is seen).  The result maximizes the responsibility-weighted frame
    objective ``sum_i c[i]*log(h[i]) - h[i]/eta[i]`` over the simplex, with
    the multiplier found by :func:`solve_beta`.

    Parameters
    ----------
    x : np.ndarray
        Nonnegative observation, length ``model.n_features``; floored
        internally but kept at its natural scale.
    model : DnmfModel
        Supplies the basis.
    eta : np.ndarray
        Strictly positive prior mean, length ``model.n_components``.
    coeffs : np.ndarray, optional
        Current coefficient estimate used for the responsibilities.

    Returns
    -------
    np.ndarray
        Updated coefficients on the simplex.
    """
    x = np.asarray(x, dtype=np.float64)
    eta = np.asarray(eta, dtype=np.float64)
    if x.ndim != 1 or x.shape[0] != model.n_features:
        raise ValueError(f"frame must have length {model.n_features}")
    if eta.shape != (model.n_components,) or np.any(eta <= 0.0):
        raise ValueError("eta must be strictly positive with one entry per component")
    if np.any(x < 0.0) or not np.all(np.isfinite(x)):
        raise ValueError("frame must be nonnegative and finite")
    xf = np.maximum(x, EPS)
    src = eta if coeffs is None else np.asarray(coeffs, dtype=np.float64)
    return _em_step(xf, model.basis, eta, src)


def build_lag_matrix(h: Array, order: int) -> Array:
    """Stack lagged coefficient columns for autoregression fitting.

    Column ``t`` of the result is the concatenation of ``h[:, t-1]``,
    ``h[:, t-2]``, ..., ``h[:, t-order]``; out-of-range lags are all-ones.

    Parameters
    ----------
    h : np.ndarray
        Coefficients, shape (I, T).
    order : int
        Number of lags, >= 1.

    Returns
    -------
    np.ndarray
        Lag matrix, shape (I * order, T).
    """
    h = np.asarray(h, dtype=np.float64)
    if h.ndim != 2:
        raise ValueError("coefficients must be 2-D")
    if order < 1:
        raise ValueError("order must be at least 1")
    ncomp, nframes = h.shape
    v = np.ones((ncomp * order, nframes))
    for j in range(1, order + 1):
        if nframes > j:
            v[(j - 1) * ncomp : j * ncomp, j:] = h[:, : nframes - j]
    return v


def estimate_nvar(h: Array, a: Array, v: Array, sweeps: int = 1) -> Array:
    """Multiplicative sweeps fitting the lag matrices to observed dynamics.

    Minimizes the Itakura-Saito divergence ``d_IS(h || a @ v)`` in ``a`` with
    ``v`` held fixed, via the same update as :func:`plca.is_nmf_update_w`.
    The result is not normalized; entry scale carries the relative importance
    of each lag.

    Parameters
    ----------
    h : np.ndarray
        Coefficient trajectories, shape (I, T).
    a : np.ndarray
        Current stacked lag matrices, shape (I, I * order), nonnegative.
    v : np.ndarray
        Lag matrix from :func:`build_lag_matrix`, shape (I * order, T).
    sweeps : int
        Number of multiplicative updates to apply.

    Returns
    -------
    np.ndarray
        Updated stacked lag matrices, same shape as ``a``.
    """
    h = np.asarray(h, dtype=np.float64)
    a = np.asarray(a, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    if a.shape != (h.shape[0], v.shape[0]) or v.shape[1] != h.shape[1]:
        raise ValueError(
            f"inconsistent shapes: h {h.shape}, a {a.shape}, v {v.shape}"
        )
    if sweeps < 1:
        raise ValueError("sweeps must be at least 1")
    for _ in range(sweeps):
        a = is_nmf_update_w(h, a, v)
    return a


def _predict_columns(lags: list[Array], h: Array, t: int, eps: float) -> Array:
    """Prior mean for frame ``t`` from already-updated columns of ``h``."""
    ncomp = h.shape[0]
    ones = np.ones(ncomp)
    eta = np.zeros(ncomp)
    for j, a in enumerate(lags, start=1):
        eta += a @ (h[:, t - j] if t - j >= 0 else ones)
    return np.maximum(eta, eps)


def _normalize_basis(numer: Array) -> Array:
    mass = numer.sum(axis=0)
    if np.any(mass <= 0.0):
        bad = int(np.argmin(mass))
        raise ValueError(
            f"basis column {bad} received zero total mass; "
            "re-initialize with a different seed or a smaller rank"
        )
    return numer / mass


def train(
    x: Array, rank: int, order: int, config: TrainConfig | None = None
) -> tuple[DnmfModel, Array]:
    """Fit basis, coefficients, and lag matrices by generalized EM.

    Each iteration computes responsibilities at the previous parameters and
    then (a) updates the basis, (b) re-estimates every frame's coefficients
    sequentially, and, once ``config.prior_start`` is reached, (c) applies
    one multiplicative sweep to the lag matrices.  Coefficient updates use
    uniform prior means until iteration ``prior_start``; afterwards they use
    annealed predictions built from the lag matrices and the already-updated
    coefficients of earlier frames.

    Parameters
    ----------
    x : np.ndarray
        Nonnegative data, shape (K, T).  Zero entries are floored.
    rank : int
        Number of latent components.
    order : int
        Autoregressive order; 0 disables the temporal prior entirely.
    config : TrainConfig, optional
        Iteration counts, annealing, seed, floor.

    Returns
    -------
    (model, h) : tuple
        The fitted :class:`DnmfModel` and the final simplex coefficients of
        shape (rank, T).
    """
    cfg = config if config is not None else TrainConfig()
    data = nonneg_matrix(x, name="data")
    if rank < 1:
        raise ValueError("rank must be at least 1")
    if order < 0:
        raise ValueError("order must be nonnegative")
    nfeat, nframes = data.shape
    eps = cfg.eps

    rng = np.random.default_rng(cfg.seed)
    xf = np.maximum(data, eps)
    # Seed the basis with randomly chosen data frames (jittered so no two
    # columns coincide): every component then starts as a spectrum the data
    # actually contains, which spreads the dictionary over the signal's
    # states far more reliably than blind noise.
    picks = rng.choice(nframes, size=rank, replace=nframes < rank)
    jitter = rng.uniform(0.05, 0.15, size=(nfeat, rank))
    w = normalize_columns(xf[:, picks] / xf[:, picks].mean(axis=0) + jitter)
    h = normalize_columns(rng.uniform(0.1, 1.1, size=(rank, nframes)))
    lags = [rng.uniform(0.1, 1.1, size=(rank, rank)) for _ in range(order)]

    for it in range(1, cfg.iters + 1):
        if order == 0 or it <= cfg.prior_start:
            # Uniform prior means: every frame decouples, so update in bulk.
            wh = np.maximum(w @ h, eps)
            ratio = xf / wh
            w_new = _normalize_basis(w * (ratio @ h.T))
            counts = h * (w.T @ ratio)
            h = counts / counts.sum(axis=0)
            w = w_new
        else:
            w_acc = np.zeros_like(w)
            h_new = np.empty_like(h)
            for t in range(nframes):
                h_old = np.maximum(h[:, t], eps)
                wh = np.maximum(w @ h_old, eps)
                ratio = xf[:, t] / wh
                w_acc += np.outer(ratio, h_old)
                counts = h_old * (w.T @ ratio)
                eta = _predict_columns(lags, h_new, t, eps) ** cfg.anneal
                beta = solve_beta(counts, eta)
                hv = counts / (beta + 1.0 / eta)
                h_new[:, t] = hv / hv.sum()
            w = _normalize_basis(w * w_acc)
            h = h_new
        if order > 0 and it >= cfg.prior_start:
            v = build_lag_matrix(h, order)
            stacked = estimate_nvar(h, np.hstack(lags), v, sweeps=1)
            lags = [
                stacked[:, j * rank : (j + 1) * rank].copy() for j in range(order)
            ]

    return DnmfModel(basis=w, lags=lags), h


# Floor applied to the prediction before it seeds the EM refinement.  The
# count update is multiplicative in the starting point, so a component whose
# prediction has decayed to ~1e-30 could never re-enter no matter how badly
# the frame needs it.  Flooring the start (and only the start -- the prior
# mean keeps the true prediction) lets one refinement resurrect a component
# whenever the frame is otherwise unexplained, while components that are
# merely redundant stay at the floor and normalize away.
_INIT_FLOOR = 1e-4


def filter_frame(state: FilterState, x: Array) -> Array:
    """Causally estimate one frame's coefficients and push them to history.

    The incoming frame is normalized to unit mass.  The prediction from the
    stored history (all-ones for missing lags; uniform when the model has no
    dynamics) serves twice: floored at ``1e-4`` and put on the simplex, it is
    the starting point of the EM refinement; floored at ``EPS`` and kept at
    its natural scale, it is the annealing base ``b`` whose power
    ``b ** (anneal / r)`` is the prior mean at inner iteration ``r``.  Later
    iterations therefore approach the static (uniform-prior) update while
    early ones stay close to the prediction; with the default single
    refinement the prior mean is exactly ``b ** anneal``.

    Parameters
    ----------
    state : FilterState
        Model plus rolling history; mutated by appending the new estimate.
    x : np.ndarray
        Nonnegative observation, length ``model.n_features``.

    Returns
    -------
    np.ndarray
        Coefficients on the simplex, length ``model.n_components``.
    """
    model = state.model
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1 or x.shape[0] != model.n_features:
        raise ValueError(f"frame must have length {model.n_features}")
    if np.any(x < 0.0) or not np.all(np.isfinite(x)):
        raise ValueError("frame must be nonnegative and finite")
    xf = np.maximum(x, EPS)
    xf = xf / xf.sum()

    if model.order >= 1:
        pred = predict_state(model, list(state.history))
        base = np.maximum(pred, EPS)
        h = np.maximum(pred, _INIT_FLOOR)
        h = h / h.sum()
    else:
        base = np.ones(model.n_components)
        h = base / base.sum()
    for r in range(1, state.inner_iters + 1):
        eta = base ** (state.anneal / r)
        h = _em_step(xf, model.basis, eta, h)
    state.history.append(h)
    return h


def map_objective(x: Array, model: DnmfModel, h: Array) -> float:
    """Joint log-score of data and coefficient dynamics (constants dropped).

    Returns ``sum_t sum_k x[k,t] * log((W @ h_t)[k])`` plus, when the model
    has dynamics, ``-sum_t sum_i (log(eta[i,t]) + h[i,t]/eta[i,t])`` with
    ``eta_t`` the unannealed prediction built from earlier columns of ``h``
    (all-ones padding for missing lags).  Terms depending only on the data
    are omitted.  With annealing disabled this is the quantity each full
    training iteration does not decrease.
    """
    data = nonneg_matrix(x, name="data")
    h = np.asarray(h, dtype=np.float64)
    if h.shape != (model.n_components, data.shape[1]):
        raise ValueError(
            f"coefficients shape {h.shape} does not match model/data "
            f"({model.n_components}, {data.shape[1]})"
        )
    if data.shape[0] != model.n_features:
        raise ValueError("data row count does not match model features")
    xf = np.maximum(data, EPS)
    p = np.maximum(model.basis @ h, EPS)
    val = float((xf * np.log(p)).sum())
    if model.order >= 1:
        v = build_lag_matrix(h, model.order)
        eta = np.maximum(np.hstack(model.lags) @ v, EPS)
        val -= float((np.log(eta) + h / eta).sum())
    return val


def concat_models(first: DnmfModel, second: DnmfModel) -> DnmfModel:
    """Join two models over the same feature space into one block model.

    Bases are concatenated column-wise; lag matrices combine block-diagonally
    so the two coefficient groups evolve independently.  Both models must
    share ``n_features`` and ``order``.
    """
    if first.n_features != second.n_features:
        raise ValueError(
            f"feature mismatch: {first.n_features} vs {second.n_features}"
        )
    if first.order != second.order:
        raise ValueError(f"order mismatch: {first.order} vs {second.order}")
    basis = np.hstack([first.basis, second.basis])
    na, nb = first.n_components, second.n_components
    lags = []
    for la, lb in zip(first.lags, second.lags):
        block = np.zeros((na + nb, na + nb))
        block[:na, :na] = la
        block[na:, na:] = lb
        lags.append(block)
    return DnmfModel(basis=basis, lags=lags)
