"""Alternating optimizer for weighted incomplete multi-view subspace
clustering.

Each outer iteration updates, in order: the per-view spectral embeddings,
the per-view subspace matrices, the two auxiliary surrogates (low-rank and
graph affinity), the row-sparse error matrices, the consensus embedding,
the Lagrange multipliers, and finally the view weights and the penalty.
View weights evolve multiplicatively: views with below-average missing
rate grow, views with above-average missing rate shrink, and views with
fewer presented instances than clusters are dropped outright with weight
pinned at zero.
"""

import time
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import cho_factor, cho_solve
from sklearn.cluster import KMeans

from .dataset import ViewClass
from .graph import embed_affinity
from .norms import ProxParams, gamma_norm, l21_norm, prox_gamma_norm, reweighting_diag


class NumericalError(RuntimeError):
    """Linear-algebra failure, annotated with where in the solve it happened."""


@dataclass(frozen=True)
class SolverConfig:
    """All hyperparameters of the optimizer.

    The default penalty schedule keeps theta fixed at theta0: letting it
    grow 10% per iteration drowns the graph threshold and the rank trim in
    the fidelity term long before the embeddings stabilize, and every
    tested configuration with a growing penalty lost the cluster structure.
    Set theta_max above theta0 to restore a growing schedule.
    """

    alpha: float = 1e-2        # disagreement trade-off
    beta: float = 1e5          # row-sparse error trade-off
    eta: float = 1e-1          # graph smoothness trade-off
    gamma: float = 1e-3        # rank-surrogate sharpness
    k_exp: int = 1             # disagreement exponent
    mu_strong: float = 1.1     # weight growth for strong views
    mu_weak: float = 0.9       # weight decay for weak views
    mu_neutral: float = 1.0
    theta0: float = 300.0      # initial penalty
    phi: float = 1.1           # penalty growth factor
    theta_max: float = 300.0
    max_iters: int = 100
    rel_tol: float = 1e-4      # relative objective change at convergence
    seed: int = 0              # label extraction seed
    max_inner_iters: int = 50  # prox DC iteration cap
    inner_tol: float = 1e-8
    l21_eps: float = 1e-8
    knn_neighbors: int = 15    # affinity surrogate initialization
    normalize_columns: bool = True  # unit-normalize instance columns per view
    q2_update: str = "verbatim"   # or "shrink": clamp the affinity update at 0
    # rows of the affinity surrogate are constrained to sum to 1 in the
    # model; projecting them onto the simplex each step is what keeps the
    # graph nonnegative and block-structured ("none" reproduces the bare
    # update sequence, which degrades into a structureless graph)
    q2_row_sum: str = "simplex"

    def __post_init__(self):
        if min(self.alpha, self.beta, self.eta) < 0:
            raise ValueError("trade-off parameters must be nonnegative")
        if self.gamma <= 0:
            raise ValueError("gamma must be positive")
        if self.k_exp < 1:
            raise ValueError("k_exp must be a positive integer")
        if not 0 < self.mu_weak < self.mu_neutral < self.mu_strong:
            raise ValueError("need 0 < mu_weak < mu_neutral < mu_strong")
        if self.theta0 <= 0 or self.phi <= 1 or self.theta_max < self.theta0:
            raise ValueError("penalty schedule must satisfy theta0 > 0, phi > 1")
        if self.q2_update not in ("verbatim", "shrink"):
            raise ValueError("q2_update must be 'verbatim' or 'shrink'")
        if self.q2_row_sum not in ("none", "affine", "simplex"):
            raise ValueError("q2_row_sum must be 'none', 'affine' or 'simplex'")

    def prox_params(self, omega):
        return ProxParams(
            gamma=self.gamma,
            omega=omega,
            max_inner_iters=self.max_inner_iters,
            inner_tol=self.inner_tol,
        )


@dataclass
class ViewState:
    """Iterates of one non-dying view."""

    index: int                 # position in the original view list
    x: np.ndarray              # (d, k) compacted data
    indicator: object
    tag: ViewClass
    subspace: np.ndarray       # (k, k)
    error: np.ndarray          # (d, k)
    low_rank: np.ndarray       # (k, k) surrogate carrying the rank penalty
    affinity: np.ndarray       # (k, k) surrogate carrying the graph term
    embedding: np.ndarray | None   # (m, c) orthonormal
    mult_fidelity: np.ndarray  # (d, k)
    mult_low_rank: np.ndarray  # (k, k)
    mult_affinity: np.ndarray  # (k, k)
    row_mult: np.ndarray       # (k,) row-sum multiplier, logged only
    gram_chol: object          # cached Cholesky of (x^T x + 2 I)


@dataclass
class SolverState:
    """All iterates plus bookkeeping traces."""

    views: list                # ViewState per non-dying view
    n_views_total: int
    m: int
    c: int
    weights: np.ndarray        # full length; dying views pinned at 0
    w_init: np.ndarray         # initial weights anchoring the evolution bounds
    tags: tuple
    theta: float
    consensus: np.ndarray | None = None
    iteration: int = 0
    objective_trace: list = field(default_factory=list)
    weight_trace: list = field(default_factory=list)


@dataclass
class SolveOutput:
    labels: np.ndarray
    consensus: np.ndarray
    weights: np.ndarray
    objective_trace: list
    weight_trace: list
    iters_run: int
    converged: bool
    wall_time: float


# ---------------------------------------------------------------------------
# view weighting
# ---------------------------------------------------------------------------

def initial_weights(incomplete):
    """Availability-proportional weights; dying views get exactly 0 and the
    rest are normalized to sum 1."""
    counts = np.array(incomplete.presented_counts, dtype=float)
    tags = incomplete.classifications
    alive = np.array([t is not ViewClass.DYING for t in tags])
    if not alive.any():
        raise ValueError("every view is dying; nothing to cluster")
    raw = np.zeros(len(counts))
    raw[alive] = counts[alive] / counts.sum() * alive.sum()
    return raw / raw[alive].sum()


def _bound_factors(iteration):
    up, down = 1.0, 1.0
    for j in range(1, iteration + 1):
        up *= 1.0 + 0.2 ** j
        down *= 1.0 - 0.2 ** j
    return down, up


def evolve_weight(w, tag, iteration, w_init, config):
    """One multiplicative weight update, clamped to bounds that accumulate
    around the initial weight; renormalization happens across the vector."""
    if tag is ViewClass.DYING:
        return 0.0
    mu = {
        ViewClass.STRONG: config.mu_strong,
        ViewClass.WEAK: config.mu_weak,
        ViewClass.NEUTRAL: config.mu_neutral,
    }[tag]
    lo_f, hi_f = _bound_factors(iteration)
    return float(min(max(mu * w, w_init * lo_f), w_init * hi_f))


def evolve_weights(weights, tags, iteration, w_init, config):
    """Update and renormalize the whole weight vector."""
    out = np.array(
        [
            evolve_weight(w, tag, iteration, wi, config)
            for w, tag, wi in zip(weights, tags, w_init)
        ]
    )
    total = out.sum()
    if total <= 0:
        raise ValueError("all weights collapsed to zero")
    return out / total


# ---------------------------------------------------------------------------
# per-step updates
# ---------------------------------------------------------------------------

def _orthonormal(f, tol=1e-6):
    gram = f.T @ f
    return np.linalg.norm(gram - np.eye(f.shape[1])) <= tol


def disagreement(f_v, f_star, k_exp=1):
    """Squared distance between normalized projection matrices of two
    orthonormal embeddings; zero iff they span the same subspace."""
    if f_v.shape != f_star.shape:
        raise ValueError("embeddings must share a shape")
    if not (_orthonormal(f_v) and _orthonormal(f_star)):
        raise ValueError("embeddings must have orthonormal columns")
    c = f_v.shape[1]
    scale = float(np.sqrt(c)) ** k_exp
    diff = (f_v @ f_v.T) / scale - (f_star @ f_star.T) / scale
    return float(np.sum(diff * diff))


def _canonical_sign(vecs):
    idx = np.argmax(np.abs(vecs), axis=0)
    flip = vecs[idx, np.arange(vecs.shape[1])] < 0
    vecs[:, flip] *= -1.0
    return vecs


def _ordered_eigh(sym, count, largest=False):
    """Deterministic eigenvectors: eigenvalue order, exact ties broken by
    lexicographic comparison of sign-fixed eigenvectors."""
    vals, vecs = np.linalg.eigh(sym)
    vecs = _canonical_sign(vecs)
    order = list(np.argsort(vals, kind="stable"))
    # lexicographic tie-break only inside runs of bitwise-equal eigenvalues
    i = 0
    while i < len(order):
        j = i + 1
        while j < len(order) and vals[order[j]] == vals[order[i]]:
            j += 1
        if j - i > 1:
            order[i:j] = sorted(order[i:j], key=lambda p: tuple(vecs[:, p]))
        i = j
    chosen = order[-count:][::-1] if largest else order[:count]
    return vals[chosen], vecs[:, chosen]


def update_view_embedding(lap_embedded, consensus, config, c):
    """Spectral step: bottom-c eigenvectors of eta*L - alpha*(consensus
    projection)."""
    mat = config.eta * lap_embedded
    if consensus is not None:
        mat = mat - config.alpha * (consensus @ consensus.T)
    mat = 0.5 * (mat + mat.T)
    _, vecs = _ordered_eigh(mat, c)
    return vecs


def update_subspace(view, wtheta):
    """Closed-form ridge system for the self-representation matrix."""
    rhs = (
        view.x.T @ (view.x + view.mult_fidelity / wtheta - view.error)
        + view.low_rank
        + view.affinity
        - (view.mult_low_rank + view.mult_affinity) / wtheta
    )
    return cho_solve(view.gram_chol, rhs)


def update_low_rank(view, wtheta, config):
    """Prox of the rank surrogate at the multiplier-shifted subspace."""
    target = view.subspace + view.mult_low_rank / wtheta
    return prox_gamma_norm(target, config.prox_params(wtheta))


def _pairwise_sq_dists(g):
    sq = np.sum(g * g, axis=1)
    s = sq[:, None] + sq[None, :] - 2.0 * (g @ g.T)
    return np.maximum(s, 0.0)


def _project_rows_simplex(mat):
    """Euclidean projection of every row onto the probability simplex."""
    n = mat.shape[1]
    u = -np.sort(-mat, axis=1)
    css = np.cumsum(u, axis=1)
    ranks = np.arange(1, n + 1)
    cond = u * ranks > (css - 1.0)
    # u[:, 0] satisfies the condition whenever the row has any mass; rho is
    # the last satisfying index per row
    rho = n - 1 - np.argmax(cond[:, ::-1], axis=1)
    tau = (css[np.arange(mat.shape[0]), rho] - 1.0) / (rho + 1.0)
    return np.maximum(mat - tau[:, None], 0.0)


def update_affinity(view, wtheta, config, n_active):
    """Entrywise affinity update shifted by embedding distances, plus the
    row-sum multiplier (logged, not fed back)."""
    g = view.embedding[view.indicator.presented]
    s = _pairwise_sq_dists(g)
    shift = (config.eta / (2.0 * wtheta)) * s
    r = view.subspace + view.mult_affinity / wtheta
    if config.q2_update == "verbatim":
        q2 = np.where(r >= shift, r - shift, r + shift)
    else:
        q2 = np.maximum(r - shift, 0.0)
    np.fill_diagonal(q2, 0.0)
    k = q2.shape[0]
    if config.q2_row_sum != "none" and k > 1:
        off_mask = ~np.eye(k, dtype=bool)
        off = q2[off_mask].reshape(k, k - 1)
        if config.q2_row_sum == "simplex":
            off = _project_rows_simplex(off)
        else:
            off = off + (1.0 - off.sum(axis=1, keepdims=True)) / (k - 1)
        q2[off_mask] = off.reshape(-1)
    if n_active > 1:
        row_mult = (
            wtheta
            * (q2.sum(axis=1) - view.mult_affinity.sum(axis=1) / wtheta - 1.0)
            / (1.0 - n_active)
        )
    else:
        row_mult = np.zeros(q2.shape[0])
    return q2, row_mult


def update_error(view, wtheta, config):
    """Reweighted row-sparse error update: a per-row shrink of the residual."""
    k_mat = view.x - view.x @ view.subspace + view.mult_fidelity / wtheta
    d_vec = reweighting_diag(view.error, config.l21_eps)
    scale = 1.0 / (1.0 + (config.beta / wtheta) * d_vec)
    return scale[:, None] * k_mat


def update_consensus(embeddings, c):
    """Top-c eigenvectors of the summed embedding projections, summed in
    fixed view order."""
    m = embeddings[0].shape[0]
    acc = np.zeros((m, m))
    for f in embeddings:
        acc += f @ f.T
    _, vecs = _ordered_eigh(acc, c, largest=True)
    return vecs


def update_multipliers(view, wtheta):
    view.mult_fidelity = view.mult_fidelity + wtheta * (
        view.x - view.x @ view.subspace - view.error
    )
    view.mult_low_rank = view.mult_low_rank + wtheta * (view.subspace - view.low_rank)
    view.mult_affinity = view.mult_affinity + wtheta * (view.subspace - view.affinity)


def update_penalty(theta, config):
    return min(config.phi * theta, config.theta_max)


def objective(state, config):
    """Full model objective over the non-dying views."""
    total = 0.0
    for view in state.views:
        w = state.weights[view.index]
        resid = view.x - view.x @ view.subspace - view.error
        lap = embed_affinity(view.subspace, view.indicator).laplacian
        total += gamma_norm(view.subspace, config.gamma)
        total += w * state.theta * float(np.sum(resid * resid))
        total += config.eta * float(np.trace(view.embedding.T @ lap @ view.embedding))
        total += config.alpha * disagreement(view.embedding, state.consensus, config.k_exp)
        total += config.beta * l21_norm(view.error)
    return total


# ---------------------------------------------------------------------------
# initialization and the outer loop
# ---------------------------------------------------------------------------

def _initial_affinity(x, n_neighbors):
    """Row-stochastic cosine k-nearest-neighbor affinity, zero diagonal."""
    k = x.shape[1]
    if k < 2:
        return np.zeros((k, k))
    norms = np.linalg.norm(x, axis=0)
    norms[norms == 0] = 1.0
    xn = x / norms
    sim = xn.T @ xn
    np.fill_diagonal(sim, -np.inf)
    nn = min(n_neighbors, k - 1)
    q = np.zeros((k, k))
    for i in range(k):
        order = np.argsort(-sim[i], kind="stable")[:nn]
        w = np.clip(sim[i, order], 0.0, None)
        total = w.sum()
        if total > 0:
            q[i, order] = w / total
        else:
            q[i, order] = 1.0 / nn
    return q


def init_state(incomplete, config):
    """Build the initial iterates: zero matrices everywhere except the
    affinity surrogate, which is seeded with a k-NN graph so the first
    spectral step sees structure."""
    weights = initial_weights(incomplete)
    tags = incomplete.classifications
    views = []
    for v in range(incomplete.n_views):
        if tags[v] is ViewClass.DYING:
            continue
        x = incomplete.views[v]
        if config.normalize_columns and x.size:
            x = x / np.maximum(np.linalg.norm(x, axis=0, keepdims=True), 1e-12)
        ind = incomplete.indicators[v]
        k = ind.k
        gram = x.T @ x + 2.0 * np.eye(k)
        views.append(
            ViewState(
                index=v,
                x=x,
                indicator=ind,
                tag=tags[v],
                subspace=np.zeros((k, k)),
                error=np.zeros_like(x),
                low_rank=np.zeros((k, k)),
                affinity=_initial_affinity(x, config.knn_neighbors),
                embedding=None,
                mult_fidelity=np.zeros_like(x),
                mult_low_rank=np.zeros((k, k)),
                mult_affinity=np.zeros((k, k)),
                row_mult=np.zeros(k),
                gram_chol=cho_factor(gram),
            )
        )
    state = SolverState(
        views=views,
        n_views_total=incomplete.n_views,
        m=incomplete.m,
        c=incomplete.c,
        weights=weights,
        w_init=weights.copy(),
        tags=tags,
        theta=config.theta0,
    )
    for view in state.views:
        view.embedding = _initial_embedding(view, state.m, state.c)
    state.consensus = update_consensus([v.embedding for v in state.views], state.c)
    state.objective_trace.append(objective(state, config))
    state.weight_trace.append(state.weights.copy())
    return state


def _initial_embedding(view, m, c):
    """Spectral embedding of the compacted k-NN graph, scattered back to the
    original rows.

    The embedded (m, m) Laplacian is degenerate at startup: every missing
    instance is an isolated vertex with eigenvalue 0, so its bottom
    eigenvectors are arbitrary singletons.  Solving on the (k, k) presented
    graph instead gives an informative embedding; missing rows start at
    zero and get pulled toward the consensus in later iterations.
    """
    sym = 0.5 * (np.abs(view.affinity) + np.abs(view.affinity.T))
    lap = np.diag(sym.sum(axis=1)) - sym
    _, vecs = _ordered_eigh(lap, c)
    f = np.zeros((m, c))
    f[view.indicator.presented] = vecs
    return f


def _run_iteration(state, config):
    n_active = len(state.views)
    for view in state.views:
        lap = embed_affinity(view.affinity, view.indicator).laplacian
        view.embedding = update_view_embedding(lap, state.consensus, config, state.c)
    for view in state.views:
        wtheta = state.weights[view.index] * state.theta
        view.subspace = update_subspace(view, wtheta)
    for view in state.views:
        wtheta = state.weights[view.index] * state.theta
        view.low_rank = update_low_rank(view, wtheta, config)
    for view in state.views:
        wtheta = state.weights[view.index] * state.theta
        view.affinity, view.row_mult = update_affinity(view, wtheta, config, n_active)
    for view in state.views:
        wtheta = state.weights[view.index] * state.theta
        view.error = update_error(view, wtheta, config)
    state.consensus = update_consensus([v.embedding for v in state.views], state.c)
    for view in state.views:
        wtheta = state.weights[view.index] * state.theta
        update_multipliers(view, wtheta)
    state.weights = evolve_weights(
        state.weights, state.tags, state.iteration, state.w_init, config
    )
    state.theta = update_penalty(state.theta, config)


def solve(incomplete, config=None, callback=None):
    """Run the full alternating optimization and extract cluster labels.

    ``callback(state)``, when given, is invoked after initialization and
    after every outer iteration.  Deterministic for a fixed config seed.
    """
    config = config or SolverConfig()
    start = time.perf_counter()
    state = init_state(incomplete, config)
    if callback is not None:
        callback(state)
    converged = False
    for t in range(1, config.max_iters + 1):
        state.iteration = t
        try:
            _run_iteration(state, config)
        except np.linalg.LinAlgError as exc:
            raise NumericalError(f"linear algebra failure at iteration {t}: {exc}") from exc
        obj = objective(state, config)
        prev = state.objective_trace[-1]
        state.objective_trace.append(obj)
        state.weight_trace.append(state.weights.copy())
        if callback is not None:
            callback(state)
        if abs(obj - prev) < config.rel_tol * max(abs(prev), 1e-12):
            converged = True
            break
    labels = extract_labels(state.consensus, state.c, config.seed)
    return SolveOutput(
        labels=labels,
        consensus=state.consensus,
        weights=state.weights.copy(),
        objective_trace=list(state.objective_trace),
        weight_trace=[w.copy() for w in state.weight_trace],
        iters_run=state.iteration,
        converged=converged,
        wall_time=time.perf_counter() - start,
    )


def extract_labels(f_star, c, seed):
    """Cluster the length-normalized rows of the consensus embedding with
    seeded k-means (k-means++, best of 10 restarts)."""
    rows = np.asarray(f_star, dtype=float)
    norms = np.linalg.norm(rows, axis=1, keepdims=True)
    safe = np.where(norms < 1e-12, 1.0, norms)
    km = KMeans(n_clusters=c, init="k-means++", n_init=10, random_state=seed)
    return km.fit_predict(rows / safe)
