"""Recovering representations from preference comparisons.

The loss is a hinge on strict preferences (the winner must beat the loser by
at least the margin) plus an absolute penalty on indifferences.  It is
bilinear in (utilities, beliefs), so the fit alternates convex blocks: utility
knot values under strict-monotonicity gap constraints, then the belief block
on its simplex (the joint matrix, or the two marginals in turn).  Each block
runs projected subgradient descent with Polyak steps and backtracking, so the
objective never increases and identical inputs give bit-identical results.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .axioms import FAIL, VACUOUS, AxiomReport, check_three_factor_axioms
from .conditionals import PreferenceDataset, Verdict
from .core import (
    EURepresentation,
    JointBelief,
    ProductBelief,
    UtilityFunction,
)
from .representation import (
    FactorizationResult,
    evaluate_representation,
    factorize,
    normalize_representation,
)

FIT_MODELS = ("product2d", "joint3d", "product3d")

#: Minimum gap between consecutive utility knot values.
MIN_KNOT_GAP = 1e-6
#: Per-coordinate floor keeping fitted beliefs strictly positive.
SIMPLEX_FLOOR = 1e-6
#: Extra seed-derived restarts attempted while comparisons remain violated.
MAX_RESTARTS = 5
#: Tolerance for counting an indifference as satisfied (normalized scale).
INDIFFERENCE_TOL = 1e-6


@dataclass(frozen=True)
class FitConfig:
    """Knobs for the alternating fit; the seed fixes every random choice."""

    model: str = "product2d"
    max_outer_iterations: int = 150
    convergence_tol: float = 1e-9
    margin: float = 1e-3
    seed: int = 0

    def __post_init__(self) -> None:
        if self.model not in FIT_MODELS:
            raise ValueError(f"unknown fit model {self.model!r}")
        if self.max_outer_iterations < 1:
            raise ValueError("max_outer_iterations must be at least 1")
        if self.margin < 0.0:
            raise ValueError("margin must be nonnegative")
        if self.convergence_tol < 0.0:
            raise ValueError("convergence_tol must be nonnegative")


@dataclass(frozen=True, eq=False)
class FitResult:
    """A fitted, canonically normalized representation plus diagnostics."""

    representation: EURepresentation
    violations: int
    objective: float
    trace: tuple[float, ...]
    converged: bool
    underdetermined: bool
    restarts: int

    def to_dict(self) -> dict:
        return {
            "representation": self.representation.to_dict(),
            "violations": self.violations,
            "objective": self.objective,
            "trace": list(self.trace),
            "converged": self.converged,
            "underdetermined": self.underdetermined,
            "restarts": self.restarts,
        }


def _project_simplex_floor(v: np.ndarray, floor: float = SIMPLEX_FLOOR) -> np.ndarray:
    """Euclidean projection onto {w : w >= floor, sum w = 1}."""
    n = len(v)
    free = 1.0 - n * floor
    if free <= 0.0:
        raise ValueError("floor too large for the simplex dimension")
    w = v - floor
    u = np.sort(w)[::-1]
    css = np.cumsum(u) - free
    ks = np.arange(1, n + 1)
    valid = u - css / ks > 0.0
    k = int(ks[valid][-1])
    tau = css[k - 1] / k
    return np.maximum(w - tau, 0.0) + floor


def _pava_increasing(y: np.ndarray) -> np.ndarray:
    """L2 projection onto nondecreasing sequences (pool adjacent violators)."""
    means: list[float] = []
    counts: list[int] = []
    for val in y:
        means.append(float(val))
        counts.append(1)
        while len(means) > 1 and means[-2] > means[-1]:
            m2, c2 = means.pop(), counts.pop()
            m1, c1 = means.pop(), counts.pop()
            means.append((m1 * c1 + m2 * c2) / (c1 + c2))
            counts.append(c1 + c2)
    out = np.empty(len(y))
    pos = 0
    for m, c in zip(means, counts):
        out[pos : pos + c] = m
        pos += c
    return out


def _project_monotone(u: np.ndarray, gap: float = MIN_KNOT_GAP) -> np.ndarray:
    """Projection onto {u : u[k+1] - u[k] >= gap}."""
    shift = gap * np.arange(len(u))
    return _pava_increasing(u - shift) + shift


@dataclass(frozen=True, eq=False)
class _Pairs:
    winner: np.ndarray  # strict comparisons, index of the preferred item
    loser: np.ndarray
    ind_a: np.ndarray
    ind_b: np.ndarray


def _pairs_from(data: PreferenceDataset) -> _Pairs:
    winner, loser, ind_a, ind_b = [], [], [], []
    for a, b, verdict in data.comparisons:
        if verdict is Verdict.A_BETTER:
            winner.append(a)
            loser.append(b)
        elif verdict is Verdict.B_BETTER:
            winner.append(b)
            loser.append(a)
        else:
            ind_a.append(a)
            ind_b.append(b)
    return _Pairs(
        np.array(winner, dtype=np.intp),
        np.array(loser, dtype=np.intp),
        np.array(ind_a, dtype=np.intp),
        np.array(ind_b, dtype=np.intp),
    )


def _pair_loss(values: np.ndarray, pairs: _Pairs, margin: float) -> float:
    d = values[pairs.winner] - values[pairs.loser]
    loss = float(np.maximum(0.0, margin - d).sum())
    e = values[pairs.ind_a] - values[pairs.ind_b]
    return loss + float(np.abs(e).sum())


def _value_grad(values: np.ndarray, pairs: _Pairs, margin: float) -> np.ndarray:
    g = np.zeros(len(values))
    d = values[pairs.winner] - values[pairs.loser]
    active = d < margin
    np.add.at(g, pairs.winner[active], -1.0)
    np.add.at(g, pairs.loser[active], 1.0)
    e = values[pairs.ind_a] - values[pairs.ind_b]
    sign = np.sign(e)
    np.add.at(g, pairs.ind_a, sign)
    np.add.at(g, pairs.ind_b, -sign)
    return g


def _descend_block(theta, matrix, project, pairs, margin, iters=30):
    """Projected subgradient descent on one convex block.

    Polyak step toward zero loss, halved until the candidate improves; stops
    at the first non-improving iteration, so the loss is nonincreasing.
    """
    values = matrix @ theta
    loss = _pair_loss(values, pairs, margin)
    for _ in range(iters):
        if loss == 0.0:
            break
        grad = matrix.T @ _value_grad(values, pairs, margin)
        grad_sq = float(grad @ grad)
        if grad_sq <= 1e-24:
            break
        # Polyak step toward zero, opened up so active-set changes are reachable.
        step = 32.0 * loss / grad_sq
        improved = False
        for _bt in range(40):
            cand = project(theta - step * grad)
            cand_values = matrix @ cand
            cand_loss = _pair_loss(cand_values, pairs, margin)
            if cand_loss < loss - 1e-15:
                theta, values, loss = cand, cand_values, cand_loss
                improved = True
                break
            step *= 0.5
        if not improved:
            break
    return theta, loss


def _scale_search(u, matrix, pairs, margin):
    """Radial line search on the utility block.

    Once strict comparisons have the right sign, enlarging the utility scale
    shrinks the remaining hinge residuals to zero; scaling up preserves the
    knot-gap constraints, so any improving factor is accepted directly.
    """
    values = matrix @ u
    loss = _pair_loss(values, pairs, margin)
    for _round in range(60):
        if loss == 0.0:
            break
        best_c = None
        for c in (8.0, 4.0, 2.0, 1.5, 1.2):
            cand = _pair_loss(values * c, pairs, margin)
            if cand < loss - 1e-15:
                best_c = c
                break
        if best_c is None:
            break
        cand_u = u * best_c
        cand_values = matrix @ cand_u
        cand_loss = _pair_loss(cand_values, pairs, margin)
        if cand_loss >= loss - 1e-15:
            break
        u, values, loss = cand_u, cand_values, cand_loss
    return u, loss


class _Encoded:
    """Dataset compiled to knot-index arrays for fast block matrices."""

    def __init__(self, data: PreferenceDataset, model: str):
        self.model = model
        self.space = data.space
        values = np.stack([item.values for item in data.universe])
        self.knots = np.unique(values)
        if len(self.knots) < 2:
            raise ValueError("universe consequences span fewer than 2 distinct values")
        self.idx = np.searchsorted(self.knots, values)
        self.n = len(data.universe)
        self.n_knots = len(self.knots)

    def dof(self) -> int:
        space, k = self.space, self.n_knots
        if self.model == "product2d":
            return (k - 1) + (space.n_s - 1) + (space.n_t - 1)
        if self.model == "joint3d":
            return space.n_i * (k - 1) + (space.n_s * space.n_t - 1)
        return space.n_i * (k - 1) + (space.n_s - 1) + (space.n_t - 1)


def _utility_matrix_2d(enc: _Encoded, p: np.ndarray, q: np.ndarray) -> np.ndarray:
    weights = (p[:, None] * q[None, :]).ravel()
    flat = enc.idx.reshape(enc.n, -1)
    c = np.zeros((enc.n, enc.n_knots))
    np.add.at(c, (np.arange(enc.n)[:, None], flat), weights[None, :])
    return c


def _utility_matrix_3d(enc: _Encoded, cell_weights: np.ndarray) -> np.ndarray:
    """Columns indexed i * n_knots + knot; cell weight is the (s, t) mass."""
    n_i = enc.space.n_i
    k = enc.n_knots
    cols = enc.idx + (np.arange(n_i) * k)[None, None, None, :]
    flat = cols.reshape(enc.n, -1)
    weights = np.broadcast_to(cell_weights[:, :, None], enc.idx.shape[1:]).ravel()
    c = np.zeros((enc.n, n_i * k))
    np.add.at(c, (np.arange(enc.n)[:, None], flat), weights[None, :])
    return c


def _period_totals(enc: _Encoded, u_flat: np.ndarray) -> np.ndarray:
    """Per-prospect (s, t) sums of per-period utilities, shape (n, S, T)."""
    k = enc.n_knots
    n_i = enc.space.n_i
    u = u_flat.reshape(n_i, k)
    total = np.zeros(enc.idx.shape[:3])
    for i in range(n_i):
        total += u[i][enc.idx[:, :, :, i]]
    return total


def _initial_utility(enc: _Encoded) -> np.ndarray:
    span = enc.knots[-1] - enc.knots[0]
    return (enc.knots - enc.knots[0]) / span


def _project_per_period(space, n_knots):
    def project(vec):
        rows = vec.reshape(space.n_i, n_knots)
        return np.concatenate([_project_monotone(r) for r in rows])

    return project


def _canonical_loss(enc, params, pairs, margin) -> float:
    """Loss evaluated through one fixed computation path.

    The blocks compute values through different (mathematically equal)
    contractions; the sweep trace always uses this one so that entries are
    comparable to the last bit.
    """
    if enc.model == "product2d":
        u, p, q = params
        values = np.einsum("nst,s,t->n", u[enc.idx], p, q)
    elif enc.model == "joint3d":
        u, pi = params
        values = _period_totals(enc, u).reshape(enc.n, -1) @ pi
    else:
        u, p, q = params
        values = np.einsum("nst,s,t->n", _period_totals(enc, u), p, q)
    return _pair_loss(values, pairs, margin)


def _sweep(enc, params, pairs, margin, inner_iters):
    """One pass over all blocks: utility (with radial search), then beliefs."""
    space = enc.space
    if enc.model == "product2d":
        u, p, q = params
        u_matrix = _utility_matrix_2d(enc, p, q)
        u, _ = _scale_search(u, u_matrix, pairs, margin)
        u, _ = _descend_block(u, u_matrix, _project_monotone, pairs, margin, inner_iters)
        u, _ = _scale_search(u, u_matrix, pairs, margin)
        u_vals = u[enc.idx]
        p, _ = _descend_block(
            p, np.einsum("nst,t->ns", u_vals, q), _project_simplex_floor, pairs, margin, inner_iters
        )
        q, _ = _descend_block(
            q, np.einsum("nst,s->nt", u_vals, p), _project_simplex_floor, pairs, margin, inner_iters
        )
        return (u, p, q)

    if enc.model == "joint3d":
        u, pi = params
        project_u = _project_per_period(space, enc.n_knots)
        u_matrix = _utility_matrix_3d(enc, pi.reshape(space.shape2))
        u, _ = _scale_search(u, u_matrix, pairs, margin)
        u, _ = _descend_block(u, u_matrix, project_u, pairs, margin, inner_iters)
        u, _ = _scale_search(u, u_matrix, pairs, margin)
        pi, _ = _descend_block(
            pi,
            _period_totals(enc, u).reshape(enc.n, -1),
            _project_simplex_floor,
            pairs,
            margin,
            inner_iters,
        )
        return (u, pi)

    u, p, q = params
    project_u = _project_per_period(space, enc.n_knots)
    u_matrix = _utility_matrix_3d(enc, np.outer(p, q))
    u, _ = _scale_search(u, u_matrix, pairs, margin)
    u, _ = _descend_block(u, u_matrix, project_u, pairs, margin, inner_iters)
    u, _ = _scale_search(u, u_matrix, pairs, margin)
    totals = _period_totals(enc, u)
    p, _ = _descend_block(
        p, np.einsum("nst,t->ns", totals, q), _project_simplex_floor, pairs, margin, inner_iters
    )
    q, _ = _descend_block(
        q, np.einsum("nst,s->nt", totals, p), _project_simplex_floor, pairs, margin, inner_iters
    )
    return (u, p, q)


def _fit_once(enc, pairs, cfg, init, inner_iters=30):
    """One alternating run from a given initial point.

    The trace records the canonical loss after each sweep.  Blocks only
    accept improving steps in their own frame; if frame-switch rounding ever
    shows a non-decrease in the canonical frame, the sweep is reverted and
    the run stops (no real progress remains beyond float noise).
    """
    params = init
    loss = _canonical_loss(enc, params, pairs, cfg.margin)
    trace = [loss]
    converged = False
    for _ in range(cfg.max_outer_iterations):
        if loss == 0.0:
            converged = True
            break
        new_params = _sweep(enc, params, pairs, cfg.margin, inner_iters)
        new_loss = _canonical_loss(enc, new_params, pairs, cfg.margin)
        if new_loss >= loss:
            converged = True
            break
        improvement = loss - new_loss
        params, loss = new_params, new_loss
        trace.append(loss)
        if loss == 0.0 or improvement < cfg.convergence_tol:
            converged = True
            break
    return params, loss, trace, converged


def _build_representation(enc: _Encoded, params) -> EURepresentation:
    space = enc.space
    if enc.model == "product2d":
        u, p, q = params
        utility = UtilityFunction(tuple(zip(enc.knots.tolist(), u.tolist())))
        rep = EURepresentation("product2d", space, (utility,), ProductBelief(p, q))
    elif enc.model == "joint3d":
        u, pi = params
        rows = u.reshape(space.n_i, enc.n_knots)
        utilities = tuple(
            UtilityFunction(tuple(zip(enc.knots.tolist(), r.tolist()))) for r in rows
        )
        rep = EURepresentation(
            "joint3d", space, utilities, JointBelief(space, pi.reshape(space.shape2))
        )
    else:
        u, p, q = params
        rows = u.reshape(space.n_i, enc.n_knots)
        utilities = tuple(
            UtilityFunction(tuple(zip(enc.knots.tolist(), r.tolist()))) for r in rows
        )
        rep = EURepresentation("product3d", space, utilities, ProductBelief(p, q))
    return normalize_representation(rep)


def count_violations(
    rep: EURepresentation,
    data: PreferenceDataset,
    indifference_tol: float = INDIFFERENCE_TOL,
) -> int:
    """Comparisons the representation fails to reproduce.

    A strict preference is satisfied when the winner's value is strictly
    higher; an indifference when the values agree within ``indifference_tol``
    (exact equality is unattainable for fitted values in floating point).
    """
    values = [evaluate_representation(rep, item) for item in data.universe]
    bad = 0
    for a, b, verdict in data.comparisons:
        d = values[a] - values[b]
        if verdict is Verdict.A_BETTER:
            bad += d <= 0.0
        elif verdict is Verdict.B_BETTER:
            bad += d >= 0.0
        else:
            bad += abs(d) > indifference_tol
    return int(bad)


def _initial_params(enc: _Encoded, rng: np.random.Generator | None):
    space = enc.space
    u0 = _initial_utility(enc)
    if enc.model == "product2d":
        if rng is None:
            return (u0, np.full(space.n_s, 1.0 / space.n_s), np.full(space.n_t, 1.0 / space.n_t))
        return (
            _project_monotone(u0 + rng.normal(0.0, 0.3, len(u0))),
            _project_simplex_floor(rng.dirichlet(np.ones(space.n_s))),
            _project_simplex_floor(rng.dirichlet(np.ones(space.n_t))),
        )
    if enc.model == "joint3d":
        n_cells = space.n_s * space.n_t
        if rng is None:
            return (np.tile(u0, space.n_i), np.full(n_cells, 1.0 / n_cells))
        u = np.concatenate(
            [
                _project_monotone(u0 + rng.normal(0.0, 0.3, len(u0)))
                for _ in range(space.n_i)
            ]
        )
        return (u, _project_simplex_floor(rng.dirichlet(np.ones(n_cells))))
    if rng is None:
        return (
            np.tile(u0, space.n_i),
            np.full(space.n_s, 1.0 / space.n_s),
            np.full(space.n_t, 1.0 / space.n_t),
        )
    u = np.concatenate(
        [_project_monotone(u0 + rng.normal(0.0, 0.3, len(u0))) for _ in range(space.n_i)]
    )
    return (
        u,
        _project_simplex_floor(rng.dirichlet(np.ones(space.n_s))),
        _project_simplex_floor(rng.dirichlet(np.ones(space.n_t))),
    )


def fit(data: PreferenceDataset, cfg: FitConfig) -> FitResult:
    """Fit a representation of ``cfg.model`` to the dataset.

    Utility knots sit at every distinct observed consequence.  Starts from
    uniform beliefs and consequence-proportional utilities; while comparisons
    remain violated, up to ``MAX_RESTARTS`` seed-derived perturbed restarts
    are tried and the lowest-objective run wins (ties broken by restart
    index).  The returned representation is canonically normalized.
    """
    if not data.comparisons:
        raise ValueError("dataset has no comparisons")
    if cfg.model == "product2d" and data.is_3d:
        raise ValueError("product2d fits two-axis data")
    if cfg.model in ("joint3d", "product3d") and not data.is_3d:
        raise ValueError(f"{cfg.model} fits three-axis data")

    enc = _Encoded(data, cfg.model)
    pairs = _pairs_from(data)
    rng = np.random.default_rng(cfg.seed)

    best = None
    restarts_used = 0
    for attempt in range(1 + MAX_RESTARTS):
        init = _initial_params(enc, None if attempt == 0 else rng)
        params, loss, trace, converged = _fit_once(enc, pairs, cfg, init)
        rep = _build_representation(enc, params)
        violations = count_violations(rep, data)
        candidate = (loss, attempt, rep, violations, trace, converged)
        if best is None or candidate[:2] < best[:2]:
            best = candidate
        restarts_used = attempt
        if violations == 0:
            break

    loss, _, rep, violations, trace, converged = best
    return FitResult(
        representation=rep,
        violations=violations,
        objective=float(loss),
        trace=tuple(float(x) for x in trace),
        converged=converged,
        underdetermined=len(data.comparisons) < enc.dof(),
        restarts=restarts_used,
    )


@dataclass(frozen=True, eq=False)
class IndependenceAssessment:
    """Two independent routes to the same question, reported side by side.

    ``axiomatic`` summarizes the product-stage axiom bundle; ``numeric`` is
    the factorization verdict on a fitted joint belief.  On noiseless
    exhaustive data the routes agree; a disagreement is reported, never
    resolved.
    """

    axiomatic: str  # "pass" | "fail" | "vacuous"
    numeric: str  # "product" | "not_independent" | "underdetermined"
    agree: bool | None
    reports: tuple[AxiomReport, ...]
    factorization: FactorizationResult
    fit_result: FitResult

    def to_dict(self) -> dict:
        return {
            "axiomatic": self.axiomatic,
            "numeric": self.numeric,
            "agree": self.agree,
            "reports": [r.to_dict() for r in self.reports],
            "factorization": self.factorization.to_dict(),
            "fit": self.fit_result.to_dict(),
        }


def check_independence(
    data: PreferenceDataset,
    cfg: FitConfig | None = None,
    factorization_tol: float = 1e-2,
) -> IndependenceAssessment:
    """Assess axis independence from three-axis preference data.

    Route (a): run the product-stage axiom bundle.  Route (b): fit a joint
    representation and factorize the fitted belief.  The factorization
    tolerance is far looser than the library default because fitted beliefs
    carry optimization noise.
    """
    if not data.is_3d:
        raise ValueError("independence assessment needs three-axis data")
    cfg = replace(cfg, model="joint3d") if cfg is not None else FitConfig(model="joint3d")

    reports = tuple(check_three_factor_axioms(data, stage="product"))
    if any(r.verdict == FAIL for r in reports):
        axiomatic = "fail"
    elif any(r.verdict == VACUOUS for r in reports):
        axiomatic = "vacuous"
    else:
        axiomatic = "pass"

    fit_result = fit(data, cfg)
    fact = factorize(fit_result.representation.belief, tol=factorization_tol)
    if fit_result.underdetermined:
        numeric = "underdetermined"
    else:
        numeric = fact.outcome

    if axiomatic == "vacuous" or numeric == "underdetermined":
        agree = None
    else:
        agree = (axiomatic == "pass") == (numeric == "product")
    return IndependenceAssessment(axiomatic, numeric, agree, reports, fact, fit_result)
