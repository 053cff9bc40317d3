"""Evaluating expected-utility representations, factoring joint beliefs into
marginal products, and canonical normalization.

Independence of the two axes is decided by scanning all 2x2 minors of the
belief matrix: the belief factors as an outer product exactly when every minor
vanishes, and the largest surviving minor is the sharpest witness against
independence.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .conditionals import PreferenceDataset, Verdict
from .core import (
    EURepresentation,
    JointBelief,
    Plan,
    ProductBelief,
    Prospect,
    UtilityFunction,
)

#: Default tolerance for belief factorization; inputs may come from fitted
#: (noisy) beliefs, unlike the exact-arithmetic regrouping identities.
FACTORIZATION_TOL = 1e-9


def evaluate_prospect(x: Prospect, u: UtilityFunction, b: ProductBelief) -> float:
    """Probability-weighted utility sum over all (s, t) cells."""
    if x.values.shape != (len(b.p), len(b.q)):
        raise ValueError("prospect and belief shapes disagree")
    util = u(x.values)
    return float(np.sum((b.p[:, None] * b.q[None, :]) * util))


def evaluate_prospect_nested(
    x: Prospect, u: UtilityFunction, b: ProductBelief, outer_axis: str = "s"
) -> float:
    """Same sum with one axis factored out of the inner brackets.

    Regrouping the double sum is an algebraic identity, so this agrees with
    :func:`evaluate_prospect` to within 1e-12 for either outer axis.
    """
    if x.values.shape != (len(b.p), len(b.q)):
        raise ValueError("prospect and belief shapes disagree")
    util = u(x.values)
    outer_axis = str(outer_axis).lower()
    if outer_axis == "s":
        return float(b.p @ (util @ b.q))
    if outer_axis == "t":
        return float((b.p @ util) @ b.q)
    raise ValueError(f"unknown outer axis {outer_axis!r}")


def evaluate_plan(
    x: Plan, us: Sequence[UtilityFunction], b: JointBelief | ProductBelief
) -> float:
    """Belief-weighted sum of per-period utilities over all (s, t, i) cells.

    Accepts a joint or a product belief; with a product belief the same sum is
    computed with the outer-product weights, so both agree to 1e-12 when the
    joint matrix is the product of the marginals.
    """
    us = tuple(us)
    n_s, n_t, n_i = x.values.shape
    if len(us) != n_i:
        raise ValueError(f"need {n_i} utilities, got {len(us)}")
    total = np.zeros((n_s, n_t))
    for i, u in enumerate(us):
        total += u(x.values[:, :, i])
    if isinstance(b, JointBelief):
        if b.pi.shape != (n_s, n_t):
            raise ValueError("plan and belief shapes disagree")
        return float(np.sum(b.pi * total))
    if (len(b.p), len(b.q)) != (n_s, n_t):
        raise ValueError("plan and belief shapes disagree")
    return float(np.sum((b.p[:, None] * b.q[None, :]) * total))


def evaluate_representation(rep: EURepresentation, item: Prospect | Plan) -> float:
    """Value of a prospect or plan under a representation of matching kind."""
    if rep.is_3d:
        if not isinstance(item, Plan):
            raise ValueError(f"{rep.kind} evaluates plans, got {type(item).__name__}")
        if item.space != rep.space:
            raise ValueError("plan space does not match the representation")
        return evaluate_plan(item, rep.utilities, rep.belief)
    if not isinstance(item, Prospect):
        raise ValueError(f"{rep.kind} evaluates prospects, got {type(item).__name__}")
    if item.space != rep.space:
        raise ValueError("prospect space does not match the representation")
    if rep.kind == "product2d":
        return evaluate_prospect(item, rep.utility, rep.belief)
    return float(np.sum(rep.belief.pi * rep.utility(item.values)))


@dataclass(frozen=True, eq=False)
class FactorizationResult:
    """Outcome of testing whether a joint belief is an outer product.

    ``p`` is always the exact row-sum marginal; ``q`` is always the
    row-normalized reference row, so both are populated whether or not the
    belief factors.  ``witness`` is the (s, s', t, t') index quadruple whose
    minor has the largest magnitude.
    """

    independent: bool
    p: np.ndarray
    q: np.ndarray
    max_minor: float
    witness: tuple[int, int, int, int]
    tol: float

    @property
    def outcome(self) -> str:
        return "product" if self.independent else "not_independent"

    def to_dict(self) -> dict:
        return {
            "outcome": self.outcome,
            "p": self.p.tolist(),
            "q": self.q.tolist(),
            "max_minor": self.max_minor,
            "witness": list(self.witness),
            "tol": self.tol,
        }


def factorize(
    b: JointBelief, tol: float = FACTORIZATION_TOL, s0: int = 0
) -> FactorizationResult:
    """Decide whether the joint belief factors as p (x) q.

    Candidate marginals are the row sums (p) and one row renormalized to unit
    mass (q, taken from row ``s0``).  The belief factors exactly when all
    row-normalized rows coincide, i.e. when every 2x2 minor of the matrix
    vanishes; the verdict compares the largest minor magnitude against
    ``tol``.  The verdict does not depend on ``s0``.  Rows with zero mass
    cannot be normalized and are rejected.
    """
    pi = b.pi
    n_s, n_t = pi.shape
    if not 0 <= s0 < n_s:
        raise ValueError(f"s0 must index a row, got {s0}")
    rows = pi.sum(axis=1)
    if np.any(rows <= 0.0):
        raise ValueError("belief has a row with zero mass")
    p = rows.copy()
    q = (pi[s0] / rows[s0]).copy()

    best = -1.0
    witness = (0, 1, 0, 1)
    for s in range(n_s - 1):
        for s2 in range(s + 1, n_s):
            for t in range(n_t - 1):
                for t2 in range(t + 1, n_t):
                    minor = abs(pi[s, t] * pi[s2, t2] - pi[s, t2] * pi[s2, t])
                    if minor > best:
                        best = minor
                        witness = (s, s2, t, t2)
    p.flags.writeable = False
    q.flags.writeable = False
    return FactorizationResult(
        independent=bool(best <= tol),
        p=p,
        q=q,
        max_minor=float(best),
        witness=witness,
        tol=float(tol),
    )


def induced_preference(
    rep: EURepresentation, universe: Sequence[Prospect | Plan]
) -> PreferenceDataset:
    """All pairwise verdicts over a universe under a representation.

    Ties are exact value equality, which keeps this generator a deterministic
    oracle; callers wanting tolerance bands must pre-round utilities.
    """
    universe = tuple(universe)
    values = [evaluate_representation(rep, item) for item in universe]
    comparisons = []
    for a in range(len(universe)):
        for b in range(a + 1, len(universe)):
            if values[a] > values[b]:
                verdict = Verdict.A_BETTER
            elif values[a] < values[b]:
                verdict = Verdict.B_BETTER
            else:
                verdict = Verdict.INDIFFERENT
            comparisons.append((a, b, verdict))
    return PreferenceDataset(universe, tuple(comparisons))


def _normalize_single(u: UtilityFunction) -> UtilityFunction:
    ys = u._ys
    lo, hi = ys[0], ys[-1]
    if lo == 0.0 and hi == 1.0:
        return u
    new = (ys - lo) / (hi - lo)
    return UtilityFunction(tuple((x, float(y)) for (x, _), y in zip(u.knots, new)))


def normalize_representation(rep: EURepresentation) -> EURepresentation:
    """Canonical affine representative of a representation.

    Two-axis kinds anchor the utility at 0 and 1 on its domain endpoints.
    Three-axis kinds shift each per-period utility to 0 at its own domain
    minimum and apply one common multiplier so the utility ranges sum to 1 —
    the full affine freedom the representation admits (a common positive
    multiplier with per-period shifts).  Idempotent, and the induced
    preferences are unchanged.
    """
    if rep.kind in ("product2d", "joint2d"):
        new_u = _normalize_single(rep.utility)
        if new_u is rep.utility:
            return rep
        return EURepresentation(rep.kind, rep.space, (new_u,), rep.belief)

    mins = np.array([u._ys[0] for u in rep.utilities])
    ranges = np.array([u._ys[-1] - u._ys[0] for u in rep.utilities])
    total = float(ranges.sum())
    if np.all(mins == 0.0) and abs(total - 1.0) <= 1e-12:
        return rep
    scale = 1.0 / total
    new_utilities = []
    for u in rep.utilities:
        ys = (u._ys - u._ys[0]) * scale
        new_utilities.append(
            UtilityFunction(tuple((x, float(y)) for (x, _), y in zip(u.knots, ys)))
        )
    return EURepresentation(rep.kind, rep.space, tuple(new_utilities), rep.belief)
