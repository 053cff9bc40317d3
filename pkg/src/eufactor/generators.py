"""Synthetic agents and datasets used as oracles in tests and demos.

Generated universes always include "swap families": groups of prospects that
place the same pair of sub-prospects at every value of an axis over a common
context.  These give conditional extraction shared evidence at every fixed
value, so invariance checks have nonzero coverage and correlated beliefs are
guaranteed a grid-expressible witness.
"""

from __future__ import annotations

import numpy as np

from .conditionals import PreferenceDataset
from .core import (
    EURepresentation,
    JointBelief,
    Plan,
    ProductBelief,
    Prospect,
    StateSpace,
    default_space,
    identity_utility,
    product_to_joint,
    UtilityFunction,
)
from .representation import induced_preference

GENERATOR_MODELS = ("product2d", "joint2d", "joint3d", "product3d")


def gen_invariance_counterexample(
    high: float, low: float, belief: JointBelief
) -> PreferenceDataset:
    """A 2x2 dataset on which the s-axis invariance check provably fails.

    Requires ``high > low`` and a belief making (s1, t1) strictly more likely
    than (s1, t2) while (s2, t1) is strictly less likely than (s2, t2) — a
    pattern no product belief can produce.  Verdicts are expected values under
    the belief with identity utility.  The universe contains the two fully
    crossed prospects plus the row-swap contexts needed for conditional
    extraction: under the first row the (high, low) row beats (low, high),
    under the second row the ranking flips, so the two s-conditionals differ.
    """
    high, low = float(high), float(low)
    if not high > low:
        raise ValueError("need high > low")
    space = belief.space
    if space.shape2 != (2, 2):
        raise ValueError("counterexample needs a 2x2 state space")
    pi = belief.pi
    if not (pi[0, 0] > pi[0, 1] and pi[1, 0] < pi[1, 1]):
        raise ValueError(
            "belief must have pi[s1,t1] > pi[s1,t2] and pi[s2,t1] < pi[s2,t2]; "
            "product beliefs cannot satisfy this"
        )
    r_hi = [high, low]
    r_lo = [low, high]
    filler = [low, low]
    universe = tuple(
        Prospect(space, rows)
        for rows in (
            [r_hi, r_lo],
            [r_lo, r_hi],
            [r_hi, filler],
            [r_lo, filler],
            [filler, r_hi],
            [filler, r_lo],
        )
    )
    rep = EURepresentation("joint2d", space, (identity_utility(low, high),), belief)
    return induced_preference(rep, universe)


def gen_demo_2x2(
    fill=((1.0, 2.0), (3.0, 4.0)),
    p=(0.5, 0.5),
    q=(0.5, 0.5),
) -> tuple[StateSpace, list[Prospect], ProductBelief, UtilityFunction]:
    """A small worked 2x2 agent: one policy matrix, a product belief, identity
    utility.  Used in docs and smoke tests."""
    space = default_space(2, 2)
    prospect = Prospect(space, np.asarray(fill, dtype=np.float64))
    belief = ProductBelief(np.asarray(p, dtype=np.float64), np.asarray(q, dtype=np.float64))
    if len(belief.p) != 2 or len(belief.q) != 2:
        raise ValueError("demo belief must be 2x2")
    lo = float(prospect.values.min())
    hi = float(prospect.values.max())
    if lo == hi:
        lo, hi = lo - 0.5, hi + 0.5
    return space, [prospect], belief, identity_utility(lo, hi)


def _interior_point(rng: np.random.Generator, n: int, floor: float = 0.05) -> np.ndarray:
    w = rng.dirichlet(np.ones(n))
    return w * (1.0 - n * floor) + floor


def _correlated_2x2_block(
    rng: np.random.Generator, min_minor: float
) -> np.ndarray:
    """A 2x2 probability block whose row conditionals order t1, t2 oppositely.

    The opposite orderings make any included high/low crossed swap family a
    certified invariance witness; resampling enforces a minimum minor
    magnitude so negative tests cannot degenerate to near-product beliefs.
    """
    for _ in range(1000):
        m = _interior_point(rng, 2, floor=0.25)  # row masses
        u1 = rng.uniform(0.6, 0.95)  # row-1 conditional mass on t1
        u2 = rng.uniform(0.05, 0.4)  # row-2 conditional mass on t1
        block = np.array(
            [[m[0] * u1, m[0] * (1.0 - u1)], [m[1] * u2, m[1] * (1.0 - u2)]]
        )
        minor = abs(block[0, 0] * block[1, 1] - block[0, 1] * block[1, 0])
        if minor >= min_minor:
            return block
    raise RuntimeError(f"could not reach minor magnitude {min_minor}")


def _correlated_joint(
    rng: np.random.Generator, space: StateSpace, min_minor: float
) -> JointBelief:
    """A strictly positive joint belief with a forced-correlation 2x2 block."""
    for _ in range(1000):
        p = _interior_point(rng, space.n_s)
        q = _interior_point(rng, space.n_t)
        pi = np.outer(p, q)
        block_mass = pi[:2, :2].sum()
        needed = min_minor / block_mass**2
        if needed > 0.15:  # beyond what the block sampler can reliably reach
            continue
        # The correlated pattern lives on the leading block; elsewhere stays product.
        pi[:2, :2] = _correlated_2x2_block(rng, needed) * block_mass
        return JointBelief(space, pi / pi.sum())
    raise RuntimeError(f"could not concentrate mass for minor magnitude {min_minor}")


def _random_increasing(rng: np.random.Generator, n: int) -> np.ndarray:
    gaps = rng.uniform(0.2, 1.0, size=n - 1)
    return np.concatenate([[0.0], np.cumsum(gaps)]) + rng.uniform(-0.5, 0.5)


def _random_utility(rng: np.random.Generator, grid: np.ndarray) -> UtilityFunction:
    ys = _random_increasing(rng, len(grid))
    return UtilityFunction(tuple(zip(grid.tolist(), ys.tolist())))


def _swap_prospects_2d(space: StateSpace, grid: np.ndarray) -> list[np.ndarray]:
    n_s, n_t = space.shape2
    lo, hi = float(grid[0]), float(grid[-1])
    base = np.full((n_s, n_t), lo)
    out = [base.copy()]

    r_hi = np.full(n_t, lo)
    r_hi[0] = hi
    r_lo = np.full(n_t, lo)
    r_lo[1] = hi
    for s in range(n_s):
        for row in (r_hi, r_lo):
            m = base.copy()
            m[s] = row
            out.append(m)

    c_hi = np.full(n_s, lo)
    c_hi[0] = hi
    c_lo = np.full(n_s, lo)
    c_lo[1] = hi
    for t in range(n_t):
        for col in (c_hi, c_lo):
            m = base.copy()
            m[:, t] = col
            out.append(m)
    return out


def _swap_prospects_3d(space: StateSpace, grid: np.ndarray) -> list[np.ndarray]:
    n_s, n_t, n_i = space.shape3
    lo, hi = float(grid[0]), float(grid[-1])
    mid = float(grid[len(grid) // 2])
    base = np.full((n_s, n_t, n_i), lo)
    out = [base.copy()]

    # Crossed t-slices placed at every s: the s-invariance probe.
    m_hi = np.full((n_t, n_i), lo)
    m_hi[0, :] = hi
    m_lo = np.full((n_t, n_i), lo)
    m_lo[1, :] = hi
    for s in range(n_s):
        for slab in (m_hi, m_lo):
            c = base.copy()
            c[s] = slab
            out.append(c)

    # Crossed fibers at every (s, t): fiber separability + invariance evidence.
    f_hi = np.full(n_i, lo)
    f_hi[0] = hi
    f_lo = np.full(n_i, lo)
    f_lo[1] = hi
    for s in range(n_s):
        for t in range(n_t):
            for fiber in (f_hi, f_lo):
                c = base.copy()
                c[s, t] = fiber
                out.append(c)

    # Single-cell bumps at every (s, t, i): natural-order evidence.
    if mid != lo:
        for s in range(n_s):
            for t in range(n_t):
                for i in range(n_i):
                    c = base.copy()
                    c[s, t, i] = mid
                    out.append(c)

    # Dated-prospect swaps at every i: third-axis conditional evidence.
    d = np.full((n_s, n_t), lo)
    d[0, 0] = hi
    for i in range(n_i):
        c = base.copy()
        c[:, :, i] = d
        out.append(c)
    return out


def _fill_universe(
    rng: np.random.Generator,
    structured: list[np.ndarray],
    shape: tuple[int, ...],
    grid: np.ndarray,
    size: int,
) -> list[np.ndarray]:
    seen = set()
    out = []
    for arr in structured:
        key = arr.tobytes()
        if key not in seen:
            seen.add(key)
            out.append(arr)
        if len(out) >= size:
            return out[:size]
    attempts = 0
    while len(out) < size and attempts < 100 * size:
        arr = rng.choice(grid, size=shape)
        key = arr.tobytes()
        if key not in seen:
            seen.add(key)
            out.append(arr)
        attempts += 1
    if len(out) < size:
        raise ValueError(f"grid too small to build {size} distinct items")
    return out


def gen_agent(
    model: str,
    seed: int,
    space: StateSpace | None = None,
    consequence_grid=(0.0, 1.0, 2.0, 3.0),
    universe_size: int = 40,
    comparisons: int | None = None,
    min_minor: float = 0.05,
) -> tuple[EURepresentation, PreferenceDataset]:
    """A seed-deterministic agent plus the dataset it induces.

    Beliefs are sampled on the interior of their simplices; utilities are
    random increasing knots over the consequence grid.  ``joint2d`` and
    ``joint3d`` agents get a correlated belief with a forced minimum minor
    magnitude (``min_minor``).  Comparisons are exhaustive unless
    ``comparisons`` caps them with a sampled subset.
    """
    if model not in GENERATOR_MODELS:
        raise ValueError(f"unknown model {model!r}")
    if universe_size < 2:
        raise ValueError("universe_size must be at least 2")
    rng = np.random.default_rng(seed)
    grid = np.unique(np.asarray(consequence_grid, dtype=np.float64))
    if len(grid) < 2:
        raise ValueError("consequence grid needs at least 2 distinct values")

    is_3d = model in ("joint3d", "product3d")
    if space is None:
        space = default_space(2, 2, 2) if is_3d else default_space(3, 3)
    if is_3d and not space.is_3d:
        raise ValueError(f"{model} needs a three-axis state space")

    n_utilities = space.n_i if is_3d else 1
    utilities = tuple(_random_utility(rng, grid) for _ in range(n_utilities))

    belief: JointBelief | ProductBelief
    if model in ("product2d", "product3d"):
        belief = ProductBelief(
            _interior_point(rng, space.n_s), _interior_point(rng, space.n_t)
        )
    else:
        belief = _correlated_joint(rng, space, min_minor)
    rep = EURepresentation(model, space, utilities, belief)

    if is_3d:
        structured = _swap_prospects_3d(space, grid)
        shape = space.shape3
    else:
        structured = _swap_prospects_2d(space, grid)
        shape = space.shape2
    arrays = _fill_universe(rng, structured, shape, grid, universe_size)
    universe = tuple(
        Plan(space, a) if is_3d else Prospect(space, a) for a in arrays
    )

    data = induced_preference(rep, universe)
    if comparisons is not None and comparisons < len(data.comparisons):
        chosen = rng.choice(len(data.comparisons), size=comparisons, replace=False)
        subset = tuple(data.comparisons[k] for k in sorted(chosen))
        data = PreferenceDataset(universe, subset)
    return rep, data
