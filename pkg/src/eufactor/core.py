"""Core domain types: finite two- or three-axis state spaces, prospects and
plans over them, beliefs on the state space, and increasing piecewise-linear
utility functions.

All types are immutable after construction (arrays are stored read-only), so
instances can be shared freely across threads.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Sequence

import numpy as np

#: Allowed deviation of total probability mass from 1.
SIMPLEX_TOL = 1e-12

#: Valid representation kinds.
REPRESENTATION_KINDS = ("product2d", "joint2d", "joint3d", "product3d")


def _check_labels(labels: Sequence[str], axis: str) -> tuple[str, ...]:
    out = tuple(str(x) for x in labels)
    if len(out) < 2:
        raise ValueError(f"axis {axis!r} needs at least 2 labels, got {len(out)}")
    if len(set(out)) != len(out):
        raise ValueError(f"axis {axis!r} labels must be unique")
    return out


def _finite_array(values, shape: tuple[int, ...] | None, what: str) -> np.ndarray:
    arr = np.array(values, dtype=np.float64)
    if shape is not None and arr.shape != shape:
        raise ValueError(f"{what}: expected shape {shape}, got {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{what}: entries must be finite")
    arr.flags.writeable = False
    return arr


def _simplex_array(values, shape, what: str) -> np.ndarray:
    arr = _finite_array(values, shape, what)
    if np.any(arr < 0.0):
        raise ValueError(f"{what}: entries must be nonnegative")
    total = float(arr.sum())
    if abs(total - 1.0) > SIMPLEX_TOL:
        raise ValueError(f"{what}: mass sums to {total!r}, must be 1 within {SIMPLEX_TOL}")
    # Entries are kept exactly as given so serialization round-trips bit-exactly.
    return arr


@dataclass(frozen=True)
class StateSpace:
    """Ordered label sets for the two uncertainty axes plus an optional third axis.

    Each axis needs at least two distinct labels.  ``i_labels`` is only present
    for three-axis spaces (plans); two-axis spaces (prospects) leave it None.
    """

    s_labels: tuple[str, ...]
    t_labels: tuple[str, ...]
    i_labels: tuple[str, ...] | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "s_labels", _check_labels(self.s_labels, "s"))
        object.__setattr__(self, "t_labels", _check_labels(self.t_labels, "t"))
        if self.i_labels is not None:
            object.__setattr__(self, "i_labels", _check_labels(self.i_labels, "i"))

    @property
    def n_s(self) -> int:
        return len(self.s_labels)

    @property
    def n_t(self) -> int:
        return len(self.t_labels)

    @property
    def n_i(self) -> int:
        if self.i_labels is None:
            raise ValueError("state space has no third axis")
        return len(self.i_labels)

    @property
    def is_3d(self) -> bool:
        return self.i_labels is not None

    @property
    def shape2(self) -> tuple[int, int]:
        return (self.n_s, self.n_t)

    @property
    def shape3(self) -> tuple[int, int, int]:
        return (self.n_s, self.n_t, self.n_i)

    def to_dict(self) -> dict:
        d = {"s": list(self.s_labels), "t": list(self.t_labels)}
        if self.i_labels is not None:
            d["i"] = list(self.i_labels)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "StateSpace":
        return cls(tuple(d["s"]), tuple(d["t"]), tuple(d["i"]) if "i" in d else None)


def default_space(n_s: int, n_t: int, n_i: int | None = None) -> StateSpace:
    """Build a space with canonical labels s1.., t1.. (and i1.. when ``n_i`` given)."""
    i = tuple(f"i{k + 1}" for k in range(n_i)) if n_i is not None else None
    return StateSpace(
        tuple(f"s{k + 1}" for k in range(n_s)),
        tuple(f"t{k + 1}" for k in range(n_t)),
        i,
    )


@dataclass(frozen=True, eq=False)
class Prospect:
    """A real-valued consequence matrix indexed (s, t)."""

    space: StateSpace
    values: np.ndarray

    def __post_init__(self) -> None:
        arr = _finite_array(self.values, self.space.shape2, "prospect")
        object.__setattr__(self, "values", arr)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Prospect):
            return NotImplemented
        return self.space == other.space and np.array_equal(self.values, other.values)

    def to_dict(self) -> dict:
        return {"space": self.space.to_dict(), "rows": self.values.tolist()}

    @classmethod
    def from_dict(cls, d: dict, space: StateSpace | None = None) -> "Prospect":
        rows = np.asarray(d["rows"], dtype=np.float64)
        if space is None:
            space = StateSpace.from_dict(d["space"]) if "space" in d else default_space(*rows.shape)
        return cls(space, rows)


@dataclass(frozen=True, eq=False)
class Plan:
    """A real-valued consequence cube indexed (s, t, i)."""

    space: StateSpace
    values: np.ndarray

    def __post_init__(self) -> None:
        if not self.space.is_3d:
            raise ValueError("plan requires a state space with a third axis")
        arr = _finite_array(self.values, self.space.shape3, "plan")
        object.__setattr__(self, "values", arr)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Plan):
            return NotImplemented
        return self.space == other.space and np.array_equal(self.values, other.values)

    def to_dict(self) -> dict:
        return {"space": self.space.to_dict(), "cube": self.values.tolist()}

    @classmethod
    def from_dict(cls, d: dict, space: StateSpace | None = None) -> "Plan":
        cube = np.asarray(d["cube"], dtype=np.float64)
        if space is None:
            space = StateSpace.from_dict(d["space"]) if "space" in d else default_space(*cube.shape)
        return cls(space, cube)


@dataclass(frozen=True, eq=False)
class JointBelief:
    """A probability matrix over S x T.

    Entries must be nonnegative and sum to 1 within ``SIMPLEX_TOL``.  Entries
    are never renormalized, so serialization round-trips preserve them
    bit-exactly.  Degenerate (zero-probability) cells are representable to
    support negative tests; ``strictly_positive`` reports whether the belief is
    interior.
    """

    space: StateSpace
    pi: np.ndarray

    def __post_init__(self) -> None:
        arr = _simplex_array(self.pi, self.space.shape2, "joint belief")
        object.__setattr__(self, "pi", arr)

    def __eq__(self, other) -> bool:
        if not isinstance(other, JointBelief):
            return NotImplemented
        return self.space == other.space and np.array_equal(self.pi, other.pi)

    @property
    def strictly_positive(self) -> bool:
        return bool(np.all(self.pi > 0.0))

    def to_dict(self) -> dict:
        return {"pi": self.pi.tolist()}

    @classmethod
    def from_dict(cls, d: dict, space: StateSpace | None = None) -> "JointBelief":
        pi = np.asarray(d["pi"], dtype=np.float64)
        if space is None:
            space = StateSpace.from_dict(d["space"]) if "space" in d else default_space(*pi.shape)
        return cls(space, pi)


@dataclass(frozen=True, eq=False)
class ProductBelief:
    """A pair of marginal probability vectors, one per axis."""

    p: np.ndarray
    q: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, "p", _simplex_array(self.p, None, "p"))
        object.__setattr__(self, "q", _simplex_array(self.q, None, "q"))
        if self.p.ndim != 1 or self.q.ndim != 1:
            raise ValueError("p and q must be vectors")
        if len(self.p) < 2 or len(self.q) < 2:
            raise ValueError("p and q need at least 2 entries each")

    def __eq__(self, other) -> bool:
        if not isinstance(other, ProductBelief):
            return NotImplemented
        return np.array_equal(self.p, other.p) and np.array_equal(self.q, other.q)

    @property
    def strictly_positive(self) -> bool:
        return bool(np.all(self.p > 0.0) and np.all(self.q > 0.0))

    def to_dict(self) -> dict:
        return {"p": self.p.tolist(), "q": self.q.tolist()}

    @classmethod
    def from_dict(cls, d: dict) -> "ProductBelief":
        return cls(np.asarray(d["p"], dtype=np.float64), np.asarray(d["q"], dtype=np.float64))


def product_to_joint(belief: ProductBelief, space: StateSpace) -> JointBelief:
    """Outer product p (x) q as a joint belief on ``space``."""
    if len(belief.p) != space.n_s or len(belief.q) != space.n_t:
        raise ValueError("belief dimensions do not match the state space")
    return JointBelief(space, np.outer(belief.p, belief.q))


def marginal_beliefs(belief: JointBelief) -> ProductBelief:
    """Row and column mass marginals of a joint belief."""
    return ProductBelief(belief.pi.sum(axis=1), belief.pi.sum(axis=0))


@dataclass(frozen=True)
class UtilityFunction:
    """Increasing piecewise-linear utility through strictly increasing knots.

    Evaluation interpolates linearly between knots and extends the end
    segments linearly beyond them, so the function is increasing and
    continuous on all of R.  At least two knots are required (a single knot
    would leave both slope and domain degenerate).
    """

    knots: tuple[tuple[float, float], ...]

    def __post_init__(self) -> None:
        knots = tuple((float(x), float(y)) for x, y in self.knots)
        if len(knots) < 2:
            raise ValueError("utility needs at least 2 knots")
        xs = np.array([k[0] for k in knots])
        ys = np.array([k[1] for k in knots])
        if not np.all(np.isfinite(xs)) or not np.all(np.isfinite(ys)):
            raise ValueError("utility knots must be finite")
        if np.any(np.diff(xs) <= 0.0):
            raise ValueError("knot consequences must be strictly increasing")
        if np.any(np.diff(ys) <= 0.0):
            raise ValueError("knot utilities must be strictly increasing")
        object.__setattr__(self, "knots", knots)

    @cached_property
    def _xs(self) -> np.ndarray:
        return np.array([k[0] for k in self.knots])

    @cached_property
    def _ys(self) -> np.ndarray:
        return np.array([k[1] for k in self.knots])

    @property
    def domain(self) -> tuple[float, float]:
        return (self.knots[0][0], self.knots[-1][0])

    def __call__(self, x):
        xs, ys = self._xs, self._ys
        arr = np.asarray(x, dtype=np.float64)
        out = np.interp(arr, xs, ys)
        lo_slope = (ys[1] - ys[0]) / (xs[1] - xs[0])
        hi_slope = (ys[-1] - ys[-2]) / (xs[-1] - xs[-2])
        out = np.where(arr < xs[0], ys[0] + (arr - xs[0]) * lo_slope, out)
        out = np.where(arr > xs[-1], ys[-1] + (arr - xs[-1]) * hi_slope, out)
        if arr.ndim == 0:
            return float(out)
        return out

    def affine(self, a: float, b: float) -> "UtilityFunction":
        """Return a*u + b; ``a`` must be positive to preserve monotonicity."""
        if a <= 0.0:
            raise ValueError("multiplier must be positive")
        return UtilityFunction(tuple((x, a * y + b) for x, y in self.knots))

    def to_dict(self) -> dict:
        return {"knots": [[x, y] for x, y in self.knots]}

    @classmethod
    def from_dict(cls, d: dict) -> "UtilityFunction":
        return cls(tuple((x, y) for x, y in d["knots"]))


def identity_utility(lo: float = 0.0, hi: float = 1.0) -> UtilityFunction:
    """u(x) = x, anchored on [lo, hi]."""
    if not lo < hi:
        raise ValueError("need lo < hi")
    return UtilityFunction(((lo, lo), (hi, hi)))


@dataclass(frozen=True, eq=False)
class EURepresentation:
    """An expected-utility evaluator: utilities plus a belief of matching kind.

    Kinds:
      * ``product2d`` -- one utility, product belief; evaluates prospects.
      * ``joint2d``   -- one utility, joint belief; evaluates prospects.
      * ``joint3d``   -- one utility per third-axis value, joint belief; plans.
      * ``product3d`` -- one utility per third-axis value, product belief; plans.
    """

    kind: str
    space: StateSpace
    utilities: tuple[UtilityFunction, ...]
    belief: JointBelief | ProductBelief

    def __post_init__(self) -> None:
        if self.kind not in REPRESENTATION_KINDS:
            raise ValueError(f"unknown representation kind {self.kind!r}")
        object.__setattr__(self, "utilities", tuple(self.utilities))
        if self.kind in ("product2d", "joint2d"):
            if len(self.utilities) != 1:
                raise ValueError(f"{self.kind} takes exactly one utility")
        else:
            if not self.space.is_3d:
                raise ValueError(f"{self.kind} requires a three-axis state space")
            if len(self.utilities) != self.space.n_i:
                raise ValueError(
                    f"{self.kind} needs one utility per third-axis value "
                    f"({self.space.n_i}), got {len(self.utilities)}"
                )
        if self.kind in ("product2d", "product3d"):
            if not isinstance(self.belief, ProductBelief):
                raise ValueError(f"{self.kind} requires a product belief")
            if len(self.belief.p) != self.space.n_s or len(self.belief.q) != self.space.n_t:
                raise ValueError("belief dimensions do not match the state space")
        else:
            if not isinstance(self.belief, JointBelief):
                raise ValueError(f"{self.kind} requires a joint belief")
            if self.belief.space != self.space:
                raise ValueError("belief space does not match the representation space")

    def __eq__(self, other) -> bool:
        if not isinstance(other, EURepresentation):
            return NotImplemented
        return (
            self.kind == other.kind
            and self.space == other.space
            and self.utilities == other.utilities
            and self.belief == other.belief
        )

    @property
    def utility(self) -> UtilityFunction:
        if len(self.utilities) != 1:
            raise ValueError(f"{self.kind} has {len(self.utilities)} utilities")
        return self.utilities[0]

    @property
    def is_3d(self) -> bool:
        return self.kind in ("joint3d", "product3d")

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "space": self.space.to_dict(),
            "utilities": [u.to_dict() for u in self.utilities],
            "belief": self.belief.to_dict(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "EURepresentation":
        space = StateSpace.from_dict(d["space"])
        utilities = tuple(UtilityFunction.from_dict(u) for u in d["utilities"])
        raw = d["belief"]
        belief: JointBelief | ProductBelief
        if "pi" in raw:
            belief = JointBelief.from_dict(raw, space)
        else:
            belief = ProductBelief.from_dict(raw)
        return cls(d["kind"], space, utilities, belief)


def make_prospect(space: StateSpace, rows) -> Prospect:
    """Validated prospect from a row-major nested list."""
    return Prospect(space, np.asarray(rows, dtype=np.float64))


def make_plan(space: StateSpace, cube) -> Plan:
    """Validated plan from an s-major, then t, then i nested list."""
    return Plan(space, np.asarray(cube, dtype=np.float64))


def uniform_belief(space: StateSpace) -> JointBelief:
    """The joint belief putting mass 1/(|S|*|T|) on every cell."""
    n = space.n_s * space.n_t
    return JointBelief(space, np.full(space.shape2, 1.0 / n))
