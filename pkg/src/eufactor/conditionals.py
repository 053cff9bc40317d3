"""Preference datasets and the conditional relations they induce.

A conditional relation fixes one axis value and collects the verdicts between
sub-prospects (rows, columns, dated prospects, or fibers) induced by master
comparisons whose operands agree everywhere outside the fixed slice.  When two
contexts induce different verdicts on the same sub-prospect pair the
conditional is ill-defined; the contradictions are reported as first-class
witnesses rather than resolved.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from functools import cached_property

import numpy as np

from .core import Plan, Prospect, StateSpace
from .reports import FAIL, PASS, VACUOUS, AxiomReport


class Verdict(str, Enum):
    """Outcome of comparing operand A against operand B."""

    A_BETTER = "A>B"
    INDIFFERENT = "A~B"
    B_BETTER = "B>A"

    def flipped(self) -> "Verdict":
        if self is Verdict.A_BETTER:
            return Verdict.B_BETTER
        if self is Verdict.B_BETTER:
            return Verdict.A_BETTER
        return Verdict.INDIFFERENT


#: (index_a, index_b, verdict)
Comparison = tuple[int, int, Verdict]

AXES_2D = ("s", "t", "st")
AXES_3D = ("s", "t", "i", "st")


@dataclass(frozen=True, eq=False)
class PreferenceDataset:
    """A finite universe of prospects or plans plus pairwise verdicts.

    The universe must be homogeneous: all prospects or all plans, over one
    state space.  Duplicate unordered pairs carrying conflicting verdicts are
    accepted and surfaced through ``conflicts`` (the weak-order check turns
    them into failures); silently dropping them would hide data errors.
    """

    universe: tuple
    comparisons: tuple[Comparison, ...]

    def __post_init__(self) -> None:
        universe = tuple(self.universe)
        if not universe:
            raise ValueError("universe must not be empty")
        kind = type(universe[0])
        if kind not in (Prospect, Plan):
            raise ValueError("universe items must be Prospect or Plan")
        space = universe[0].space
        for item in universe:
            if not isinstance(item, kind):
                raise ValueError("universe mixes prospects and plans")
            if item.space != space:
                raise ValueError("universe items disagree on the state space")
        comparisons = []
        for a, b, verdict in self.comparisons:
            a, b = int(a), int(b)
            if not (0 <= a < len(universe) and 0 <= b < len(universe)):
                raise ValueError(f"comparison ({a}, {b}) indexes outside the universe")
            comparisons.append((a, b, Verdict(verdict)))
        object.__setattr__(self, "universe", universe)
        object.__setattr__(self, "comparisons", tuple(comparisons))

    @property
    def space(self) -> StateSpace:
        return self.universe[0].space

    @property
    def is_3d(self) -> bool:
        return isinstance(self.universe[0], Plan)

    @property
    def axes(self) -> tuple[str, ...]:
        return AXES_3D if self.is_3d else AXES_2D

    @cached_property
    def conflicts(self) -> tuple[dict, ...]:
        """Unordered pairs asserted more than once with differing verdicts."""
        seen: dict[tuple[int, int], dict[str, list[int]]] = {}
        for pos, (a, b, verdict) in enumerate(self.comparisons):
            if a == b:
                continue
            key = (a, b) if a < b else (b, a)
            canon = verdict if a < b else verdict.flipped()
            seen.setdefault(key, {}).setdefault(canon.value, []).append(pos)
        out = []
        for (a, b), verdict_map in sorted(seen.items()):
            if len(verdict_map) > 1:
                out.append(
                    {
                        "pair": [a, b],
                        "verdicts": sorted(verdict_map),
                        "positions": sorted(p for ps in verdict_map.values() for p in ps),
                    }
                )
        return tuple(out)

    def to_dict(self) -> dict:
        return {
            "universe": [item.to_dict() for item in self.universe],
            "comparisons": [[a, b, v.value] for a, b, v in self.comparisons],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "PreferenceDataset":
        items = []
        for raw in d["universe"]:
            items.append(Plan.from_dict(raw) if "cube" in raw else Prospect.from_dict(raw))
        comparisons = tuple((int(a), int(b), Verdict(v)) for a, b, v in d["comparisons"])
        return cls(tuple(items), comparisons)


def axis_values(space: StateSpace, axis: str) -> tuple:
    """All fixed values of an axis: labels, or (s, t) label pairs for "st"."""
    if axis == "s":
        return space.s_labels
    if axis == "t":
        return space.t_labels
    if axis == "i":
        if not space.is_3d:
            raise ValueError("axis 'i' absent: state space has no third axis")
        return space.i_labels
    if axis == "st":
        return tuple((s, t) for s in space.s_labels for t in space.t_labels)
    raise ValueError(f"unknown axis {axis!r}")


def axis_label(fixed_value) -> str:
    """Stable string form of a fixed value, used in witness dicts."""
    if isinstance(fixed_value, tuple):
        return ",".join(fixed_value)
    return str(fixed_value)


def _axis_index(space: StateSpace, axis: str, fixed_value):
    if axis == "i" and not space.is_3d:
        raise ValueError("axis 'i' absent: state space has no third axis")
    try:
        if axis == "s":
            return space.s_labels.index(fixed_value)
        if axis == "t":
            return space.t_labels.index(fixed_value)
        if axis == "i":
            return space.i_labels.index(fixed_value)
        if axis == "st":
            s, t = fixed_value
            return (space.s_labels.index(s), space.t_labels.index(t))
    except (ValueError, TypeError) as exc:
        raise ValueError(f"fixed value {fixed_value!r} not on axis {axis!r}") from exc
    raise ValueError(f"unknown axis {axis!r}")


def take_slice(values: np.ndarray, axis: str, idx) -> np.ndarray:
    """The sub-prospect at a fixed axis value."""
    if values.ndim == 2:
        if axis == "s":
            return values[idx]
        if axis == "t":
            return values[:, idx]
        if axis == "st":
            s, t = idx
            return values[s : s + 1, t]
    else:
        if axis == "s":
            return values[idx]
        if axis == "t":
            return values[:, idx]
        if axis == "i":
            return values[:, :, idx]
        if axis == "st":
            s, t = idx
            return values[s, t]
    raise ValueError(f"axis {axis!r} not valid for {values.ndim}-dimensional data")


def drop_slice(values: np.ndarray, axis: str, idx) -> np.ndarray:
    """Everything outside the fixed slice (the comparison context)."""
    if values.ndim == 2:
        if axis == "s":
            return np.delete(values, idx, axis=0)
        if axis == "t":
            return np.delete(values, idx, axis=1)
        if axis == "st":
            s, t = idx
            return np.delete(values.ravel(), s * values.shape[1] + t)
    else:
        if axis == "s":
            return np.delete(values, idx, axis=0)
        if axis == "t":
            return np.delete(values, idx, axis=1)
        if axis == "i":
            return np.delete(values, idx, axis=2)
        if axis == "st":
            s, t = idx
            flat = values.reshape(-1, values.shape[2])
            return np.delete(flat, s * values.shape[1] + t, axis=0)
    raise ValueError(f"axis {axis!r} not valid for {values.ndim}-dimensional data")


@dataclass(frozen=True, eq=False)
class InducedComparison:
    """One piece of conditional evidence, canonically oriented."""

    sub_a: np.ndarray
    sub_b: np.ndarray
    verdict: Verdict
    source: tuple[int, int]


@dataclass(frozen=True, eq=False)
class ConditionalRelation:
    """The relation over sub-prospects induced at one fixed axis value."""

    axis: str
    fixed_value: str | tuple[str, str]
    comparisons: tuple[InducedComparison, ...]
    well_defined: bool
    contradiction_witnesses: tuple[dict, ...]

    @cached_property
    def _table(self) -> dict[tuple[bytes, bytes], "Verdict | None"]:
        table: dict[tuple[bytes, bytes], Verdict | None] = {}
        for item in self.comparisons:
            key = (item.sub_a.tobytes(), item.sub_b.tobytes())
            if key in table and table[key] is not item.verdict:
                table[key] = None  # contradictory evidence, no usable verdict
            elif key not in table:
                table[key] = item.verdict
        return table

    def verdict_between(self, sub_x: np.ndarray, sub_y: np.ndarray) -> Verdict | None:
        """Evidence-based verdict for (sub_x, sub_y), or None when unknown."""
        kx, ky = sub_x.tobytes(), sub_y.tobytes()
        if kx <= ky:
            verdict = self._table.get((kx, ky))
            return verdict
        verdict = self._table.get((ky, kx))
        return verdict.flipped() if verdict is not None else None


def conditional_on(data: PreferenceDataset, axis: str, fixed_value) -> ConditionalRelation:
    """Extract the conditional relation at one fixed value of an axis.

    Evidence comes from every master comparison whose operands are equal
    outside the fixed slice.  Sub-prospect identity is exact floating-point
    equality of entries (datasets are expected to reuse exact values for swap
    constructions; tolerance matching would fabricate spurious
    contradictions).  ``well_defined`` is False when some sub-prospect pair
    receives conflicting verdicts across contexts, including a strict verdict
    conflicting with an indifference.
    """
    axis = str(axis).lower()
    if axis not in data.axes:
        raise ValueError(f"axis {axis!r} absent from this dataset")
    idx = _axis_index(data.space, axis, fixed_value)

    subs, sub_keys, ctx_keys = [], [], []
    for item in data.universe:
        subs.append(take_slice(item.values, axis, idx))
        sub_keys.append(subs[-1].tobytes())
        ctx_keys.append(drop_slice(item.values, axis, idx).tobytes())

    induced: list[InducedComparison] = []
    for a, b, verdict in data.comparisons:
        if ctx_keys[a] != ctx_keys[b]:
            continue
        if sub_keys[a] <= sub_keys[b]:
            induced.append(InducedComparison(subs[a], subs[b], verdict, (a, b)))
        else:
            induced.append(InducedComparison(subs[b], subs[a], verdict.flipped(), (a, b)))
    induced.sort(key=lambda c: (c.sub_a.tobytes(), c.sub_b.tobytes(), c.verdict.value, c.source))

    grouped: dict[tuple[bytes, bytes], dict[Verdict, list[tuple[int, int]]]] = {}
    for item in induced:
        key = (item.sub_a.tobytes(), item.sub_b.tobytes())
        grouped.setdefault(key, {}).setdefault(item.verdict, []).append(item.source)

    witnesses = []
    by_key = {(c.sub_a.tobytes(), c.sub_b.tobytes()): c for c in induced}
    for key in sorted(grouped):
        verdict_map = grouped[key]
        self_pair = key[0] == key[1]
        contradictory = len(verdict_map) > 1 or (
            self_pair and set(verdict_map) != {Verdict.INDIFFERENT}
        )
        if not contradictory:
            continue
        rep = by_key[key]
        witnesses.append(
            {
                "axis": axis,
                "fixed": axis_label(fixed_value),
                "sub_a": rep.sub_a.tolist(),
                "sub_b": rep.sub_b.tolist(),
                "verdicts": sorted(v.value for v in verdict_map),
                "sources": sorted([list(src) for srcs in verdict_map.values() for src in srcs]),
            }
        )

    return ConditionalRelation(
        axis=axis,
        fixed_value=fixed_value,
        comparisons=tuple(induced),
        well_defined=not witnesses,
        contradiction_witnesses=tuple(witnesses),
    )


def check_cell_natural_order(data: PreferenceDataset) -> AxiomReport:
    """Verify single-cell comparisons agree with >= on the differing entries.

    Evidence items are master comparisons whose operands differ in exactly one
    cell; the asserted verdict must rank the larger entry strictly higher.
    With no such comparisons the report is vacuous and flagged untested.
    """
    space = data.space
    witnesses = []
    coverage = 0
    for a, b, verdict in data.comparisons:
        va, vb = data.universe[a].values, data.universe[b].values
        diff = np.argwhere(va != vb)
        if len(diff) != 1:
            continue
        coverage += 1
        pos = tuple(int(k) for k in diff[0])
        expected = Verdict.A_BETTER if va[pos] > vb[pos] else Verdict.B_BETTER
        if verdict is not expected:
            labels = [space.s_labels[pos[0]], space.t_labels[pos[1]]]
            if len(pos) == 3:
                labels.append(space.i_labels[pos[2]])
            witnesses.append(
                {
                    "pair": [a, b],
                    "cell": labels,
                    "value_a": float(va[pos]),
                    "value_b": float(vb[pos]),
                    "asserted": verdict.value,
                    "implied": expected.value,
                }
            )
    if coverage == 0:
        return AxiomReport("natural_order", VACUOUS, note="untested: no single-cell comparisons")
    if witnesses:
        return AxiomReport("natural_order", FAIL, tuple(witnesses), coverage)
    return AxiomReport("natural_order", PASS, (), coverage)
