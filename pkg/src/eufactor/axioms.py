"""Preference-axiom checkers with self-certifying violation witnesses.

Every check returns an :class:`AxiomReport`.  A failing report carries at
least one witness that, replayed against the dataset, reproduces the
violation.  Checks that cannot gather evidence return ``vacuous`` instead of
silently passing; continuity of the master relation is a maintained
assumption with no finite witness and is therefore never checked.
"""

from __future__ import annotations

import numpy as np

from .conditionals import (
    ConditionalRelation,
    PreferenceDataset,
    Verdict,
    axis_label,
    axis_values,
    check_cell_natural_order,
    conditional_on,
)
from .reports import FAIL, PASS, VACUOUS, AxiomReport

__all__ = [
    "AxiomReport",
    "PASS",
    "FAIL",
    "VACUOUS",
    "check_weak_order",
    "check_weak_separability",
    "check_dominance",
    "check_invariance",
    "check_two_factor_axioms",
    "check_three_factor_axioms",
    "check_cell_natural_order",
]


def _reachability(weak: np.ndarray) -> np.ndarray:
    """Reflexive-transitive closure of the asserted weak relation."""
    reach = weak.copy()
    np.fill_diagonal(reach, True)
    while True:
        step = (reach.astype(np.uint8) @ reach.astype(np.uint8)) > 0
        nxt = reach | step
        if np.array_equal(nxt, reach):
            return reach
        reach = nxt


def _weak_path(weak: np.ndarray, start: int, goal: int) -> list[int]:
    """Shortest chain of asserted weak edges from start to goal (BFS)."""
    if start == goal:
        return [start]
    n = len(weak)
    prev = {start: None}
    frontier = [start]
    while frontier:
        nxt = []
        for node in frontier:
            for succ in np.flatnonzero(weak[node]):
                succ = int(succ)
                if succ in prev:
                    continue
                prev[succ] = node
                if succ == goal:
                    path = [succ]
                    while prev[path[-1]] is not None:
                        path.append(prev[path[-1]])
                    return path[::-1]
                nxt.append(succ)
        frontier = nxt
    raise RuntimeError("no path despite reachability")  # pragma: no cover


def check_weak_order(data: PreferenceDataset) -> AxiomReport:
    """Transitivity and duplicate-consistency of the master relation.

    Fails on any conflicting duplicate pair, and on any chain of asserted weak
    preferences that is closed by an asserted strict preference in the
    opposite direction.  Completeness is reported through the coverage note
    (compared pairs / total pairs), never as a failure: elicited data is
    rarely total.
    """
    n = len(data.universe)
    if not data.comparisons:
        return AxiomReport("weak_order", VACUOUS, note="no comparisons")

    weak = np.zeros((n, n), dtype=bool)
    strict = np.zeros((n, n), dtype=bool)
    pairs = set()
    for a, b, verdict in data.comparisons:
        if a != b:
            pairs.add((a, b) if a < b else (b, a))
        if verdict is Verdict.A_BETTER:
            weak[a, b] = True
            strict[a, b] = True
        elif verdict is Verdict.B_BETTER:
            weak[b, a] = True
            strict[b, a] = True
        else:
            weak[a, b] = True
            weak[b, a] = True

    coverage = len(pairs)
    total = n * (n - 1) // 2
    note = f"{coverage}/{total} pairs compared"

    witnesses = [dict(w, kind="conflicting_duplicate") for w in data.conflicts]

    reach = _reachability(weak)
    cycle_hits = np.argwhere(strict & reach.T)
    for z, x in cycle_hits[:5]:
        z, x = int(z), int(x)
        chain = _weak_path(weak, x, z)
        witnesses.append({"kind": "strict_cycle", "chain": chain, "strict": [z, x]})

    if witnesses:
        return AxiomReport("weak_order", FAIL, tuple(witnesses), coverage, note)
    return AxiomReport("weak_order", PASS, (), coverage, note)


def _axis_relations(
    data: PreferenceDataset, axis: str
) -> dict[object, ConditionalRelation]:
    return {v: conditional_on(data, axis, v) for v in axis_values(data.space, axis)}


def check_weak_separability(data: PreferenceDataset, axis: str) -> AxiomReport:
    """The conditional at every fixed value of the axis must be well defined."""
    axis = str(axis).lower()
    relations = _axis_relations(data, axis)
    coverage = sum(len(rel.comparisons) for rel in relations.values())
    name = f"weak_separability({axis})"
    witnesses = []
    for value in axis_values(data.space, axis):
        witnesses.extend(relations[value].contradiction_witnesses)
    if witnesses:
        return AxiomReport(name, FAIL, tuple(witnesses), coverage)
    if coverage == 0:
        return AxiomReport(name, VACUOUS, note="no comparisons agree outside any slice")
    return AxiomReport(name, PASS, (), coverage)


def _slice_verdict(
    rel: ConditionalRelation, sub_x: np.ndarray, sub_y: np.ndarray
) -> Verdict | None:
    # Identical slices are indifferent by reflexivity; otherwise use evidence.
    if sub_x.tobytes() == sub_y.tobytes():
        return Verdict.INDIFFERENT
    return rel.verdict_between(sub_x, sub_y)


def check_dominance(data: PreferenceDataset, axis: str) -> AxiomReport:
    """The master relation must be increasing with the axis conditionals.

    For every compared pair whose per-value slice verdicts are all known:
    weak slice preference everywhere implies weak master preference, strict
    somewhere implies strict.  In two-axis data the "st" slices are single
    cells and their verdicts come from the natural order of the entries.
    Requires well-defined conditionals; otherwise the check is untestable and
    returns vacuous.
    """
    from .conditionals import _axis_index, take_slice  # local: private helpers

    axis = str(axis).lower()
    name = f"dominance({axis})"
    values = axis_values(data.space, axis)
    scalar_slices = axis == "st" and not data.is_3d

    relations: dict[object, ConditionalRelation] = {}
    if not scalar_slices:
        relations = _axis_relations(data, axis)
        bad = [axis_label(v) for v in values if not relations[v].well_defined]
        if bad:
            return AxiomReport(
                name, VACUOUS, note=f"ill-defined conditional(s) at {', '.join(bad)}"
            )

    space = data.space
    indices = {v: _axis_index(space, axis, v) for v in values}
    slices = {
        v: [take_slice(item.values, axis, indices[v]) for item in data.universe]
        for v in values
    }

    coverage = 0
    witnesses = []
    for a, b, asserted in data.comparisons:
        verdicts: dict[str, Verdict] = {}
        decidable = True
        for v in values:
            sub_a, sub_b = slices[v][a], slices[v][b]
            if scalar_slices:
                xa, xb = float(sub_a[0]), float(sub_b[0])
                verdict = (
                    Verdict.INDIFFERENT
                    if xa == xb
                    else (Verdict.A_BETTER if xa > xb else Verdict.B_BETTER)
                )
            else:
                verdict = _slice_verdict(relations[v], sub_a, sub_b)
            if verdict is None:
                decidable = False
                break
            verdicts[axis_label(v)] = verdict
        if not decidable:
            continue
        kinds = set(verdicts.values())
        if Verdict.A_BETTER in kinds and Verdict.B_BETTER in kinds:
            continue  # mixed slice verdicts: dominance is silent
        if kinds == {Verdict.INDIFFERENT}:
            implied = Verdict.INDIFFERENT
        elif Verdict.A_BETTER in kinds:
            implied = Verdict.A_BETTER
        else:
            implied = Verdict.B_BETTER
        coverage += 1
        if asserted is not implied:
            witnesses.append(
                {
                    "pair": [a, b],
                    "asserted": asserted.value,
                    "implied": implied.value,
                    "slice_verdicts": {k: v.value for k, v in verdicts.items()},
                }
            )

    if witnesses:
        return AxiomReport(name, FAIL, tuple(witnesses), coverage)
    if coverage == 0:
        return AxiomReport(name, VACUOUS, note="no comparisons with fully known slice verdicts")
    return AxiomReport(name, PASS, (), coverage)


def check_invariance(
    data: PreferenceDataset, axis: str, min_evidence: int = 1
) -> AxiomReport:
    """All conditionals along one axis must agree as relations.

    Compares induced verdicts on identical sub-prospect pairs across every
    pair of fixed values; any disagreement (including strict vs indifferent)
    is a failure witness.  A pass with fewer than ``min_evidence`` shared
    sub-prospect pairs for some value pair is downgraded to vacuous.  Running
    this on a single axis gives the one-sided check.
    """
    axis = str(axis).lower()
    name = f"invariance({axis})"
    values = axis_values(data.space, axis)
    relations = _axis_relations(data, axis)
    bad = [axis_label(v) for v in values if not relations[v].well_defined]
    if bad:
        return AxiomReport(
            name, VACUOUS, note=f"ill-defined conditional(s) at {', '.join(bad)}"
        )

    tables: dict[object, dict] = {}
    reps: dict[object, dict] = {}
    for v in values:
        table, rep = {}, {}
        for item in relations[v].comparisons:
            key = (item.sub_a.tobytes(), item.sub_b.tobytes())
            table[key] = item.verdict
            rep[key] = item
        tables[v], reps[v] = table, rep

    coverage = 0
    witnesses = []
    thin_pairs = []
    for i, v1 in enumerate(values):
        for v2 in values[i + 1 :]:
            shared = sorted(set(tables[v1]) & set(tables[v2]))
            if len(shared) < min_evidence:
                thin_pairs.append(f"({axis_label(v1)}, {axis_label(v2)})")
            for key in shared:
                coverage += 1
                if tables[v1][key] is tables[v2][key]:
                    continue
                item1, item2 = reps[v1][key], reps[v2][key]
                witnesses.append(
                    {
                        "axis": axis,
                        "value_a": axis_label(v1),
                        "value_b": axis_label(v2),
                        "sub_a": item1.sub_a.tolist(),
                        "sub_b": item1.sub_b.tolist(),
                        "verdict_a": item1.verdict.value,
                        "verdict_b": item2.verdict.value,
                        "source_a": list(item1.source),
                        "source_b": list(item2.source),
                    }
                )

    if witnesses:
        return AxiomReport(name, FAIL, tuple(witnesses), coverage)
    if coverage == 0:
        return AxiomReport(name, VACUOUS, note="no shared sub-prospect evidence")
    if thin_pairs:
        return AxiomReport(
            name,
            VACUOUS,
            note=f"insufficient evidence for value pair(s) {', '.join(thin_pairs)}",
        )
    return AxiomReport(name, PASS, (), coverage)


def check_two_factor_axioms(data: PreferenceDataset) -> list[AxiomReport]:
    """The full bundle for two-axis data: master ordering, separability,
    dominance and invariance on both axes, and the cell-level natural order."""
    if data.is_3d:
        raise ValueError("two-factor bundle expects two-axis data")
    reports = [check_weak_order(data)]
    for axis in ("s", "t"):
        reports.append(check_weak_separability(data, axis))
        reports.append(check_dominance(data, axis))
        reports.append(check_invariance(data, axis))
    reports.append(check_cell_natural_order(data))
    return reports


def check_three_factor_axioms(
    data: PreferenceDataset, stage: str = "product"
) -> list[AxiomReport]:
    """Bundles for three-axis data.

    The ``joint`` stage checks what an expected-utility evaluation with an
    arbitrary joint belief needs: the master ordering, the third-axis and
    fiber conditionals (separability + dominance), fiber invariance, and the
    cell-level natural order.  The ``product`` stage adds the s-axis ordering
    checks and s-invariance, which together are exactly what forces the joint
    belief to factor into marginals.
    """
    if not data.is_3d:
        raise ValueError("axis 'i' absent: three-factor bundle expects three-axis data")
    if stage not in ("joint", "product"):
        raise ValueError(f"unknown stage {stage!r}")
    reports = [check_weak_order(data)]
    for axis in ("i", "st"):
        reports.append(check_weak_separability(data, axis))
        reports.append(check_dominance(data, axis))
    reports.append(check_invariance(data, "st"))
    reports.append(check_cell_natural_order(data))
    if stage == "product":
        reports.append(check_weak_separability(data, "s"))
        reports.append(check_dominance(data, "s"))
        reports.append(check_invariance(data, "s"))
    return reports
