"""Axiom check reports: a verdict, self-certifying witnesses, and coverage."""

from __future__ import annotations

from dataclasses import dataclass, field

PASS = "pass"
FAIL = "fail"
VACUOUS = "vacuous"

_VERDICTS = (PASS, FAIL, VACUOUS)


@dataclass(frozen=True)
class AxiomReport:
    """Outcome of one preference-axiom check.

    ``witnesses`` are JSON-native dicts with enough detail to replay the
    violation against the source dataset.  ``coverage`` counts the evidence
    items examined; a vacuous verdict always has coverage 0.  ``note`` carries
    a human-readable explanation (e.g. why a check could not run).
    """

    axiom: str
    verdict: str
    witnesses: tuple[dict, ...] = ()
    coverage: int = 0
    note: str = ""

    def __post_init__(self) -> None:
        object.__setattr__(self, "witnesses", tuple(self.witnesses))
        if self.verdict not in _VERDICTS:
            raise ValueError(f"unknown verdict {self.verdict!r}")
        if self.verdict == FAIL and not self.witnesses:
            raise ValueError("a failing report needs at least one witness")
        if self.verdict == VACUOUS and self.coverage != 0:
            raise ValueError("a vacuous report must have coverage 0")

    @property
    def failed(self) -> bool:
        return self.verdict == FAIL

    def to_dict(self) -> dict:
        return {
            "axiom": self.axiom,
            "verdict": self.verdict,
            "witnesses": [dict(w) for w in self.witnesses],
            "coverage": self.coverage,
            "note": self.note,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "AxiomReport":
        return cls(
            axiom=d["axiom"],
            verdict=d["verdict"],
            witnesses=tuple(d.get("witnesses", ())),
            coverage=int(d.get("coverage", 0)),
            note=d.get("note", ""),
        )
