"""Scoring rules and metric arithmetic for the three evaluation phases.

Accuracy is measured at the object level for task planning (strict and
lenient), as per-question validity for the knowledge base, and as a pooled
success rate for routing. Column totals are the unweighted mean of the
unrounded column percentages; display rounding is one decimal, half-up
(Python's round() is banker's and would turn 91.25 into 91.2 instead of the
expected 91.3).
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from decimal import ROUND_HALF_UP, Decimal

from ..domain import TaskPlan
from ..simulator import Scenario


def round_percent(value: float) -> float:
    """One-decimal percentage with deterministic half-up rounding."""
    return float(Decimal(repr(value)).quantize(Decimal("0.1"), rounding=ROUND_HALF_UP))


def format_percent(value: float) -> str:
    return f"{round_percent(value):.1f}"


# --- report cells -----------------------------------------------------------------

@dataclass(frozen=True)
class EvalCell:
    """One report percentage with the raw counts it was computed from.

    ``kind`` is "ratio" for counted cells and "mean" for totals; mean cells
    store numerator = sum of child percentages and denominator = 100 * n so
    that percent == 100 * numerator / denominator holds for every cell.
    """

    kind: str
    numerator: float
    denominator: float

    def __post_init__(self):
        if self.kind not in ("ratio", "mean"):
            raise ValueError(f"invalid cell kind: {self.kind!r}")
        if self.denominator <= 0:
            raise ValueError("cell denominator must be positive")

    @property
    def percent(self) -> float:
        return 100.0 * self.numerator / self.denominator

    @property
    def display(self) -> float:
        return round_percent(self.percent)

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "numerator": self.numerator,
            "denominator": self.denominator,
            "percent": self.display,
        }


def ratio_cell(numerator: float, denominator: float) -> EvalCell:
    return EvalCell("ratio", numerator, denominator)


def mean_cell(children: list[EvalCell]) -> EvalCell:
    """Total cell: unweighted mean of the children's unrounded percentages."""
    if not children:
        raise ValueError("mean cell needs at least one child")
    return EvalCell("mean", sum(c.percent for c in children), 100.0 * len(children))


# --- task planning -------------------------------------------------------------------

@dataclass(frozen=True)
class ObjectVerdict:
    object: str
    assigned: str | None  # destination id, or None when the plan left it alone
    strict: bool
    lenient: bool


def score_plan(plan: TaskPlan, scenario: Scenario) -> list[ObjectVerdict]:
    """Per-object verdicts for one extracted plan against the scenario gold map.

    Strict-correct: assigned exactly the gold destination, or stationary and
    unassigned. Lenient additionally accepts the annotated alternatives. A
    stationary object that received any task is incorrect under both metrics,
    and so is a movable object the plan did not assign.
    """
    assignment = plan.assignment()
    verdicts = []
    for obj in scenario.objects:
        gold = scenario.gold[obj]
        assigned = assignment.get(obj)
        if gold.stationary:
            ok = assigned is None
            verdicts.append(ObjectVerdict(obj, assigned, ok, ok))
        else:
            strict = assigned == gold.destination
            lenient = strict or (assigned is not None and assigned in gold.lenient)
            verdicts.append(ObjectVerdict(obj, assigned, strict, lenient))
    return verdicts


def invalid_plan_verdicts(scenario: Scenario) -> list[ObjectVerdict]:
    """Verdicts for a run whose reply never yielded a valid plan: all incorrect."""
    return [ObjectVerdict(obj, None, False, False) for obj in scenario.objects]


def scenario_cells(verdicts: list[ObjectVerdict]) -> dict[str, EvalCell]:
    if not verdicts:
        raise ValueError("no verdicts to aggregate")
    return {
        "strict": ratio_cell(sum(v.strict for v in verdicts), len(verdicts)),
        "lenient": ratio_cell(sum(v.lenient for v in verdicts), len(verdicts)),
    }


# --- knowledge base -------------------------------------------------------------------

_NORMALIZE_RE = re.compile(r"[^a-z0-9]+")


def normalize_answer(text: str) -> str:
    return " ".join(_NORMALIZE_RE.sub(" ", text.casefold()).split())


@dataclass(frozen=True)
class ExpectedElement:
    name: str
    accept: tuple[str, ...]


@dataclass(frozen=True)
class KnowledgeQuestion:
    id: str
    question: str
    kind: str  # "single" | "set"
    accept: tuple[str, ...] = ()
    reject: tuple[str, ...] = ()
    elements: tuple[ExpectedElement, ...] = ()

    def __post_init__(self):
        if self.kind == "single" and not self.accept:
            raise ValueError(f"single-fact question {self.id} needs accept patterns")
        if self.kind == "set" and not self.elements:
            raise ValueError(f"set question {self.id} needs expected elements")
        if self.kind not in ("single", "set"):
            raise ValueError(f"invalid question kind: {self.kind!r}")


def _matches(normalized_answer: str, pattern: str) -> bool:
    return normalize_answer(pattern) in normalized_answer


def score_knowledge(answer: str, question: KnowledgeQuestion) -> float:
    """Validity fraction in [0, 1] by normalized substring matching.

    Single-fact questions score 1 when an accept pattern matches and no reject
    pattern does; set-valued questions score the fraction of expected elements
    named in the answer.
    """
    normalized = normalize_answer(answer)
    if question.kind == "single":
        if any(_matches(normalized, p) for p in question.reject):
            return 0.0
        return 1.0 if any(_matches(normalized, p) for p in question.accept) else 0.0
    hits = sum(
        1 for element in question.elements if any(_matches(normalized, p) for p in element.accept)
    )
    return hits / len(question.elements)


def question_cell(run_scores: list[float]) -> EvalCell:
    """Per-question validity percent: 100 * (sum of run fractions) / runs."""
    if not run_scores:
        raise ValueError("no run scores to aggregate")
    return ratio_cell(sum(run_scores), len(run_scores))


# --- routing ----------------------------------------------------------------------------

def routing_cell(correct: int, total: int) -> EvalCell:
    return ratio_cell(correct, total)


# --- report container ----------------------------------------------------------------

@dataclass
class EvalRow:
    model: str
    method: str | None  # kb phase: "with_rag" | "without_rag"; else None
    cells: dict[str, EvalCell]

    def to_dict(self) -> dict:
        return {
            "model": self.model,
            "method": self.method,
            "cells": {k: c.to_dict() for k, c in self.cells.items()},
        }


@dataclass
class EvalReport:
    phase: str
    metadata: dict
    rows: list[EvalRow] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "phase": self.phase,
            "metadata": self.metadata,
            "rows": [r.to_dict() for r in self.rows],
            "warnings": self.warnings,
        }

    def validate(self) -> None:
        """Self-consistency: every percentage recomputes from its stored counts."""
        for row in self.rows:
            for key, cell in row.cells.items():
                recomputed = 100.0 * cell.numerator / cell.denominator
                if abs(recomputed - cell.percent) > 1e-9:
                    raise AssertionError(
                        f"cell {row.model}/{key} percent {cell.percent} != recomputed {recomputed}"
                    )
