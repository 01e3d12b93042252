"""Evaluation harness: scoring rules, phase runners, and report rendering."""

from .scoring import (
    EvalCell,
    EvalReport,
    EvalRow,
    KnowledgeQuestion,
    ObjectVerdict,
    format_percent,
    invalid_plan_verdicts,
    mean_cell,
    ratio_cell,
    round_percent,
    score_knowledge,
    score_plan,
)

__all__ = [
    "EvalCell",
    "EvalReport",
    "EvalRow",
    "KnowledgeQuestion",
    "ObjectVerdict",
    "format_percent",
    "invalid_plan_verdicts",
    "mean_cell",
    "ratio_cell",
    "round_percent",
    "score_knowledge",
    "score_plan",
]
