"""Scoring engine: probability, maximum actor probability, risk, bands.

Probability of a threat is the sum of three ordinal actor scores,
P = c + o + m, so it always lies in [3, 12]. Risk for one impact category
is R = I * P_MAX where P_MAX is the maximum probability over the actors
assessed for the binding; R therefore lies in [3, 48] and is classified
into one of four bands.

Computation always works from the c/o/m components. Published probability
totals carried by assessments are audit data only (see
:mod:`riskforge.whatif`).

All functions are pure and deterministic over an immutable model.
"""

from __future__ import annotations

from dataclasses import dataclass

from .model import (
    BAND_BOUNDS,
    CATEGORY_ORDER,
    RISK_MAX,
    RISK_MIN,
    SCORE_MAX,
    SCORE_MIN,
    BindingKey,
    Category,
    RiskBand,
    RiskCell,
    ThreatAssessment,
    ThreatModel,
    binding_sort_key,
    ident_sort_key,
)

# A cell address: goal, scenario, sub-label, category.
CellKey = tuple[str, str, "str | None", Category]


@dataclass(frozen=True)
class AssessmentResult:
    """An assessment together with its computed probability."""

    goal: str
    scenario: str
    sub_label: str | None
    actor: str
    c: int
    o: int
    m: int
    computed_p: int


@dataclass(frozen=True)
class VectorRiskSummary:
    """Worst risk a single vulnerability contributes to, across all cells
    whose binding lists it as an attack vector.

    A vulnerability referenced by no binding (or only by bindings whose
    goals define no impact category) has no contributing cells; it reports
    the lowest band and no risk value.
    """

    vulnerability: str
    worst_band: RiskBand
    worst_risk: int | None
    contributing_cells: tuple[CellKey, ...]


def probability(assessment: ThreatAssessment) -> int:
    """P = c + o + m. Raises ValueError on out-of-range scores."""
    for name in ("c", "o", "m"):
        score = getattr(assessment, name)
        if not SCORE_MIN <= score <= SCORE_MAX:
            raise ValueError(
                f"score out of range [{SCORE_MIN},{SCORE_MAX}]: {name}={score}"
            )
    return assessment.c + assessment.o + assessment.m


def p_max(model: ThreatModel, goal: str, scenario: str, sub_label: str | None = None) -> int:
    """Maximum computed probability over the binding's assessments."""
    binding = model.binding(goal, scenario, sub_label)
    if binding is None:
        raise LookupError(f"no binding ({goal}, {scenario}, {sub_label})")
    assessments = model.assessments_for(binding.key)
    if not assessments:
        raise LookupError(f"no assessments for binding ({goal}, {scenario}, {sub_label})")
    return max(probability(a) for a in assessments)


def band_of(risk_value: int) -> RiskBand:
    """Band containing an integer risk value; rejects values outside [3, 48]."""
    for band, (lo, hi) in BAND_BOUNDS.items():
        if lo <= risk_value <= hi:
            return band
    raise ValueError(f"risk value {risk_value} outside [{RISK_MIN},{RISK_MAX}]")


def risk(
    model: ThreatModel,
    goal: str,
    scenario: str,
    sub_label: str | None,
    category: Category | str,
) -> RiskCell | None:
    """Risk cell for one binding and category, or None where the goal's
    impact vector does not define the category."""
    category = Category(category)
    binding = model.binding(goal, scenario, sub_label)
    if binding is None:
        raise LookupError(f"no binding ({goal}, {scenario}, {sub_label})")
    impact_vector = model.impact_for(goal)
    impact = impact_vector.level(category) if impact_vector is not None else None
    if impact is None:
        return None
    maximum = p_max(model, goal, scenario, sub_label)
    value = impact * maximum
    return RiskCell(
        goal=goal,
        scenario=scenario,
        sub_label=sub_label,
        category=category,
        impact=impact,
        p_max=maximum,
        risk=value,
        band=band_of(value),
        vectors=binding.vectors,
    )


def assess_all(model: ThreatModel) -> list[RiskCell]:
    """Every defined (binding x category) cell, in canonical order:
    goal asc, scenario asc, sub-label asc, then H, M, QL, P."""
    cells: list[RiskCell] = []
    for binding in model.sorted_bindings():
        for category in CATEGORY_ORDER:
            cell = risk(model, binding.goal, binding.scenario, binding.sub_label, category)
            if cell is not None:
                cells.append(cell)
    return cells


def rank(cells: list[RiskCell]) -> list[RiskCell]:
    """Cells sorted by risk descending; ties broken by category order
    (H, M, QL, P), then goal, scenario and sub-label, for determinism."""
    return sorted(
        cells,
        key=lambda cell: (
            -cell.risk,
            CATEGORY_ORDER.index(cell.category),
            ident_sort_key(cell.goal),
            ident_sort_key(cell.scenario),
            cell.sub_label or "",
        ),
    )


def assessment_results(model: ThreatModel) -> list[AssessmentResult]:
    """All assessments with computed probabilities, in canonical order
    (goal, scenario, sub-label, actor ascending)."""
    ordered = sorted(
        model.assessments,
        key=lambda a: binding_sort_key(a.binding_key) + (ident_sort_key(a.actor),),
    )
    return [
        AssessmentResult(
            goal=a.goal,
            scenario=a.scenario,
            sub_label=a.sub_label,
            actor=a.actor,
            c=a.c,
            o=a.o,
            m=a.m,
            computed_p=probability(a),
        )
        for a in ordered
    ]


def vector_summary(model: ThreatModel) -> list[VectorRiskSummary]:
    """Per-vulnerability worst risk over all cells attributing to it.

    Ordered worst-first (risk descending, then vulnerability id), so the
    head of the list is the elimination priority.
    """
    contributions: dict[str, list[RiskCell]] = {v.id: [] for v in model.vulnerabilities}
    for cell in assess_all(model):
        for vector in cell.vectors:
            if vector in contributions:
                contributions[vector].append(cell)

    summaries: list[VectorRiskSummary] = []
    for vuln_id, cells in contributions.items():
        if cells:
            worst = max(cell.risk for cell in cells)
            summaries.append(VectorRiskSummary(
                vulnerability=vuln_id,
                worst_band=band_of(worst),
                worst_risk=worst,
                contributing_cells=tuple(
                    (c.goal, c.scenario, c.sub_label, c.category) for c in cells
                ),
            ))
        else:
            summaries.append(VectorRiskSummary(
                vulnerability=vuln_id,
                worst_band=RiskBand.NEGLIGIBLE,
                worst_risk=None,
                contributing_cells=(),
            ))
    summaries.sort(
        key=lambda s: (-(s.worst_risk or 0), ident_sort_key(s.vulnerability))
    )
    return summaries
