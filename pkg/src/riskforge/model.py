"""Domain types for actor/scenario threat models.

A threat model is a declarative document: actors, attack goals,
vulnerabilities, attack scenarios (ordered event sequences, possibly with
alternative variants), goal-scenario bindings carrying attack-vector lists,
per-actor threat assessments, and per-goal impact vectors.

Everything here is immutable after construction and safe to share across
concurrent evaluators. Validation of cross-references and invariants lives
in :mod:`riskforge.ingest`; scoring lives in :mod:`riskforge.engine`.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from enum import Enum

# Ordinal score bounds for capacity, opportunity, motivation and impact levels.
SCORE_MIN = 1
SCORE_MAX = 4

# Probability is the sum of three ordinal scores.
PROBABILITY_MIN = 3 * SCORE_MIN
PROBABILITY_MAX = 3 * SCORE_MAX

# Risk is impact (1-4) times the maximum actor probability (3-12).
RISK_MIN = SCORE_MIN * PROBABILITY_MIN
RISK_MAX = SCORE_MAX * PROBABILITY_MAX

# A binding (and its risk cells) is keyed by goal id, scenario id and an
# optional sub-label that distinguishes reuses of one scenario under a goal.
BindingKey = tuple[str, str, "str | None"]


class Category(str, Enum):
    """Impact category: health, monetary, quality of life, privacy."""

    HEALTH = "H"
    MONETARY = "M"
    QUALITY_OF_LIFE = "QL"
    PRIVACY = "P"


# Fixed presentation and evaluation order for categories.
CATEGORY_ORDER: tuple[Category, ...] = (
    Category.HEALTH,
    Category.MONETARY,
    Category.QUALITY_OF_LIFE,
    Category.PRIVACY,
)


class Location(str, Enum):
    """Where an attack event takes place."""

    PATIENT_HOME = "patient-home"
    HOSPITAL = "hospital"
    REMOTE = "remote"
    PHYSICAL_POSSESSION = "physical-possession"


class DeviceClass(str, Enum):
    """Device classes a vulnerability can affect."""

    IMPLANT = "implant"
    PROGRAMMER = "programmer"
    MONITOR = "monitor"
    CLOUD = "cloud"


class Strategy(str, Enum):
    """Risk management strategy attached to a band.

    A fourth classical strategy, transferring risk to a third party, is
    deliberately not representable as an output: no band maps to it.
    """

    ACCEPT = "Accept"
    MANAGE = "Manage"
    REFUSE = "Refuse"


class RiskBand(str, Enum):
    """Qualitative risk band over the integer risk range [3, 48]."""

    NEGLIGIBLE = "Negligible"
    ACCEPTABLE = "Acceptable"
    UNDESIRABLE = "Undesirable"
    UNACCEPTABLE = "Unacceptable"

    @property
    def bounds(self) -> tuple[int, int]:
        return BAND_BOUNDS[self]

    @property
    def strategy(self) -> Strategy:
        return BAND_STRATEGY[self]


# Closed integer intervals; collectively they tile [3, 48] exactly.
BAND_BOUNDS: dict[RiskBand, tuple[int, int]] = {
    RiskBand.NEGLIGIBLE: (3, 11),
    RiskBand.ACCEPTABLE: (12, 23),
    RiskBand.UNDESIRABLE: (24, 35),
    RiskBand.UNACCEPTABLE: (36, 48),
}

BAND_STRATEGY: dict[RiskBand, Strategy] = {
    RiskBand.NEGLIGIBLE: Strategy.ACCEPT,
    RiskBand.ACCEPTABLE: Strategy.ACCEPT,
    RiskBand.UNDESIRABLE: Strategy.MANAGE,
    RiskBand.UNACCEPTABLE: Strategy.REFUSE,
}


_IDENT_SPLIT = re.compile(r"(\d+)")


def ident_sort_key(ident: str) -> tuple[tuple[int, int | str], ...]:
    """Natural sort key for identifiers like ``S2`` < ``S11`` < ``V10``."""
    return tuple(
        (0, int(part)) if part.isdigit() else (1, part)
        for part in _IDENT_SPLIT.split(ident)
        if part
    )


def binding_sort_key(key: BindingKey) -> tuple:
    goal, scenario, sub_label = key
    return (ident_sort_key(goal), ident_sort_key(scenario), sub_label or "")


@dataclass(frozen=True)
class Actor:
    """A threat source: a person or organization attempting the attack."""

    id: str
    name: str
    description: str = ""


@dataclass(frozen=True)
class AttackGoal:
    """The end effect an actor seeks."""

    id: str
    title: str
    description: str = ""


@dataclass(frozen=True)
class Vulnerability:
    """A design or implementation flaw in some device class."""

    id: str
    name: str
    affects: tuple[str, ...]
    description: str = ""


@dataclass(frozen=True)
class Event:
    """One step in a scenario variant.

    ``exploits`` lists the vulnerabilities this step uses; steps that are
    pure logistics (travel, hardware acquisition) leave it empty.
    """

    order: int
    description: str
    location: str
    exploits: tuple[str, ...] = ()


@dataclass(frozen=True)
class ScenarioVariant:
    """One alternative way of carrying a scenario out (e.g. JTAG vs UART)."""

    name: str
    events: tuple[Event, ...]

    def required_vulnerabilities(self) -> frozenset[str]:
        """Union of exploited vulnerabilities over this variant's events."""
        return frozenset(v for event in self.events for v in event.exploits)


@dataclass(frozen=True)
class Scenario:
    """An ordered sequence of events an actor performs to reach a goal."""

    id: str
    description: str
    method: str
    variants: tuple[ScenarioVariant, ...]

    def exploit_union(self) -> frozenset[str]:
        """Vulnerabilities exploited by any event of any variant."""
        return frozenset(
            v for variant in self.variants for v in variant.required_vulnerabilities()
        )


@dataclass(frozen=True)
class GoalScenarioBinding:
    """A scenario applied to a goal, with its attack-vector list.

    ``vectors`` is the set of vulnerabilities with a demonstrated
    exploitation method for this (goal, scenario) pair; risk attribution is
    computed from it. ``sub_label`` distinguishes reuses of one scenario
    under the same goal (e.g. ``a``/``b``/``c`` payload variants).
    """

    goal: str
    scenario: str
    sub_label: str | None
    vectors: tuple[str, ...]
    narrative: str = ""

    @property
    def key(self) -> BindingKey:
        return (self.goal, self.scenario, self.sub_label)


@dataclass(frozen=True)
class ThreatAssessment:
    """Ordinal scores for one actor attempting one bound scenario.

    ``c``, ``o`` and ``m`` rate the actor's capacity, opportunity and
    motivation from 1 to 4. ``published_p`` preserves an externally
    published probability total for auditing; computation never uses it.
    """

    goal: str
    scenario: str
    sub_label: str | None
    actor: str
    c: int
    o: int
    m: int
    published_p: int | None = None

    @property
    def binding_key(self) -> BindingKey:
        return (self.goal, self.scenario, self.sub_label)


@dataclass(frozen=True)
class ImpactVector:
    """Per-goal impact levels; absent categories carry no risk."""

    goal: str
    H: int | None = None
    M: int | None = None
    QL: int | None = None
    P: int | None = None

    def level(self, category: Category | str) -> int | None:
        return getattr(self, Category(category).value)

    def present_categories(self) -> tuple[Category, ...]:
        return tuple(c for c in CATEGORY_ORDER if self.level(c) is not None)


@dataclass(frozen=True)
class RiskCell:
    """One evaluated (goal, scenario, category) result.

    Construction enforces the defining identities: ``risk`` is exactly
    ``impact * p_max`` and ``band`` is the band containing ``risk``.
    """

    goal: str
    scenario: str
    sub_label: str | None
    category: Category
    impact: int
    p_max: int
    risk: int
    band: RiskBand
    vectors: tuple[str, ...]

    def __post_init__(self) -> None:
        if self.risk != self.impact * self.p_max:
            raise ValueError(
                f"risk {self.risk} != impact {self.impact} * p_max {self.p_max}"
            )
        lo, hi = self.band.bounds
        if not lo <= self.risk <= hi:
            raise ValueError(f"band {self.band.value} does not contain risk {self.risk}")

    @property
    def binding_key(self) -> BindingKey:
        return (self.goal, self.scenario, self.sub_label)

    @property
    def strategy(self) -> Strategy:
        return self.band.strategy

    def location(self) -> str:
        """Compact cell address like ``G5/S11(a)/H``."""
        scenario = self.scenario + (f"({self.sub_label})" if self.sub_label else "")
        return f"{self.goal}/{scenario}/{self.category.value}"


@dataclass(frozen=True)
class Metadata:
    name: str
    version: str = ""
    source: str | None = None
    notes: tuple[str, ...] = ()


@dataclass(frozen=True)
class ThreatModel:
    """The complete declarative threat-model document.

    Collections keep declaration order; lookups are linear scans, which is
    fine at the scale of these documents (tens of rows).
    """

    metadata: Metadata
    actors: tuple[Actor, ...] = ()
    goals: tuple[AttackGoal, ...] = ()
    vulnerabilities: tuple[Vulnerability, ...] = ()
    scenarios: tuple[Scenario, ...] = ()
    bindings: tuple[GoalScenarioBinding, ...] = ()
    assessments: tuple[ThreatAssessment, ...] = ()
    impacts: tuple[ImpactVector, ...] = ()

    def actor(self, actor_id: str) -> Actor | None:
        return next((a for a in self.actors if a.id == actor_id), None)

    def goal(self, goal_id: str) -> AttackGoal | None:
        return next((g for g in self.goals if g.id == goal_id), None)

    def vulnerability(self, vuln_id: str) -> Vulnerability | None:
        return next((v for v in self.vulnerabilities if v.id == vuln_id), None)

    def scenario(self, scenario_id: str) -> Scenario | None:
        return next((s for s in self.scenarios if s.id == scenario_id), None)

    def binding(
        self, goal: str, scenario: str, sub_label: str | None = None
    ) -> GoalScenarioBinding | None:
        key = (goal, scenario, sub_label)
        return next((b for b in self.bindings if b.key == key), None)

    def impact_for(self, goal_id: str) -> ImpactVector | None:
        return next((i for i in self.impacts if i.goal == goal_id), None)

    def assessments_for(self, key: BindingKey) -> tuple[ThreatAssessment, ...]:
        return tuple(a for a in self.assessments if a.binding_key == key)

    def vulnerability_ids(self) -> frozenset[str]:
        return frozenset(v.id for v in self.vulnerabilities)

    def sorted_bindings(self) -> tuple[GoalScenarioBinding, ...]:
        """Bindings in canonical order: goal, scenario, sub-label ascending."""
        return tuple(sorted(self.bindings, key=lambda b: binding_sort_key(b.key)))
