"""Parse, validate and serialize threat-model documents.

The on-disk format is a JSON object with eight top-level keys:
``metadata``, ``actors``, ``goals``, ``vulnerabilities``, ``scenarios``,
``bindings``, ``assessments``, ``impacts``. Parsing is strict: unknown keys
are rejected, scores must be JSON integers, and every parse error carries a
JSONPath-style location. Semantic checks (ranges, uniqueness, references,
coverage) are reported by :func:`validate`, which never raises on a
parseable document.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Any

from .model import (
    SCORE_MAX,
    SCORE_MIN,
    Actor,
    AttackGoal,
    Category,
    DeviceClass,
    Event,
    GoalScenarioBinding,
    ImpactVector,
    Location,
    Metadata,
    Scenario,
    ScenarioVariant,
    ThreatAssessment,
    ThreatModel,
    Vulnerability,
)

TOP_LEVEL_KEYS = (
    "metadata",
    "actors",
    "goals",
    "vulnerabilities",
    "scenarios",
    "bindings",
    "assessments",
    "impacts",
)

# Parse-stage error codes.
MALFORMED_SYNTAX = "malformed-syntax"
WRONG_TYPE = "wrong-type"
UNKNOWN_KEY = "unknown-key"
MISSING_KEY = "missing-key"
INVALID_VALUE = "invalid-value"

# Validation-stage error codes.
DUPLICATE_ID = "duplicate-id"
DUPLICATE_BINDING = "duplicate-binding"
DUPLICATE_ASSESSMENT = "duplicate-assessment"
DUPLICATE_IMPACT = "duplicate-impact"
DANGLING_REFERENCE = "dangling-reference"
UNBOUND_ASSESSMENT = "unbound-assessment"
SCORE_OUT_OF_RANGE = "score-out-of-range"
EMPTY_NAME = "empty-name"
EMPTY_AFFECTS = "empty-affects"
EMPTY_VECTORS = "empty-vectors"
EMPTY_IMPACT = "empty-impact"
NO_VARIANTS = "no-variants"
EMPTY_EVENTS = "empty-events"
BAD_EVENT_ORDER = "bad-event-order"
BINDING_WITHOUT_ASSESSMENT = "binding-without-assessment"

# Warning codes.
PUBLISHED_P_MISMATCH = "published-p-mismatch"
VECTOR_EXPLOIT_MISMATCH = "vector-exploit-mismatch"


class ParseError(Exception):
    """A document cannot be turned into a ThreatModel."""

    def __init__(self, code: str, path: str, message: str):
        super().__init__(f"{code} at {path}: {message}")
        self.code = code
        self.path = path
        self.message = message


@dataclass(frozen=True)
class Finding:
    """One validation error or warning, anchored to a document path."""

    code: str
    path: str
    message: str

    def __str__(self) -> str:
        return f"{self.code} at {self.path}: {self.message}"


@dataclass
class ValidationReport:
    errors: list[Finding] = field(default_factory=list)
    warnings: list[Finding] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.errors


# ---------------------------------------------------------------------------
# Parsing
# ---------------------------------------------------------------------------


def _require_object(value: Any, path: str) -> dict:
    if not isinstance(value, dict):
        raise ParseError(WRONG_TYPE, path, f"expected object, got {_typename(value)}")
    return value


def _require_array(value: Any, path: str) -> list:
    if not isinstance(value, list):
        raise ParseError(WRONG_TYPE, path, f"expected array, got {_typename(value)}")
    return value


def _typename(value: Any) -> str:
    names = {
        dict: "object",
        list: "array",
        str: "string",
        bool: "boolean",
        int: "integer",
        float: "number",
        type(None): "null",
    }
    return names.get(type(value), type(value).__name__)


def _check_keys(obj: dict, path: str, allowed: tuple[str, ...], required: tuple[str, ...]) -> None:
    for key in obj:
        if key not in allowed:
            raise ParseError(UNKNOWN_KEY, f"{path}.{key}", f"unknown key {key!r}")
    for key in required:
        if key not in obj:
            raise ParseError(MISSING_KEY, f"{path}.{key}", f"missing required key {key!r}")


def _string(obj: dict, key: str, path: str) -> str:
    value = obj[key]
    if not isinstance(value, str):
        raise ParseError(WRONG_TYPE, f"{path}.{key}", f"expected string, got {_typename(value)}")
    return value


def _optional_string(obj: dict, key: str, path: str, default: str = "") -> str:
    if key not in obj or obj[key] is None:
        return default
    return _string(obj, key, path)


def _nullable_string(obj: dict, key: str, path: str) -> str | None:
    if key not in obj or obj[key] is None:
        return None
    return _string(obj, key, path)


def _integer(obj: dict, key: str, path: str) -> int:
    value = obj[key]
    # bool is a subclass of int; scores must be genuine JSON integers.
    if isinstance(value, bool) or not isinstance(value, int):
        raise ParseError(WRONG_TYPE, f"{path}.{key}", f"expected integer, got {_typename(value)}")
    return value


def _nullable_integer(obj: dict, key: str, path: str) -> int | None:
    if key not in obj or obj[key] is None:
        return None
    return _integer(obj, key, path)


def _string_array(obj: dict, key: str, path: str) -> tuple[str, ...]:
    items = _require_array(obj[key], f"{path}.{key}")
    out = []
    for i, item in enumerate(items):
        if not isinstance(item, str):
            raise ParseError(
                WRONG_TYPE, f"{path}.{key}[{i}]", f"expected string, got {_typename(item)}"
            )
        out.append(item)
    return tuple(out)


def _enum_value(value: str, allowed: type, path: str) -> str:
    try:
        allowed(value)
    except ValueError:
        options = ", ".join(member.value for member in allowed)
        raise ParseError(INVALID_VALUE, path, f"{value!r} is not one of: {options}") from None
    return value


def _parse_metadata(value: Any, path: str) -> Metadata:
    obj = _require_object(value, path)
    _check_keys(obj, path, ("name", "version", "source", "notes"), ("name",))
    notes: tuple[str, ...] = ()
    if "notes" in obj and obj["notes"] is not None:
        notes = _string_array(obj, "notes", path)
    return Metadata(
        name=_string(obj, "name", path),
        version=_optional_string(obj, "version", path),
        source=_nullable_string(obj, "source", path),
        notes=notes,
    )


def _parse_actor(value: Any, path: str) -> Actor:
    obj = _require_object(value, path)
    _check_keys(obj, path, ("id", "name", "description"), ("id", "name"))
    return Actor(
        id=_string(obj, "id", path),
        name=_string(obj, "name", path),
        description=_optional_string(obj, "description", path),
    )


def _parse_goal(value: Any, path: str) -> AttackGoal:
    obj = _require_object(value, path)
    _check_keys(obj, path, ("id", "title", "description"), ("id", "title"))
    return AttackGoal(
        id=_string(obj, "id", path),
        title=_string(obj, "title", path),
        description=_optional_string(obj, "description", path),
    )


def _parse_vulnerability(value: Any, path: str) -> Vulnerability:
    obj = _require_object(value, path)
    _check_keys(obj, path, ("id", "name", "affects", "description"), ("id", "name", "affects"))
    affects = _string_array(obj, "affects", path)
    for i, tag in enumerate(affects):
        _enum_value(tag, DeviceClass, f"{path}.affects[{i}]")
    return Vulnerability(
        id=_string(obj, "id", path),
        name=_string(obj, "name", path),
        affects=affects,
        description=_optional_string(obj, "description", path),
    )


def _parse_event(value: Any, path: str) -> Event:
    obj = _require_object(value, path)
    _check_keys(obj, path, ("order", "description", "location", "exploits"),
                ("order", "description", "location"))
    location = _string(obj, "location", path)
    _enum_value(location, Location, f"{path}.location")
    exploits: tuple[str, ...] = ()
    if "exploits" in obj and obj["exploits"] is not None:
        exploits = _string_array(obj, "exploits", path)
    return Event(
        order=_integer(obj, "order", path),
        description=_string(obj, "description", path),
        location=location,
        exploits=exploits,
    )


def _parse_variant(value: Any, path: str) -> ScenarioVariant:
    obj = _require_object(value, path)
    _check_keys(obj, path, ("name", "events"), ("name", "events"))
    events = _require_array(obj["events"], f"{path}.events")
    return ScenarioVariant(
        name=_string(obj, "name", path),
        events=tuple(_parse_event(e, f"{path}.events[{i}]") for i, e in enumerate(events)),
    )


def _parse_scenario(value: Any, path: str) -> Scenario:
    obj = _require_object(value, path)
    _check_keys(obj, path, ("id", "description", "method", "variants"),
                ("id", "description", "method", "variants"))
    variants = _require_array(obj["variants"], f"{path}.variants")
    return Scenario(
        id=_string(obj, "id", path),
        description=_string(obj, "description", path),
        method=_string(obj, "method", path),
        variants=tuple(
            _parse_variant(v, f"{path}.variants[{i}]") for i, v in enumerate(variants)
        ),
    )


def _parse_binding(value: Any, path: str) -> GoalScenarioBinding:
    obj = _require_object(value, path)
    _check_keys(obj, path, ("goal", "scenario", "sub_label", "vectors", "narrative"),
                ("goal", "scenario", "vectors"))
    return GoalScenarioBinding(
        goal=_string(obj, "goal", path),
        scenario=_string(obj, "scenario", path),
        sub_label=_nullable_string(obj, "sub_label", path),
        vectors=_string_array(obj, "vectors", path),
        narrative=_optional_string(obj, "narrative", path),
    )


def _parse_assessment(value: Any, path: str) -> ThreatAssessment:
    obj = _require_object(value, path)
    _check_keys(obj, path,
                ("goal", "scenario", "sub_label", "actor", "c", "o", "m", "published_p"),
                ("goal", "scenario", "actor", "c", "o", "m"))
    return ThreatAssessment(
        goal=_string(obj, "goal", path),
        scenario=_string(obj, "scenario", path),
        sub_label=_nullable_string(obj, "sub_label", path),
        actor=_string(obj, "actor", path),
        c=_integer(obj, "c", path),
        o=_integer(obj, "o", path),
        m=_integer(obj, "m", path),
        published_p=_nullable_integer(obj, "published_p", path),
    )


def _parse_impact(value: Any, path: str) -> ImpactVector:
    obj = _require_object(value, path)
    _check_keys(obj, path, ("goal", "H", "M", "QL", "P"), ("goal",))
    return ImpactVector(
        goal=_string(obj, "goal", path),
        H=_nullable_integer(obj, "H", path),
        M=_nullable_integer(obj, "M", path),
        QL=_nullable_integer(obj, "QL", path),
        P=_nullable_integer(obj, "P", path),
    )


def parse(document_text: str) -> ThreatModel:
    """Parse a JSON threat-model document into a ThreatModel.

    Raises :class:`ParseError` for malformed syntax, unknown or missing
    keys, wrong value types, and out-of-vocabulary enum values. Semantic
    problems (dangling references, out-of-range scores, ...) do not raise;
    they are reported by :func:`validate`.
    """
    try:
        document = json.loads(document_text)
    except json.JSONDecodeError as exc:
        raise ParseError(MALFORMED_SYNTAX, "$", str(exc)) from exc

    root = _require_object(document, "$")
    _check_keys(root, "$", TOP_LEVEL_KEYS, TOP_LEVEL_KEYS)

    def items(key: str, parser) -> tuple:
        array = _require_array(root[key], f"$.{key}")
        return tuple(parser(item, f"$.{key}[{i}]") for i, item in enumerate(array))

    return ThreatModel(
        metadata=_parse_metadata(root["metadata"], "$.metadata"),
        actors=items("actors", _parse_actor),
        goals=items("goals", _parse_goal),
        vulnerabilities=items("vulnerabilities", _parse_vulnerability),
        scenarios=items("scenarios", _parse_scenario),
        bindings=items("bindings", _parse_binding),
        assessments=items("assessments", _parse_assessment),
        impacts=items("impacts", _parse_impact),
    )


# ---------------------------------------------------------------------------
# Validation
# ---------------------------------------------------------------------------


def _binding_label(key: tuple) -> str:
    goal, scenario, sub_label = key
    return f"({goal}, {scenario}" + (f"({sub_label})" if sub_label else "") + ")"


def validate(model: ThreatModel) -> ValidationReport:
    """Check every model invariant; never raises on a parsed model.

    Errors make the model unusable for scoring (dangling references,
    duplicates, out-of-range ordinals, structural gaps). Warnings surface
    internal tensions in the data: published probability totals that
    disagree with c+o+m, and binding vector lists that disagree with the
    vulnerabilities exploited by the scenario's events.
    """
    report = ValidationReport()
    errors, warnings = report.errors, report.warnings

    def check_unique_ids(items, kind: str, section: str) -> None:
        seen: set[str] = set()
        for i, item in enumerate(items):
            if item.id in seen:
                errors.append(Finding(
                    DUPLICATE_ID, f"$.{section}[{i}].id", f"duplicate {kind} id {item.id!r}"
                ))
            seen.add(item.id)

    check_unique_ids(model.actors, "actor", "actors")
    check_unique_ids(model.goals, "goal", "goals")
    check_unique_ids(model.vulnerabilities, "vulnerability", "vulnerabilities")
    check_unique_ids(model.scenarios, "scenario", "scenarios")

    for i, actor in enumerate(model.actors):
        if not actor.name:
            errors.append(Finding(EMPTY_NAME, f"$.actors[{i}].name", "actor name is empty"))
    for i, goal in enumerate(model.goals):
        if not goal.title:
            errors.append(Finding(EMPTY_NAME, f"$.goals[{i}].title", "goal title is empty"))

    vuln_ids = model.vulnerability_ids()
    actor_ids = {a.id for a in model.actors}
    goal_ids = {g.id for g in model.goals}
    scenario_ids = {s.id for s in model.scenarios}

    for i, vuln in enumerate(model.vulnerabilities):
        if not vuln.name:
            errors.append(Finding(EMPTY_NAME, f"$.vulnerabilities[{i}].name",
                                  "vulnerability name is empty"))
        if not vuln.affects:
            errors.append(Finding(EMPTY_AFFECTS, f"$.vulnerabilities[{i}].affects",
                                  f"{vuln.id} affects no device class"))

    for i, scenario in enumerate(model.scenarios):
        spath = f"$.scenarios[{i}]"
        if not scenario.variants:
            errors.append(Finding(NO_VARIANTS, f"{spath}.variants",
                                  f"scenario {scenario.id} has no variants"))
        for j, variant in enumerate(scenario.variants):
            vpath = f"{spath}.variants[{j}]"
            if not variant.events:
                errors.append(Finding(EMPTY_EVENTS, f"{vpath}.events",
                                      f"variant {variant.name!r} of {scenario.id} has no events"))
            for k, event in enumerate(variant.events):
                if event.order != k + 1:
                    errors.append(Finding(
                        BAD_EVENT_ORDER, f"{vpath}.events[{k}].order",
                        f"expected order {k + 1}, got {event.order}"))
                for x, exploited in enumerate(event.exploits):
                    if exploited not in vuln_ids:
                        errors.append(Finding(
                            DANGLING_REFERENCE, f"{vpath}.events[{k}].exploits[{x}]",
                            f"unknown vulnerability {exploited!r}"))

    binding_keys: set[tuple] = set()
    for i, binding in enumerate(model.bindings):
        bpath = f"$.bindings[{i}]"
        if binding.goal not in goal_ids:
            errors.append(Finding(DANGLING_REFERENCE, f"{bpath}.goal",
                                  f"unknown goal {binding.goal!r}"))
        if binding.scenario not in scenario_ids:
            errors.append(Finding(DANGLING_REFERENCE, f"{bpath}.scenario",
                                  f"dangling scenario reference {binding.scenario!r}"))
        if binding.key in binding_keys:
            errors.append(Finding(DUPLICATE_BINDING, bpath,
                                  f"duplicate binding {_binding_label(binding.key)}"))
        binding_keys.add(binding.key)
        if not binding.vectors:
            errors.append(Finding(EMPTY_VECTORS, f"{bpath}.vectors",
                                  f"binding {_binding_label(binding.key)} lists no attack vectors"))
        for j, vector in enumerate(binding.vectors):
            if vector not in vuln_ids:
                errors.append(Finding(DANGLING_REFERENCE, f"{bpath}.vectors[{j}]",
                                      f"unknown vulnerability {vector!r}"))

    assessed_keys: set[tuple] = set()
    seen_assessments: set[tuple] = set()
    for i, a in enumerate(model.assessments):
        apath = f"$.assessments[{i}]"
        if a.actor not in actor_ids:
            errors.append(Finding(DANGLING_REFERENCE, f"{apath}.actor",
                                  f"unknown actor {a.actor!r}"))
        if a.binding_key not in binding_keys:
            errors.append(Finding(UNBOUND_ASSESSMENT, apath,
                                  f"no binding {_binding_label(a.binding_key)}"))
        full_key = a.binding_key + (a.actor,)
        if full_key in seen_assessments:
            errors.append(Finding(DUPLICATE_ASSESSMENT, apath,
                                  f"duplicate assessment of {_binding_label(a.binding_key)} "
                                  f"for actor {a.actor}"))
        seen_assessments.add(full_key)
        assessed_keys.add(a.binding_key)
        for name in ("c", "o", "m"):
            score = getattr(a, name)
            if not SCORE_MIN <= score <= SCORE_MAX:
                errors.append(Finding(
                    SCORE_OUT_OF_RANGE, f"{apath}.{name}",
                    f"score out of range [{SCORE_MIN},{SCORE_MAX}]: {name}={score}"))

    for i, binding in enumerate(model.bindings):
        if binding.key not in assessed_keys:
            errors.append(Finding(
                BINDING_WITHOUT_ASSESSMENT, f"$.bindings[{i}]",
                f"binding {_binding_label(binding.key)} has no assessments"))

    impact_goals: set[str] = set()
    for i, impact in enumerate(model.impacts):
        ipath = f"$.impacts[{i}]"
        if impact.goal not in goal_ids:
            errors.append(Finding(DANGLING_REFERENCE, f"{ipath}.goal",
                                  f"unknown goal {impact.goal!r}"))
        if impact.goal in impact_goals:
            errors.append(Finding(DUPLICATE_IMPACT, ipath,
                                  f"more than one impact vector for goal {impact.goal}"))
        impact_goals.add(impact.goal)
        if not impact.present_categories():
            errors.append(Finding(EMPTY_IMPACT, ipath,
                                  f"impact vector for {impact.goal} defines no category"))
        for category in Category:
            level = impact.level(category)
            if level is not None and not SCORE_MIN <= level <= SCORE_MAX:
                errors.append(Finding(
                    SCORE_OUT_OF_RANGE, f"{ipath}.{category.value}",
                    f"score out of range [{SCORE_MIN},{SCORE_MAX}]: "
                    f"{category.value}={level}"))

    # Warnings: published totals vs computed sums.
    for i, a in enumerate(model.assessments):
        if a.published_p is None:
            continue
        computed = a.c + a.o + a.m
        if a.published_p != computed:
            warnings.append(Finding(
                PUBLISHED_P_MISMATCH, f"$.assessments[{i}].published_p",
                f"published P {a.published_p} != c+o+m = {computed} for "
                f"{_binding_label(a.binding_key)} actor {a.actor}"))

    # Warnings: binding vectors vs the scenario's event exploit union,
    # flagged on any set difference in either direction.
    for i, binding in enumerate(model.bindings):
        scenario = model.scenario(binding.scenario)
        if scenario is None:
            continue
        exploits = scenario.exploit_union()
        if set(binding.vectors) != exploits:
            warnings.append(Finding(
                VECTOR_EXPLOIT_MISMATCH, f"$.bindings[{i}].vectors",
                f"binding {_binding_label(binding.key)} vectors "
                f"{sorted(binding.vectors)} != event exploits {sorted(exploits)}"))

    return report


# ---------------------------------------------------------------------------
# Serialization
# ---------------------------------------------------------------------------


def to_document(model: ThreatModel) -> dict:
    """Plain-dict form of a model, mirroring the file schema."""
    return {
        "metadata": {
            "name": model.metadata.name,
            "version": model.metadata.version,
            "source": model.metadata.source,
            "notes": list(model.metadata.notes),
        },
        "actors": [
            {"id": a.id, "name": a.name, "description": a.description}
            for a in model.actors
        ],
        "goals": [
            {"id": g.id, "title": g.title, "description": g.description}
            for g in model.goals
        ],
        "vulnerabilities": [
            {"id": v.id, "name": v.name, "affects": list(v.affects),
             "description": v.description}
            for v in model.vulnerabilities
        ],
        "scenarios": [
            {
                "id": s.id,
                "description": s.description,
                "method": s.method,
                "variants": [
                    {
                        "name": variant.name,
                        "events": [
                            {
                                "order": e.order,
                                "description": e.description,
                                "location": e.location,
                                "exploits": list(e.exploits),
                            }
                            for e in variant.events
                        ],
                    }
                    for variant in s.variants
                ],
            }
            for s in model.scenarios
        ],
        "bindings": [
            {"goal": b.goal, "scenario": b.scenario, "sub_label": b.sub_label,
             "vectors": list(b.vectors), "narrative": b.narrative}
            for b in model.bindings
        ],
        "assessments": [
            {"goal": a.goal, "scenario": a.scenario, "sub_label": a.sub_label,
             "actor": a.actor, "c": a.c, "o": a.o, "m": a.m,
             "published_p": a.published_p}
            for a in model.assessments
        ],
        "impacts": [
            {"goal": i.goal, "H": i.H, "M": i.M, "QL": i.QL, "P": i.P}
            for i in model.impacts
        ],
    }


def serialize(model: ThreatModel) -> str:
    """Canonical document text: sorted keys, declaration-order arrays,
    2-space indentation, trailing newline. ``parse(serialize(m))`` is
    structurally equal to ``m``, and repeated calls are byte-identical.
    """
    return json.dumps(to_document(model), indent=2, sort_keys=True, ensure_ascii=False) + "\n"
