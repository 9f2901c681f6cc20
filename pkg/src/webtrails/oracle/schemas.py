"""Response schemas for each prompt, plus parsing into domain objects."""

from __future__ import annotations

import json
import re
from typing import Any

import jsonschema

from ..core import Action, SimpleTask
from ..errors import SchemaViolation

_ACTION_ITEM = {
    "type": "object",
    "properties": {
        "element_id": {"type": ["string", "integer", "null"]},
        "text": {"type": ["string", "null"]},
        "type": {"type": "string"},
        "input": {"type": "array", "items": {"type": "string"}},
    },
    "required": ["type"],
}

TASK_LIST_SCHEMA = {
    "type": "object",
    "properties": {
        "task_list": {
            "type": "array",
            "items": {
                "type": "object",
                "properties": {
                    "title": {"type": "string"},
                    "is_allowed": {"type": "boolean"},
                    "action_sequence": {"type": "array", "items": _ACTION_ITEM},
                },
                "required": ["title", "is_allowed", "action_sequence"],
            },
        }
    },
    "required": ["task_list"],
}

CATEGORIZE_SCHEMA = {
    "type": "object",
    "properties": {
        "task_list": {
            "type": "array",
            "items": {
                "type": "object",
                "properties": {
                    "title": {"type": "string"},
                    "category": {"type": "string", "enum": ["fixed", "dynamic"]},
                    "group_number": {"type": ["integer", "null"]},
                },
                "required": ["title", "category"],
            },
        }
    },
    "required": ["task_list"],
}

VISUAL_CHANGE_SCHEMA = {
    "type": "object",
    "properties": {"reason": {"type": "string"}, "answer": {"type": "boolean"}},
    "required": ["reason", "answer"],
}

ASK_LIST_SCHEMA = {
    "type": "object",
    "properties": {
        "ask_list": {
            "type": "array",
            "maxItems": 2,
            "items": {
                "type": "object",
                "properties": {"reason": {"type": "string"}, "ask": {"type": "string"}},
                "required": ["reason", "ask"],
            },
        }
    },
    "required": ["ask_list"],
}

SYNTHESIZE_SCHEMA = {
    "type": "object",
    "properties": {
        "description": {"type": "string"},
        "score": {"type": "integer", "minimum": 1, "maximum": 5},
    },
    "required": ["description", "score"],
}

SCHEMAS: dict[str, dict] = {
    "discover": TASK_LIST_SCHEMA,
    "discover_differential": TASK_LIST_SCHEMA,
    "visual_change": VISUAL_CHANGE_SCHEMA,
    "categorize": CATEGORIZE_SCHEMA,
    "info_seeking": ASK_LIST_SCHEMA,
    "synthesize_evaluate": SYNTHESIZE_SCHEMA,
}

_FENCE = re.compile(r"^```(?:json)?\s*|\s*```$", re.MULTILINE)


def extract_json(text: str) -> Any:
    """Pull the first JSON object out of a completion, tolerating fences."""
    cleaned = _FENCE.sub("", text.strip())
    start = cleaned.find("{")
    if start < 0:
        raise SchemaViolation("completion contains no JSON object")
    decoder = json.JSONDecoder()
    try:
        value, _ = decoder.raw_decode(cleaned[start:])
    except json.JSONDecodeError as exc:
        raise SchemaViolation(f"completion is not valid JSON: {exc}") from exc
    return value


def validate_response(prompt_id: str, payload: Any) -> Any:
    try:
        jsonschema.validate(payload, SCHEMAS[prompt_id])
    except jsonschema.ValidationError as exc:
        raise SchemaViolation(f"{prompt_id} response: {exc.message}") from exc
    return payload


def tasks_from_payload(payload: Any, origin_page: str) -> list[SimpleTask]:
    """Convert a validated task_list payload into SimpleTask values.

    Items that violate task invariants (bad arity, fill-last) are dropped
    rather than failing the whole response.
    """
    tasks = []
    for item in payload["task_list"]:
        actions = []
        for raw in item["action_sequence"]:
            element_id = raw.get("element_id")
            actions.append(
                Action(
                    kind=raw["type"],
                    element_id=None if element_id is None else str(element_id),
                    inputs=tuple(raw.get("input") or ()),
                )
            )
        try:
            tasks.append(
                SimpleTask(
                    title=item["title"],
                    is_allowed=item["is_allowed"],
                    action_sequence=tuple(actions),
                    origin_page=origin_page,
                )
            )
        except ValueError:
            continue
    return tasks
