"""Core value types: actions, observations, tasks, trajectories, queue entries.

All types are immutable (frozen dataclasses over tuples) so they can be
shared freely between threads and persisted verbatim.  Every type
round-trips through ``to_dict``/``from_dict`` and the JSON helpers at the
bottom of the module.
"""

from __future__ import annotations

import hashlib
import json
import re
from dataclasses import dataclass, field
from typing import Any, Iterable, Mapping
from urllib.parse import parse_qsl, urlencode, urlsplit

# The exploration action space.  scroll_up/scroll_down are refinement-only
# extras: the explorer never emits them, but refined trajectories may
# contain them and the SFT exporter must accept them.
ACTION_KINDS = (
    "goto",
    "click",
    "fill",
    "press",
    "selectoption",
    "check",
    "uncheck",
    "stop",
    "scroll_up",
    "scroll_down",
)

EXPLORATION_ACTION_KINDS = ACTION_KINDS[:8]

# kind -> (needs element_id, exact input count)
_ARITY: dict[str, tuple[bool, int]] = {
    "goto": (False, 1),
    "click": (True, 0),
    "fill": (True, 1),
    "press": (True, 1),
    "selectoption": (True, 1),
    "check": (True, 0),
    "uncheck": (True, 0),
    "stop": (False, 0),
    "scroll_up": (False, 0),
    "scroll_down": (False, 0),
}

TASK_CATEGORIES = ("unclassified", "fixed", "dynamic")
TUPLE_KINDS = ("action_oriented", "info_seeking")


@dataclass(frozen=True)
class Action:
    """One GUI step: a kind, an optional element target and ordered inputs."""

    kind: str
    element_id: str | None = None
    inputs: tuple[str, ...] = ()

    def to_dict(self) -> dict[str, Any]:
        return {"kind": self.kind, "element_id": self.element_id, "inputs": list(self.inputs)}

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "Action":
        return cls(
            kind=data["kind"],
            element_id=data.get("element_id"),
            inputs=tuple(data.get("inputs") or ()),
        )


def validate_action(action: Action) -> str | None:
    """Check arity rules for an action.

    Returns ``None`` when the action is well formed, otherwise the violated
    rule as text.  Total: never raises.
    """
    if action.kind not in _ARITY:
        return f"unknown action kind {action.kind!r}"
    needs_element, n_inputs = _ARITY[action.kind]
    if needs_element and not action.element_id:
        return f"{action.kind} requires an element"
    if not needs_element and action.element_id is not None:
        return f"{action.kind} takes no element"
    if len(action.inputs) != n_inputs:
        if n_inputs == 1:
            return f"{action.kind} requires one input"
        return f"{action.kind} takes no inputs"
    return None


def _require_valid(action: Action) -> Action:
    rule = validate_action(action)
    if rule is not None:
        raise ValueError(rule)
    return action


@dataclass(frozen=True)
class Element:
    """An annotated interactive element as seen in one observation."""

    element_id: str
    text: str
    role: str
    region: tuple[int, int, int, int] = (0, 0, 0, 0)

    def to_dict(self) -> dict[str, Any]:
        return {
            "element_id": self.element_id,
            "text": self.text,
            "role": self.role,
            "region": list(self.region),
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "Element":
        return cls(
            element_id=data["element_id"],
            text=data["text"],
            role=data["role"],
            region=tuple(data.get("region") or (0, 0, 0, 0)),
        )


_ID_ATTR = re.compile(r'id="([^"]+)"')


@dataclass(frozen=True)
class Observation:
    """A page snapshot: identity, screenshot handle and annotated elements."""

    page_id: str
    url: str
    screenshot: str
    elements: tuple[Element, ...]
    simplified_html: str

    def __post_init__(self) -> None:
        ids = [e.element_id for e in self.elements]
        if len(ids) != len(set(ids)):
            raise ValueError("element ids must be unique within one observation")
        known = set(ids)
        for ref in _ID_ATTR.findall(self.simplified_html):
            if ref not in known:
                raise ValueError(f"simplified_html references unknown element id {ref!r}")

    def element(self, element_id: str) -> Element | None:
        for e in self.elements:
            if e.element_id == element_id:
                return e
        return None

    def element_ids(self) -> frozenset[str]:
        return frozenset(e.element_id for e in self.elements)

    def to_dict(self) -> dict[str, Any]:
        return {
            "page_id": self.page_id,
            "url": self.url,
            "screenshot": self.screenshot,
            "elements": [e.to_dict() for e in self.elements],
            "simplified_html": self.simplified_html,
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "Observation":
        return cls(
            page_id=data["page_id"],
            url=data["url"],
            screenshot=data["screenshot"],
            elements=tuple(Element.from_dict(e) for e in data["elements"]),
            simplified_html=data["simplified_html"],
        )


@dataclass(frozen=True)
class SimpleTask:
    """A short task completable with elements on a single page.

    ``action_sequence`` may be empty only for information-seeking tasks,
    which are answered by reading the page rather than acting on it.
    ``prefix_len`` counts leading actions inherited from ancestor menu
    expansions when the task was reconstructed out of a menu hierarchy.
    """

    title: str
    is_allowed: bool
    action_sequence: tuple[Action, ...]
    origin_page: str
    category: str = "unclassified"
    group_number: int | None = None
    info_seeking: bool = False
    prefix_len: int = 0

    def __post_init__(self) -> None:
        if self.category not in TASK_CATEGORIES:
            raise ValueError(f"unknown category {self.category!r}")
        if (self.group_number is not None) != (self.category == "dynamic"):
            raise ValueError("group_number is present iff category is dynamic")
        if not self.action_sequence and not self.info_seeking:
            raise ValueError("action_sequence may be empty only for info-seeking tasks")
        kinds = [a.kind for a in self.action_sequence]
        if "fill" in kinds and kinds[-1] == "fill":
            raise ValueError("a task containing fill must end with a non-fill action")
        if not 0 <= self.prefix_len <= len(self.action_sequence):
            raise ValueError("prefix_len out of range")
        for a in self.action_sequence:
            _require_valid(a)

    @property
    def own_actions(self) -> tuple[Action, ...]:
        return self.action_sequence[self.prefix_len :]

    def to_dict(self) -> dict[str, Any]:
        return {
            "title": self.title,
            "is_allowed": self.is_allowed,
            "action_sequence": [a.to_dict() for a in self.action_sequence],
            "origin_page": self.origin_page,
            "category": self.category,
            "group_number": self.group_number,
            "info_seeking": self.info_seeking,
            "prefix_len": self.prefix_len,
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "SimpleTask":
        return cls(
            title=data["title"],
            is_allowed=data["is_allowed"],
            action_sequence=tuple(Action.from_dict(a) for a in data["action_sequence"]),
            origin_page=data["origin_page"],
            category=data.get("category", "unclassified"),
            group_number=data.get("group_number"),
            info_seeking=data.get("info_seeking", False),
            prefix_len=data.get("prefix_len", 0),
        )


@dataclass(frozen=True)
class Trajectory:
    """Alternating observation/action steps plus the final observation."""

    steps: tuple[tuple[Observation, Action], ...]
    final_observation: Observation

    @property
    def actions(self) -> tuple[Action, ...]:
        return tuple(a for _, a in self.steps)

    def __len__(self) -> int:
        return len(self.steps)

    def to_dict(self) -> dict[str, Any]:
        return {
            "steps": [
                {"observation": o.to_dict(), "action": a.to_dict()} for o, a in self.steps
            ],
            "final_observation": self.final_observation.to_dict(),
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "Trajectory":
        return cls(
            steps=tuple(
                (Observation.from_dict(s["observation"]), Action.from_dict(s["action"]))
                for s in data["steps"]
            ),
            final_observation=Observation.from_dict(data["final_observation"]),
        )


@dataclass(frozen=True)
class TaskTuple:
    """A task description paired with the trajectory that accomplishes it."""

    description: str
    trajectory: Trajectory
    kind: str
    completeness_score: int
    refined: bool = False

    def __post_init__(self) -> None:
        if self.kind not in TUPLE_KINDS:
            raise ValueError(f"unknown tuple kind {self.kind!r}")
        if not 1 <= self.completeness_score <= 5:
            raise ValueError("completeness_score must be in 1..5")
        if not self.description:
            raise ValueError("description must be nonempty")

    def to_dict(self) -> dict[str, Any]:
        return {
            "description": self.description,
            "trajectory": self.trajectory.to_dict(),
            "kind": self.kind,
            "completeness_score": self.completeness_score,
            "refined": self.refined,
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "TaskTuple":
        return cls(
            description=data["description"],
            trajectory=Trajectory.from_dict(data["trajectory"]),
            kind=data["kind"],
            completeness_score=data["completeness_score"],
            refined=data.get("refined", False),
        )


@dataclass(frozen=True)
class QueueEntry:
    """A discovered page plus the action trace that reaches it from the seed."""

    page_id: str
    trace: tuple[Action, ...] = ()
    depth: int = field(default=-1)

    def __post_init__(self) -> None:
        if self.depth == -1:
            object.__setattr__(self, "depth", len(self.trace))
        elif self.depth != len(self.trace):
            raise ValueError("depth must equal the trace length")

    def to_dict(self) -> dict[str, Any]:
        return {
            "page_id": self.page_id,
            "trace": [a.to_dict() for a in self.trace],
            "depth": self.depth,
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "QueueEntry":
        return cls(
            page_id=data["page_id"],
            trace=tuple(Action.from_dict(a) for a in data["trace"]),
        )


# --- page identity --------------------------------------------------------


def normalize_url(url: str) -> str:
    """scheme + host + path + sorted query; fragment stripped."""
    parts = urlsplit(url)
    query = urlencode(sorted(parse_qsl(parts.query, keep_blank_values=True)))
    normalized = f"{parts.scheme}://{parts.netloc}{parts.path or '/'}"
    if query:
        normalized += f"?{query}"
    return normalized


def page_identity(url: str, roles: Iterable[str]) -> str:
    """Mint a page identity token from a URL and the roles present on it.

    The role digest covers the distinct roles rather than raw counts so an
    in-page menu reveal (which only adds elements of roles already present)
    does not change the page's identity.  Used by the live backend; the
    simulator mints identities from its declared page ids.
    """
    role_digest = ",".join(sorted(set(roles)))
    blob = f"{normalize_url(url)}|{role_digest}"
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()[:16]


# --- canonical task signatures --------------------------------------------

_STEM_DROP = re.compile(r"[^a-z0-9 ]+")


def title_stem(title: str) -> str:
    """Lowercased, punctuation-free, whitespace-collapsed title."""
    lowered = _STEM_DROP.sub(" ", title.lower())
    return " ".join(lowered.split())


def functional_signature(
    kinds: Iterable[str], role_text_pairs: Iterable[tuple[str, str]]
) -> str:
    """Title-free signature of a task's action path: kinds + element roles/labels.

    This is the projection shared by the ground-truth enumerator and the
    coverage report, so both sides compare in the same signature space.
    """
    kinds_part = ",".join(kinds)
    els_part = ";".join(f"{role}:{text}" for role, text in role_text_pairs)
    return f"do[{kinds_part}]on[{els_part}]"


def task_signature(task: SimpleTask, element_lookup: Mapping[str, tuple[str, str]]) -> str:
    """Canonical dedup signature: title stem + the functional signature.

    ``element_lookup`` maps element ids to (role, text) pairs; cross-page
    matching works because ids never participate in the signature.
    """
    pairs = []
    for a in task.action_sequence:
        if a.element_id is None:
            pairs.append(("page", ""))
        else:
            pairs.append(element_lookup.get(a.element_id, ("unknown", "")))
    functional = functional_signature((a.kind for a in task.action_sequence), pairs)
    return f"{title_stem(task.title)}|{functional}"


def functional_part(signature: str) -> str:
    """Strip the title stem off a canonical dedup signature."""
    return signature.split("|", 1)[1]


# --- serialization helpers -------------------------------------------------


def dumps(value: Any) -> str:
    """Deterministic JSON encoding used for every persisted record."""
    payload = value.to_dict() if hasattr(value, "to_dict") else value
    return json.dumps(payload, sort_keys=True, ensure_ascii=False, separators=(",", ":"))


def loads(text: str) -> Any:
    return json.loads(text)
