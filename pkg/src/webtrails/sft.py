"""Conversion of refined task tuples into conversational SFT records.

Each observation-action pair becomes one supervised example (user message:
task text, screenshot, page tree, up to three prior actions; assistant
message: next action plus reasoning).  The final observation is paired
with the terminating ``stop`` action, so a tuple with n actions yields
exactly n + 1 records.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Any, Iterable, Mapping

from .core import Action, TaskTuple, dumps, loads, validate_action
from .errors import MissingScreenshot, UnrefinedTuple
from .refiner import RefinedTuple
from .screenshots import ScreenshotStore

HISTORY_WINDOW = 3
STOP_REASONING = "The task is complete; no further action is required."


@dataclass(frozen=True)
class SftExample:
    """One supervised next-action example."""

    task_description: str
    screenshot: str
    tree_text: str
    prior_actions: tuple[Action, ...]
    action: Action
    reasoning: str

    def __post_init__(self) -> None:
        if len(self.prior_actions) > HISTORY_WINDOW:
            raise ValueError(f"history window is at most {HISTORY_WINDOW} actions")
        rule = validate_action(self.action)
        if rule is not None:
            raise ValueError(f"assistant action invalid: {rule}")

    def to_record(self) -> dict[str, Any]:
        return {
            "conversations": [
                {
                    "role": "user",
                    "content": {
                        "task": self.task_description,
                        "image": self.screenshot,
                        "tree": self.tree_text,
                        "history": [a.to_dict() for a in self.prior_actions],
                    },
                },
                {
                    "role": "assistant",
                    "content": {
                        "reasoning": self.reasoning,
                        "action": self.action.to_dict(),
                    },
                },
            ]
        }

    @classmethod
    def from_record(cls, record: Mapping[str, Any]) -> "SftExample":
        user, assistant = record["conversations"]
        return cls(
            task_description=user["content"]["task"],
            screenshot=user["content"]["image"],
            tree_text=user["content"]["tree"],
            prior_actions=tuple(Action.from_dict(a) for a in user["content"]["history"]),
            action=Action.from_dict(assistant["content"]["action"]),
            reasoning=assistant["content"]["reasoning"],
        )


def tuple_to_examples(
    refined: TaskTuple, reasonings: tuple[str, ...] | None = None
) -> list[SftExample]:
    """Expand one refined tuple into its ordered supervised examples.

    ``reasonings`` carries the agent's per-step reasoning when available;
    otherwise a templated rationale is used.
    """
    if not refined.refined:
        raise UnrefinedTuple(
            f"tuple {refined.description!r} has not passed refinement"
        )
    steps = refined.trajectory.steps
    actions = refined.trajectory.actions
    examples = []
    for index, (observation, action) in enumerate(steps):
        if reasonings is not None and index < len(reasonings):
            reasoning = reasonings[index]
        else:
            reasoning = f"Executing step {index + 1}: {action.kind} to progress the task."
        examples.append(
            SftExample(
                task_description=refined.description,
                screenshot=observation.screenshot,
                tree_text=observation.simplified_html,
                prior_actions=actions[max(0, index - HISTORY_WINDOW) : index],
                action=action,
                reasoning=reasoning,
            )
        )
    final = refined.trajectory.final_observation
    examples.append(
        SftExample(
            task_description=refined.description,
            screenshot=final.screenshot,
            tree_text=final.simplified_html,
            prior_actions=actions[max(0, len(actions) - HISTORY_WINDOW) :],
            action=Action("stop"),
            reasoning=STOP_REASONING,
        )
    )
    return examples


def refined_to_examples(results: Iterable[RefinedTuple]) -> list[SftExample]:
    examples = []
    for result in results:
        examples.extend(tuple_to_examples(result.tuple, result.reasonings))
    return examples


def serialize_dataset(
    examples: Iterable[SftExample],
    path: str | Path,
    store: ScreenshotStore | None = None,
) -> int:
    """Write one line-delimited record per example; returns the record count.

    Byte-stable across runs given identical inputs.  When a screenshot
    store is supplied, every image reference is checked against it.
    """
    path = Path(path)
    lines = []
    for example in examples:
        if store is not None and not store.has(example.screenshot):
            raise MissingScreenshot(
                f"record references image {example.screenshot!r} missing from the store"
            )
        lines.append(dumps(example.to_record()))
    path.write_text("".join(line + "\n" for line in lines), encoding="utf-8")
    return len(lines)


def parse_dataset(path: str | Path) -> list[SftExample]:
    examples = []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        if line.strip():
            examples.append(SftExample.from_record(loads(line)))
    return examples
