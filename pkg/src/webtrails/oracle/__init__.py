"""Reasoning interface used by the explorer and the synthesis pipeline.

Two interchangeable implementations: ``ScriptedOracle`` answers
deterministically from simulator ground truth (tests, desk-scale runs) and
``RemoteOracle`` talks to a multimodal LLM endpoint with the full prompt
templates.
"""

from __future__ import annotations

from dataclasses import dataclass

from ..core import Observation, SimpleTask, TaskTuple

PROMPT_IDS = (
    "discover",
    "discover_differential",
    "visual_change",
    "categorize",
    "info_seeking",
    "synthesize_evaluate",
)

_IMAGE_COUNTS = {
    "discover": 1,
    "discover_differential": 2,
    "visual_change": 2,
    "categorize": 1,
    "info_seeking": 1,
}


@dataclass(frozen=True)
class OracleRequest:
    """One wire request: a filled template plus its screenshot handles."""

    prompt_id: str
    text: str
    images: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        if self.prompt_id not in PROMPT_IDS:
            raise ValueError(f"unknown prompt id {self.prompt_id!r}")
        expected = _IMAGE_COUNTS.get(self.prompt_id)
        if expected is not None and len(self.images) != expected:
            raise ValueError(
                f"{self.prompt_id} carries exactly {expected} image(s), "
                f"got {len(self.images)}"
            )
        if len(self.images) > 2:
            raise ValueError("requests carry at most 2 images")


class Oracle:
    """Interface behind every reasoning call of the exploration loop."""

    def discover_simple_tasks(
        self, observation: Observation, observed: list[SimpleTask]
    ) -> list[SimpleTask]:
        raise NotImplementedError

    def discover_differential_tasks(
        self, before: Observation, after: Observation
    ) -> list[SimpleTask]:
        raise NotImplementedError

    def is_moderate_visual_change(
        self, before: Observation, after: Observation
    ) -> tuple[str, bool]:
        raise NotImplementedError

    def categorize_tasks(
        self, observation: Observation, tasks: list[SimpleTask]
    ) -> list[SimpleTask]:
        raise NotImplementedError

    def propose_info_seeking(
        self, observation: Observation, history: list
    ) -> list[SimpleTask]:
        raise NotImplementedError

    def synthesize_and_evaluate(
        self,
        steps: list[tuple[Observation, object]],
        final_observation: Observation,
        last: SimpleTask,
    ) -> TaskTuple | None:
        raise NotImplementedError


from .remote import RemoteOracle  # noqa: E402
from .scripted import ScriptedOracle  # noqa: E402

__all__ = ["Oracle", "OracleRequest", "RemoteOracle", "ScriptedOracle", "PROMPT_IDS"]
