"""Remote oracle: multimodal LLM endpoint with disk caching and retries.

Wire contract: ``POST <endpoint>`` with body
``{"model": ..., "messages": [{"role": "user", "text": ..., "images": [...]}]}``
returning ``{"text": <completion>}``.  Responses are cached on disk keyed
by (prompt id, payload hash), so re-runs are cheap and reproducible.
"""

from __future__ import annotations

import base64
import dataclasses
import hashlib
import json
import logging
import threading
from pathlib import Path

import requests

from ..core import Action, Observation, SimpleTask, TaskTuple, Trajectory, dumps
from ..errors import OracleUnavailable, SchemaViolation
from ..screenshots import ScreenshotStore
from . import Oracle, OracleRequest
from .prompts import render
from .schemas import extract_json, tasks_from_payload, validate_response

logger = logging.getLogger(__name__)

SCHEMA_RETRIES = 2
_RETRY_REMINDER = (
    "\n\nYour previous response did not comply with the JSON schema. "
    "Respond again with valid schema and nothing else."
)


def _action_history_text(history: list[tuple[Observation, Action]] | list[Action]) -> str:
    lines = []
    for index, item in enumerate(history, start=1):
        if isinstance(item, tuple):
            obs, action = item
            target = action.element_id or (action.inputs[0] if action.inputs else "page")
            lines.append(f"step {index}: {action.kind} on {target} at {obs.url}")
        else:
            target = item.element_id or (item.inputs[0] if item.inputs else "page")
            lines.append(f"step {index}: {item.kind} on {target}")
    return "\n".join(lines) if lines else "(no actions yet)"


def _tasks_text(tasks: list[SimpleTask]) -> str:
    payload = [
        {
            "title": t.title,
            "action_sequence": [
                {"type": a.kind, "element_id": a.element_id, "input": list(a.inputs)}
                for a in t.action_sequence
            ],
        }
        for t in tasks
    ]
    return json.dumps(payload, ensure_ascii=False, sort_keys=True)


class RemoteOracle(Oracle):
    def __init__(
        self,
        endpoint: str,
        model: str,
        store: ScreenshotStore | None = None,
        cache_dir: str | Path | None = None,
        timeout: float = 120.0,
        max_in_flight: int = 4,
    ):
        self.endpoint = endpoint
        self.model = model
        self.store = store
        self.cache_dir = Path(cache_dir) if cache_dir else None
        if self.cache_dir:
            self.cache_dir.mkdir(parents=True, exist_ok=True)
        self.timeout = timeout
        self._gate = threading.Semaphore(max_in_flight)

    # -- transport ---------------------------------------------------------

    def _cache_path(self, request: OracleRequest) -> Path | None:
        if self.cache_dir is None:
            return None
        digest = hashlib.sha256(
            dumps({"text": request.text, "images": list(request.images)}).encode()
        ).hexdigest()[:24]
        return self.cache_dir / f"{request.prompt_id}-{digest}.json"

    def _post(self, text: str, images: tuple[str, ...]) -> str:
        message: dict = {"role": "user", "text": text, "images": []}
        for handle in images:
            if self.store is not None and self.store.has(handle):
                data = base64.b64encode(self.store.get(handle)).decode("ascii")
                message["images"].append({"handle": handle, "data_b64": data})
            else:
                message["images"].append({"handle": handle})
        body = {"model": self.model, "messages": [message]}
        with self._gate:
            try:
                response = requests.post(self.endpoint, json=body, timeout=self.timeout)
            except requests.RequestException as exc:
                raise OracleUnavailable(f"{self.endpoint}: {exc}") from exc
        if response.status_code != 200:
            raise OracleUnavailable(
                f"{self.endpoint}: HTTP {response.status_code}: {response.text[:200]}"
            )
        return response.json()["text"]

    def ask(self, request: OracleRequest):
        """Send one request, schema-validate, retry twice on violations."""
        cache_path = self._cache_path(request)
        if cache_path is not None and cache_path.exists():
            cached = json.loads(cache_path.read_text())
            return validate_response(request.prompt_id, cached)
        text = request.text
        last_error: SchemaViolation | None = None
        for attempt in range(1 + SCHEMA_RETRIES):
            completion = self._post(text, request.images)
            try:
                payload = validate_response(request.prompt_id, extract_json(completion))
            except SchemaViolation as exc:
                logger.warning(
                    "%s response failed schema (attempt %d/%d): %s",
                    request.prompt_id, attempt + 1, 1 + SCHEMA_RETRIES, exc,
                )
                last_error = exc
                text = request.text + _RETRY_REMINDER
                continue
            if cache_path is not None:
                cache_path.write_text(json.dumps(payload, sort_keys=True, ensure_ascii=False))
            return payload
        raise last_error  # type: ignore[misc]

    # -- oracle interface ---------------------------------------------------

    def discover_simple_tasks(
        self, observation: Observation, observed: list[SimpleTask]
    ) -> list[SimpleTask]:
        request = OracleRequest(
            prompt_id="discover",
            text=render(
                "discover",
                HTML=observation.simplified_html,
                PAST_ACTION_SEQUENCES=_tasks_text(observed),
            ),
            images=(observation.screenshot,),
        )
        return tasks_from_payload(self.ask(request), observation.page_id)

    def discover_differential_tasks(
        self, before: Observation, after: Observation
    ) -> list[SimpleTask]:
        request = OracleRequest(
            prompt_id="discover_differential",
            text=render("discover_differential", HTML=after.simplified_html),
            images=(before.screenshot, after.screenshot),
        )
        return tasks_from_payload(self.ask(request), after.page_id)

    def is_moderate_visual_change(
        self, before: Observation, after: Observation
    ) -> tuple[str, bool]:
        request = OracleRequest(
            prompt_id="visual_change",
            text=render("visual_change"),
            images=(before.screenshot, after.screenshot),
        )
        payload = self.ask(request)
        return payload["reason"], payload["answer"]

    def categorize_tasks(
        self, observation: Observation, tasks: list[SimpleTask]
    ) -> list[SimpleTask]:
        if not tasks:
            raise ValueError("categorize requires a nonempty task list")
        request = OracleRequest(
            prompt_id="categorize",
            text=render(
                "categorize",
                HTML=observation.simplified_html,
                SHORT_TASKS=_tasks_text(tasks),
            ),
            images=(observation.screenshot,),
        )
        payload = self.ask(request)
        by_title = {item["title"]: item for item in payload["task_list"]}
        result = []
        for task in tasks:
            item = by_title.get(task.title)
            if item is None or item["category"] == "fixed":
                result.append(dataclasses.replace(task, category="fixed", group_number=None))
            else:
                result.append(
                    dataclasses.replace(
                        task,
                        category="dynamic",
                        group_number=int(item.get("group_number") or 1),
                    )
                )
        return result

    def propose_info_seeking(
        self, observation: Observation, history: list
    ) -> list[SimpleTask]:
        request = OracleRequest(
            prompt_id="info_seeking",
            text=render(
                "info_seeking",
                HTML=observation.simplified_html,
                ACTION_HISTORY=_action_history_text(history),
            ),
            images=(observation.screenshot,),
        )
        payload = self.ask(request)
        return [
            SimpleTask(
                title=item["ask"],
                is_allowed=True,
                action_sequence=(),
                origin_page=observation.page_id,
                info_seeking=True,
            )
            for item in payload["ask_list"][:2]
        ]

    def synthesize_and_evaluate(
        self,
        steps: list[tuple[Observation, Action]],
        final_observation: Observation,
        last: SimpleTask,
    ) -> TaskTuple | None:
        if not last.info_seeking and len(steps) < 3:
            return None
        request = OracleRequest(
            prompt_id="synthesize_evaluate",
            text=render(
                "synthesize_evaluate",
                ACTION_HISTORY=_action_history_text(steps),
                SHORT_TASKS=_tasks_text([last]),
            ),
        )
        payload = self.ask(request)
        if payload["score"] < 3:
            return None
        return TaskTuple(
            description=payload["description"],
            trajectory=Trajectory(steps=tuple(steps), final_observation=final_observation),
            kind="info_seeking" if last.info_seeking else "action_oriented",
            completeness_score=payload["score"],
        )
