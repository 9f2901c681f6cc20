"""Scripted oracle: answers every reasoning call from simulator ground truth.

Deterministic by construction (same inputs, same outputs), which is what
makes golden exploration tests and byte-reproducible pipeline runs
possible.  Only meaningful against the simulator backend.
"""

from __future__ import annotations

import dataclasses

from ..core import Action, Observation, SimpleTask, TaskTuple, Trajectory
from ..sitegraph import ElementDef, PageDef, SiteGraph
from . import Oracle

SEARCH_QUERY = "breaking news"
MAX_ASKS_PER_PAGE = 2


class ScriptedOracle(Oracle):
    def __init__(self, graph: SiteGraph):
        self.graph = graph

    # -- helpers ---------------------------------------------------------

    def _page(self, page_id: str) -> PageDef:
        return self.graph.page(page_id)

    def _form_field_ids(self, page: PageDef) -> set[str]:
        fields: set[str] = set()
        for el in page.elements:
            if el.behavior.kind == "submit" and el.role != "textbox":
                fields.update(el.behavior.required)
        return fields

    def _task_for_element(self, page: PageDef, el: ElementDef) -> SimpleTask | None:
        """Build the short task exercising one element, or None to skip it."""
        behavior = el.behavior
        actions: list[Action]
        if el.role == "menu_toggle":
            title = f"Expand {el.text} menu"
            actions = [Action("click", el.element_id)]
        elif el.role == "link":
            title = f"Navigate to {el.text}"
            actions = [Action("click", el.element_id)]
        elif el.role == "checkbox":
            title = f"Check {el.text}"
            actions = [Action("check", el.element_id)]
        elif el.role == "select":
            if not el.options:
                return None
            title = f"Select an option in {el.text}"
            actions = [Action("selectoption", el.element_id, (el.options[0],))]
        elif el.role == "textbox":
            if behavior.kind != "submit":
                return None  # form fields are folded into their submit task
            title = f"Search for {el.text}"
            actions = [
                Action("fill", el.element_id, (SEARCH_QUERY,)),
                Action("press", el.element_id, ("Enter",)),
            ]
        elif el.role == "button":
            if behavior.kind == "submit":
                title = f"Submit the {el.text} form"
                actions = []
                for req in behavior.required:
                    req_el = page.element(req)
                    assert req_el is not None
                    if req_el.role == "textbox":
                        actions.append(Action("fill", req, (f"Example {req_el.text}",)))
                    elif req_el.role == "select":
                        actions.append(Action("selectoption", req, (req_el.options[0],)))
                    else:
                        actions.append(Action("check", req))
                actions.append(Action("click", el.element_id))
            elif behavior.kind == "navigate":
                title = f"Open {el.text}"
                actions = [Action("click", el.element_id)]
            else:
                title = f"Click {el.text}"
                actions = [Action("click", el.element_id)]
        else:
            return None
        return SimpleTask(
            title=title,
            is_allowed=not bool(el.excluded_class),
            action_sequence=tuple(actions),
            origin_page=page.page_id,
        )

    def _functional_pairs(self, task: SimpleTask) -> tuple:
        page = self._page(task.origin_page)
        pairs = []
        for a in task.action_sequence:
            if a.element_id is None:
                pairs.append((a.kind, "page", ""))
                continue
            el = page.element(a.element_id)
            pairs.append((a.kind, el.role if el else "unknown", el.text if el else ""))
        return tuple(pairs)

    # -- oracle interface -------------------------------------------------

    def discover_simple_tasks(
        self, observation: Observation, observed: list[SimpleTask]
    ) -> list[SimpleTask]:
        page = self._page(observation.page_id)
        form_fields = self._form_field_ids(page)
        seen = {self._functional_pairs(t) for t in observed}
        visible = observation.element_ids()
        tasks = []
        for el in page.elements:
            if el.element_id not in visible or el.element_id in form_fields:
                continue
            task = self._task_for_element(page, el)
            if task is None:
                continue
            if self._functional_pairs(task) in seen:
                task = dataclasses.replace(task, is_allowed=False)
            tasks.append(task)
        return tasks

    def discover_differential_tasks(
        self, before: Observation, after: Observation
    ) -> list[SimpleTask]:
        if before.page_id != after.page_id:
            raise ValueError("differential discovery requires the same page")
        page = self._page(after.page_id)
        form_fields = self._form_field_ids(page)
        fresh = after.element_ids() - before.element_ids()
        tasks = []
        for el in page.elements:
            if el.element_id not in fresh or el.element_id in form_fields:
                continue
            task = self._task_for_element(page, el)
            if task is not None:
                tasks.append(task)
        return tasks

    def is_moderate_visual_change(
        self, before: Observation, after: Observation
    ) -> tuple[str, bool]:
        before_ids = before.element_ids()
        after_ids = after.element_ids()
        if after_ids > before_ids:
            grown = len(after_ids) - len(before_ids)
            return f"{grown} new element(s) became visible", True
        return "no additional elements are visible", False

    def categorize_tasks(
        self, observation: Observation, tasks: list[SimpleTask]
    ) -> list[SimpleTask]:
        if not tasks:
            raise ValueError("categorize requires a nonempty task list")
        page = self._page(observation.page_id)
        group_numbers: dict[str, int] = {}
        result = []
        for task in tasks:
            tag = None
            for action in task.action_sequence:
                if action.element_id is None:
                    continue
                el = page.element(action.element_id)
                if el is not None and el.dynamic_group:
                    tag = el.dynamic_group
                    break
            if tag is None:
                result.append(dataclasses.replace(task, category="fixed", group_number=None))
            else:
                number = group_numbers.setdefault(tag, len(group_numbers) + 1)
                result.append(
                    dataclasses.replace(task, category="dynamic", group_number=number)
                )
        return result

    def propose_info_seeking(
        self, observation: Observation, history: list
    ) -> list[SimpleTask]:
        page = self._page(observation.page_id)
        visible = observation.element_ids()
        asks = []
        for el in page.elements:
            if el.element_id not in visible or not el.info_payload:
                continue
            asks.append(
                SimpleTask(
                    title=f"Find {el.info_payload}.",
                    is_allowed=True,
                    action_sequence=(),
                    origin_page=page.page_id,
                    info_seeking=True,
                )
            )
            if len(asks) == MAX_ASKS_PER_PAGE:
                break
        return asks

    def synthesize_and_evaluate(
        self,
        steps: list[tuple[Observation, Action]],
        final_observation: Observation,
        last: SimpleTask,
    ) -> TaskTuple | None:
        if not last.info_seeking and len(steps) < 3:
            return None  # action-oriented synthesis needs at least three actions
        for obs, action in steps:
            if action.element_id is not None and obs.element(action.element_id) is None:
                return None  # mismatched page context scores 2, below the bar
        if last.info_seeking:
            description = last.title
            kind = "info_seeking"
        else:
            start = steps[0][0].url if steps else final_observation.url
            description = f"{last.title} (starting from {start})"
            kind = "action_oriented"
        return TaskTuple(
            description=description,
            trajectory=Trajectory(steps=tuple(steps), final_observation=final_observation),
            kind=kind,
            completeness_score=5,
        )
