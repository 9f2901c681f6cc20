"""Breadth-first website exploration with trace-carrying queue.

The loop dequeues discovered pages in nondecreasing depth order, runs the
per-page task pipeline (discover, filter, categorize, sample, info asks,
execute), recursively uncovers menu hierarchies, and synthesizes complex
task tuples until the queue drains or the tuple budget is hit.  All state
is checkpointed after every page so interrupted runs can resume.
"""

from __future__ import annotations

import dataclasses
import heapq
import logging
import random
from collections import deque
from dataclasses import dataclass, field
from typing import Any, Iterable, Mapping

from .core import (
    Action,
    Observation,
    QueueEntry,
    SimpleTask,
    TaskTuple,
    functional_part,
    task_signature,
)
from .env import Environment, SessionHandle
from .errors import EnvironmentError_, OracleUnavailable, ReplayDivergence
from .oracle import Oracle

logger = logging.getLogger(__name__)

DEFAULT_DYNAMIC_CAP = 2
DEFAULT_MENU_DEPTH = 4
DEFAULT_BUDGET = 1000

# Per-task outcomes recorded in page records.
NAVIGATED = "navigated"
EXPANDED = "expanded"
NO_CHANGE = "no_change"
INFO = "info"
ERROR = "error"


def detect_new_page(before: Observation, after: Observation) -> bool:
    """True iff the page identity changed."""
    return before.page_id != after.page_id


def filter_tasks(
    candidates: Iterable[SimpleTask],
    registry: dict[str, SimpleTask],
    element_lookup: Mapping[str, tuple[str, str]],
) -> list[SimpleTask]:
    """Drop disallowed tasks and signature duplicates; register survivors.

    The registry is shared across pages, which is what propagates earlier
    discoveries forward and skips repeated functionality.
    """
    survivors = []
    for task in candidates:
        if not task.is_allowed:
            continue
        signature = task_signature(task, element_lookup)
        if signature in registry:
            continue
        registry[signature] = task
        survivors.append(task)
    return survivors


def sample_dynamic(
    dynamic_tasks: Iterable[SimpleTask], cap: int, rng: random.Random
) -> list[SimpleTask]:
    """Pick at most ``cap`` tasks per dynamic group, seeded-pseudorandomly.

    Selection order within a group follows the original discovery order.
    """
    groups: dict[int, list[SimpleTask]] = {}
    for task in dynamic_tasks:
        groups.setdefault(task.group_number or 0, []).append(task)
    sampled: list[SimpleTask] = []
    for number in sorted(groups):
        members = groups[number]
        take = min(cap, len(members))
        if take <= 0:
            continue
        chosen = sorted(rng.sample(range(len(members)), take))
        sampled.extend(members[i] for i in chosen)
    return sampled


@dataclass
class ExecutedTask:
    """One task execution, recorded for coverage accounting."""

    page_id: str
    title: str
    signature: str
    functional: str
    element_ids: tuple[str, ...]
    category: str
    group_number: int | None
    outcome: str

    def to_dict(self) -> dict[str, Any]:
        return {
            "page_id": self.page_id,
            "title": self.title,
            "signature": self.signature,
            "functional": self.functional,
            "element_ids": list(self.element_ids),
            "category": self.category,
            "group_number": self.group_number,
            "outcome": self.outcome,
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "ExecutedTask":
        return cls(
            page_id=data["page_id"],
            title=data["title"],
            signature=data["signature"],
            functional=data["functional"],
            element_ids=tuple(data["element_ids"]),
            category=data["category"],
            group_number=data.get("group_number"),
            outcome=data["outcome"],
        )


@dataclass
class PageRecord:
    """Everything the pipeline learned while exploring one page."""

    page_id: str
    depth: int
    leaf_tasks: list[SimpleTask] = field(default_factory=list)
    info_tasks: list[SimpleTask] = field(default_factory=list)
    expansion_tasks: list[SimpleTask] = field(default_factory=list)

    def to_dict(self) -> dict[str, Any]:
        return {
            "page_id": self.page_id,
            "depth": self.depth,
            "leaf_tasks": [t.to_dict() for t in self.leaf_tasks],
            "info_tasks": [t.to_dict() for t in self.info_tasks],
            "expansion_tasks": [t.to_dict() for t in self.expansion_tasks],
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "PageRecord":
        return cls(
            page_id=data["page_id"],
            depth=data["depth"],
            leaf_tasks=[SimpleTask.from_dict(t) for t in data["leaf_tasks"]],
            info_tasks=[SimpleTask.from_dict(t) for t in data["info_tasks"]],
            expansion_tasks=[SimpleTask.from_dict(t) for t in data["expansion_tasks"]],
        )


class ExplorationState:
    """Queue, visited set, task registry, executed log and collected tuples."""

    def __init__(self, budget: int, seed: int = 0):
        if budget < 1:
            raise ValueError("budget must be at least 1")
        self.budget = budget
        self.rng = random.Random(seed)
        self._heap: list[tuple[int, int, QueueEntry]] = []
        self._seq = 0
        self.seen: set[str] = set()
        self.explored: list[str] = []
        self.registry: dict[str, SimpleTask] = {}
        self.tuples: list[TaskTuple] = []
        self.executed: list[ExecutedTask] = []
        self.pages: list[PageRecord] = []
        self.dequeue_log: list[tuple[str, int]] = []

    # -- queue ------------------------------------------------------------

    def enqueue(self, entry: QueueEntry) -> bool:
        if entry.page_id in self.seen:
            return False
        self.seen.add(entry.page_id)
        heapq.heappush(self._heap, (entry.depth, self._seq, entry))
        self._seq += 1
        return True

    def dequeue(self) -> QueueEntry:
        _, _, entry = heapq.heappop(self._heap)
        self.dequeue_log.append((entry.page_id, entry.depth))
        return entry

    @property
    def queue_empty(self) -> bool:
        return not self._heap

    def queued_entries(self) -> list[QueueEntry]:
        return [entry for _, _, entry in sorted(self._heap)]

    @property
    def budget_reached(self) -> bool:
        return len(self.tuples) >= self.budget

    # -- persistence -------------------------------------------------------

    def to_dict(self) -> dict[str, Any]:
        version, internal, gauss = self.rng.getstate()
        return {
            "budget": self.budget,
            "rng_state": {"version": version, "internal": list(internal), "gauss": gauss},
            "heap": [
                {"depth": depth, "seq": seq, "entry": entry.to_dict()}
                for depth, seq, entry in sorted(self._heap)
            ],
            "seq": self._seq,
            "seen": sorted(self.seen),
            "explored": list(self.explored),
            "registry": {sig: task.to_dict() for sig, task in self.registry.items()},
            "tuples": [t.to_dict() for t in self.tuples],
            "executed": [e.to_dict() for e in self.executed],
            "pages": [p.to_dict() for p in self.pages],
            "dequeue_log": [list(item) for item in self.dequeue_log],
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "ExplorationState":
        state = cls(budget=data["budget"])
        rng_state = data["rng_state"]
        state.rng.setstate(
            (rng_state["version"], tuple(rng_state["internal"]), rng_state["gauss"])
        )
        state._heap = [
            (item["depth"], item["seq"], QueueEntry.from_dict(item["entry"]))
            for item in data["heap"]
        ]
        heapq.heapify(state._heap)
        state._seq = data["seq"]
        state.seen = set(data["seen"])
        state.explored = list(data["explored"])
        state.registry = {
            sig: SimpleTask.from_dict(task) for sig, task in data["registry"].items()
        }
        state.tuples = [TaskTuple.from_dict(t) for t in data["tuples"]]
        state.executed = [ExecutedTask.from_dict(e) for e in data["executed"]]
        state.pages = [PageRecord.from_dict(p) for p in data["pages"]]
        state.dequeue_log = [tuple(item) for item in data["dequeue_log"]]
        return state


class Explorer:
    def __init__(
        self,
        env: Environment,
        oracle: Oracle,
        *,
        budget: int = DEFAULT_BUDGET,
        dynamic_cap: int = DEFAULT_DYNAMIC_CAP,
        menu_depth: int = DEFAULT_MENU_DEPTH,
        seed: int = 0,
        checkpoint=None,
    ):
        self.env = env
        self.oracle = oracle
        self.budget = budget
        self.dynamic_cap = dynamic_cap
        self.menu_depth = menu_depth
        self.seed = seed
        self.checkpoint = checkpoint  # callable(state_dict) or None

    def explore(self, state: ExplorationState | None = None) -> ExplorationState:
        """Run the traversal to completion (queue empty or budget reached)."""
        if state is None:
            state = ExplorationState(budget=self.budget, seed=self.seed)
        session = self.env.reset()
        try:
            if not state.seen and not state.explored:
                seed_obs = self.env.observe(session)
                state.enqueue(QueueEntry(page_id=seed_obs.page_id, trace=()))
            while not state.queue_empty and not state.budget_reached:
                pre_page = state.to_dict()
                entry = state.dequeue()
                try:
                    self._navigate_page(state, session, entry)
                except ReplayDivergence as exc:
                    logger.warning("skipping %s: %s", entry.page_id, exc)
                except OracleUnavailable:
                    # Persist the pre-page snapshot so a resume replays this
                    # page from scratch without duplicating its tuples.
                    if self.checkpoint is not None:
                        self.checkpoint(pre_page)
                    raise
                state.explored.append(entry.page_id)
                if self.checkpoint is not None:
                    self.checkpoint(state.to_dict())
        finally:
            self.env.close(session)
        return state

    # -- per-page pipeline ---------------------------------------------------

    def _navigate_page(
        self, state: ExplorationState, session: SessionHandle, entry: QueueEntry
    ) -> None:
        replay_steps: list[tuple[Observation, Action]] = []
        base_obs = self.env.goto_page(session, entry, record_steps=replay_steps)
        record = PageRecord(page_id=entry.page_id, depth=entry.depth)
        lookup: dict[str, tuple[str, str]] = {}
        self._merge_lookup(lookup, base_obs)

        candidates = self.oracle.discover_simple_tasks(
            base_obs, observed=list(state.registry.values())
        )
        tasks = filter_tasks(candidates, state.registry, lookup)
        if tasks:
            tasks = self.oracle.categorize_tasks(base_obs, tasks)
        fixed = [t for t in tasks if t.category != "dynamic"]
        dynamic = [t for t in tasks if t.category == "dynamic"]
        sampled = sample_dynamic(dynamic, self.dynamic_cap, state.rng)
        info = self.oracle.propose_info_seeking(
            base_obs, history=[a for _, a in replay_steps]
        )

        pending = deque(fixed + sampled + info)
        while pending:
            task = pending.popleft()
            reached_budget = self._run_task(
                state, session, entry, task, base_obs, replay_steps, lookup, pending, record
            )
            if reached_budget:
                break
        state.pages.append(record)

    def _run_task(
        self,
        state: ExplorationState,
        session: SessionHandle,
        entry: QueueEntry,
        task: SimpleTask,
        base_obs: Observation,
        replay_steps: list[tuple[Observation, Action]],
        lookup: dict[str, tuple[str, str]],
        pending: deque,
        record: PageRecord,
    ) -> bool:
        """Execute one simple task from a fresh page replay; returns True
        when the tuple budget was reached."""
        if task.info_seeking:
            final = self.env.goto_page(session, entry)
            record.info_tasks.append(task)
            synthesized = self.oracle.synthesize_and_evaluate(
                list(replay_steps), final, task
            )
            return self._append_tuple(state, synthesized)

        try:
            final, prefix_end, task_steps = self._execute_task(session, entry, task, lookup)
        except EnvironmentError_ as exc:
            # A task that errors mid-sequence would not be replayable; drop
            # it from synthesis entirely.
            logger.info("task %r failed: %s", task.title, exc)
            return False

        if detect_new_page(base_obs, final):
            self._record_executed(state, task, lookup, entry.page_id, NAVIGATED)
            record.leaf_tasks.append(task)
            if final.page_id not in state.seen:
                state.enqueue(
                    QueueEntry(
                        page_id=final.page_id,
                        trace=entry.trace + task.action_sequence,
                    )
                )
                synthesized = self.oracle.synthesize_and_evaluate(
                    list(replay_steps) + task_steps, final, task
                )
                return self._append_tuple(state, synthesized)
            return False

        _, moderate = self.oracle.is_moderate_visual_change(prefix_end, final)
        if moderate:
            self._record_executed(state, task, lookup, entry.page_id, EXPANDED)
            record.expansion_tasks.append(task)
            leaves = self.expand_menu_hierarchy(
                session, entry, task, prefix_end, final, state, lookup
            )
            pending.extend(leaves)
        else:
            self._record_executed(state, task, lookup, entry.page_id, NO_CHANGE)
            record.leaf_tasks.append(task)
        return False

    def _execute_task(
        self,
        session: SessionHandle,
        entry: QueueEntry,
        task: SimpleTask,
        lookup: dict[str, tuple[str, str]],
    ) -> tuple[Observation, Observation, list[tuple[Observation, Action]]]:
        """Replay to the page and run the task's actions.

        Returns (final observation, observation after the reconstruction
        prefix, executed steps).  The prefix observation is the baseline
        for visual-change checks so ancestor menu reveals are not
        re-detected as this task's own effect.
        """
        current = self.env.goto_page(session, entry)
        prefix_end = current
        steps: list[tuple[Observation, Action]] = []
        for index, action in enumerate(task.action_sequence):
            steps.append((current, action))
            current = self.env.execute(session, action)
            self._merge_lookup(lookup, current)
            if index + 1 == task.prefix_len:
                prefix_end = current
        return current, prefix_end, steps

    def expand_menu_hierarchy(
        self,
        session: SessionHandle,
        entry: QueueEntry,
        root: SimpleTask,
        before: Observation,
        after: Observation,
        state: ExplorationState,
        lookup: dict[str, tuple[str, str]],
        depth: int = 1,
    ) -> list[SimpleTask]:
        """Recursively uncover a reveal hierarchy below ``root``.

        Returns only leaf tasks, each reconstructed with the full ancestor
        action prefix; intermediate expansion-only tasks are dropped.
        Subtrees deeper than the depth cap are truncated.
        """
        if depth > self.menu_depth:
            logger.warning(
                "menu depth cap (%d) exceeded under %r; subtree truncated",
                self.menu_depth,
                root.title,
            )
            return []
        raw = self.oracle.discover_differential_tasks(before, after)
        reconstructed = [
            dataclasses.replace(
                child,
                action_sequence=root.action_sequence + child.action_sequence,
                prefix_len=len(root.action_sequence),
            )
            for child in raw
        ]
        children = filter_tasks(reconstructed, state.registry, lookup)
        leaves: list[SimpleTask] = []
        for child in children:
            try:
                final, prefix_end, _ = self._execute_task(session, entry, child, lookup)
            except EnvironmentError_ as exc:
                logger.info("menu child %r failed: %s", child.title, exc)
                continue
            if final.page_id != entry.page_id:
                leaves.append(child)
                continue
            _, moderate = self.oracle.is_moderate_visual_change(prefix_end, final)
            if moderate:
                leaves.extend(
                    self.expand_menu_hierarchy(
                        session, entry, child, prefix_end, final, state, lookup, depth + 1
                    )
                )
            else:
                leaves.append(child)
        return leaves

    # -- bookkeeping -----------------------------------------------------------

    @staticmethod
    def _merge_lookup(
        lookup: dict[str, tuple[str, str]], observation: Observation
    ) -> None:
        for element in observation.elements:
            lookup[element.element_id] = (element.role, element.text)

    def _record_executed(
        self,
        state: ExplorationState,
        task: SimpleTask,
        lookup: Mapping[str, tuple[str, str]],
        page_id: str,
        outcome: str,
    ) -> None:
        signature = task_signature(task, lookup)
        state.executed.append(
            ExecutedTask(
                page_id=page_id,
                title=task.title,
                signature=signature,
                functional=functional_part(signature),
                element_ids=tuple(
                    a.element_id for a in task.action_sequence if a.element_id
                ),
                category=task.category,
                group_number=task.group_number,
                outcome=outcome,
            )
        )

    def _append_tuple(self, state: ExplorationState, synthesized: TaskTuple | None) -> bool:
        if synthesized is None:
            return False
        if synthesized.completeness_score < 3:
            return False
        state.tuples.append(synthesized)
        return state.budget_reached
