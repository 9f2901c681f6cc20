"""Task-tuple refinement: a step-loop web agent re-executes explored tuples.

The agent receives the exploration trace as hints, walks the environment
observe-reason-act (full action space including scrolling), and either
completes the task within the step cap or the tuple is discarded.
Independent tuples are refined concurrently across separate sessions.
"""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Any, Callable, Mapping

import requests

from .core import Action, Observation, TaskTuple, Trajectory
from .env import Environment
from .errors import AgentEndpointUnavailable, EnvironmentError_
from .oracle.schemas import extract_json

logger = logging.getLogger(__name__)

DEFAULT_MAX_STEPS = 30
HINT_MODES = ("full_trace", "none")
HINT_HEADER = "Exploration hints (may be sub-optimal):"


@dataclass(frozen=True)
class RefinementConfig:
    max_steps: int = DEFAULT_MAX_STEPS
    hint_mode: str = "full_trace"

    def __post_init__(self) -> None:
        if self.max_steps < 1:
            raise ValueError("max_steps must be at least 1")
        if self.hint_mode not in HINT_MODES:
            raise ValueError(f"unknown hint mode {self.hint_mode!r}")


@dataclass(frozen=True)
class AgentDecision:
    """One agent turn: keep going with an action, or report a terminal."""

    status: str  # continue | success | failure
    action: Action | None = None
    reasoning: str = ""
    revised_description: str | None = None


@dataclass(frozen=True)
class AgentStep:
    observation: Observation
    action: Action | None
    reasoning: str
    status: str


@dataclass(frozen=True)
class RefinedTuple:
    tuple: TaskTuple
    source_description: str
    reasonings: tuple[str, ...]

    def to_dict(self) -> dict[str, Any]:
        return {
            "tuple": self.tuple.to_dict(),
            "source_description": self.source_description,
            "reasonings": list(self.reasonings),
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "RefinedTuple":
        return cls(
            tuple=TaskTuple.from_dict(data["tuple"]),
            source_description=data["source_description"],
            reasonings=tuple(data["reasonings"]),
        )


@dataclass(frozen=True)
class DiscardVerdict:
    description: str
    reason: str
    steps: int

    def to_dict(self) -> dict[str, Any]:
        return {"description": self.description, "reason": self.reason, "steps": self.steps}

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "DiscardVerdict":
        return cls(data["description"], data["reason"], data["steps"])


def build_hint_block(tuple_: TaskTuple, mode: str = "full_trace") -> str:
    """Render the exploration trace as hint text for the agent prompt."""
    if mode == "none":
        return ""
    lines = [HINT_HEADER]
    for index, (obs, action) in enumerate(tuple_.trajectory.steps, start=1):
        label = "page"
        if action.element_id is not None:
            element = obs.element(action.element_id)
            label = element.text if element is not None else action.element_id
        elif action.inputs:
            label = action.inputs[0]
        lines.append(f"step {index}: {action.kind} on {label} at {obs.url}")
    return "\n".join(lines)


# --- agents -------------------------------------------------------------

# A policy factory takes (tuple, hint text) and returns a policy whose
# decide(observation, executed_actions) yields the next AgentDecision.
PolicyFactory = Callable[[TaskTuple, str], "Policy"]


class Policy:
    def decide(self, observation: Observation, executed: list[Action]) -> AgentDecision:
        raise NotImplementedError


class ReplayPolicy(Policy):
    """Scripted optimal agent: replays a plan, then reports success."""

    def __init__(self, task: TaskTuple, hints: str, plan: tuple[Action, ...] | None = None):
        self.task = task
        self.plan = plan if plan is not None else task.trajectory.actions

    def decide(self, observation: Observation, executed: list[Action]) -> AgentDecision:
        done = len(executed)
        if done < len(self.plan):
            action = self.plan[done]
            return AgentDecision(
                status="continue",
                action=action,
                reasoning=f"Following the plan: step {done + 1} of {len(self.plan)} "
                f"({action.kind}).",
            )
        return AgentDecision(
            status="success",
            reasoning="All planned steps executed; the task is complete.",
            revised_description=self.task.description,
        )


def replay_agent(task: TaskTuple, hints: str) -> Policy:
    return ReplayPolicy(task, hints)


def shortcut_agent(routes: Mapping[str, tuple[Action, ...]]) -> PolicyFactory:
    """Scripted agent that knows shorter routes for some task descriptions."""

    def factory(task: TaskTuple, hints: str) -> Policy:
        return ReplayPolicy(task, hints, plan=routes.get(task.description))

    return factory


class NeverFinishingPolicy(Policy):
    """Scripted adversarial agent: scrolls forever, never terminates."""

    def decide(self, observation: Observation, executed: list[Action]) -> AgentDecision:
        return AgentDecision(
            status="continue",
            action=Action("scroll_down"),
            reasoning="Still looking around the page.",
        )


def never_finishing_agent(task: TaskTuple, hints: str) -> Policy:
    return NeverFinishingPolicy()


class RemotePolicy(Policy):
    """LLM web agent over the same wire contract as the oracle endpoint."""

    PROMPT = """You are a web agent executing a task in a browser.

Task: {task}

{hints}

Current page ({url}) elements:
{tree}

Actions taken so far: {history}

Decide the next step. Respond complying the following JSON schema:
{{
    "reasoning": <one line of reasoning>,
    "status": <"continue", "success" or "failure">,
    "action": {{"kind": <action kind>, "element_id": <element id or null>, "input": [<values>]}},
    "revised_description": <cleaner task description, on success only>
}}"""

    def __init__(self, task: TaskTuple, hints: str, endpoint: str, model: str, timeout: float):
        self.task = task
        self.hints = hints
        self.endpoint = endpoint
        self.model = model
        self.timeout = timeout

    def decide(self, observation: Observation, executed: list[Action]) -> AgentDecision:
        history = ", ".join(a.kind for a in executed) or "(none)"
        prompt = self.PROMPT.format(
            task=self.task.description,
            hints=self.hints,
            url=observation.url,
            tree=observation.simplified_html,
            history=history,
        )
        body = {
            "model": self.model,
            "messages": [{"role": "user", "text": prompt, "images": []}],
        }
        try:
            response = requests.post(self.endpoint, json=body, timeout=self.timeout)
        except requests.RequestException as exc:
            raise AgentEndpointUnavailable(f"{self.endpoint}: {exc}") from exc
        if response.status_code != 200:
            raise AgentEndpointUnavailable(
                f"{self.endpoint}: HTTP {response.status_code}: {response.text[:200]}"
            )
        try:
            payload = extract_json(response.json()["text"])
            status = payload["status"]
            action = None
            if payload.get("action") and payload["action"].get("kind"):
                raw = payload["action"]
                element_id = raw.get("element_id")
                action = Action(
                    kind=raw["kind"],
                    element_id=None if element_id is None else str(element_id),
                    inputs=tuple(raw.get("input") or ()),
                )
            return AgentDecision(
                status=status,
                action=action,
                reasoning=str(payload.get("reasoning", "")),
                revised_description=payload.get("revised_description"),
            )
        except (KeyError, TypeError, ValueError) as exc:
            logger.warning("agent response unusable, treating as failure: %s", exc)
            return AgentDecision(status="failure", reasoning=f"unusable response: {exc}")


def remote_agent(endpoint: str, model: str, timeout: float = 120.0) -> PolicyFactory:
    def factory(task: TaskTuple, hints: str) -> Policy:
        return RemotePolicy(task, hints, endpoint, model, timeout)

    return factory


# --- refinement loop ------------------------------------------------------


def refine(
    tuple_: TaskTuple,
    config: RefinementConfig,
    env: Environment,
    policy_factory: PolicyFactory,
) -> RefinedTuple | DiscardVerdict:
    """Re-execute one explored tuple with a fresh session and trace hints."""
    hints = build_hint_block(tuple_, config.hint_mode)
    policy = policy_factory(tuple_, hints)
    session = env.reset()
    try:
        observation = env.observe(session)
        steps: list[tuple[Observation, Action]] = []
        reasonings: list[str] = []
        for _ in range(config.max_steps):
            decision = policy.decide(observation, [a for _, a in steps])
            if decision.status == "success":
                refined = TaskTuple(
                    description=decision.revised_description or tuple_.description,
                    trajectory=Trajectory(steps=tuple(steps), final_observation=observation),
                    kind=tuple_.kind,
                    completeness_score=tuple_.completeness_score,
                    refined=True,
                )
                return RefinedTuple(
                    tuple=refined,
                    source_description=tuple_.description,
                    reasonings=tuple(reasonings),
                )
            if decision.status == "failure":
                return DiscardVerdict(
                    description=tuple_.description,
                    reason=f"agent reported failure: {decision.reasoning}",
                    steps=len(steps),
                )
            if decision.action is None:
                return DiscardVerdict(
                    description=tuple_.description,
                    reason="agent continued without choosing an action",
                    steps=len(steps),
                )
            try:
                new_observation = env.execute(session, decision.action)
            except EnvironmentError_ as exc:
                return DiscardVerdict(
                    description=tuple_.description,
                    reason=f"action {decision.action.kind} failed: {exc}",
                    steps=len(steps),
                )
            steps.append((observation, decision.action))
            reasonings.append(decision.reasoning)
            observation = new_observation
        return DiscardVerdict(
            description=tuple_.description,
            reason=f"exceeded {config.max_steps} steps without completing the task",
            steps=len(steps),
        )
    finally:
        env.close(session)


def refine_all(
    tuples: list[TaskTuple],
    config: RefinementConfig,
    env: Environment,
    policy_factory: PolicyFactory,
    parallel: int = 2,
) -> list[RefinedTuple | DiscardVerdict]:
    """Refine tuples across independent sessions; results keep input order."""
    if parallel <= 1 or len(tuples) <= 1:
        return [refine(t, config, env, policy_factory) for t in tuples]
    with ThreadPoolExecutor(max_workers=parallel) as pool:
        return list(pool.map(lambda t: refine(t, config, env, policy_factory), tuples))
