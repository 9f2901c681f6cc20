"""Environment abstraction: navigate, execute actions, observe, replay traces.

Two backends implement the same interface: the deterministic simulator in
this module and the live remote-browser client in ``live.py``.  Explorer
and refiner code never depend on which one they drive.
"""

from __future__ import annotations

import itertools
import threading
from dataclasses import dataclass, field
from pathlib import Path

from . import sitegraph
from .core import Action, Observation, QueueEntry, validate_action
from .errors import (
    ActionNotApplicable,
    EnvironmentError_,
    EnvironmentUnreachable,
    ReplayDivergence,
    SessionClosed,
)
from .screenshots import ScreenshotStore


@dataclass
class SessionHandle:
    """One browsing session; driven by a single logical thread at a time."""

    session_id: str
    page_id: str = ""
    steps: int = 0
    closed: bool = False


class Environment:
    """Backend-agnostic driving interface."""

    def reset(self) -> SessionHandle:
        raise NotImplementedError

    def observe(self, session: SessionHandle) -> Observation:
        raise NotImplementedError

    def execute(self, session: SessionHandle, action: Action) -> Observation:
        raise NotImplementedError

    def close(self, session: SessionHandle) -> None:
        raise NotImplementedError

    def goto_page(
        self,
        session: SessionHandle,
        entry: QueueEntry,
        record_steps: list[tuple[Observation, Action]] | None = None,
    ) -> Observation:
        """Reset and replay the entry's trace; land on ``entry.page_id``.

        Implemented by full replay rather than URL jump: some states
        (expanded menus, filled forms) are not URL-addressable.  Appends
        (observation, action) pairs to ``record_steps`` when provided.
        """
        self._reset_session(session)
        obs = self.observe(session)
        for action in entry.trace:
            if record_steps is not None:
                record_steps.append((obs, action))
            try:
                obs = self.execute(session, action)
            except EnvironmentError_ as exc:
                raise ReplayDivergence(
                    f"trace step {action.kind} on {action.element_id!r} failed: {exc}"
                ) from exc
        if obs.page_id != entry.page_id:
            raise ReplayDivergence(
                f"replay landed on {obs.page_id!r}, expected {entry.page_id!r}"
            )
        return obs

    def _reset_session(self, session: SessionHandle) -> None:
        raise NotImplementedError


class SimEnvironment(Environment):
    """Deterministic environment over a site graph.

    ``source`` may be an already-loaded SiteGraph or a path to a site file;
    paths are loaded lazily so a missing file surfaces as
    environment-unreachable at first use.
    """

    backend_name = "sim"

    def __init__(
        self,
        source: sitegraph.SiteGraph | str | Path,
        store: ScreenshotStore | None = None,
    ):
        self._source = source
        self._graph: sitegraph.SiteGraph | None = (
            source if isinstance(source, sitegraph.SiteGraph) else None
        )
        self.store = store
        self._states: dict[str, sitegraph.SimState] = {}
        self._lock = threading.Lock()
        self._ids = itertools.count(1)

    @property
    def graph(self) -> sitegraph.SiteGraph:
        if self._graph is None:
            path = Path(str(self._source))
            if not path.exists():
                raise EnvironmentUnreachable(f"site file not found: {path}")
            self._graph = sitegraph.load_sitegraph(path)
        return self._graph

    def reset(self) -> SessionHandle:
        state = sitegraph.initial_state(self.graph)
        with self._lock:
            session = SessionHandle(session_id=f"sim-{next(self._ids)}")
            self._states[session.session_id] = state
        session.page_id = state.page_id
        return session

    def _reset_session(self, session: SessionHandle) -> None:
        state = sitegraph.initial_state(self.graph)
        with self._lock:
            self._require_open(session)
            self._states[session.session_id] = state
        session.page_id = state.page_id

    def observe(self, session: SessionHandle) -> Observation:
        with self._lock:
            self._require_open(session)
            state = self._states[session.session_id]
        return sitegraph.observe_state(self.graph, state, self.store)

    def execute(self, session: SessionHandle, action: Action) -> Observation:
        rule = validate_action(action)
        if rule is not None:
            raise ActionNotApplicable(rule)
        with self._lock:
            self._require_open(session)
            state = self._states[session.session_id]
        new_state, obs = sitegraph.step(self.graph, state, action, self.store)
        with self._lock:
            self._states[session.session_id] = new_state
        session.page_id = new_state.page_id
        session.steps += 1
        return obs

    def close(self, session: SessionHandle) -> None:
        with self._lock:
            session.closed = True
            self._states.pop(session.session_id, None)

    def _require_open(self, session: SessionHandle) -> None:
        if session.closed or session.session_id not in self._states:
            raise SessionClosed(f"session {session.session_id} is closed")
