"""Live backend: drives a real browser over a remote-automation wire protocol.

The endpoint is an HTTP service exposing four JSON calls:

    POST <endpoint>/session   {}                                -> {"session_id"}
    POST <endpoint>/navigate  {"session_id", "url"}             -> {"ok"}
    POST <endpoint>/observe   {"session_id"}                    -> {"url", "title",
                                  "elements": [{"annotation", "role", "text", "region"}],
                                  "simplified_html", "screenshot_b64"}
    POST <endpoint>/dispatch  {"session_id", "kind", "annotation", "inputs"} -> {"ok"}
    POST <endpoint>/close     {"session_id"}                    -> {"ok"}

Annotation numbers are per-screenshot, so this client mints its own stable
element ids from (role, text label, ordinal) and re-resolves them to the
current annotation on every dispatch; that makes stored traces replayable
across resets, best-effort.
"""

from __future__ import annotations

import base64
import re
import threading

import requests

from .core import Action, Element, Observation, page_identity, validate_action
from .env import Environment, SessionHandle
from .errors import (
    ActionNotApplicable,
    ElementNotFound,
    EnvironmentUnreachable,
    NavigationTimeout,
    SessionClosed,
)
from .screenshots import ScreenshotStore

DEFAULT_TIMEOUT = 30.0

_SLUG = re.compile(r"[^a-z0-9]+")


def _stable_element_id(role: str, text: str, ordinal: int) -> str:
    slug = _SLUG.sub("-", text.lower()).strip("-") or "blank"
    return f"{role}:{slug}:{ordinal}"


class LiveBrowserEnvironment(Environment):
    """Environment backed by a remote browser-automation endpoint."""

    backend_name = "live"

    def __init__(
        self,
        endpoint: str,
        seed_url: str,
        store: ScreenshotStore | None = None,
        timeout: float = DEFAULT_TIMEOUT,
    ):
        self.endpoint = endpoint.rstrip("/")
        self.seed_url = seed_url
        self.store = store
        self.timeout = timeout
        self._lock = threading.Lock()
        # session_id -> element_id -> current annotation number
        self._annotations: dict[str, dict[str, int]] = {}

    def _call(self, method: str, payload: dict) -> dict:
        url = f"{self.endpoint}/{method}"
        last_exc: Exception | None = None
        for attempt in range(2):  # one retry on timeout
            try:
                response = requests.post(url, json=payload, timeout=self.timeout)
            except requests.Timeout as exc:
                last_exc = exc
                continue
            except requests.RequestException as exc:
                raise EnvironmentUnreachable(f"{url}: {exc}") from exc
            if response.status_code != 200:
                raise EnvironmentUnreachable(
                    f"{url}: HTTP {response.status_code}: {response.text[:200]}"
                )
            body = response.json()
            if body.get("error"):
                raise ActionNotApplicable(str(body["error"]))
            return body
        raise NavigationTimeout(f"{url} timed out twice ({self.timeout}s)") from last_exc

    def reset(self) -> SessionHandle:
        body = self._call("session", {})
        session = SessionHandle(session_id=str(body["session_id"]))
        self._call("navigate", {"session_id": session.session_id, "url": self.seed_url})
        obs = self.observe(session)
        session.page_id = obs.page_id
        return session

    def _reset_session(self, session: SessionHandle) -> None:
        self._require_open(session)
        self._call("navigate", {"session_id": session.session_id, "url": self.seed_url})
        session.page_id = self.observe(session).page_id

    def observe(self, session: SessionHandle) -> Observation:
        self._require_open(session)
        body = self._call("observe", {"session_id": session.session_id})
        elements = []
        annotations: dict[str, int] = {}
        ordinals: dict[tuple[str, str], int] = {}
        for raw in body.get("elements", ()):
            role, text = raw["role"], raw["text"]
            ordinal = ordinals.get((role, text), 0)
            ordinals[(role, text)] = ordinal + 1
            element_id = _stable_element_id(role, text, ordinal)
            annotations[element_id] = int(raw["annotation"])
            elements.append(
                Element(element_id, text, role, tuple(raw.get("region") or (0, 0, 0, 0)))
            )
        with self._lock:
            self._annotations[session.session_id] = annotations
        screenshot = ""
        if body.get("screenshot_b64"):
            png = base64.b64decode(body["screenshot_b64"])
            if self.store is not None:
                screenshot = self.store.put(png)
            else:
                from .screenshots import handle_for

                screenshot = handle_for(png)
        simplified = self._rewrite_ids(body.get("simplified_html", ""), annotations)
        return Observation(
            page_id=page_identity(body["url"], (e.role for e in elements)),
            url=body["url"],
            screenshot=screenshot,
            elements=tuple(elements),
            simplified_html=simplified,
        )

    @staticmethod
    def _rewrite_ids(markup: str, annotations: dict[str, int]) -> str:
        by_annotation = {str(v): k for k, v in annotations.items()}

        def swap(match: re.Match) -> str:
            return f'id="{by_annotation.get(match.group(1), match.group(1))}"'

        return re.sub(r'id="([^"]+)"', swap, markup)

    def execute(self, session: SessionHandle, action: Action) -> Observation:
        rule = validate_action(action)
        if rule is not None:
            raise ActionNotApplicable(rule)
        self._require_open(session)
        payload: dict = {
            "session_id": session.session_id,
            "kind": action.kind,
            "inputs": list(action.inputs),
        }
        if action.element_id is not None:
            with self._lock:
                annotations = self._annotations.get(session.session_id, {})
            if action.element_id not in annotations:
                raise ElementNotFound(
                    f"element {action.element_id!r} not in the current observation"
                )
            payload["annotation"] = annotations[action.element_id]
        self._call("dispatch", payload)
        session.steps += 1
        obs = self.observe(session)
        session.page_id = obs.page_id
        return obs

    def close(self, session: SessionHandle) -> None:
        if session.closed:
            return
        try:
            self._call("close", {"session_id": session.session_id})
        finally:
            session.closed = True
            with self._lock:
                self._annotations.pop(session.session_id, None)

    def _require_open(self, session: SessionHandle) -> None:
        if session.closed:
            raise SessionClosed(f"session {session.session_id} is closed")
