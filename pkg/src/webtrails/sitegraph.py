"""Deterministic simulated website driven by a declarative site-graph file.

A site graph lists pages and their elements; element behaviors (navigate,
reveal, submit, toggle, noop) define the transition function.  The module
also brute-forces the ground-truth set of leaf functionalities, which the
coverage report and the acceptance suite compare exploration runs against.
"""

from __future__ import annotations

import html
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterable, Mapping

from . import screenshots
from .core import Action, Element, Observation, functional_signature
from .errors import (
    ActionNotApplicable,
    DanglingTargetError,
    ElementNotFound,
    ElementNotVisible,
    RevealCycleError,
    SiteGraphParseError,
    SubmitMissingRequired,
)

ROLES = ("link", "button", "textbox", "select", "checkbox", "menu_toggle")
BEHAVIOR_KINDS = ("navigate", "reveal", "submit", "toggle", "noop")
EXCLUDED_CLASSES = ("auth", "payment", "account_mod", "transient", "tooltip")

_ROLE_TAGS = {
    "link": "a",
    "button": "button",
    "textbox": "input",
    "select": "select",
    "checkbox": "input",
    "menu_toggle": "button",
}


@dataclass(frozen=True)
class Behavior:
    kind: str
    target: str | None = None
    required: tuple[str, ...] = ()

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "Behavior":
        return cls(
            kind=data["kind"],
            target=data.get("target"),
            required=tuple(data.get("required") or ()),
        )


@dataclass(frozen=True)
class ElementDef:
    element_id: str
    text: str
    role: str
    behavior: Behavior
    revealed_by: str | None = None
    dynamic_group: str | None = None
    excluded_class: str | None = None
    info_payload: str | None = None
    options: tuple[str, ...] = ()

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "ElementDef":
        return cls(
            element_id=data["element_id"],
            text=data["text"],
            role=data["role"],
            behavior=Behavior.from_dict(data.get("behavior") or {"kind": "noop"}),
            revealed_by=data.get("revealed_by"),
            dynamic_group=data.get("dynamic_group"),
            excluded_class=data.get("excluded_class"),
            info_payload=data.get("info_payload"),
            options=tuple(data.get("options") or ()),
        )


@dataclass(frozen=True)
class PageDef:
    page_id: str
    url: str
    elements: tuple[ElementDef, ...]
    title: str = ""

    def element(self, element_id: str) -> ElementDef | None:
        for e in self.elements:
            if e.element_id == element_id:
                return e
        return None


@dataclass(frozen=True)
class SiteGraph:
    site: str
    seed_page_id: str
    pages: tuple[PageDef, ...]

    def page(self, page_id: str) -> PageDef:
        for p in self.pages:
            if p.page_id == page_id:
                return p
        raise ElementNotFound(f"unknown page {page_id!r}")

    def page_by_url(self, url: str) -> PageDef | None:
        for p in self.pages:
            if p.url == url:
                return p
        return None


def load_sitegraph(source: str | Path | Mapping[str, Any]) -> SiteGraph:
    """Parse and eagerly validate a site-graph document.

    ``source`` may be a path, raw JSON text, or an already-parsed mapping.
    """
    if isinstance(source, Mapping):
        data = source
    else:
        text = Path(source).read_text() if Path(str(source)).exists() else str(source)
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise SiteGraphParseError(f"site graph is not valid JSON: {exc}") from exc
    try:
        pages = tuple(
            PageDef(
                page_id=p["page_id"],
                url=p["url"],
                title=p.get("title", p["page_id"]),
                elements=tuple(ElementDef.from_dict(e) for e in p.get("elements", ())),
            )
            for p in data["pages"]
        )
        graph = SiteGraph(site=data["site"], seed_page_id=data["seed_page"], pages=pages)
    except (KeyError, TypeError) as exc:
        raise SiteGraphParseError(f"site graph is missing required field: {exc}") from exc
    _validate(graph)
    return graph


def _validate(graph: SiteGraph) -> None:
    page_ids = {p.page_id for p in graph.pages}
    if len(page_ids) != len(graph.pages):
        raise SiteGraphParseError("duplicate page ids")
    if graph.seed_page_id not in page_ids:
        raise DanglingTargetError(f"seed page {graph.seed_page_id!r} does not exist")
    for page in graph.pages:
        ids = [e.element_id for e in page.elements]
        if len(ids) != len(set(ids)):
            raise SiteGraphParseError(f"duplicate element ids on page {page.page_id!r}")
        known = set(ids)
        required_by: dict[str, str] = {}
        for el in page.elements:
            if el.role not in ROLES:
                raise SiteGraphParseError(f"{el.element_id}: unknown role {el.role!r}")
            if el.behavior.kind not in BEHAVIOR_KINDS:
                raise SiteGraphParseError(
                    f"{el.element_id}: unknown behavior {el.behavior.kind!r}"
                )
            if el.excluded_class and el.excluded_class not in EXCLUDED_CLASSES:
                raise SiteGraphParseError(
                    f"{el.element_id}: unknown excluded_class {el.excluded_class!r}"
                )
            if el.behavior.kind in ("navigate", "submit"):
                if el.behavior.target not in page_ids:
                    raise DanglingTargetError(
                        f"{el.element_id} targets missing page {el.behavior.target!r}"
                    )
            if el.behavior.kind == "submit":
                for req in el.behavior.required:
                    req_el = page.element(req)
                    if req_el is None:
                        raise SiteGraphParseError(
                            f"{el.element_id}: required field {req!r} not on page"
                        )
                    if req_el.role not in ("textbox", "select", "checkbox"):
                        raise SiteGraphParseError(
                            f"{el.element_id}: required field {req!r} has role "
                            f"{req_el.role!r}, expected a form field"
                        )
                    if req != el.element_id and req in required_by:
                        raise SiteGraphParseError(
                            f"field {req!r} belongs to two form groups "
                            f"({required_by[req]} and {el.element_id})"
                        )
                    required_by[req] = el.element_id
            if el.revealed_by is not None and el.revealed_by not in known:
                raise SiteGraphParseError(
                    f"{el.element_id}: revealed_by references unknown {el.revealed_by!r}"
                )
        # reveal chains must terminate at a visible element without cycling
        for el in page.elements:
            seen = {el.element_id}
            cursor = el
            while cursor.revealed_by is not None:
                if cursor.revealed_by in seen:
                    raise RevealCycleError(
                        f"reveal cycle through {cursor.revealed_by!r} on {page.page_id!r}"
                    )
                seen.add(cursor.revealed_by)
                cursor = page.element(cursor.revealed_by)  # type: ignore[assignment]


# --- simulation state -------------------------------------------------------


@dataclass(frozen=True)
class SimState:
    """Pure per-session state: current page plus in-page UI state."""

    page_id: str
    revealed: frozenset[str] = frozenset()
    fields: tuple[tuple[str, str], ...] = ()
    checked: tuple[tuple[str, bool], ...] = ()
    selected: tuple[tuple[str, str], ...] = ()

    def field_value(self, element_id: str) -> str:
        return dict(self.fields).get(element_id, "")

    def is_checked(self, element_id: str) -> bool:
        return dict(self.checked).get(element_id, False)

    def selection(self, element_id: str) -> str:
        return dict(self.selected).get(element_id, "")


def initial_state(graph: SiteGraph) -> SimState:
    return SimState(page_id=graph.seed_page_id)


def _with(mapping: tuple[tuple[str, Any], ...], key: str, value: Any) -> tuple:
    kept = tuple((k, v) for k, v in mapping if k != key)
    return tuple(sorted(kept + ((key, value),)))


def visible_elements(graph: SiteGraph, state: SimState) -> tuple[ElementDef, ...]:
    page = graph.page(state.page_id)
    return tuple(
        el
        for el in page.elements
        if el.revealed_by is None or el.element_id in state.revealed
    )


def _reveal_closure(page: PageDef, toggles: Iterable[str]) -> frozenset[str]:
    toggle_set = set(toggles)
    return frozenset(
        el.element_id for el in page.elements if el.revealed_by in toggle_set
    )


def observe_state(
    graph: SiteGraph, state: SimState, store: screenshots.ScreenshotStore | None = None
) -> Observation:
    """Build the Observation for a state without side effects."""
    page = graph.page(state.page_id)
    visible = visible_elements(graph, state)
    elements = []
    html_lines = [f'<html data-page="{page.page_id}"><body>']
    rows = []
    for index, el in enumerate(visible):
        region = (20, 36 + 34 * index, 280, 28)
        elements.append(Element(el.element_id, el.text, el.role, region))
        rows.append((el.role, _render_text(el, state), region))
        html_lines.append(_element_markup(el, state))
    html_lines.append("</body></html>")
    png = screenshots.render_page(page.title or page.page_id, rows)
    handle = store.put(png) if store is not None else screenshots.handle_for(png)
    return Observation(
        page_id=page.page_id,
        url=page.url,
        screenshot=handle,
        elements=tuple(elements),
        simplified_html="\n".join(html_lines),
    )


def _render_text(el: ElementDef, state: SimState) -> str:
    if el.role == "textbox" and state.field_value(el.element_id):
        return f"{el.text} = {state.field_value(el.element_id)}"
    if el.role == "checkbox":
        mark = "x" if state.is_checked(el.element_id) else " "
        return f"[{mark}] {el.text}"
    if el.role == "select" and state.selection(el.element_id):
        return f"{el.text}: {state.selection(el.element_id)}"
    return el.text


def _element_markup(el: ElementDef, state: SimState) -> str:
    tag = _ROLE_TAGS[el.role]
    text = html.escape(el.text)
    eid = html.escape(el.element_id)
    if el.role == "textbox":
        value = html.escape(state.field_value(el.element_id))
        return f'<input id="{eid}" value="{value}" placeholder="{text}"/>'
    if el.role == "checkbox":
        checked = " checked" if state.is_checked(el.element_id) else ""
        return f'<input type="checkbox" id="{eid}"{checked}/>{text}'
    if el.role == "select":
        options = "".join(f"<option>{html.escape(o)}</option>" for o in el.options)
        return f'<select id="{eid}" aria-label="{text}">{options}</select>'
    if el.role == "menu_toggle":
        return f'<button id="{eid}" aria-haspopup="true">{text}</button>'
    return f"<{tag} id=\"{eid}\">{text}</{tag}>"


def step(
    graph: SiteGraph,
    state: SimState,
    action: Action,
    store: screenshots.ScreenshotStore | None = None,
) -> tuple[SimState, Observation]:
    """Pure transition: same (state, action) always maps to the same result."""
    new_state = _transition(graph, state, action)
    return new_state, observe_state(graph, new_state, store)


def _transition(graph: SiteGraph, state: SimState, action: Action) -> SimState:
    if action.kind in ("stop", "scroll_up", "scroll_down"):
        return state
    if action.kind == "goto":
        page = graph.page_by_url(action.inputs[0])
        if page is None:
            raise ActionNotApplicable(f"goto: unknown url {action.inputs[0]!r}")
        return SimState(page_id=page.page_id)

    page = graph.page(state.page_id)
    el = page.element(action.element_id or "")
    if el is None:
        raise ElementNotFound(
            f"no element {action.element_id!r} on page {state.page_id!r}"
        )
    if el.revealed_by is not None and el.element_id not in state.revealed:
        raise ElementNotVisible(f"element {el.element_id!r} is hidden")

    if action.kind == "click":
        return _click(graph, page, state, el)
    if action.kind == "fill":
        if el.role != "textbox":
            raise ActionNotApplicable(f"cannot fill a {el.role}")
        return SimState(
            page_id=state.page_id,
            revealed=state.revealed,
            fields=_with(state.fields, el.element_id, action.inputs[0]),
            checked=state.checked,
            selected=state.selected,
        )
    if action.kind == "press":
        if el.role != "textbox":
            raise ActionNotApplicable(f"cannot press a key on a {el.role}")
        if el.behavior.kind == "submit" and action.inputs[0].lower() == "enter":
            return _submit(graph, page, state, el)
        return state
    if action.kind == "selectoption":
        if el.role != "select":
            raise ActionNotApplicable(f"cannot select an option on a {el.role}")
        if action.inputs[0] not in el.options:
            raise ActionNotApplicable(
                f"{el.element_id!r} has no option {action.inputs[0]!r}"
            )
        return SimState(
            page_id=state.page_id,
            revealed=state.revealed,
            fields=state.fields,
            checked=state.checked,
            selected=_with(state.selected, el.element_id, action.inputs[0]),
        )
    if action.kind in ("check", "uncheck"):
        if el.role != "checkbox":
            raise ActionNotApplicable(f"cannot {action.kind} a {el.role}")
        return SimState(
            page_id=state.page_id,
            revealed=state.revealed,
            fields=state.fields,
            checked=_with(state.checked, el.element_id, action.kind == "check"),
            selected=state.selected,
        )
    raise ActionNotApplicable(f"unsupported action kind {action.kind!r}")


def _click(graph: SiteGraph, page: PageDef, state: SimState, el: ElementDef) -> SimState:
    behavior = el.behavior
    if behavior.kind == "navigate":
        return SimState(page_id=behavior.target or page.page_id)
    if behavior.kind == "reveal":
        grown = state.revealed | _reveal_closure(page, [el.element_id])
        return SimState(
            page_id=state.page_id,
            revealed=grown,
            fields=state.fields,
            checked=state.checked,
            selected=state.selected,
        )
    if behavior.kind == "submit":
        return _submit(graph, page, state, el)
    if behavior.kind == "toggle":
        if el.role == "checkbox":
            return SimState(
                page_id=state.page_id,
                revealed=state.revealed,
                fields=state.fields,
                checked=_with(state.checked, el.element_id, not state.is_checked(el.element_id)),
                selected=state.selected,
            )
        return state
    return state  # noop


def _submit(graph: SiteGraph, page: PageDef, state: SimState, el: ElementDef) -> SimState:
    missing = []
    for req in el.behavior.required:
        req_el = page.element(req)
        assert req_el is not None
        if req_el.role == "textbox" and not state.field_value(req):
            missing.append(req)
        elif req_el.role == "select" and not state.selection(req):
            missing.append(req)
        elif req_el.role == "checkbox" and not state.is_checked(req):
            missing.append(req)
    if missing:
        raise SubmitMissingRequired(
            f"submit {el.element_id!r} missing required fields: {', '.join(missing)}"
        )
    return SimState(page_id=el.behavior.target or page.page_id)


# --- ground truth ------------------------------------------------------------


def _ancestor_chain(page: PageDef, el: ElementDef) -> tuple[ElementDef, ...] | None:
    """Reveal ancestors from root toggle down; None if the chain is excluded."""
    chain: list[ElementDef] = []
    cursor = el
    while cursor.revealed_by is not None:
        parent = page.element(cursor.revealed_by)
        assert parent is not None
        if parent.excluded_class:
            return None
        chain.append(parent)
        cursor = parent
    return tuple(reversed(chain))


def leaf_actions_for(page: PageDef, el: ElementDef) -> tuple[tuple[str, ...], tuple[tuple[str, str], ...]] | None:
    """Action kinds and (role, text) pairs that exercise one leaf element.

    Returns None for elements that are not leaves (reveal toggles, noops).
    The exact shapes here are the contract the scripted oracle follows, so
    executed exploration signatures land in the same space.
    """
    behavior = el.behavior
    if behavior.kind == "navigate":
        return ("click",), ((el.role, el.text),)
    if behavior.kind == "submit":
        if el.role == "textbox":
            return ("fill", "press"), ((el.role, el.text), (el.role, el.text))
        kinds: list[str] = []
        pairs: list[tuple[str, str]] = []
        for req in behavior.required:
            req_el = page.element(req)
            assert req_el is not None
            if req_el.role == "textbox":
                kinds.append("fill")
            elif req_el.role == "select":
                kinds.append("selectoption")
            else:
                kinds.append("check")
            pairs.append((req_el.role, req_el.text))
        kinds.append("click")
        pairs.append((el.role, el.text))
        return tuple(kinds), tuple(pairs)
    if behavior.kind == "toggle" and el.role == "checkbox":
        return ("check",), ((el.role, el.text),)
    return None


def ground_truth_leaf_tasks(graph: SiteGraph) -> set[tuple[str, str]]:
    """Brute-force every non-excluded leaf functionality of the site.

    Returns (page_id, signature) pairs.  Fixed elements contribute one
    functional signature each (full expansion prefix included); each
    dynamic group contributes a single ``dynamic-group:<tag>`` marker.
    """
    result: set[tuple[str, str]] = set()
    for page in graph.pages:
        for el in page.elements:
            if el.excluded_class:
                continue
            chain = _ancestor_chain(page, el)
            if chain is None:
                continue
            if el.dynamic_group:
                result.add((page.page_id, f"dynamic-group:{el.dynamic_group}"))
                continue
            leaf = leaf_actions_for(page, el)
            if leaf is None:
                continue
            kinds, pairs = leaf
            prefix_kinds = tuple("click" for _ in chain)
            prefix_pairs = tuple((t.role, t.text) for t in chain)
            signature = functional_signature(prefix_kinds + kinds, prefix_pairs + pairs)
            result.add((page.page_id, signature))
    return result


def fixed_leaf_signatures(graph: SiteGraph) -> set[tuple[str, str]]:
    return {
        (page, sig)
        for page, sig in ground_truth_leaf_tasks(graph)
        if not sig.startswith("dynamic-group:")
    }


def fixture_path(name: str) -> Path:
    """Resolve one of the shipped site fixtures by name (or return the path)."""
    candidate = Path(name)
    if candidate.exists():
        return candidate
    bundled = Path(__file__).parent / "fixtures" / f"{name}.json"
    return bundled
