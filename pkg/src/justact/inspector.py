"""Read-only two-pane trace browser.

Left pane lists events, right pane details the selected one (for enactments:
actor, payload, permission breakdown and effects). ``render_panes`` is pure so
the layout can be tested and printed without a terminal.
"""
from __future__ import annotations

import textwrap
from typing import List, Sequence

from .runtime import Agree, Enact, Forget, Gossip, State, TraceEvent
from .model import payload
from .slick import render


def event_line(e: TraceEvent) -> str:
    mark = {"applied": " ", "granted": " ", "rejected": "x", "denied": "x"}.get(e.outcome, "?")
    if e.plane == "data-plane":
        r = e.request
        text = f"data  {render(r.agent)} {r.verb} {render(r.variable)}"
    else:
        u = e.update
        if isinstance(u, State):
            text = f"state {u.message.id}"
        elif isinstance(u, Enact):
            verdict = "" if e.permission is None else (" ok" if e.permission.permitted else " PROHIBITED")
            text = f"enact {u.label or u.action}{verdict}"
        elif isinstance(u, Agree):
            text = "agree [" + ", ".join(str(m.id) for m in u.messages) + "]"
        elif isinstance(u, Gossip):
            text = f"gossip {u.message.id} {render(u.sender)} -> {render(u.recipient)}"
        elif isinstance(u, Forget):
            text = f"forget {u.message.id} by {render(u.agent)}"
        else:
            text = type(u).__name__
    return f"{e.index:>4}{mark} {text}"


def detail_lines(events: Sequence[TraceEvent], index: int) -> List[str]:
    if not events:
        return ["(empty trace)"]
    e = events[index]
    lines = [f"event {e.index}  [{e.plane}]  {e.outcome}" + (f" ({e.reason})" if e.reason else "")]
    if e.plane == "data-plane":
        r = e.request
        lines += [
            f"agent:    {render(r.agent)}",
            f"request:  {r.verb} {render(r.variable)}",
            f"action:   event {r.action_ref}",
        ]
        if e.digest:
            lines.append(f"sha256:   {e.digest[:16]}...")
        return lines
    u = e.update
    if isinstance(u, Enact):
        a = u.action
        lines += [f"actor:    {render(a.actor)}", f"label:    {u.label}", f"action:   {a}", ""]
        if e.permission is not None:
            p = e.permission
            lines += [
                f"permitted {p.permitted}",
                f"  valid   {p.valid_act}",
                f"  sourced {p.sourced}" + (f"  unsourced: {', '.join(p.unsourced)}" if p.unsourced else ""),
                f"  based   {p.based}",
                "",
            ]
        lines.append("payload:")
        for m in payload(a):
            lines.append(f"  {m.id}")
            lines += ["    " + line for line in m.text.strip().splitlines() if line.strip()]
        lines.append("effects:")
        lines += [f"  {x}" for x in (e.effects or ())] or ["  (none)"]
    elif isinstance(u, (State, Gossip, Forget)):
        m = u.message
        lines.append(f"message:  {m.id}")
        lines += ["  " + line for line in m.text.strip().splitlines() if line.strip()]
    elif isinstance(u, Agree):
        lines.append("agreed:   [" + ", ".join(str(m.id) for m in u.messages) + "]")
    return lines


def _fit(text: str, width: int) -> str:
    return text[:width].ljust(width)


def render_panes(events: Sequence[TraceEvent], selected: int, width: int = 120, height: int = 30,
                 top: int = 0) -> List[str]:
    left_w = max(20, width * 2 // 5)
    right_w = max(10, width - left_w - 3)
    left = [("> " if e.index == selected else "  ") + event_line(e) for e in events[top: top + height]]
    right = []
    for line in detail_lines(events, selected) if events else ["(empty trace)"]:
        right += textwrap.wrap(line, right_w, subsequent_indent="    ", drop_whitespace=False) or [""]
    rows = []
    for i in range(height):
        l = left[i] if i < len(left) else ""
        r = right[i] if i < len(right) else ""
        rows.append(_fit(l, left_w) + " | " + _fit(r, right_w).rstrip())
    return rows


def browse(events: Sequence[TraceEvent]) -> None:  # pragma: no cover - interactive
    import curses

    def loop(screen):
        curses.curs_set(0)
        selected, top = 0, 0
        while True:
            h, w = screen.getmaxyx()
            body = h - 1
            if selected < top:
                top = selected
            elif selected >= top + body:
                top = selected - body + 1
            screen.erase()
            for y, row in enumerate(render_panes(events, selected, w - 1, body, top)):
                screen.addnstr(y, 0, row, w - 1)
            screen.addnstr(h - 1, 0, " up/down j/k  PgUp/PgDn  g/G  q: quit ", w - 1, curses.A_REVERSE)
            key = screen.getch()
            last = max(0, len(events) - 1)
            if key in (ord("q"), 27):
                return
            if key in (curses.KEY_DOWN, ord("j")):
                selected = min(last, selected + 1)
            elif key in (curses.KEY_UP, ord("k")):
                selected = max(0, selected - 1)
            elif key == curses.KEY_NPAGE:
                selected = min(last, selected + body)
            elif key == curses.KEY_PPAGE:
                selected = max(0, selected - body)
            elif key == ord("g"):
                selected = 0
            elif key == ord("G"):
                selected = last

    curses.wrapper(loop)
