"""Shared record of acceptance verdicts, printed at the end of a pytest run."""

from __future__ import annotations

RESULTS: list[str] = []


def record(number: int, title: str, ok: bool, detail: str = "") -> None:
    line = f"criterion {number} {'PASS' if ok else 'FAIL'}: {title}"
    if detail:
        line += f" ({detail})"
    RESULTS.append(line)
    print(line)
