"""Shared sink for acceptance PASS/FAIL lines, flushed by the terminal-summary hook."""

LINES: list[str] = []


def record(name: str, ok: bool, detail: str) -> str:
    line = f"{'PASS' if ok else 'FAIL'}  {name}: {detail}"
    LINES.append(line)
    return line
