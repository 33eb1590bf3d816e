"""Collects one verdict line per acceptance criterion for the summary."""

RESULTS: dict[str, tuple[bool, str]] = {}


def report(name: str, ok: bool, detail: str) -> None:
    RESULTS[name] = (ok, detail)
    print(f"{name} {'PASS' if ok else 'FAIL'}: {detail}")
