"""Per-criterion pass/fail lines collected by the acceptance tests."""

VERDICTS = {}


def record(number: int, ok: bool, detail: str) -> bool:
    VERDICTS[number] = f"criterion {number}: {'PASS' if ok else 'FAIL'}  {detail}"
    return ok
