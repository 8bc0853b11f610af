import numpy as np
import pytest

from rngverify import synth


@pytest.fixture(scope="session")
def gaussian_2m():
    """gaussian(2e6, seed 42), shared by the large Monte-Carlo checks."""
    return synth.gaussian(2_000_000, 42)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


_VERDICT_LINES: list[str] = []


@pytest.fixture
def verdict():
    """Record one PASS/FAIL line for the end-of-run acceptance summary."""

    def record(number: int, title: str, checks: dict) -> None:
        ok = all(v for v, _ in checks.values())
        parts = "; ".join(f"{k}={'ok' if v else 'FAIL'} ({d})" for k, (v, d) in checks.items())
        _VERDICT_LINES.append(f"criterion {number} {'PASS' if ok else 'FAIL'}: {title} | {parts}")
        print(_VERDICT_LINES[-1])
        failed = [k for k, (v, _) in checks.items() if not v]
        assert not failed, f"criterion {number} failed checks: {failed}"

    return record


def pytest_terminal_summary(terminalreporter):
    if _VERDICT_LINES:
        terminalreporter.write_sep("=", "acceptance criteria")
        for line in sorted(_VERDICT_LINES):
            terminalreporter.write_line(line)
