import contextlib

import pytest

_RESULTS: dict[int, tuple[str, str, str]] = {}


class _Recorder:
    @contextlib.contextmanager
    def __call__(self, number: int, title: str):
        try:
            yield
        except BaseException as exc:
            _RESULTS[number] = ("FAIL", title, str(exc).splitlines()[0] if str(exc) else type(exc).__name__)
            print(f"criterion {number}: FAIL  {title}")
            raise
        _RESULTS[number] = ("PASS", title, "")
        print(f"criterion {number}: PASS  {title}")


@pytest.fixture
def criterion():
    return _Recorder()


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_RESULTS):
        status, title, why = _RESULTS[n]
        line = f"criterion {n}: {status}  {title}"
        terminalreporter.write_line(line + (f"  ({why})" if why else ""))
