"""The twelve acceptance criteria at their stated tolerances.

Each test prints one line, ``PASS criterion k: name`` or ``FAIL ...``, to the
terminal (capture is bypassed), then asserts the outcome.  Running this file
directly prints the same lines without pytest.
"""
import sys

import pytest

from splitslag import acceptance


def _line(result: dict) -> str:
    tag = "PASS" if result["passed"] else "FAIL"
    return f"{tag} criterion {result['criterion']}: {result['name']}"


@pytest.mark.parametrize("k", range(1, 13))
def test_criterion(k, capsys):
    result = acceptance.run(k)
    with capsys.disabled():
        sys.stdout.write("\n" + _line(result) + "\n")
    assert result["passed"], result["details"]


if __name__ == "__main__":
    ok = True
    for k in range(1, 13):
        r = acceptance.run(k)
        ok &= r["passed"]
        print(_line(r), flush=True)
    sys.exit(0 if ok else 1)
