"""Every acceptance criterion at its stated tolerance and time budget.

Each check prints one pass/fail line; the lines are also collected and
repeated in the terminal summary so they survive output capture.
"""

import pytest

from mustring.acceptance import CHECKS

RESULT_LINES = []


def _id(number):
    return f"{number:02d}-{CHECKS[number].__name__}"


@pytest.mark.parametrize("number", sorted(CHECKS), ids=_id)
def test_acceptance(number):
    result = CHECKS[number]()
    line = result.line()
    RESULT_LINES.append(line)
    print(line)
    assert result.passed, line
    assert result.within_budget, f"over budget: {line}"
