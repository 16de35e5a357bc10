"""End-to-end acceptance criteria.

Each criterion prints one ``[PASS]``/``[FAIL]`` line; the lines are
repeated in the terminal summary so they show up without ``-s``.
"""

import pytest

from prwalk import acceptance

RESULTS = {}


@pytest.mark.slow
@pytest.mark.parametrize("number", sorted(acceptance.CRITERIA))
def test_criterion(number):
    res = acceptance.CRITERIA[number]()
    RESULTS[number] = res
    print(res.line())
    assert res.passed, res.line()
