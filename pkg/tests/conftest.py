import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from mises.expr import default_context, parse, parse_equation  # noqa: E402
from mises.jets import JetContext  # noqa: E402
from mises.transform import Equation  # noqa: E402


class Frame:
    """Parsing helpers for one choice of independent variables."""

    def __init__(self, ctx: JetContext):
        self.ctx = ctx
        base = default_context()
        self.source = ctx.source_context(base)
        self.target = ctx.target_context(base)

    def src(self, text):
        return parse(text, self.source)

    def tgt(self, text):
        return parse(text, self.target)

    def eq(self, text, target=False):
        lhs, rhs = parse_equation(text, self.target if target else self.source)
        return Equation(lhs=lhs, rhs=rhs)


@pytest.fixture
def ctx():
    return default_context()


@pytest.fixture
def evo():
    return Frame(JetContext())


@pytest.fixture
def three():
    return Frame(JetContext(("t", "x", "y"), "u", mises_direction="y"))


@pytest.fixture
def ode():
    return Frame(JetContext(("x",), "u", mises_direction="x"))


def pytest_terminal_summary(terminalreporter):
    module = sys.modules.get("test_acceptance")
    verdicts = getattr(module, "VERDICTS", None)
    if not verdicts:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(verdicts):
        terminalreporter.write_line(verdicts[n])
