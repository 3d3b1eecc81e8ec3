import random

import pytest

from csp_algebras.relcore import Template

from oracles import XOR0, XOR1


@pytest.fixture
def neq2():
    return Template.single_sorted((0, 1), [[(0, 1), (1, 0)]], ["neq"])


@pytest.fixture
def xor_template():
    """Parity relations over {0,1} with both singletons."""
    return Template.single_sorted((0, 1), [XOR0, XOR1, [(0,)], [(1,)]],
                                  ["x0", "x1", "c0", "c1"])


@pytest.fixture
def rng():
    return random.Random(20261016)


@pytest.fixture
def mixed_template():
    """Parity on {0,1}, an order on {1,2}, singletons and the two-element unaries."""
    x0 = [t for t in XOR0]
    x1 = [t for t in XOR1]
    le = [(1, 1), (1, 2), (2, 2)]
    unary = [[(0,)], [(1,)], [(2,)], [(0,), (1,)], [(1,), (2,)], [(0,), (2,)]]
    return Template.single_sorted((0, 1, 2), [x0, x1, le] + unary,
                                  ["x0", "x1", "le", "s0", "s1", "s2", "u01", "u12", "u02"])


@pytest.fixture
def implication_template():
    return Template.single_sorted((0, 1), [[(0, 0), (0, 1), (1, 1)], [(0,)], [(1,)]],
                                  ["le", "c0", "c1"])


ACCEPTANCE = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        terminalreporter.write_line(ACCEPTANCE[k])


@pytest.fixture
def criterion(request):
    """Context manager factory that records one pass/fail line per criterion."""
    import time
    from contextlib import contextmanager

    @contextmanager
    def run(number, title, limit=None):
        start = time.perf_counter()
        try:
            yield
        except BaseException as exc:
            ACCEPTANCE[number] = f"criterion {number:2d} FAIL  {title}: {exc!r}"[:200]
            print(ACCEPTANCE[number])
            raise
        elapsed = time.perf_counter() - start
        note = f" ({elapsed:.2f} s" + (f", limit {limit} s)" if limit else ")")
        ACCEPTANCE[number] = f"criterion {number:2d} PASS  {title}{note}"
        print(ACCEPTANCE[number])

    return run
