import itertools
import math

import numpy as np
import pytest

from inflap.lattice import build_domain, setup

ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def brute_offsets(h, eps, norm, d):
    """Closed-ball lattice offsets by direct enumeration with math-module norms."""
    m = int(eps / h) + 1
    out = []
    for o in itertools.product(range(-m, m + 1), repeat=d):
        v = [c * h for c in o]
        if norm == "euclidean":
            r = math.sqrt(sum(c * c for c in v))
        elif norm == "l1":
            r = sum(abs(c) for c in v)
        else:
            r = max(abs(c) for c in v)
        if r <= eps * (1 + 1e-12):
            out.append(o)
    return sorted(out)


def brute_envelope(values, offsets, take_max):
    """Per-node extremum over in-lattice ball translates, plain loops."""
    shape = values.shape
    out = np.empty(shape)
    for x in np.ndindex(*shape):
        vals = []
        for o in offsets:
            y = tuple(a + b for a, b in zip(x, o))
            if all(0 <= c < n for c, n in zip(y, shape)):
                vals.append(values[y])
        out[x] = max(vals) if take_max else min(vals)
    return out


@pytest.fixture
def square17():
    dom = build_domain([0, 1, 0, 1], 1 / 16)
    return dom


@pytest.fixture
def big_square():
    """[-1, 1]^2 at h = 1/64 with eps = 4h."""
    dom = build_domain([-1, 1, -1, 1], 1 / 64)
    st, st2, regions = setup(dom, 4 / 64)
    return dom, st, st2, regions
