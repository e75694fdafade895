import math

import numpy as np
import pytest

from hdmol import vsa
from hdmol.structures import Atom, MoleculeGraph, build_edges, gen_synthetic

# One "PASS/FAIL criterion: detail" line per acceptance criterion, printed
# in the terminal summary.
ACCEPTANCE_LINES: list[str] = []

PB, B = 82, 5
D1, D2 = 2.6, 1.8  # Pb-B and B-B bond lengths of the test triangle


def pbb2_graph() -> MoleculeGraph:
    """Isosceles Pb-B-B triangle: Pb is node 0, the borons are nodes 1 and 2."""
    h = math.sqrt(D1 ** 2 - (D2 / 2) ** 2)
    atoms = [Atom(PB, (0.0, 0.0, 0.0)), Atom(B, (-D2 / 2, h, 0.0)), Atom(B, (D2 / 2, h, 0.0))]
    return MoleculeGraph("PbB2", atoms, build_edges(atoms))


@pytest.fixture
def pbb2():
    return pbb2_graph()


@pytest.fixture(scope="session")
def synthetic54():
    return gen_synthetic(vsa.make_rng(1), 54, 12)


def naive_circ_conv(a, b):
    d = len(a)
    return np.array([sum(a[k] * b[(n - k) % d] for k in range(d)) for n in range(d)])


def naive_dft(a):
    d = len(a)
    return np.array([sum(a[n] * np.exp(-2j * np.pi * k * n / d) for n in range(d)) for k in range(d)])


def naive_idft(f):
    d = len(f)
    return np.array([sum(f[k] * np.exp(2j * np.pi * k * n / d) for k in range(d)) for n in range(d)]).real / d


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
