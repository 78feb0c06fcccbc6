import networkx as nx
import numpy as np
import pytest

from hyperstruc.graph import Graph, generate_barbell, mirrored_karate
from hyperstruc.multilayer import build_multilayer
from hyperstruc.structdist import all_pair_distances


def graph_from_nx(G) -> Graph:
    return Graph.from_edges(((str(a), str(b)) for a, b in G.edges()), nodes=map(str, G.nodes()))


@pytest.fixture(scope="session")
def karate_mirror():
    return mirrored_karate()


@pytest.fixture(scope="session")
def karate_table(karate_mirror):
    return all_pair_distances(karate_mirror[0])


@pytest.fixture(scope="session")
def karate_ml(karate_table):
    return build_multilayer(karate_table)


@pytest.fixture(scope="session")
def barbell():
    return generate_barbell(10, 10)


@pytest.fixture(scope="session")
def barbell_ml(barbell):
    return build_multilayer(all_pair_distances(barbell[0]))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def path3():
    return graph_from_nx(nx.path_graph(3))


ACCEPTANCE_LINES = pytest.StashKey[list]()


@pytest.fixture
def criterion(request):
    """Record one PASS/FAIL line per acceptance criterion; echoed in the terminal summary."""
    lines = request.config.stash.setdefault(ACCEPTANCE_LINES, [])

    def report(number: int, passed: bool, detail: str) -> None:
        line = f"{'PASS' if passed else 'FAIL'}  criterion {number:>2}  {detail}"
        print(line)
        lines.append(line)

    return report


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash.get(ACCEPTANCE_LINES, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda s: int(s.split()[2])):
            terminalreporter.write_line(line)
