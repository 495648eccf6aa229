import numpy as np
import pytest

import dzoa


def random_connected_graph(rng, max_agents=6, extra_edge_prob=0.4):
    """Random connected graph: a random attachment tree plus extra edges."""
    k = int(rng.integers(2, max_agents + 1))
    edges = set()
    for node in range(2, k + 1):
        anchor = int(rng.integers(1, node))
        edges.add((anchor, node))
    for a in range(1, k + 1):
        for b in range(a + 1, k + 1):
            if (a, b) not in edges and rng.random() < extra_edge_prob:
                edges.add((a, b))
    return dzoa.build_graph(k, tuple(sorted(edges)))


def tiny_instance(seed=0, num_agents=3, samples=4, p=2, eta=0.5, noise=0.3):
    """Small normalized problem instance used across unit tests."""
    graph = dzoa.build_graph(
        num_agents,
        tuple((i, i + 1) for i in range(1, num_agents)) + ((1, num_agents),)
        if num_agents > 2
        else ((1, 2),),
    )
    dataset, omega = dzoa.synthesize_data(num_agents, samples, p, noise, seed)
    dataset = dzoa.normalize_data(dataset)
    problem = dzoa.ErmProblem(eta=eta, c1=1.0, num_agents=num_agents)
    return graph, dataset, problem, omega


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def triangle():
    return dzoa.build_graph(3, ((1, 2), (2, 3), (3, 1)))


@pytest.fixture
def two_node():
    return dzoa.build_graph(2, ((1, 2),))


@pytest.fixture
def default_graph():
    return dzoa.build_graph(5, dzoa.DEFAULT_TOPOLOGY_EDGES)
