import hypothesis
import numpy as np
import pytest

from consensus_lab import WeightedDigraph, unit_jump
from consensus_lab.bundled import double_star_graph, fig1_graph, fig4_graph

hypothesis.settings.register_profile("fast", max_examples=25)


@pytest.fixture
def fig1():
    return fig1_graph()


@pytest.fixture
def double_star():
    return double_star_graph()


@pytest.fixture
def fig4():
    return fig4_graph()


@pytest.fixture
def uj():
    return unit_jump()


@pytest.fixture
def two_node():
    return WeightedDigraph.from_laplacian(np.array([[1.0, -1.0], [-1.0, 1.0]]))
