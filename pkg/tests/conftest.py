from pathlib import Path

import pytest

from mbqaoa.graph import complete_graph, read_graph

DATA = Path(__file__).resolve().parent.parent / "data"


@pytest.fixture
def k4():
    return complete_graph(4)


@pytest.fixture
def k4_path():
    return DATA / "k4.txt"


@pytest.fixture
def k4_file_graph(k4_path):
    return read_graph(k4_path)
