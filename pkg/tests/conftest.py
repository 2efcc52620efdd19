import sys
from pathlib import Path

import pytest

from cbscheck.csm import build_rg, parse_model

HERE = Path(__file__).parent
FIXTURES = HERE / "fixtures"
sys.path.insert(0, str(HERE))

TOY1_PATH = FIXTURES / "toy1.csm"
TOY1_TEXT = TOY1_PATH.read_text()


@pytest.fixture
def toy1():
    net = parse_model(TOY1_TEXT)
    return net, build_rg(net)


@pytest.fixture
def toy1_path():
    return str(TOY1_PATH)
