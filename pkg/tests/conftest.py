from pathlib import Path

import pytest

from benney_sym.numeric import characteristic_speed
from benney_sym.numeric.config import initial_state, load_config, sim_params

GOLDEN = Path(__file__).parent / "golden"


class TwoStream:
    """Smooth two-stream data on [0, 1) with N = 3; grid size chosen per call."""

    def __init__(self, closure="streams"):
        self.cfg = {**load_config(GOLDEN / "two_stream.json"), "closure": closure}
        base = initial_state(self.cfg)
        # headroom for the stretched or boosted copy
        self.v_max = 1.5 * characteristic_speed(base, closure)

    def state(self, M):
        return initial_state(self.cfg, M)

    def params(self, M):
        return sim_params({**self.cfg, "M": M}, self.state(M), v_max=self.v_max)


@pytest.fixture(scope="session")
def two_stream():
    return TwoStream()


@pytest.fixture(scope="session")
def golden_dir():
    return GOLDEN
