import pytest

from skewconley.config import DEFAULTS, dumps_config, loads_config, schedule
from skewconley.errors import ConfigError


def test_empty_text_gives_defaults():
    assert loads_config("") == DEFAULTS


def test_values_and_comments():
    cfg = loads_config("""
# a comment
system.name = example-5-2-circle
grid.depth = [5]
transition.eps_pad = 0.0
lyapunov.trace_starts = [[0.5], [-0.5]]
system.params.c = 2.5
""")
    assert cfg["system.name"] == "example-5-2-circle"
    assert cfg["grid.depth"] == [5]
    assert cfg["transition.eps_pad"] == 0.0
    assert cfg["lyapunov.trace_starts"] == [[0.5], [-0.5]]
    assert cfg["system.params.c"] == 2.5


@pytest.mark.parametrize("text", [
    "grid.dpeth = 6",
    "pullback.window = [0, 1]",
    "system.params. = 1",
    "nonsense",
])
def test_unknown_keys_and_bad_lines_rejected(text):
    with pytest.raises(ConfigError):
        loads_config(text)


@pytest.mark.parametrize("text", [
    "grid.depth = 2.5",
    "grid.depth = [3, \"a\"]",
    "base.m = 0",
    "transition.escape = bounce",
    "transition.eps_pad = -1",
    "transition.scheme = 0",
    "lyapunov.dt = 0",
    "pullback.steps = 0",
    "pullback.schedule = []",
    "workers = 0",
    "seed = 1.5",
    "system.name = 3",
])
def test_validation_errors(text):
    with pytest.raises(ConfigError):
        loads_config(text)


def test_print_defaults_round_trip():
    text = dumps_config(DEFAULTS)
    assert loads_config(text) == DEFAULTS
    cfg = loads_config("system.params.sigma = 10\ngrid.depth = [3, 3, 3]\nseed = 7")
    assert loads_config(dumps_config(cfg)) == cfg


def test_schedule():
    assert schedule(loads_config("pullback.tau = 0.5\npullback.steps = 3")) == [0.5, 1.0, 1.5]
    assert schedule(loads_config("pullback.schedule = [1, 3]")) == [1.0, 3.0]
