import pytest

from dgnm.config import (
    EXPERIMENTS,
    ConfigError,
    ExperimentConfig,
    FieldChoice,
    format_config,
    load_config,
    parse_config,
)
from dgnm.experiments import desk_configs
from dgnm.kernels import ConstantsConfig

EXAMPLE = """
[experiment]
name = harnack_sweep
resolutions = 16, 32
fields = scalar_checkerboard@0.5, iid_random
lambdas = 1, 4, 16
seeds = 3, 4
bump_height = 20

[constants]
C_H = 0.5
"""


def test_parse_example():
    cfg = parse_config(EXAMPLE)
    assert cfg.experiment == "harnack_sweep"
    assert cfg.resolutions == (16, 32)
    assert cfg.fields == (FieldChoice("scalar_checkerboard", 0.5), FieldChoice("iid_random", 0.25))
    assert cfg.lambdas == (1.0, 4.0, 16.0)
    assert cfg.seeds == (3, 4)
    assert cfg.bump_height == 20.0
    assert cfg.constants == ConstantsConfig(C_H=0.5)


@pytest.mark.parametrize("cfg", desk_configs(), ids=lambda c: c.experiment)
def test_format_round_trip(cfg):
    assert parse_config(format_config(cfg)) == cfg
    assert ExperimentConfig.from_dict(cfg.to_dict()) == cfg


def test_load_config(tmp_path):
    path = tmp_path / "run.ini"
    path.write_text(EXAMPLE)
    assert load_config(path) == parse_config(EXAMPLE)


@pytest.mark.parametrize("text", [
    "[experiment]\nname = nope\n",
    "[experiment]\nresolutions = 16\n",
    "[experiment]\nname = moser\ncolour = blue\n",
    "[experiment]\nname = moser\n[extra]\nx = 1\n",
    "[experiment]\nname = moser\n[constants]\nC_X = 1\n",
    "[experiment]\nname = moser\n[constants]\nc_cross = -1\n",
    "[experiment]\nname = moser\nresolutions = sixteen\n",
    "[experiment]\nname = moser\nresolutions = 2\n",
    "[experiment]\nname = moser\nlambdas = 0.5\n",
    "[experiment]\nname = moser\nfields = marble\n",
    "[experiment]\nname = moser\nname = degiorgi\n",
    "[experiment]\nname = moser\nd = 2\n",
    "[experiment]\nname = crossover\nc_policy = sometimes\n",
    "name = moser\n",
    "[constants]\nC_H = 1\n",
])
def test_strict_parsing(text):
    with pytest.raises(ConfigError):
        parse_config(text)


def test_dimension_propagates_to_constants():
    cfg = parse_config("[experiment]\nname = harnack_sweep\nd = 2\n")
    assert cfg.d == 2 and cfg.constants.dim == 2


def test_canonical_types():
    cfg = ExperimentConfig("crossover", lambdas=[1, 4], seeds=[2.0], resolutions=[8])
    assert cfg.lambdas == (1.0, 4.0) and isinstance(cfg.lambdas[0], float)
    assert cfg.seeds == (2,) and cfg.resolutions == (8,)
    assert cfg.with_seeds([7]).seeds == (7,)


def test_field_tokens():
    assert FieldChoice.parse("layered@0.125").token == "layered@0.125"
    assert FieldChoice.parse("identity") == FieldChoice("identity", 0.25)
    with pytest.raises(ConfigError):
        FieldChoice("layered", 0.0)


def test_desk_covers_every_experiment():
    assert tuple(c.experiment for c in desk_configs()) == EXPERIMENTS
    assert all(max(c.resolutions) <= 64 and c.d == 3 for c in desk_configs())
