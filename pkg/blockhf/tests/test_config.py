#!/usr/bin/env python3
# -*- coding: UTF-8 -*-

from pathlib import Path

import pytest

from blockhf import settings
from blockhf.bench.config import (
    ADAM,
    BLOCK_HF,
    HF,
    load_config,
    parse_config,
    read_assignments,
)
from blockhf.cg import QuadraticProgress, RelativeResidual
from blockhf.errors import ConfigError
from blockhf.models.spec import STACKED_LSTM

BASE = """\
[model]
preset = autoencoder-small

[optimizer]
kind = block-hf

[data]
source = synthetic
n_train = 2000
n_eval = 500

[run]
seed = 42
"""


def with_lines(*extra: str) -> str:
    return BASE + "\n".join(extra) + "\n"


def test_minimal_config(shared_datadir):
    config = load_config(shared_datadir / "minimal.ini")
    assert config.optimizer == BLOCK_HF
    assert config.partition == "autoencoder-2block"
    assert config.model.sizes == (64, 32, 16, 8)
    assert config.run.seed == 42
    assert config.data.seed == 42
    assert config.run.patience == 10
    assert config.run.output == Path("metrics.csv")
    assert config.adam is None

    hf = config.hf
    assert (hf.gradient_batch, hf.curvature_batch) == (512, 64)
    assert hf.cg.max_iters == 30
    assert hf.cg.damping == 0.0
    assert isinstance(hf.cg.stop_criterion, RelativeResidual)
    assert hf.momentum == 0.95
    assert config.gradient_batch == 512


def test_fixture_configs(shared_datadir):
    autoencoder = load_config(shared_datadir / "autoencoder.ini")
    assert autoencoder.model.sizes == (16, 8, 4)
    assert autoencoder.run.wall_clock is False
    assert autoencoder.data.rank == 3

    lstm = load_config(shared_datadir / "lstm.ini")
    assert lstm.model.kind == STACKED_LSTM
    assert (lstm.model.layers, lstm.model.hidden, lstm.model.steps) == (2, 3, 4)
    assert lstm.partition == "lstm-3block"
    assert lstm.run.polyak_decay == 0.99

    adam = load_config(shared_datadir / "adam.ini")
    assert adam.optimizer == ADAM
    assert adam.partition == "single"
    assert adam.hf is None
    assert adam.adam.batch_size == adam.gradient_batch == 32
    assert adam.adam.max_loops == 20


def test_unknown_optimizer_names_the_choices():
    text = BASE.replace("kind = block-hf", "kind = adamm")
    with pytest.raises(ConfigError) as info:
        parse_config(text)
    error = info.value
    assert error.key == "optimizer.kind"
    assert error.line == 5
    assert "block-hf, hf, adam" in str(error)
    assert str(error).startswith("line 5: optimizer.kind: ")


def test_curvature_batch_larger_than_the_gradient_batch():
    text = with_lines("[hf]", "gradient_batch = 64", "curvature_batch = 128")
    with pytest.raises(ConfigError, match="must not exceed") as info:
        parse_config(text)
    assert info.value.key == "hf.curvature_batch"
    assert info.value.line == text.splitlines().index("curvature_batch = 128") + 1


def test_seed_is_required():
    with pytest.raises(ConfigError, match="missing required key") as info:
        parse_config(BASE.replace("seed = 42", ""))
    assert info.value.key == "run.seed"


def test_unknown_key():
    with pytest.raises(ConfigError, match="unknown key") as info:
        parse_config(with_lines("[hf]", "dampening = 0.1"))
    assert info.value.key == "hf.dampening"
    assert info.value.line == BASE.count("\n") + 2


def test_unknown_section():
    with pytest.raises(ConfigError, match="unknown section"):
        parse_config(with_lines("[solver]"))


def test_duplicate_key():
    with pytest.raises(ConfigError, match="already set on line 13"):
        parse_config(with_lines("run.seed = 3"))


def test_key_outside_a_section():
    with pytest.raises(ConfigError, match="outside of any section") as info:
        parse_config("seed = 42\n" + BASE)
    assert info.value.line == 1


def test_garbage_line():
    with pytest.raises(ConfigError, match="key = value"):
        parse_config(with_lines("[run]", "just words"))


def test_values_of_the_wrong_type():
    with pytest.raises(ConfigError, match="cannot read 'lots' as int"):
        parse_config(with_lines("[hf]", "max_cg_iters = lots"))
    with pytest.raises(ConfigError, match="cannot read 'maybe' as boolean"):
        parse_config(with_lines("[run]", "wall_clock = maybe"))


def test_comments_and_dotted_keys():
    assert read_assignments("# nothing\n\nhf.damping = 0.5 # half\n") == {
        "hf.damping": ("0.5", 3)
    }


@pytest.mark.parametrize(
    "line,key",
    [
        ("run.max_loops = 0", "run.max_loops"),
        ("run.eval_every = 0", "run.eval_every"),
        ("run.patience = -1", "run.patience"),
        ("run.polyak_decay = 1.0", "run.polyak_decay"),
        ("hf.damping = -0.5", "hf.damping"),
        ("hf.max_cg_iters = -1", "hf.max_cg_iters"),
        ("hf.cg_tol = 0", "hf.cg_tol"),
        ("hf.gradient_batch = 5000", "hf.gradient_batch"),
        ("data.pool = 0", "data.pool"),
        ("data.rank = -1", "data.rank"),
        ("hf.workers = 0", "hf.workers"),
        ("hf.workers = -2", "hf.workers"),
        ("model.sizes = 16", "model.sizes"),
    ],
)
def test_out_of_range_values(line, key):
    with pytest.raises(ConfigError) as info:
        parse_config(with_lines(line))
    assert info.value.key == key
    assert info.value.line == BASE.count("\n") + 1


def test_synthetic_data_needs_sizes():
    with pytest.raises(ConfigError, match="required for synthetic data"):
        parse_config(BASE.replace("n_eval = 500\n", ""))


def test_unknown_model_preset():
    with pytest.raises(ConfigError, match="unknown model preset") as info:
        parse_config(BASE.replace("autoencoder-small", "autoencoder-huge"))
    assert info.value.line == 2


def test_plain_hf_uses_one_block():
    config = parse_config(BASE.replace("kind = block-hf", "kind = hf"))
    assert config.optimizer == HF
    assert config.partition == "single"
    assert config.is_hessian_free

    text = BASE.replace("kind = block-hf", "kind = hf\npartition = layerwise")
    with pytest.raises(ConfigError, match="single partition"):
        parse_config(text)


def test_default_partition_depends_on_the_model():
    text = BASE.replace("autoencoder-small", "lstm3x10")
    assert parse_config(text).partition == "lstm-3block"


@pytest.mark.parametrize("name", ["balanced-3", "layerwise", "single", "autoencoder-2block"])
def test_partition_names(name):
    text = BASE.replace("kind = block-hf", f"kind = block-hf\npartition = {name}")
    assert parse_config(text).partition == name


def test_unknown_partition():
    text = BASE.replace("kind = block-hf", "kind = block-hf\npartition = halves")
    with pytest.raises(ConfigError, match="balanced-<k>") as info:
        parse_config(text)
    assert info.value.line == 6


def test_model_overrides():
    text = BASE.replace("autoencoder-small", "lstm3x10\nhidden = 4\nsteps = 7\ninput_size = 7")
    model = parse_config(text).model
    assert (model.layers, model.hidden, model.steps, model.input_size) == (3, 4, 7, 7)


def test_hf_options():
    config = parse_config(
        with_lines(
            "[hf]",
            "cg_stop = quadratic_progress",
            "cg_tol = 0.001",
            "curvature = hessian",
            "parallel_blocks = yes",
            "workers = 2",
        )
    )
    criterion = config.hf.cg.stop_criterion
    assert isinstance(criterion, QuadraticProgress)
    assert criterion.tol == 0.001
    assert config.hf.curvature == "hessian"
    assert config.hf.parallel_blocks is True
    assert config.hf.workers == 2


def test_data_seed_can_differ_from_the_run_seed():
    config = parse_config(with_lines("data.seed = 9"))
    assert (config.run.seed, config.data.seed) == (42, 9)


def test_missing_config_file(tmp_path):
    with pytest.raises(ConfigError, match="cannot find config file"):
        load_config(tmp_path / "nope.ini")


def test_shipped_configs_parse():
    paths = sorted((settings.BASE_PATH / "configs").glob("*.ini"))
    assert paths
    for path in paths:
        config = load_config(path)
        assert config.run.seed is not None
