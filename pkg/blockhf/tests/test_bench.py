#!/usr/bin/env python3
# -*- coding: UTF-8 -*-

"""
The experiment runner, its metrics file, and the verification suites.
"""

import math

import attr
import numpy as np
import pytest

from blockhf.bench import runner
from blockhf.bench.config import parse_config
from blockhf.bench.metrics import MetricsRow, MetricsWriter, header, read_metrics
from blockhf.bench.runner import run_experiment
from blockhf.bench.verify import ALL, SUITES, format_report, run_suite
from blockhf.errors import ConfigError, DataMissingError, NumericalError
from blockhf.optim.hessian_free import StepReport


def fail_after(calls: int, step):
    """
    Wraps an update function so that it raises NumericalError once it has run
    `calls` times.
    """
    count = 0

    def wrapper(state, *args, **kwargs):
        nonlocal count
        if count == calls:
            raise NumericalError("non-finite gradient", {"update": state.k})
        count += 1
        return step(state, *args, **kwargs)

    return wrapper


################################### Runner ###################################


def test_autoencoder_run(experiment):
    config = experiment("autoencoder.ini")
    result = run_experiment(config)
    assert result.updates == 8
    assert result.rows == 4
    assert not result.stopped_early

    rows = read_metrics(result.output)
    assert list(rows[0]) == header(["encoder", "decoder"], classifier=False)
    assert [int(row["update"]) for row in rows] == [2, 4, 6, 8]
    assert [int(row["epoch"]) for row in rows] == [0, 1, 2, 3]
    for row in rows:
        assert row["wall_clock"] == "0.0"
        assert math.isfinite(float(row["train_loss"]))
        assert math.isfinite(float(row["eval_loss"]))
        assert 0 <= int(row["cg_iters_encoder"]) <= 10
        assert 0 <= int(row["cg_iters_decoder"]) <= 10
        assert math.isfinite(float(row["q_encoder"]))
    assert result.best_eval_loss == min(float(row["eval_loss"]) for row in rows)


def test_runs_are_reproducible(experiment, tmp_path):
    config = experiment("autoencoder.ini")
    first = run_experiment(config, output=tmp_path / "first.csv")
    second = run_experiment(config, output=tmp_path / "second.csv")
    assert first.output.read_bytes() == second.output.read_bytes()
    assert np.array_equal(first.state.w.values, second.state.w.values)


def test_parallel_blocks_give_the_same_file(experiment, tmp_path):
    config = experiment("autoencoder.ini")
    in_parallel = attr.evolve(config, hf=attr.evolve(config.hf, parallel_blocks=True))
    serial = run_experiment(config, output=tmp_path / "serial.csv")
    parallel = run_experiment(in_parallel, output=tmp_path / "parallel.csv")
    assert serial.output.read_bytes() == parallel.output.read_bytes()


def test_seed_changes_the_run(experiment, tmp_path):
    config = experiment("autoencoder.ini")
    other = experiment("autoencoder.ini", seed=43)
    first = run_experiment(config, output=tmp_path / "first.csv")
    second = run_experiment(other, output=tmp_path / "second.csv")
    assert first.output.read_bytes() != second.output.read_bytes()


def test_numerical_abort_keeps_the_rows_written_so_far(experiment, monkeypatch):
    config = experiment("autoencoder.ini")
    monkeypatch.setattr(runner, "block_hf_step", fail_after(5, runner.block_hf_step))
    with pytest.raises(NumericalError):
        run_experiment(config)
    rows = read_metrics(config.run.output)
    assert [row["update"] for row in rows] == ["2", "4"]


def test_max_epochs(experiment):
    result = run_experiment(experiment("autoencoder.ini", max_epochs=1))
    assert result.updates == 2
    assert [row["update"] for row in read_metrics(result.output)] == ["2"]


def test_patience_stops_a_stalled_run(experiment, monkeypatch):
    def stalled(state, graph, partition, gradient_batch, curvature_batch, config):
        blocks = len(partition)
        report = StepReport(
            loss=1.0, grad_norm=0.0, cg_iterations=(0,) * blocks, q=(0.0,) * blocks, reasons=()
        )
        return attr.evolve(state, k=state.k + 1), report

    monkeypatch.setattr(runner, "block_hf_step", stalled)
    config = experiment("autoencoder.ini", patience=2, eval_every=1)
    result = run_experiment(config)
    # the first evaluation sets the best loss, the next two fail to beat it
    assert result.stopped_early
    assert result.updates == result.rows == 3


def test_polyak_average_starts_from_the_initial_weights(experiment, monkeypatch):
    def shift(state, graph, partition, gradient_batch, curvature_batch, config):
        blocks = len(partition)
        report = StepReport(
            loss=1.0, grad_norm=0.0, cg_iterations=(0,) * blocks, q=(0.0,) * blocks, reasons=()
        )
        moved = state.w.replace(state.w.values + 1.0)
        return attr.evolve(state, w=moved, k=state.k + 1), report

    monkeypatch.setattr(runner, "block_hf_step", shift)
    result = run_experiment(experiment("lstm.ini"))
    w0 = result.state.w.values - result.updates

    offset = 0.0
    for t in range(1, result.updates + 1):
        offset = 0.99 * offset + 0.01 * t
    assert np.allclose(result.state.polyak, w0 + offset, rtol=0, atol=1e-12)


def test_lstm_run_with_polyak_averaging(experiment):
    config = experiment("lstm.ini")
    result = run_experiment(config)
    assert result.updates == result.rows == 4
    assert result.state.polyak is not None
    assert result.state.polyak.shape == result.state.w.values.shape
    assert not np.array_equal(result.state.polyak, result.state.w.values)

    rows = read_metrics(result.output)
    assert list(rows[0]) == header(["lstm.0", "lstm.1"], classifier=True)
    for row in rows:
        assert 0.0 <= float(row["eval_accuracy"]) <= 1.0


def test_adam_run(experiment):
    result = run_experiment(experiment("adam.ini"))
    assert result.updates == 20
    assert result.state.adam_t == 20
    rows = read_metrics(result.output)
    assert list(rows[0]) == header([], classifier=False)
    assert [row["update"] for row in rows] == ["5", "10", "15", "20"]


def test_missing_mnist(tmp_path):
    config = parse_config(
        "\n".join(
            [
                "[model]",
                "preset = autoencoder-mnist",
                "[optimizer]",
                "kind = block-hf",
                "[data]",
                "source = mnist",
                f"directory = {tmp_path}",
                "[run]",
                "seed = 1",
            ]
        )
    )
    with pytest.raises(DataMissingError, match="BLOCKHF_DATA_DIR"):
        run_experiment(config, output=tmp_path / "metrics.csv")


def test_synthetic_rank_must_fit_the_model(experiment):
    config = experiment("autoencoder.ini")
    config = attr.evolve(config, data=attr.evolve(config.data, rank=17))
    with pytest.raises(ConfigError, match="rank 17"):
        run_experiment(config)


################################## Metrics ##################################


def metrics_row(update: int, **changes) -> MetricsRow:
    values = dict(
        update=update,
        epoch=0,
        wall_clock=0.0,
        train_loss=0.5,
        eval_loss=0.25,
        grad_norm=1.0,
        cg_iterations=(3,),
        q=(-0.125,),
    )
    values.update(changes)
    return MetricsRow(**values)


def test_metrics_file(tmp_path):
    path = tmp_path / "nested" / "metrics.csv"
    with MetricsWriter(path, ["all"], classifier=False) as writer:
        writer.write(metrics_row(1))
        writer.write(metrics_row(3, train_loss=0.1))
    assert writer.rows_written == 2
    assert path.read_text().splitlines() == [
        "update,epoch,wall_clock,train_loss,eval_loss,grad_norm,cg_iters_all,q_all",
        "1,0,0.0,0.5,0.25,1.0,3,-0.125",
        "3,0,0.0,0.1,0.25,1.0,3,-0.125",
    ]


def test_metrics_rows_are_flushed_as_they_are_written(tmp_path):
    path = tmp_path / "metrics.csv"
    with MetricsWriter(path, ["all"], classifier=False) as writer:
        writer.write(metrics_row(1))
        assert len(read_metrics(path)) == 1


def test_metrics_writer_checks_its_rows(tmp_path):
    with MetricsWriter(tmp_path / "metrics.csv", ["all"], classifier=False) as writer:
        writer.write(metrics_row(2))
        with pytest.raises(ValueError):
            writer.write(metrics_row(2))
        with pytest.raises(ValueError):
            writer.write(metrics_row(3, cg_iterations=(1, 2), q=(0.0, 0.0)))
        with pytest.raises(NumericalError):
            writer.write(metrics_row(4, eval_loss=float("nan")))
    with pytest.raises(RuntimeError):
        writer.write(metrics_row(5))


def test_classifier_columns(tmp_path):
    path = tmp_path / "metrics.csv"
    with MetricsWriter(path, [], classifier=True) as writer:
        writer.write(metrics_row(1, eval_accuracy=0.75, cg_iterations=(), q=()))
    (only,) = read_metrics(path)
    assert only["eval_accuracy"] == "0.75"


############################### Verification ###############################


@pytest.mark.parametrize("suite", sorted(SUITES))
def test_suites_pass(suite):
    checks = run_suite(suite)
    assert checks
    assert all(check.passed for check in checks), format_report(checks)


def test_all_runs_every_suite():
    checks = run_suite(ALL, seed=1)
    assert {check.suite for check in checks} == set(SUITES)
    assert format_report(checks).endswith(f"{len(checks)} passed, 0 failed")


def test_unknown_suite():
    with pytest.raises(ConfigError, match="autodiff, cg, optimizer, all"):
        run_suite("everything")


def test_a_broken_tangent_is_caught(broken_tangent):
    checks = run_suite("autodiff")
    failed = {check.name for check in checks if not check.passed}
    assert "hvp vs differences of gradients" in failed
    assert "grad vs central differences" not in failed
    assert "FAIL" in format_report(checks)
