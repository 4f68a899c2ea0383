#!/usr/bin/env python3
# -*- coding: UTF-8 -*-

"""
Runs one experiment: the training loop, periodic evaluation, and the CSV.
"""

import logging
import time
from pathlib import Path
from typing import Dict, Optional, Tuple

import attr
import numpy as np
from tqdm import tqdm

from ..autodiff.evaluate import EvalContext, grad
from ..autodiff.graph import Graph
from ..data.batches import sample_batches
from ..data.dataset import TEST, TRAIN, Dataset
from ..data.mnist import load_mnist, prepare_autoencoder, prepare_sequential
from ..data.preprocess import sequence_shape
from ..data.synthetic import synth_autoencoder_data, synth_sequence_data
from ..errors import ConfigError
from ..linalg import Rng, ensure_finite, norm
from ..models.objective import batch_accuracy, batch_loss
from ..models.params import ParamVector, initial_parameters
from ..models.presets import build_model
from ..models.spec import AUTOENCODER
from ..optim.adam import adam_step
from ..optim.hessian_free import StepReport, block_hf_step
from ..optim.partition import BlockPartition, partition_preset
from ..optim.polyak import polyak_update
from ..optim.state import TrainerState
from .config import ADAM, SYNTHETIC, ExperimentConfig
from .metrics import MetricsRow, MetricsWriter

logger = logging.getLogger(__name__)

MNIST_SIDE = 28


@attr.s(auto_attribs=True, frozen=True)
class RunResult:
    output: Path
    updates: int
    rows: int
    best_eval_loss: float
    stopped_early: bool
    state: TrainerState = attr.ib(repr=False)


def load_datasets(config: ExperimentConfig) -> Tuple[Dataset, Dataset]:
    """
    The training and evaluation sets, shaped for the configured model.
    """
    data, model = config.data, config.model

    if data.source == SYNTHETIC:
        assert data.n_train is not None and data.n_eval is not None
        total = data.n_train + data.n_eval
        if model.kind == AUTOENCODER:
            if not 0 <= data.rank <= model.feature_size:
                raise ConfigError(
                    f"rank {data.rank} must be between 0 and the input size {model.feature_size}",
                    key="data.rank",
                )
            samples = synth_autoencoder_data(total, model.feature_size, data.rank, data.seed)
        else:
            samples = synth_sequence_data(
                total, model.steps, model.input_size, model.classes, data.seed, data.noise
            )
        return samples.split_at(data.n_train)

    train = load_mnist(data.directory, TRAIN, data.n_train)
    test = load_mnist(data.directory, TEST, data.n_eval)
    if model.kind == AUTOENCODER:
        if model.feature_size != MNIST_SIDE * MNIST_SIDE:
            raise ConfigError(
                f"MNIST images have {MNIST_SIDE * MNIST_SIDE} pixels, "
                f"the model expects {model.feature_size}",
                key="model.sizes",
            )
        return prepare_autoencoder(train), prepare_autoencoder(test)

    if MNIST_SIDE % data.pool:
        raise ConfigError(f"{MNIST_SIDE} is not divisible by {data.pool}", key="data.pool")
    side = MNIST_SIDE // data.pool
    steps, features = sequence_shape(side, side, data.sequence_mode)
    if (model.steps, model.input_size) != (steps, features):
        raise ConfigError(
            f"{data.sequence_mode} sequences of a {side}×{side} image have {steps} steps of "
            f"{features} features, the model expects {model.steps} of {model.input_size}",
            key="model.steps",
        )
    if model.classes < 10:
        raise ConfigError("MNIST has 10 classes", key="model.classes")
    return (
        prepare_sequential(train, data.sequence_mode, data.pool),
        prepare_sequential(test, data.sequence_mode, data.pool),
    )


def _evaluation_batch(dataset: Dataset, limit: Optional[int]) -> Dict[str, np.ndarray]:
    count = len(dataset) if limit is None else min(limit, len(dataset))
    return dataset.feed(np.arange(count))


def _adam_update(
    state: TrainerState, graph: Graph, batch: Dict[str, np.ndarray], config: ExperimentConfig
) -> Tuple[TrainerState, StepReport]:
    assert config.adam is not None
    ctx = EvalContext(graph)
    loss = batch_loss(graph, batch, state.w, ctx)
    g = grad(graph, batch, state.w, ctx)
    ensure_finite("loss and gradient", np.asarray(loss), g, update=state.k, loss=loss)
    report = StepReport(loss=loss, grad_norm=norm(g), cg_iterations=(), q=(), reasons=())
    return adam_step(state, g, config.adam), report


def run_experiment(
    config: ExperimentConfig, output: Optional[Path] = None, progress: bool = False
) -> RunResult:
    """
    Trains as configured and writes one CSV row per evaluation.

    Evaluation uses the Polyak-averaged parameters when averaging is on. Training
    stops after run.max_loops updates, after run.max_epochs epochs, or when the
    evaluation loss has not improved for run.patience evaluations in a row.
    """
    run = config.run
    output = Path(output) if output is not None else run.output
    logger.info(
        "Starting %s: %s on %s, seed %d", run.name, config.optimizer, config.model_preset, run.seed
    )

    graph = build_model(config.model)
    train, test = load_datasets(config)
    logger.info(
        "%d parameters; %d training and %d evaluation samples", graph.size, len(train), len(test)
    )

    init_rng = Rng(run.seed)
    w = initial_parameters(graph, init_rng)
    partition: Optional[BlockPartition] = None
    if config.is_hessian_free:
        partition = partition_preset(config.partition, graph.layout)
        logger.info(
            "Blocks: %s",
            ", ".join(f"{name} ({partition.size(b)})" for b, name in enumerate(partition.names)),
        )
    state = TrainerState.initial(
        w, init_rng.fork(), partition=partition, polyak=run.polyak_decay > 0
    )

    if config.hf is not None:
        curvature_batch = config.hf.curvature_batch
    else:
        curvature_batch = config.gradient_batch
    batches = sample_batches(train, config.gradient_batch, curvature_batch, state.rng)

    train_eval = _evaluation_batch(train, run.eval_limit)
    test_eval = _evaluation_batch(test, run.eval_limit)
    classifier = config.model.is_classifier

    def evaluate(params: ParamVector) -> Tuple[float, float, Optional[float]]:
        train_loss = batch_loss(graph, train_eval, params)
        eval_ctx = EvalContext(graph)
        eval_loss = batch_loss(graph, test_eval, params, eval_ctx)
        accuracy = batch_accuracy(graph, test_eval, params, eval_ctx) if classifier else None
        return train_loss, eval_loss, accuracy

    best = float("inf")
    stale = 0
    stopped_early = False
    started = time.perf_counter()
    blocks = partition.names if partition is not None else []

    with MetricsWriter(output, blocks, classifier) as writer, tqdm(
        total=run.max_loops, disable=not progress, unit="update"
    ) as bar:
        for update in range(1, run.max_loops + 1):
            pair = next(batches)
            if run.max_epochs is not None and pair.epoch >= run.max_epochs:
                logger.info("Finished %d epochs", run.max_epochs)
                break

            gradient_batch = train.feed(pair.gradient)
            if config.optimizer == ADAM:
                state, report = _adam_update(state, graph, gradient_batch, config)
            else:
                assert config.hf is not None and partition is not None
                state, report = block_hf_step(
                    state, graph, partition, gradient_batch, train.feed(pair.curvature), config.hf
                )
            if state.polyak is not None:
                state = attr.evolve(
                    state, polyak=polyak_update(state.polyak, state.w.values, run.polyak_decay)
                )
            bar.update()

            if update % run.eval_every and update != run.max_loops:
                continue

            train_loss, eval_loss, accuracy = evaluate(state.evaluation_parameters)
            row = MetricsRow(
                update=update,
                epoch=pair.epoch,
                wall_clock=time.perf_counter() - started if run.wall_clock else 0.0,
                train_loss=train_loss,
                eval_loss=eval_loss,
                eval_accuracy=accuracy,
                grad_norm=report.grad_norm,
                cg_iterations=report.cg_iterations,
                q=report.q,
            )
            writer.write(row)
            bar.set_postfix(train=f"{train_loss:.4g}", eval=f"{eval_loss:.4g}")
            logger.info(
                "update %d (epoch %d): train %.6g, eval %.6g%s",
                update,
                pair.epoch,
                train_loss,
                eval_loss,
                "" if accuracy is None else f", accuracy {accuracy:.4f}",
            )

            if eval_loss < best:
                best, stale = eval_loss, 0
            else:
                stale += 1
                if run.patience and stale >= run.patience:
                    logger.warning(
                        "Stopping early at update %d: no improvement in %d evaluations",
                        update,
                        stale,
                    )
                    stopped_early = True
                    break

    logger.info("Done: %d updates, %d rows written to %s", state.k, writer.rows_written, output)
    return RunResult(
        output=output,
        updates=state.k,
        rows=writer.rows_written,
        best_eval_loss=best,
        stopped_early=stopped_early,
        state=state,
    )
