#!/usr/bin/env python3
# -*- coding: UTF-8 -*-

"""
manage.py train
"""

import argparse
from pathlib import Path

from django.core.management.base import CommandError

from blockhf.bench.config import load_config
from blockhf.bench.runner import run_experiment
from blockhf.errors import NumericalError
from blockhf.management.base import NUMERICAL_ABORT, BlockHFCommand


class Command(BlockHFCommand):
    help = "Trains a model as an experiment config says and writes metrics as CSV"

    def add_arguments(self, parser: argparse.ArgumentParser) -> None:
        parser.formatter_class = argparse.ArgumentDefaultsHelpFormatter
        parser.add_argument("config", type=Path, help="Experiment config file")
        parser.add_argument(
            "--output",
            type=Path,
            default=None,
            help="Write metrics here instead of the config's run.output",
        )
        parser.add_argument(
            "--progress",
            action="store_true",
            help="Show a progress bar",
        )

    def handle(self, *args, **options) -> None:
        config = load_config(options["config"])
        output = options["output"] or config.run.output
        try:
            result = run_experiment(config, output=output, progress=options["progress"])
        except NumericalError as error:
            raise CommandError(
                f"training aborted: {error}; metrics so far are in {output}",
                returncode=NUMERICAL_ABORT,
            )

        self.stdout.write(
            f"{result.updates} updates, {result.rows} rows written to {result.output}; "
            f"best eval loss {result.best_eval_loss:.6g}"
            f"{' (stopped early)' if result.stopped_early else ''}\n"
        )
