#!/usr/bin/env python3
# -*- coding: UTF-8 -*-

"""
manage.py verify
"""

import argparse

from blockhf.bench.verify import ALL, SUITES, format_report, run_suite
from blockhf.errors import VerificationFailure
from blockhf.management.base import BlockHFCommand


class Command(BlockHFCommand):
    help = "Runs the numerical self-checks and reports measured errors"

    def add_arguments(self, parser: argparse.ArgumentParser) -> None:
        parser.formatter_class = argparse.ArgumentDefaultsHelpFormatter
        parser.add_argument(
            "suite",
            nargs="?",
            default=ALL,
            help=f"One of: {', '.join([*SUITES, ALL])}",
        )
        parser.add_argument("--seed", type=int, default=0, help="Seed for random problems")

    def handle(self, *args, **options) -> None:
        checks = run_suite(options["suite"], seed=options["seed"])
        self.stdout.write(format_report(checks) + "\n")
        failed = [check for check in checks if not check.passed]
        if failed:
            raise VerificationFailure(
                f"{len(failed)} of {len(checks)} checks failed: "
                + ", ".join(f"{check.suite}/{check.name}" for check in failed)
            )
