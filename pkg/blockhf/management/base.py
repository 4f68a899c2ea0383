#!/usr/bin/env python3
# -*- coding: UTF-8 -*-

"""
What blockhf's management commands share on top of Django's BaseCommand.

Errors from blockhf become CommandError, whose returncode is the exit status:
0 on success, 1 for invalid input, 2 when training aborts on non-finite values,
3 when a verification check fails.
"""

from typing import Dict, List

from django.core.management.base import BaseCommand, CommandError

from .. import settings
from ..errors import BlockHFError, NumericalError, VerificationFailure

# Exit statuses
SUCCESS = 0
INVALID = 1
NUMERICAL_ABORT = 2
VERIFICATION_FAILED = 3

# Django's --verbosity, as a log level. 1 (the default) keeps BLOCKHF_LOG_LEVEL.
LOG_LEVELS: Dict[int, str] = {0: "ERROR", 2: "INFO", 3: "DEBUG"}


def returncode_for(error: BlockHFError) -> int:
    if isinstance(error, NumericalError):
        return NUMERICAL_ABORT
    if isinstance(error, VerificationFailure):
        return VERIFICATION_FAILED
    return INVALID


class BlockHFCommand(BaseCommand):
    # No models, no database: there is nothing for Django's system checks to do.
    requires_system_checks: List[str] = []

    def execute(self, *args, **options):
        settings.configure_logging(LOG_LEVELS.get(options["verbosity"]))
        try:
            return super().execute(*args, **options)
        except BlockHFError as error:
            raise CommandError(
                f"{type(error).__name__}: {error}", returncode=returncode_for(error)
            ) from error
