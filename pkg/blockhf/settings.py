"""
Process-level settings for blockhf.

Only things that depend on the machine live here (log level, where the MNIST files
are, how many threads to use). Everything that affects the numbers an experiment
produces lives in the experiment config instead; see blockhf.bench.config.
"""

import logging.config
import os
from pathlib import Path
from typing import Optional

from environs import Env

# Load env from .env file
env = Env()
env.read_env()

BASE_PATH = Path(__file__).resolve().parent.parent

########################### ENVIRONMENT VARIABLES ############################

with env.prefixed("BLOCKHF_"):
    # How noisy should the console logs be.
    LOG_LEVEL = env.log_level("LOG_LEVEL", "WARN")

    # Where the MNIST IDX files are found when a config does not say.
    DATA_DIR = env.path("DATA_DIR", os.fspath(BASE_PATH / "run" / "mnist"))

    # Thread-pool size for parallel block solves. Unset: one thread per block.
    WORKERS: Optional[int] = env.int("WORKERS", None)

################################### Django ###################################

# Django only runs manage.py's commands: no database, no URLs, no templates.
INSTALLED_APPS = ["blockhf"]

# Logging is configured by configure_logging() below.
LOGGING_CONFIG = None

################################## Logging ###################################


def configure_logging(level=None) -> None:
    """
    Opinionated logger: the only setting is log level.
    """
    logging.config.dictConfig(
        {
            "version": 1,
            "disable_existing_loggers": False,
            "formatters": {
                "console": {
                    "format": "%(asctime)s %(levelname)-8s %(process)d [%(name)s:%(lineno)s]: %(message)s"
                },
            },
            "handlers": {
                "console": {"class": "logging.StreamHandler", "formatter": "console"},
            },
            "loggers": {
                "blockhf": {"handlers": ["console"], "level": level or LOG_LEVEL},
            },
        }
    )
