"""
The command-line interface: `manage.py <subcommand>`, run through Django's
management framework with blockhf.settings as the settings module.
"""

import os
import sys


def main() -> None:
    os.environ.setdefault("DJANGO_SETTINGS_MODULE", "blockhf.settings")
    from django.core.management import execute_from_command_line

    execute_from_command_line(sys.argv)
