#!/usr/bin/env python3
# -*- coding: UTF-8 -*-

"""
manage.py presets
"""

from blockhf.errors import ConfigError
from blockhf.management.base import BlockHFCommand
from blockhf.models.presets import MODEL_PRESETS, build_model
from blockhf.optim.partition import PARTITION_PRESETS, partition_preset


class Command(BlockHFCommand):
    help = "Lists the model and partition presets"

    def handle(self, *args, **options) -> None:
        self.stdout.write("Models:\n")
        graphs = {}
        for name, spec in MODEL_PRESETS.items():
            graph = graphs[name] = build_model(spec)
            self.stdout.write(
                f"    {name:<20} {spec.kind:<14} {graph.size:>10,} parameters\n"
            )

        self.stdout.write("\nPartitions (blocks per model):\n")
        for partition in sorted(PARTITION_PRESETS):
            self.stdout.write(f"    {partition}\n")
            for name, graph in graphs.items():
                try:
                    blocks = partition_preset(partition, graph.layout)
                except ConfigError:
                    continue
                names = ", ".join(blocks.names)
                self.stdout.write(f"        {name:<20} {len(blocks)} blocks: {names}\n")
        self.stdout.write("    balanced-<k>\n        any model: k blocks of roughly equal size\n")
