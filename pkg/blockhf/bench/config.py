#!/usr/bin/env python3
# -*- coding: UTF-8 -*-

"""
Experiment configs.

-----------------
The config format
-----------------

One `key = value` per line. `#` starts a comment. Keys belong to the section
named by the last `[section]` header, or name their section explicitly with a
dot (`hf.damping = 0.01` works anywhere). For example:

    [model]
    preset = autoencoder-small

    [optimizer]
    kind = block-hf
    partition = autoencoder-2block

    [data]
    source = synthetic
    n_train = 2000
    n_eval = 500

    [run]
    seed = 42

Unknown keys, missing required keys and values of the wrong type are errors,
and the error names the line. There are no implicit random seeds: `run.seed`
is required.
"""

import re
from pathlib import Path
from typing import Any, Callable, Dict, Iterable, Optional, Tuple

import attr

from ..cg import CGConfig, QuadraticProgress, RelativeResidual
from ..data.preprocess import MODES, PIXELS
from ..errors import ConfigError
from ..models.presets import model_preset
from ..models.spec import AUTOENCODER, ModelSpec
from ..optim.adam import AdamConfig
from ..optim.hessian_free import CURVATURES, GGN, HFConfig
from ..optim.partition import BALANCED, PARTITION_PRESETS

# Optimizer kinds
BLOCK_HF = "block-hf"
HF = "hf"
ADAM = "adam"
OPTIMIZERS = (BLOCK_HF, HF, ADAM)

# Data sources
SYNTHETIC = "synthetic"
MNIST = "mnist"
SOURCES = (SYNTHETIC, MNIST)

CG_STOP_CRITERIA = (RelativeResidual.name, QuadraticProgress.name)

REQUIRED = object()


def _boolean(text: str) -> bool:
    lowered = text.lower()
    if lowered in ("true", "yes", "on", "1"):
        return True
    if lowered in ("false", "no", "off", "0"):
        return False
    raise ValueError("expected true or false")


def _integers(text: str) -> Tuple[int, ...]:
    return tuple(int(part) for part in re.split(r"[,\s]+", text.strip()) if part)


def _optional_int(text: str) -> Optional[int]:
    return None if text.lower() == "none" else int(text)


@attr.s(auto_attribs=True, frozen=True)
class Option:
    convert: Callable[[str], Any]
    default: Any = REQUIRED
    choices: Optional[Iterable[str]] = None
    description: str = ""


SCHEMA: Dict[str, Dict[str, Option]] = {
    "model": {
        "preset": Option(str),
        "sizes": Option(_integers, None, description="autoencoder encoder sizes, input first"),
        "layers": Option(int, None),
        "hidden": Option(int, None),
        "input_size": Option(int, None),
        "classes": Option(int, None),
        "steps": Option(int, None),
        "forget_bias": Option(float, None),
    },
    "optimizer": {
        "kind": Option(str, choices=OPTIMIZERS),
        "partition": Option(str, None),
    },
    "hf": {
        "learning_rate": Option(float, 0.1),
        "gradient_batch": Option(int, 512),
        "curvature_batch": Option(int, 64),
        "max_cg_iters": Option(int, 30),
        "cg_stop": Option(str, RelativeResidual.name, choices=CG_STOP_CRITERIA),
        "cg_tol": Option(float, None),
        "damping": Option(float, 0.0),
        "momentum": Option(float, 0.95),
        "curvature": Option(str, GGN, choices=CURVATURES),
        "parallel_blocks": Option(_boolean, False),
        "workers": Option(_optional_int, None),
    },
    "adam": {
        "learning_rate": Option(float, 0.001),
        "beta1": Option(float, 0.9),
        "beta2": Option(float, 0.999),
        "epsilon": Option(float, 1e-8),
        "batch_size": Option(int, 64),
    },
    "data": {
        "source": Option(str, choices=SOURCES),
        "n_train": Option(_optional_int, None),
        "n_eval": Option(_optional_int, None),
        "directory": Option(Path, None),
        "rank": Option(int, 8),
        "noise": Option(float, 0.3),
        "seed": Option(_optional_int, None),
        "sequence_mode": Option(str, PIXELS, choices=MODES),
        "pool": Option(int, 4),
    },
    "run": {
        "seed": Option(int),
        "name": Option(str, "experiment"),
        "max_loops": Option(int, 100),
        "max_epochs": Option(_optional_int, None),
        "eval_every": Option(int, 1),
        "patience": Option(int, 10),
        "polyak_decay": Option(float, 0.0),
        "eval_limit": Option(_optional_int, None),
        "output": Option(Path, Path("metrics.csv")),
        "wall_clock": Option(_boolean, True),
    },
}

SECTION_HEADER = re.compile(r"^\[\s*([A-Za-z_][\w-]*)\s*\]$")
ASSIGNMENT = re.compile(r"^([A-Za-z_][\w.-]*)\s*=\s*(.*)$")


@attr.s(auto_attribs=True, frozen=True)
class DataConfig:
    source: str
    n_train: Optional[int] = None
    n_eval: Optional[int] = None
    directory: Optional[Path] = None
    rank: int = 8
    noise: float = 0.3
    seed: int = 0
    sequence_mode: str = PIXELS
    pool: int = 4


@attr.s(auto_attribs=True, frozen=True)
class RunConfig:
    seed: int
    name: str = "experiment"
    max_loops: int = 100
    max_epochs: Optional[int] = None
    eval_every: int = 1
    patience: int = 10
    polyak_decay: float = 0.0
    eval_limit: Optional[int] = None
    output: Path = Path("metrics.csv")
    wall_clock: bool = True


@attr.s(auto_attribs=True, frozen=True)
class ExperimentConfig:
    model_preset: str
    model: ModelSpec
    optimizer: str
    partition: str
    data: DataConfig
    run: RunConfig
    hf: Optional[HFConfig] = None
    adam: Optional[AdamConfig] = None

    @property
    def is_hessian_free(self) -> bool:
        return self.optimizer in (BLOCK_HF, HF)

    @property
    def gradient_batch(self) -> int:
        if self.hf is not None:
            return self.hf.gradient_batch
        assert self.adam is not None
        return self.adam.batch_size


@attr.s(auto_attribs=True)
class _Entry:
    value: Any
    line: Optional[int]


def read_assignments(text: str) -> Dict[str, Tuple[str, int]]:
    """
    The raw `section.key → (value, line)` assignments in a config text.

    >>> read_assignments("[run]\\nseed = 3  # comment\\nhf.damping=0.5")
    {'run.seed': ('3', 2), 'hf.damping': ('0.5', 3)}
    """
    assignments: Dict[str, Tuple[str, int]] = {}
    section: Optional[str] = None
    for number, raw_line in enumerate(text.splitlines(), start=1):
        line = raw_line.split("#", 1)[0].strip()
        if not line:
            continue

        if header := SECTION_HEADER.match(line):
            section = header.group(1)
            if section not in SCHEMA:
                raise ConfigError(
                    f"unknown section [{section}]; expected one of "
                    f"{', '.join(f'[{name}]' for name in SCHEMA)}",
                    line=number,
                )
            continue

        assignment = ASSIGNMENT.match(line)
        if assignment is None:
            raise ConfigError(f"expected `key = value`, got {raw_line.strip()!r}", line=number)
        key, value = assignment.group(1), assignment.group(2).strip()
        if "." not in key:
            if section is None:
                raise ConfigError("key outside of any section", line=number, key=key)
            key = f"{section}.{key}"

        section_name, _, option = key.partition(".")
        if section_name not in SCHEMA or option not in SCHEMA[section_name]:
            raise ConfigError("unknown key", line=number, key=key)
        if key in assignments:
            raise ConfigError(
                f"already set on line {assignments[key][1]}", line=number, key=key
            )
        assignments[key] = (value, number)
    return assignments


def _convert(assignments: Dict[str, Tuple[str, int]]) -> Dict[str, _Entry]:
    entries: Dict[str, _Entry] = {}
    for section, options in SCHEMA.items():
        for name, option in options.items():
            key = f"{section}.{name}"
            if key not in assignments:
                if option.default is REQUIRED:
                    raise ConfigError("missing required key", key=key)
                entries[key] = _Entry(option.default, None)
                continue

            text, line = assignments[key]
            if option.choices is not None and text not in option.choices:
                raise ConfigError(
                    f"{text!r} is not one of {', '.join(option.choices)}", line=line, key=key
                )
            try:
                value = option.convert(text)
            except ValueError:
                kind = getattr(option.convert, "__name__", "value").lstrip("_")
                raise ConfigError(f"cannot read {text!r} as {kind}", line=line, key=key)
            entries[key] = _Entry(value, line)
    return entries


def _model(entries: Dict[str, _Entry]) -> ModelSpec:
    preset = entries["model.preset"]
    try:
        base = model_preset(preset.value)
    except ConfigError as error:
        raise ConfigError(error.message, line=preset.line, key="model.preset")

    overrides = {
        key.split(".", 1)[1]: entry.value
        for key, entry in entries.items()
        if key.startswith("model.") and key != "model.preset" and entry.value is not None
    }
    try:
        return attr.evolve(base, **overrides)
    except ConfigError as error:
        key = error.key if error.key in entries else "model.preset"
        raise ConfigError(error.message, line=entries[key].line, key=key)


def _partition(entries: Dict[str, _Entry], kind: str, model: ModelSpec) -> str:
    entry = entries["optimizer.partition"]
    if kind == ADAM:
        return "single"
    if kind == HF:
        if entry.value not in (None, "single"):
            raise ConfigError(
                "plain HF always uses the single partition",
                line=entry.line,
                key="optimizer.partition",
            )
        return "single"
    if entry.value is None:
        return "autoencoder-2block" if model.kind == AUTOENCODER else "lstm-3block"
    if entry.value not in PARTITION_PRESETS and not BALANCED.match(entry.value):
        raise ConfigError(
            f"unknown partition {entry.value!r}; choose from "
            f"{', '.join(sorted(PARTITION_PRESETS))} or balanced-<k>",
            line=entry.line,
            key="optimizer.partition",
        )
    return entry.value


def parse_config(text: str) -> ExperimentConfig:
    """
    Parses and validates an experiment config.
    """
    entries = _convert(read_assignments(text))

    def get(key: str) -> Any:
        return entries[key].value

    def fail(key: str, message: str) -> ConfigError:
        return ConfigError(message, line=entries[key].line, key=key)

    def section(name: str) -> Dict[str, Any]:
        prefix = f"{name}."
        return {
            key[len(prefix) :]: entry.value
            for key, entry in entries.items()
            if key.startswith(prefix)
        }

    model = _model(entries)
    kind = get("optimizer.kind")
    partition = _partition(entries, kind, model)

    # [run]
    for key in ("run.max_loops", "run.eval_every"):
        if get(key) < 1:
            raise fail(key, "must be at least 1")
    if get("run.patience") < 0:
        raise fail("run.patience", "must be non-negative")
    if not 0.0 <= get("run.polyak_decay") < 1.0:
        raise fail("run.polyak_decay", "must be in [0, 1); 0 disables averaging")
    run = RunConfig(**section("run"))

    # [data]
    if get("data.source") == SYNTHETIC:
        for key in ("data.n_train", "data.n_eval"):
            if get(key) is None:
                raise fail(key, "required for synthetic data")
    for key in ("data.n_train", "data.n_eval"):
        if get(key) is not None and get(key) < 1:
            raise fail(key, "must be at least 1")
    if get("data.pool") < 1:
        raise fail("data.pool", "must be at least 1")
    if get("data.rank") < 0:
        raise fail("data.rank", "must be non-negative")
    data_options = section("data")
    if data_options["seed"] is None:
        data_options["seed"] = run.seed
    data = DataConfig(**data_options)

    hf: Optional[HFConfig] = None
    adam: Optional[AdamConfig] = None
    if kind == ADAM:
        options = section("adam")
        if data.n_train is not None and options["batch_size"] > data.n_train:
            raise fail("adam.batch_size", f"larger than the {data.n_train} training samples")
        try:
            adam = AdamConfig(max_loops=run.max_loops, **options)
        except ValueError as error:
            raise ConfigError(str(error), key="adam")
    else:
        options = section("hf")
        if options["curvature_batch"] > options["gradient_batch"]:
            raise fail(
                "hf.curvature_batch",
                f"curvature batch ({options['curvature_batch']}) must not exceed "
                f"the gradient batch ({options['gradient_batch']})",
            )
        if data.n_train is not None and options["gradient_batch"] > data.n_train:
            raise fail("hf.gradient_batch", f"larger than the {data.n_train} training samples")
        for key in ("hf.max_cg_iters", "hf.damping"):
            if get(key) < 0:
                raise fail(key, "must be non-negative")
        if options["cg_tol"] is not None and not options["cg_tol"] > 0:
            raise fail("hf.cg_tol", "must be positive")
        if options["workers"] is not None and options["workers"] < 1:
            raise fail("hf.workers", "must be at least 1")

        if options["cg_stop"] == RelativeResidual.name:
            criterion_type = RelativeResidual
        else:
            criterion_type = QuadraticProgress
        tol = {} if options["cg_tol"] is None else {"tol": options["cg_tol"]}
        try:
            hf = HFConfig(
                learning_rate=options["learning_rate"],
                max_loops=run.max_loops,
                gradient_batch=options["gradient_batch"],
                curvature_batch=options["curvature_batch"],
                cg=CGConfig(
                    max_iters=options["max_cg_iters"],
                    stop_criterion=criterion_type(**tol),
                    damping=options["damping"],
                ),
                momentum=options["momentum"],
                parallel_blocks=options["parallel_blocks"],
                curvature=options["curvature"],
                workers=options["workers"],
            )
        except ValueError as error:
            raise ConfigError(str(error), key="hf")

    return ExperimentConfig(
        model_preset=get("model.preset"),
        model=model,
        optimizer=kind,
        partition=partition,
        data=data,
        run=run,
        hf=hf,
        adam=adam,
    )


def load_config(path: Path) -> ExperimentConfig:
    path = Path(path)
    try:
        text = path.read_text(encoding="UTF-8")
    except FileNotFoundError:
        raise ConfigError(f"cannot find config file {path}")
    return parse_config(text)
