"""Flat ``key = value`` run configuration."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from .domains import DEFAULT_RESOLUTION, EXTRA_FIELDS, FUSION_RESOLUTION, FUSION_WINDOW, METRIC_RULES
from .models import FAMILIES, MODEL_FIELDS, ModelSpec

COMMANDS = ("spectrum", "metric", "scan", "boundary", "secular", "critical-beta")

# option keys per command -> kind; model fields are handled separately
_OPTIONS = {
    "spectrum": {},
    "metric": {"construction": "word"},
    "scan": {
        "axis1": "word", "range1": "range", "axis2": "word", "range2": "range",
        "resolution": "int", "resolution1": "int", "resolution2": "int",
        "metric_rule": "word", "weights": "list",
        **{k: "float" for k in EXTRA_FIELDS},
    },
    "boundary": {"field": "word", "z_range": "range", "g_range": "range", "resolution": "int"},
    "secular": {"t_range": "range", "resolution": "int", "beta_env": "float"},
    "critical-beta": {"bracket": "range", "window": "range", "resolution": "int", "tol": "float"},
}
_REQUIRED = {
    "scan": ("axis1", "range1", "axis2", "range2"),
    "boundary": ("z_range", "g_range"),
    "secular": ("t_range",),
    "critical-beta": ("bracket",),
}
_NEEDS_MODEL = ("spectrum", "metric", "scan")
_INT_FIELDS = ("N",)


class ConfigError(Exception):
    def __init__(self, message, line=None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line else message)


@dataclass
class RunConfig:
    command: str
    model: Optional[ModelSpec] = None
    options: dict = field(default_factory=dict)
    output_path: Optional[str] = None

    def get(self, key, default=None):
        return self.options.get(key, default)


def _number(text, line, key):
    try:
        return float(text)
    except ValueError:
        raise ConfigError(f"malformed number {text!r} for {key}", line) from None


def _integer(text, line, key):
    try:
        return int(text)
    except ValueError:
        raise ConfigError(f"malformed integer {text!r} for {key}", line) from None


def _numbers(text, line, key):
    return tuple(_number(part.strip(), line, key) for part in text.split(","))


def _convert(kind, text, line, key):
    if kind == "float":
        return _number(text, line, key)
    if kind == "int":
        return _integer(text, line, key)
    if kind == "list":
        return _numbers(text, line, key)
    if kind == "range":
        values = _numbers(text, line, key)
        if len(values) != 2:
            raise ConfigError(f"{key} needs two comma-separated numbers, got {text!r}", line)
        return values
    return text


def parse_config(text: str) -> RunConfig:
    """Parse and validate a run configuration.

    One ``key = value`` per line; ``#`` starts a comment. Raises
    :class:`ConfigError` carrying the offending line number.
    """
    entries = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        stripped = raw.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise ConfigError(f"expected 'key = value', got {stripped!r}", lineno)
        key, value = (s.strip() for s in stripped.split("=", 1))
        if not key:
            raise ConfigError("empty key", lineno)
        if key in entries:
            raise ConfigError(f"duplicate key {key!r} (first on line {entries[key][1]})", lineno)
        entries[key] = (value, lineno)

    if "command" not in entries:
        raise ConfigError("missing required key 'command'")
    command, cmd_line = entries.pop("command")
    if command not in COMMANDS:
        raise ConfigError(f"unknown command {command!r}; expected one of {', '.join(COMMANDS)}", cmd_line)

    output_path = entries.pop("output", (None, None))[0]
    options_spec = _OPTIONS[command]
    options = {}
    model = None

    family_entry = entries.pop("family", None)
    if command in _NEEDS_MODEL:
        if family_entry is None:
            raise ConfigError(f"command {command!r} needs a 'family' key", cmd_line)
        family, fam_line = family_entry
        if family not in FAMILIES:
            raise ConfigError(f"unknown model family {family!r}; expected one of {', '.join(FAMILIES)}", fam_line)
        model_fields = MODEL_FIELDS[family]
    else:
        if family_entry is not None:
            raise ConfigError(f"command {command!r} takes no model family", family_entry[1])
        family, model_fields = None, {}

    values = {}
    for key, (text, line) in entries.items():
        if key in options_spec:
            options[key] = _convert(options_spec[key], text, line, key)
        elif key in model_fields:
            if key == "G":
                values[key] = _numbers(text, line, key)
            elif key in _INT_FIELDS:
                values[key] = _integer(text, line, key)
            else:
                values[key] = _number(text, line, key)
        else:
            raise ConfigError(f"unknown key {key!r} for command {command!r}", line)

    missing = [k for k in _REQUIRED.get(command, ()) if k not in options]
    if missing:
        raise ConfigError(f"command {command!r} is missing required key(s): {', '.join(missing)}", cmd_line)

    if family is not None:
        model = ModelSpec(family, values)
        axis_names = {options.get("axis1"), options.get("axis2")} if command == "scan" else set()
        still_missing = [k for k in model.missing() if k not in axis_names]
        if family == "nine_level" and "t" in axis_names:
            still_missing = []
        if still_missing:
            raise ConfigError(
                f"{family} model is missing field(s): {', '.join(still_missing)}", family_entry[1]
            )

    if command == "scan":
        rule = options.setdefault("metric_rule", "closed-form")
        if rule not in METRIC_RULES:
            raise ConfigError(f"unknown metric_rule {rule!r}; expected one of {', '.join(METRIC_RULES)}",
                              entries["metric_rule"][1])
        if rule == "fixed-weights" and "weights" not in options:
            raise ConfigError("metric_rule = fixed-weights needs a 'weights' key", entries["metric_rule"][1])
    if command == "metric":
        construction = options.setdefault("construction", "dyadic")
        if construction not in ("dyadic", "nullspace"):
            raise ConfigError(f"unknown construction {construction!r}", entries["construction"][1])
    if command == "boundary":
        name = options.setdefault("field", "G")
        if name not in ("G", "G0"):
            raise ConfigError(f"unknown boundary field {name!r}; expected G or G0", entries["field"][1])
    if command == "critical-beta":
        options.setdefault("window", FUSION_WINDOW)
        options.setdefault("resolution", FUSION_RESOLUTION)
        options.setdefault("tol", 1e-3)
    if command in ("scan", "boundary", "secular"):
        options.setdefault("resolution", DEFAULT_RESOLUTION)
    for key in ("resolution", "resolution1", "resolution2"):
        if key in options and options[key] < 1:
            raise ConfigError(f"{key} must be positive", entries[key][1])
    if command == "secular":
        options.setdefault("beta_env", 1.0)

    return RunConfig(command, model, options, output_path)


def load_config(path) -> RunConfig:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except (OSError, UnicodeDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return parse_config(text)

