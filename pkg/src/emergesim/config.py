"""Strict ``section.key = value`` run configuration.

Lines are ``section.key = value``; ``#`` starts a comment; blank lines are
ignored.  Unknown keys, duplicate keys, malformed values and keys for a model
other than ``run.model`` are errors that name the offending key.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, replace
from typing import Any, Callable

from .ants import AntParams
from .engine import BOUNDARIES, TOROIDAL
from .errors import ConfigurationError
from .impact import ImpactParams
from .schelling import FRACTION, NEAREST, RANDOM, THRESHOLD, RuleVariant, SchellingParams

MODELS = ("ant", "schelling", "impact")
OUTPUT_ROOT_ENV = "EMERGESIM_OUTPUT_ROOT"
MAX_SEED = (1 << 64) - 1


@dataclass(frozen=True)
class Key:
    kind: type
    default: Any
    check: Callable[[Any], bool] = lambda v: True
    rule: str = ""
    choices: tuple = ()


def _int(lo, hi=None):
    return Key(int, None, lambda v: v >= lo and (hi is None or v <= hi),
               f">= {lo}" if hi is None else f"in [{lo}, {hi}]")


def _choice(default, *choices):
    return Key(str, default, lambda v: v in choices, "one of " + ", ".join(choices), choices)


def _positive(default):
    return Key(float, default, lambda v: v > 0, "> 0")


def _unit(default, closed_top=True):
    return Key(float, default, (lambda v: 0 <= v <= 1) if closed_top else (lambda v: 0 <= v < 1),
               "in [0, 1]" if closed_top else "in [0, 1)")


def _d(key: Key, default):
    return replace(key, default=default)


RUN_KEYS = {
    "model": _choice(None, *MODELS),
    "seed": _int(0, MAX_SEED),
    "ticks": _d(_int(0), 1000),
    "snapshot_every": _d(_int(1), 100),
    "output_dir": Key(str, "runs", lambda v: bool(v), "non-empty"),
}

_GRID = {
    "width": _d(_int(1), None),
    "height": _d(_int(1), None),
    "boundary": _choice(TOROIDAL, *BOUNDARIES),
}

MODEL_KEYS = {
    "ant": {
        **_GRID,
        "width": _d(_int(1), 50),
        "height": _d(_int(1), 50),
        "n_ants": _d(_int(1), 10),
        "item_types": _d(_int(1, 26), 1),
        "items_per_type": _d(_int(0), 200),
        "k1": _positive(0.1),
        "k2": _positive(0.3),
        "memory": _d(_int(1), 50),
        "entropy_block": _d(_int(1), 10),
    },
    "schelling": {
        **_GRID,
        "width": _d(_int(2), 20),
        "height": _d(_int(2), 20),
        "vacancy_fraction": _unit(0.1, closed_top=False),
        "rule": _choice(THRESHOLD, THRESHOLD, FRACTION),
        "preference": _unit(0.5),
        "relocation": _choice(NEAREST, NEAREST, RANDOM),
        "perturb_fraction": _unit(0.05),
    },
    "impact": {
        **_GRID,
        "width": _d(_int(1), 20),
        "height": _d(_int(1), 20),
        "minority_fraction": Key(float, 0.3, lambda v: 0 <= v <= 0.5, "in [0, 0.5]"),
        "distance_exponent": Key(float, 2.0, lambda v: v >= 0, ">= 0"),
        "p_max": _positive(1.0),
        "s_max": _positive(1.0),
    },
}


@dataclass(frozen=True)
class RunConfig:
    model: str
    seed: int
    ticks: int
    snapshot_every: int
    output_dir: str
    params: tuple  # sorted (key, value) pairs of the model section, defaults filled

    @property
    def section(self) -> dict:
        return dict(self.params)

    def model_params(self):
        return build_params(self.model, self.section)

    def resolved_output_dir(self) -> str:
        root = os.environ.get(OUTPUT_ROOT_ENV)
        if root and not os.path.isabs(self.output_dir):
            return os.path.join(root, self.output_dir)
        return self.output_dir

    def flat(self) -> dict:
        out = {
            "run.model": self.model,
            "run.seed": self.seed,
            "run.ticks": self.ticks,
            "run.snapshot_every": self.snapshot_every,
            "run.output_dir": self.output_dir,
        }
        out.update({f"{self.model}.{k}": v for k, v in self.params})
        return out

    def with_overrides(self, overrides: dict) -> "RunConfig":
        """Copy with ``section.key -> value`` replacements, re-validated."""
        flat = self.flat()
        for key, value in overrides.items():
            flat[key] = value
        return parse_config(format_flat(flat))


def build_params(model: str, section: dict):
    s = dict(section)
    try:
        if model == "ant":
            return AntParams(**s)
        if model == "schelling":
            rule = RuleVariant(s.pop("rule"), s.pop("preference"))
            return SchellingParams(rule=rule, **s)
        return ImpactParams(**s)
    except ConfigurationError:
        raise
    except ValueError as exc:
        raise ConfigurationError(f"{model}: {exc}") from exc


def _convert(name: str, key: Key, raw: str):
    try:
        if key.kind is int:
            value = int(raw, 10)
        elif key.kind is float:
            value = float(raw)
            if value != value or value in (float("inf"), float("-inf")):
                raise ValueError
        else:
            value = raw
    except ValueError:
        raise ConfigurationError(f"{name}: expected {key.kind.__name__}, got {raw!r}") from None
    if not key.check(value):
        raise ConfigurationError(f"{name}: value {raw!r} out of range ({key.rule})")
    return value


def schema_key(name: str) -> Key:
    section, _, key = name.partition(".")
    table = RUN_KEYS if section == "run" else MODEL_KEYS.get(section, {})
    if not key or key not in table:
        raise ConfigurationError(f"unknown key {name!r}")
    return table[key]


def parse_value(name: str, raw: str):
    return _convert(name, schema_key(name), raw.strip())


def parse_config(text: str) -> RunConfig:
    seen: dict[str, Any] = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        name, eq, raw = line.partition("=")
        name = name.strip()
        if not eq:
            raise ConfigurationError(f"line {lineno}: expected 'section.key = value', got {line!r}")
        if name in seen:
            raise ConfigurationError(f"duplicate key {name!r}")
        seen[name] = parse_value(name, raw)

    for required in ("run.model", "run.seed"):
        if required not in seen:
            raise ConfigurationError(f"missing required key {required!r}")
    model = seen["run.model"]
    for name in seen:
        section = name.partition(".")[0]
        if section not in ("run", model):
            raise ConfigurationError(f"key {name!r} does not belong to model {model!r}")

    def get(section, table, key):
        return seen.get(f"{section}.{key}", table[key].default)

    params = tuple(sorted((k, get(model, MODEL_KEYS[model], k)) for k in MODEL_KEYS[model]))
    config = RunConfig(
        model=model,
        seed=seen["run.seed"],
        ticks=get("run", RUN_KEYS, "ticks"),
        snapshot_every=get("run", RUN_KEYS, "snapshot_every"),
        output_dir=get("run", RUN_KEYS, "output_dir"),
        params=params,
    )
    config.model_params()
    return config


def _fmt(value) -> str:
    return repr(value) if isinstance(value, float) else str(value)


def format_flat(flat: dict) -> str:
    return "".join(f"{k} = {_fmt(v)}\n" for k, v in flat.items())


def format_config(config: RunConfig) -> str:
    """Serialize with every default spelled out; ``parse_config`` inverts it."""
    return format_flat(config.flat())
