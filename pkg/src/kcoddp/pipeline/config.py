"""Key=value configuration files and seed precedence."""

import os
from dataclasses import fields

from ..config import SCALE_NAMES, RunConfig

SEED_ENV = "KCODDP_SEED"

_TUPLE_FIELDS = {"scales", "split_scales", "reg_scales", "move_weights", "bounds"}
_INT_FIELDS = {"seed", "n_iter", "burn_in", "thin", "k_init", "k_max", "n_chains"}
_STR_FIELDS = {"ordering_mode"}


def _parse_value(key, text):
    text = text.strip()
    if key in _TUPLE_FIELDS:
        return tuple(float(v) for v in text.split(","))
    if key in _INT_FIELDS:
        return None if text.lower() == "none" else int(text)
    if key in _STR_FIELDS:
        return text
    return float(text)


def parse_config_text(text, source="<config>"):
    """
    Flat ``key = value`` lines with ``#`` comments. Tuple values are comma
    separated; ``scale.<name>`` sets one entry of ``scales`` and ``init.<name>``
    one starting value.
    """
    known = {f.name for f in fields(RunConfig)} - {"init"}
    out, scales, init = {}, {}, {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"{source}:{lineno}: expected key=value")
        key, value = (p.strip() for p in line.split("=", 1))
        try:
            if key.startswith("scale."):
                name = key[len("scale."):]
                if name not in SCALE_NAMES:
                    raise ValueError(f"unknown scale {name!r}")
                scales[name] = float(value)
            elif key.startswith("init."):
                init[key[len("init."):]] = float(value)
            elif key in known:
                out[key] = _parse_value(key, value)
            else:
                raise ValueError(f"unknown key {key!r}")
        except ValueError as exc:
            raise ValueError(f"{source}:{lineno}: {exc}") from None
    if scales:
        base = list(out.get("scales", RunConfig.scales))
        for name, v in scales.items():
            base[SCALE_NAMES.index(name)] = v
        out["scales"] = tuple(base)
    if init:
        out["init"] = init
    return out


def read_config_file(path):
    with open(path, encoding="utf-8") as fh:
        return parse_config_text(fh.read(), str(path))


def resolve_config(path=None, overrides=None, environ=None):
    """Config file values, then the seed env var, then explicit overrides (highest)."""
    environ = os.environ if environ is None else environ
    values = read_config_file(path) if path else {}
    if environ.get(SEED_ENV, "").strip():
        values["seed"] = int(environ[SEED_ENV])
    values.update({k: v for k, v in (overrides or {}).items() if v is not None})
    return RunConfig(**values)
