"""Versioned key-value configuration files for parameter grids.

Example::

    [dbotsw]
    version = 1
    a_values = 4, 8
    nb_values = 4, 8, 12, 16, 20
    k_values = 32, 64, 128, 256, 512, 1024
    C_values = 1, 10, 100
    sigma0 = 1.6
    k_sc = 1.2599210498948732
    tau_step = 10
    n_scales = 9

Every key except ``version`` is optional and falls back to the default grid.
"""
from __future__ import annotations

import configparser
from dataclasses import replace

from .experiment import ParamGrid

__all__ = ["CONFIG_VERSION", "load_grid_config", "parse_grid_config", "format_grid_config"]

CONFIG_VERSION = 1
SECTION = "dbotsw"

_LIST_KEYS = {"a_values": int, "nb_values": int, "k_values": int, "C_values": float}
_SCALE_KEYS = {"sigma0": float, "k_sc": float, "tau_step": int, "n_scales": int}


def parse_grid_config(text: str, base: ParamGrid | None = None) -> ParamGrid:
    parser = configparser.ConfigParser()
    parser.optionxform = str  # keep "C_values" as written
    parser.read_string(text)
    if not parser.has_section(SECTION):
        raise ValueError(f"config must have a [{SECTION}] section")
    sec = parser[SECTION]
    version = sec.get("version")
    if version is None or int(version) != CONFIG_VERSION:
        raise ValueError(f"unsupported config version {version!r} (expected {CONFIG_VERSION})")
    unknown = set(sec) - set(_LIST_KEYS) - set(_SCALE_KEYS) - {"version"}
    if unknown:
        raise ValueError(f"unknown config keys: {sorted(unknown)}")

    grid = base or ParamGrid()
    lists = {key: tuple(cast(v) for v in sec[key].replace(",", " ").split())
             for key, cast in _LIST_KEYS.items() if key in sec}
    scale = {key: cast(sec[key]) for key, cast in _SCALE_KEYS.items() if key in sec}
    return replace(grid, **lists, scale=replace(grid.scale, **scale))


def load_grid_config(path, base: ParamGrid | None = None) -> ParamGrid:
    with open(path, encoding="utf-8") as fh:
        return parse_grid_config(fh.read(), base)


def format_grid_config(grid: ParamGrid) -> str:
    def join(values):
        return ", ".join(f"{v:g}" if isinstance(v, float) else str(v) for v in values)

    lines = [f"[{SECTION}]", f"version = {CONFIG_VERSION}"]
    for key in _LIST_KEYS:
        lines.append(f"{key} = {join(getattr(grid, key))}")
    for key in _SCALE_KEYS:
        lines.append(f"{key} = {getattr(grid.scale, key)!r}")
    return "\n".join(lines) + "\n"
