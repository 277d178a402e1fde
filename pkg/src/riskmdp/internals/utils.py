#!/usr/bin/env python3

import ast
import os
import platform
from pathlib import Path
from typing import Any, Optional, Sequence

import numpy as np
from rich.console import Console

console = Console(color_system="256")

def convert(value: str) -> Optional[Any]:
    """
    Decode an INI value into a Python literal (`1e-09`, `True`, `101`); text
    that is not a literal, such as a log file name, stays a `str`.
    """
    try:
        return ast.literal_eval(value)
    except (SyntaxError, ValueError):
        return value

def get_resource_path(package_name: str) -> Path:
    """
    Per-user directory of `package_name` for the config file and solver logs,
    created on first use.
    """
    match platform.system():
        case "Windows": base = Path(os.path.expandvars("%LOCALAPPDATA%"))
        case "Darwin": base = Path.home() / "Library" / "Application Support"
        case _: base = Path(os.environ.get("XDG_CONFIG_HOME", Path.home() / ".config"))

    folder = base / package_name
    folder.mkdir(parents=True, exist_ok=True)
    return folder

def fmt(value: float, digits: int=9) -> str:
    """
    Format a float for tabular console output with a fixed number of decimals.
    """
    return f"{value:.{digits}f}"

def is_distribution(vector: Sequence[float], atol: float=1e-12) -> bool:
    """
    Check that `vector` is nonnegative and sums to one within `atol`.
    """
    array = np.asarray(vector, dtype=float)
    return bool(array.ndim == 1 and np.all(np.isfinite(array)) and np.all(array >= 0) and abs(array.sum() - 1.0) <= atol)
