"""Serialisation helpers: decimal strings and atomic file writes."""
from __future__ import annotations

import json
import math
import os
import tempfile
from fractions import Fraction
from pathlib import Path

import numpy as np
from mpmath import mp, mpf

__all__ = ["digits_for", "dec", "to_jsonable", "dumps", "atomic_write"]


def digits_for(precision: int) -> int:
    """Significant decimal digits carried by ``precision`` mantissa bits."""
    return max(17, int(precision * math.log10(2)))


def dec(x, precision: int = 256) -> str:
    """Decimal string of a number with enough digits to round-trip."""
    if isinstance(x, Fraction):
        if x.denominator == 1:
            return str(x.numerator)
        x = mpf(x.numerator) / x.denominator
    if isinstance(x, (bool, np.bool_)):
        return str(bool(x)).lower()
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    with mp.workprec(precision + 8):
        return mp.nstr(mpf(x), digits_for(precision), strip_zeros=True)


def to_jsonable(obj, precision: int = 256):
    """Recursively turn numbers into decimal strings and arrays into lists."""
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v, precision) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v, precision) for v in obj]
    if isinstance(obj, np.ndarray):
        return [to_jsonable(v, precision) for v in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if obj is None or isinstance(obj, str):
        return obj
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        f = float(obj)
        return repr(f) if math.isfinite(f) else str(f)
    if isinstance(obj, (Fraction, mpf)):
        return dec(obj, precision)
    return str(obj)


def dumps(obj, precision: int = 256) -> str:
    return json.dumps(to_jsonable(obj, precision), indent=2) + "\n"


def atomic_write(path: str | os.PathLike, text: str) -> None:
    """Write ``text`` to a temporary file next to ``path`` and rename it."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
