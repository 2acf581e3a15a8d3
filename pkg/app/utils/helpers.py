# app/utils/helpers.py
import math
import os
import sys
import tempfile
from typing import List, Optional

import numpy as np
import pandas as pd

from app.utils.errors import ScenarioError

SPEED_OF_LIGHT_KM_S = 300_000.0


def db_to_linear(value_db: float) -> float:
    return 10.0 ** (value_db / 10.0)


def linear_to_db(value: float) -> float:
    return 10.0 * math.log10(value)


def parse_grid(spec: str, field: str = "grid") -> List[float]:
    """
    Parse a grid flag value.

    - "start:stop:step"  inclusive arithmetic range
    - "a,b,c"            explicit list
    - "x"                single value
    """
    text = spec.strip()
    try:
        if ":" in text:
            parts = [float(p) for p in text.split(":")]
            if len(parts) != 3:
                raise ValueError("expected start:stop:step")
            start, stop, step = parts
            if step <= 0 or stop < start:
                raise ValueError("need step > 0 and stop >= start")
            count = int(math.floor((stop - start) / step + 1e-9)) + 1
            return [float(v) for v in start + step * np.arange(count)]
        return [float(p) for p in text.split(",") if p.strip()]
    except ValueError as exc:
        raise ScenarioError(f"invalid {field} {spec!r}: {exc}") from exc


def write_csv(frame: pd.DataFrame, out_path: Optional[str] = None) -> None:
    """
    Emit a CSV with a header row, '.' decimals and LF line endings.
    With out_path the file is written to a temp file and renamed into place.
    """
    if out_path is None:
        frame.to_csv(sys.stdout, index=False, lineterminator="\n")
        return

    directory = os.path.dirname(os.path.abspath(out_path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp_path = tempfile.mkstemp(prefix=".coxsat-", suffix=".csv", dir=directory)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as handle:
            frame.to_csv(handle, index=False, lineterminator="\n")
        os.replace(tmp_path, out_path)
    except BaseException:
        if os.path.exists(tmp_path):
            os.remove(tmp_path)
        raise
