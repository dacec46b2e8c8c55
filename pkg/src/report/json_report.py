#!/usr/bin/env python3
"""
Render run results as deterministic JSON.

Every CLI command emits one top-level object:
{
  "command": "cluster",
  "config": { ...resolved RunConfig, defaults included... },
  "result": { ...command-specific payload... }
}
Keys keep insertion order, floats use the shortest round-trip repr, non-finite floats
become null, numpy scalars and arrays become plain numbers and lists.
"""

import json
import math
import sys
from dataclasses import fields, is_dataclass
from enum import Enum
from pathlib import Path
from typing import Any, Optional

import numpy as np
from pydantic import BaseModel


def to_jsonable(value: Any) -> Any:
    if isinstance(value, BaseModel):
        return to_jsonable(value.model_dump())
    if is_dataclass(value) and not isinstance(value, type):
        return to_jsonable({f.name: getattr(value, f.name) for f in fields(value)})
    if isinstance(value, Enum):
        return value.value
    if isinstance(value, dict):
        return {str(k): to_jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return to_jsonable(value.tolist())
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        x = float(value)
        return x if math.isfinite(x) else None
    if isinstance(value, Path):
        return str(value)
    return value


def render(payload: Any) -> str:
    return json.dumps(to_jsonable(payload), indent=2, ensure_ascii=False, allow_nan=False) + "\n"


def write_report(payload: Any, output: Optional[Path] = None) -> str:
    """Write the rendered payload to `output`, or stdout when no path is given."""
    text = render(payload)
    if output is None:
        sys.stdout.write(text)
        sys.stdout.flush()
    else:
        Path(output).write_text(text, encoding="utf-8")
    return text
